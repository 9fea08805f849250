#include <gtest/gtest.h>

#include <random>

#include "sandbox/core/persona_json.hpp"
#include "sandbox/core/text.hpp"
#include "sandbox/pipeline/pipeline.hpp"
#include "sandbox/pipeline/responses.hpp"
#include "sandbox/pipeline/scripted_provider.hpp"
#include "sandbox/pipeline/user_agents.hpp"
#include "sandbox/providers/sha256.hpp"
#include "support.hpp"

using namespace sandbox;
using Responses = std::map<std::string, std::deque<std::string>>;

namespace {

Responses carlos_script() {
  return ScriptedTextProvider::responses_from_json(
      Json::parse(sbxtest::read_file(sbxtest::fixture_path("carlos/script.json"))));
}

std::string words(int n) {
  std::string out;
  for (int i = 0; i < n; ++i) out += (i ? " w" : "w") + std::to_string(i);
  return out;
}

struct Harness {
  explicit Harness(Responses responses)
      : provider(TemplateSet::builtin(), std::move(responses)),
        geocoder(sbxtest::fixture_path("geocode.json")),
        pipeline(provider, geocoder, TemplateSet::builtin()) {}

  ScriptedTextProvider provider;
  FixtureGeocoder geocoder;
  GenerationPipeline pipeline;
};

const std::string kCarlosDescription =
    "Carlos Rodriguez is a 30-year-old Hispanic male living at 1457 W Pico Blvd, Los Angeles, CA 90015.";

}  // namespace

TEST(Templates, GoldenRenderings) {
  auto slots = Json::parse(sbxtest::read_file(sbxtest::source_dir() / "tests/golden/slots.json"));
  for (std::string version : {"v1", "baseline"}) {
    auto set = TemplateSet::builtin(version);
    for (auto name : kTemplateNames) {
      const auto& t = set.get(name);
      std::map<std::string, std::string> values;
      for (const auto& slot : t.slots()) {
        if (slot != "examples") values[slot] = slots.at(slot).get<std::string>();
      }
      auto expected =
          sbxtest::read_file(sbxtest::source_dir() / "tests/golden" / version / (std::string(name) + ".txt"));
      EXPECT_EQ(t.render(values), expected) << version << "/" << name;
    }
  }
}

TEST(Templates, BuiltinMatchesDirectory) {
  auto builtin = TemplateSet::builtin("v1");
  auto loaded = TemplateSet::load(sbxtest::source_dir() / "templates/v1", "v1");
  for (auto name : kTemplateNames) {
    EXPECT_EQ(builtin.get(name).body, loaded.get(name).body) << name;
    EXPECT_EQ(builtin.get(name).few_shot_examples, loaded.get(name).few_shot_examples) << name;
  }
  EXPECT_EQ(builtin.get("schedule").few_shot_examples.size(), 1u);
  EXPECT_THROW(TemplateSet::builtin("v9"), Error);
}

TEST(Templates, RenderRejectsUnknownAndMissingSlots) {
  const auto& t = TemplateSet::builtin().get("portrait_prompt");
  EXPECT_THROW(t.render({}), Error);
  EXPECT_THROW(t.render({{"description", "x"}, {"nope", "y"}}), Error);
  EXPECT_NE(t.render({{"description", "x"}}).find("x"), std::string::npos);
}

TEST(Templates, ClassifyFindsSourceTemplate) {
  auto set = TemplateSet::builtin();
  auto slots = Json::parse(sbxtest::read_file(sbxtest::source_dir() / "tests/golden/slots.json"));
  for (auto name : kTemplateNames) {
    const auto& t = set.get(name);
    std::map<std::string, std::string> values;
    for (const auto& slot : t.slots()) {
      if (slot != "examples") values[slot] = slots.at(slot).get<std::string>();
    }
    EXPECT_EQ(classify_prompt(set, t.render(values)), std::string(name));
    EXPECT_EQ(classify_prompt(set, t.render(values) + "\n\nYour previous answer was rejected"), std::string(name));
  }
  EXPECT_FALSE(classify_prompt(set, "say OK"));
}

TEST(Responses, DeviceFromProse) {
  auto d = parse_device_response("Chrome on a Windows laptop");
  EXPECT_EQ(d.device_name, "Windows laptop");
  EXPECT_EQ(d.browser_name, "Chrome");
  EXPECT_EQ(d.user_agent, compose_user_agent("Chrome", "Windows laptop"));
}

TEST(Responses, DeviceExplicitUserAgentKept) {
  const std::string ua =
      "Mozilla/5.0 (iPhone; CPU iPhone OS 16_5 like Mac OS X) AppleWebKit/605.1.15 (KHTML, like Gecko) "
      "Version/16.5 Mobile/15E148 Safari/604.1";
  auto d = parse_device_response("Device: iPhone 14\nBrowser: Safari\nUser agent: " + ua);
  EXPECT_EQ(d.device_name, "iPhone 14");
  EXPECT_EQ(d.user_agent, ua);
  auto j = parse_device_response(R"({"device": "Pixel 7", "browser": "Chrome"})");
  EXPECT_NE(j.user_agent.find("Android"), std::string::npos);
  EXPECT_THROW(parse_device_response("no idea"), Error);
}

TEST(Responses, ScheduleShapes) {
  auto a = parse_schedule_response(R"([["2023-06-05 00:00:00", "2023-06-05 23:59:59", "Home - 1 A St, X, CA"]])");
  auto b = parse_schedule_response(
      R"({"location_history": [{"start time": "2023-06-05 00:00:00", "end time": "2023-06-05 23:59:59", "event": "Home - 1 A St, X, CA"}]})");
  auto c = parse_schedule_response(
      R"([["2023-06-05 00:00:00", "2023-06-05 23:59:59", "Home", "1 A St, X, CA"]])");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_EQ(a[0].event_label, "Home");
  EXPECT_THROW(parse_schedule_response(R"([["2023-06-05", "x"]])"), Error);
}

TEST(Responses, PostsShapes) {
  auto p = parse_posts_response(
      R"([['2023-06-06 19:01:02', 'Feeling the burn', 'Gym - 1234 Whittier Blvd, Los Angeles, CA 90022'], ['2023-06-06 07:31:42', 'Coffee', 'Starbucks - 5353 E Olympic Blvd, Los Angeles, CA 90022']])");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].content, "Coffee");
  EXPECT_THROW(parse_posts_response(R"([{"time": "2023-06-06 07:31:42", "address": "x", "content": ""}])"), Error);
}

TEST(Pipeline, DescriptionSingleParagraph) {
  Harness h({{"description", {"First.\n\nSecond.", "First.\n\nSecond.", "First.\n\nSecond."}}});
  try {
    h.pipeline.generate_description(sbxtest::carlos_guidance());
    FAIL() << "expected GenerationFailed";
  } catch (const StageError& e) {
    EXPECT_EQ(e.code(), ErrorCode::GenerationFailed);
    EXPECT_EQ(e.report().attempts, 3);
    EXPECT_EQ(e.report().raw_responses.size(), 3u);
  }

  Harness ok({{"description", {"First.\n\nSecond.", "  One paragraph.  "}}});
  auto r = ok.pipeline.generate_description(sbxtest::carlos_guidance());
  EXPECT_EQ(r.value, "One paragraph.");
  EXPECT_EQ(r.report.attempts, 2);
  EXPECT_EQ(r.report.violations_fixed, std::vector<std::string>{"MultiParagraph"});
}

TEST(Pipeline, RepromptCarriesRejectionReasons) {
  std::vector<std::string> prompts;
  int n = 0;
  CallbackTextProvider provider([&](const TextGenerationRequest& req) {
    prompts.push_back(req.prompt);
    return ++n == 1 ? std::string("a\n\nb") : std::string("fine");
  });
  sbxtest::ConstantGeocoder geo({0, 0});
  GenerationPipeline pipeline(provider, geo, TemplateSet::builtin());
  pipeline.generate_description(sbxtest::carlos_guidance());
  ASSERT_EQ(prompts.size(), 2u);
  EXPECT_TRUE(prompts[1].starts_with(prompts[0]));
  EXPECT_NE(prompts[1].find("MultiParagraph"), std::string::npos);
}

TEST(Pipeline, AttributesAbigail) {
  Harness h({{"attributes", {sbxtest::read_file(sbxtest::fixture_path("abigail/attributes_response.txt"))}}});
  auto r = h.pipeline.parse_attributes("Abigail Patel is a 32-year-old Asian American female.");
  EXPECT_EQ(r.value, sbxtest::abigail_attributes());
  EXPECT_EQ(r.report.attempts, 1);
}

TEST(Pipeline, AttributesMissingKeyFailsAsParseError) {
  Json j = attributes_to_json(sbxtest::abigail_attributes());
  j.erase("job");
  Harness h({{"attributes", {j.dump(), j.dump(), j.dump()}}});
  try {
    h.pipeline.parse_attributes(kCarlosDescription);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseFailed);
  }
}

TEST(Pipeline, AttributesInvariantRetried) {
  Json bad = attributes_to_json(sbxtest::abigail_attributes());
  bad["age"] = "90";
  Json good = attributes_to_json(sbxtest::abigail_attributes());
  good["favorite color"] = "green";
  Harness h({{"attributes", {bad.dump(), good.dump()}}});
  auto r = h.pipeline.parse_attributes(kCarlosDescription);
  EXPECT_EQ(r.value, sbxtest::abigail_attributes());
  EXPECT_EQ(r.report.violations_fixed, (std::vector<std::string>{"AgeOutOfRange", "BirthdayAgeMismatch"}));
}

TEST(Pipeline, ImagePromptWordLimit) {
  Harness h({{"portrait_prompt", {words(12)}}, {"post_image", {words(10)}}});
  EXPECT_EQ(h.pipeline.build_portrait_prompt(kCarlosDescription).value, words(12));
  EXPECT_EQ(h.pipeline.build_post_image_prompt("Dodgers tonight").value, words(10));

  Harness over({{"portrait_prompt", {words(45), words(45), words(45)}}, {"post_image", {words(40), words(40), words(40)}}});
  auto portrait = over.pipeline.build_portrait_prompt(kCarlosDescription);
  EXPECT_EQ(portrait.value, first_words(words(45), 30));
  EXPECT_EQ(word_count(portrait.value), 30u);
  EXPECT_EQ(portrait.report.attempts, 3);
  EXPECT_EQ(portrait.report.violations_fixed.back(), "WordLimitTruncated");
  EXPECT_EQ(word_count(over.pipeline.build_post_image_prompt("Dodgers tonight").value), 30u);
}

TEST(Pipeline, DeviceFromScript) {
  Harness h(Responses{{"device", {"Chrome on a Windows laptop"}}});
  auto d = h.pipeline.infer_device(kCarlosDescription).value;
  EXPECT_EQ(d.browser_name, "Chrome");
  EXPECT_EQ(d.device_name, "Windows laptop");
}

TEST(Pipeline, ScheduleGapRetried) {
  auto script = carlos_script();
  auto good = script["schedule"].front();
  auto bad = Json::parse(good);
  // Open a hole between the coffee and office slots on the first day.
  bad["location_history"][3]["start time"] = "2023-06-05 09:30:00";
  Harness h({{"schedule", {bad.dump(), good}}});
  auto range = sbxtest::carlos_guidance().date_range;
  auto r = h.pipeline.generate_schedule(kCarlosDescription, range);
  EXPECT_EQ(r.report.attempts, 2);
  EXPECT_EQ(r.report.violations_fixed, std::vector<std::string>{"ScheduleGap"});
  EXPECT_TRUE(sbxtest::coverage_exact(r.value));
  EXPECT_EQ(range.days(), 7);
  std::set<std::string> days;
  for (const auto& e : r.value) days.insert(format_date(date_of(e.start_time)));
  EXPECT_EQ(days.size(), 7u);
}

TEST(Pipeline, BrowsingNightEntryRetried) {
  auto script = carlos_script();
  auto schedule = parse_schedule_response(script["schedule"].front());
  auto good = script["browsing"].front();
  auto bad = Json::parse(good);
  bad[0][0] = "2023-06-05 03:12:05";
  Harness h({{"browsing", {bad.dump(), good}}});
  auto range = sbxtest::carlos_guidance().date_range;
  auto r = h.pipeline.generate_browsing(kCarlosDescription, schedule, 5, range);
  EXPECT_EQ(r.report.violations_fixed, std::vector<std::string>{"NightBrowsing"});
  EXPECT_EQ(r.value.size(), 35u);
  EXPECT_TRUE(validate_browsing(r.value, schedule, range).empty());
}

TEST(Pipeline, BrowsingCountChecked) {
  auto script = carlos_script();
  auto schedule = parse_schedule_response(script["schedule"].front());
  auto entries = Json::parse(script["browsing"].front());
  Json one_day = Json::array();
  for (const auto& e : entries) {
    if (e[0].get<std::string>().starts_with("2023-06-05")) one_day.push_back(e);
  }
  Harness h({{"browsing", {one_day.dump(), one_day.dump(), one_day.dump()}}});
  DateRange two_days{std::chrono::year{2023} / 6 / 5, std::chrono::year{2023} / 6 / 6};
  try {
    h.pipeline.generate_browsing(kCarlosDescription, schedule, 5, two_days);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.code(), ErrorCode::GenerationFailed);
    EXPECT_EQ(e.report().violations_fixed.front(), "BrowsingCount");
  }
}

TEST(Pipeline, PostsCountAndLocation) {
  auto script = carlos_script();
  auto schedule = parse_schedule_response(script["schedule"].front());
  auto posts = Json::parse(script["posts"].front());
  posts.erase(posts.size() - 1);
  auto moved = posts;
  moved[0]["time"] = "2023-06-05 03:10:11";  // at home, not at the coffee shop
  Responses responses = {{"posts", {moved.dump(), posts.dump()}}, {"post_image", script["post_image"]}};
  Harness h(responses);
  auto range = sbxtest::carlos_guidance().date_range;
  PostContext ctx{"America/Los_Angeles", "en-US", "Los Angeles, CA"};
  auto r = h.pipeline.generate_posts(kCarlosDescription, schedule, 5, range, ctx);
  ASSERT_EQ(r.value.size(), 5u);
  EXPECT_EQ(r.report.violations_fixed, std::vector<std::string>{"PostLocationMismatch"});
  for (const auto& p : r.value) {
    EXPECT_LE(word_count(p.content), 140u);
    EXPECT_EQ(static_cast<int>(p.images.size()), image_count_for(p.posted_at, p.content));
    EXPECT_EQ(p.timezone, "America/Los_Angeles");
    EXPECT_NE(p.latitude, 0.0);
  }
  EXPECT_TRUE(sbxtest::posts_oracle(r.value, schedule).empty());
}

TEST(Pipeline, PostGeocodeFallsBackToLocality) {
  auto script = carlos_script();
  auto schedule = parse_schedule_response(script["schedule"].front());
  FixtureGeocoder geo(std::map<std::string, GeoPoint>{{"Los Angeles, CA", {34.05, -118.24}}});
  ScriptedTextProvider provider(TemplateSet::builtin(),
                                {{"posts", {script["posts"].front()}}, {"post_image", script["post_image"]}});
  GenerationPipeline pipeline(provider, geo, TemplateSet::builtin());
  PostContext ctx{"America/Los_Angeles", "en-US", "Los Angeles, CA"};
  auto r = pipeline.generate_posts(kCarlosDescription, schedule, 6, sbxtest::carlos_guidance().date_range, ctx);
  for (const auto& p : r.value) EXPECT_EQ(p.latitude, 34.05);
}

TEST(Pipeline, ImageCountDigest) {
  auto t = sbxtest::local(2023, 6, 8, 12, 25, 37);
  std::string content = "Quick lunch";
  auto digest = sha256_hex(format_datetime(t) + "\n" + content);
  int expected = std::stoi(digest.substr(0, 2), nullptr, 16) % 3;
  EXPECT_EQ(image_count_for(t, content), expected);
}

TEST(Pipeline, PersonaIdIsStable) {
  auto g = sbxtest::carlos_guidance();
  auto a = derive_persona_id(g, "2023-06-01T00:00:00Z");
  EXPECT_EQ(a, derive_persona_id(g, "2023-06-01T00:00:00Z"));
  EXPECT_NE(a, derive_persona_id(g, "2023-06-01T00:00:01Z"));
  EXPECT_EQ(a.size(), 18u);
  EXPECT_TRUE(a.starts_with("p-"));
}

TEST(Pipeline, ReplayRunMatchesFixture) {
  ReplayTextProvider provider(sbxtest::fixture_path("text"));
  FixtureGeocoder geo(sbxtest::fixture_path("geocode.json"));
  GenerationPipeline pipeline(provider, geo, TemplateSet::builtin());
  auto outcome = pipeline.run_full_pipeline(sbxtest::carlos_guidance(), {"", "2023-06-01T00:00:00Z"});
  ASSERT_TRUE(outcome.ok()) << outcome.failure->message;
  EXPECT_EQ(export_persona(outcome.persona), sbxtest::read_file(sbxtest::fixture_path("carlos/expected_persona.json")));
  EXPECT_EQ(outcome.reports.size(), 7u);
  const auto& a = *outcome.persona.attributes;
  EXPECT_EQ(a.job, "financial analyst");
  EXPECT_EQ(a.income, 75000);
  EXPECT_EQ(a.city, "Los Angeles");
  EXPECT_LE(word_count(outcome.persona.portrait_prompt), 30u);
  EXPECT_FALSE(has_paragraph_break(outcome.persona.description));
  EXPECT_FALSE(has_hard_violation(validate_persona(outcome.persona)));
}

TEST(Pipeline, MissingFixtureStopsRun) {
  Harness h({{"description", {kCarlosDescription}}});
  auto outcome = h.pipeline.run_full_pipeline(sbxtest::carlos_guidance(), {"p-x", "2023-06-01T00:00:00Z"});
  ASSERT_FALSE(outcome.ok());
  EXPECT_EQ(outcome.failure->stage, Stage::Attributes);
  EXPECT_EQ(outcome.failure->code, ErrorCode::FixtureMissing);
  EXPECT_EQ(outcome.persona.description, kCarlosDescription);
  EXPECT_FALSE(outcome.persona.attributes);
}

TEST(Pipeline, ZeroDayRangeRejected) {
  Harness h({});
  auto g = sbxtest::carlos_guidance();
  g.date_range.end = std::chrono::year{2023} / 6 / 4;
  EXPECT_THROW(h.pipeline.run_full_pipeline(g, {}), Error);
}

TEST(Pipeline, RunStageNeedsEarlierStages) {
  Harness h({});
  PersonaProfile p;
  p.guidance = sbxtest::carlos_guidance();
  p.description = kCarlosDescription;
  try {
    h.pipeline.run_stage(p, Stage::Schedule);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StageOrderViolated);
  }
}

namespace {

// Six posts placed mid-event, one response per schedule candidate, so the
// posts attempt that follows an accepted schedule can match it.
std::string posts_for(const std::vector<ScheduleEvent>& events) {
  Json posts = Json::array();
  for (const auto& e : events) {
    if (posts.size() == 6) break;
    if (e.end_time - e.start_time < std::chrono::seconds{10}) continue;
    auto t = e.start_time + (e.end_time - e.start_time) / 2;
    if (time_of_day(t).count() % 60 == 0) t += std::chrono::seconds{1};
    posts.push_back({{"time", format_datetime(t)}, {"address", join_event_location(e)}, {"content", "Out and about."}});
  }
  return posts.dump();
}

}  // namespace

// Whatever the provider says, a persona the pipeline accepts carries no
// hard violations.
TEST(Pipeline, AcceptedPersonasAreClean) {
  std::mt19937_64 rng(404);
  auto base = carlos_script();
  int accepted = 0;
  for (int i = 0; i < 40; ++i) {
    Responses r = base;
    r["schedule"].clear();
    r["browsing"].clear();
    r["posts"].clear();
    r["post_image"].assign(20, "A sunny street corner");
    for (int k = 0; k < 3; ++k) {
      Json sched = Json::array();
      auto events = (rng() % 3 == 0) ? sbxtest::fuzz_schedule(rng) : sbxtest::clean_schedule(rng, 7);
      for (const auto& e : events) {
        sched.push_back({format_datetime(e.start_time), format_datetime(e.end_time), join_event_location(e)});
      }
      r["schedule"].push_back(sched.dump());
      r["posts"].push_back(posts_for(events));
      Json browse = Json::array();
      auto entries = (rng() % 3 == 0) ? sbxtest::fuzz_browsing(rng) : sbxtest::clean_browsing(rng, 7, 5);
      for (const auto& e : entries) browse.push_back({format_datetime(e.visited_at), e.title, e.url});
      r["browsing"].push_back(browse.dump());
    }
    Harness h(r);
    auto outcome = h.pipeline.run_full_pipeline(sbxtest::carlos_guidance(), {"p-fuzz", "2023-06-01T00:00:00Z"});
    if (outcome.ok()) {
      ++accepted;
      auto v = validate_persona(outcome.persona);
      EXPECT_FALSE(has_hard_violation(v)) << format_violation_report(v);
    }
  }
  EXPECT_GT(accepted, 0);
}
