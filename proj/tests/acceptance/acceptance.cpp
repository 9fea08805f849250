// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.
// Everything runs offline: replay fixtures, scripted driver, stub VPN.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <random>
#include <sqlite3.h>
#include <spdlog/spdlog.h>
#include <sstream>

#include "sandbox/core/persona_json.hpp"
#include "sandbox/core/timezone.hpp"
#include "sandbox/metrics/overlap.hpp"
#include "sandbox/pipeline/pipeline.hpp"
#include "sandbox/pipeline/scripted_provider.hpp"
#include "sandbox/replace/history_db.hpp"
#include "sandbox/validate/validator.hpp"
#include "service_harness.hpp"

using namespace sandbox;
using namespace std::chrono;
using sbxtest::local;

namespace {

// Pinned limits.
constexpr double kOverlapBudgetSeconds = 1.0;
constexpr int kValidatorCases = 1000;
constexpr int kPipelineTrials = 60;
constexpr int kHistorySets = 500;
constexpr int kWebkitInstants = 10000;
constexpr int kVpnCases = 1000;
constexpr int kConcurrentActivations = 4;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

Outcome overlap_table() {
  Outcome out;
  auto started = steady_clock::now();
  struct Row {
    const char* site;
    int duplicated, total;
    const char* rate;
  };
  const Row rows[] = {{"weather.com", 22, 47, "46.81"},
                      {"cnn.com", 9, 60, "15.00"},
                      {"researchgate.net", 8, 25, "32.00"},
                      {"usnews.com", 8, 21, "38.10"},
                      {"fashionista.com", 16, 36, "44.44"}};
  std::vector<AdObservation> constructed;
  for (const auto& r : rows) {
    for (int i = 0; i < r.total; ++i) {
      std::string ad = std::string(r.site) + " ad " + std::to_string(i);
      constructed.push_back(make_observation(r.site, "persona-1", ad, ""));
      if (i < r.duplicated) constructed.push_back(make_observation(r.site, "persona-2", ad, ""));
    }
  }
  std::ifstream in(sbxtest::fixture_path("observations.jsonl"));
  auto recorded = read_observations_jsonl(in);
  for (const auto* obs : {&constructed, &recorded}) {
    auto report = build_report(*obs);
    out.check(report.rows.size() == 5, "expected five sites");
    for (const auto& r : rows) {
      auto it = std::find_if(report.rows.begin(), report.rows.end(), [&](const OverlapRow& x) { return x.site == r.site; });
      out.check(it != report.rows.end(), std::string("missing ") + r.site);
      if (it == report.rows.end()) continue;
      out.check(it->duplicated_ads == r.duplicated && it->total_ads == r.total, std::string("counts for ") + r.site);
      out.check(it->rate_text() == r.rate, std::string(r.site) + " rate " + it->rate_text() + " != " + r.rate);
      out.check(render_report_table(report).find(std::string(r.rate) + "%") != std::string::npos, "table rendering");
    }
  }
  double elapsed = duration<double>(steady_clock::now() - started).count();
  out.check(elapsed < kOverlapBudgetSeconds, "took " + fmt_double(elapsed) + " s");
  if (out.pass) out.detail = "5 rows exact, " + fmt_double(elapsed) + " s";
  return out;
}

Outcome pipeline_determinism() {
  Outcome out;
  std::string exports[2];
  for (auto& e : exports) {
    ReplayTextProvider provider(sbxtest::fixture_path("text"));
    FixtureGeocoder geo(sbxtest::fixture_path("geocode.json"));
    GenerationPipeline pipeline(provider, geo, TemplateSet::builtin());
    auto outcome = pipeline.run_full_pipeline(sbxtest::carlos_guidance(), {"", "2023-06-01T00:00:00Z"});
    out.check(outcome.ok(), "replay run failed");
    e = export_persona(outcome.persona);
  }
  out.check(exports[0] == exports[1], "replay exports differ");
  out.check(exports[0] == sbxtest::read_file(sbxtest::fixture_path("carlos/expected_persona.json")),
            "export differs from the checked-in persona");

  auto text = sbxtest::read_file(sbxtest::fixture_path("abigail/attributes_response.txt"));
  auto json = Json::parse(text);
  out.check(json.size() == 17, "Abigail fixture does not have 17 keys");
  auto parsed = attributes_from_json(json);
  out.check(parsed.attributes == sbxtest::abigail_attributes(), "Abigail record differs");
  out.check(parsed.attributes.income == 85000 && parsed.attributes.zip_code == "07102", "income or zip");
  if (out.pass) out.detail = "2 replay runs byte-identical (" + std::to_string(exports[0].size()) + " bytes), Abigail 17 keys";
  return out;
}

// Six posts placed mid-event so a posts attempt can match whichever
// schedule candidate was accepted.
std::string posts_for(const std::vector<ScheduleEvent>& events) {
  Json posts = Json::array();
  for (const auto& e : events) {
    if (posts.size() == 6) break;
    if (e.end_time - e.start_time < seconds{10}) continue;
    auto t = e.start_time + (e.end_time - e.start_time) / 2;
    if (time_of_day(t).count() % 60 == 0) t += seconds{1};
    posts.push_back({{"time", format_datetime(t)}, {"address", join_event_location(e)}, {"content", "Out and about."}});
  }
  return posts.dump();
}

Outcome validator_properties() {
  Outcome out;
  std::mt19937_64 rng(20230605);
  const DateRange range{year{2023} / 6 / 5, year{2023} / 6 / 7};
  for (int i = 0; i < kValidatorCases && out.pass; ++i) {
    auto events = sbxtest::fuzz_schedule(rng);
    out.check(sbxtest::findings_of(validate_schedule(events)) == sbxtest::schedule_oracle(events),
              "schedule case " + std::to_string(i));
    auto entries = sbxtest::fuzz_browsing(rng);
    out.check(sbxtest::findings_of(validate_browsing(entries, {}, range)) ==
                  sbxtest::browsing_oracle(entries, "2023-06-05", "2023-06-07"),
              "browsing case " + std::to_string(i));
    auto schedule = sbxtest::clean_schedule(rng, 2);
    auto posts = sbxtest::fuzz_posts(rng, schedule);
    out.check(sbxtest::findings_of(validate_posts(posts, schedule)) == sbxtest::posts_oracle(posts, schedule),
              "posts case " + std::to_string(i));
  }

  auto browse_codes = [](LocalDateTime t) {
    std::vector<ViolationCode> c;
    for (const auto& v : validate_browsing(std::vector<BrowsingEntry>{{t, "T", "https://a.example/"}}, {}, std::nullopt)) {
      c.push_back(v.code);
    }
    return c;
  };
  out.check(browse_codes(local(2023, 6, 5, 6, 59, 59)) == std::vector{ViolationCode::NightBrowsing}, "06:59:59");
  out.check(browse_codes(local(2023, 6, 5, 7, 0, 0)) == std::vector{ViolationCode::ZeroSeconds}, "07:00:00");
  out.check(browse_codes(local(2023, 6, 5, 7, 0, 1)).empty(), "07:00:01");
  out.check(browse_codes(local(2023, 6, 5, 23, 59, 59)).empty(), "23:59:59");

  auto base = ScriptedTextProvider::responses_from_json(
      Json::parse(sbxtest::read_file(sbxtest::fixture_path("carlos/script.json"))));
  FixtureGeocoder geo(sbxtest::fixture_path("geocode.json"));
  int accepted = 0;
  for (int i = 0; i < kPipelineTrials && out.pass; ++i) {
    auto r = base;
    r["schedule"].clear();
    r["browsing"].clear();
    r["posts"].clear();
    r["post_image"].assign(20, "A sunny street corner");
    for (int k = 0; k < 3; ++k) {
      auto events = rng() % 3 == 0 ? sbxtest::fuzz_schedule(rng) : sbxtest::clean_schedule(rng, 7);
      Json sched = Json::array();
      for (const auto& e : events) {
        sched.push_back({format_datetime(e.start_time), format_datetime(e.end_time), join_event_location(e)});
      }
      r["schedule"].push_back(sched.dump());
      r["posts"].push_back(posts_for(events));
      auto entries = rng() % 3 == 0 ? sbxtest::fuzz_browsing(rng) : sbxtest::clean_browsing(rng, 7, 5);
      Json browse = Json::array();
      for (const auto& e : entries) browse.push_back({format_datetime(e.visited_at), e.title, e.url});
      r["browsing"].push_back(browse.dump());
    }
    ScriptedTextProvider provider(TemplateSet::builtin(), r);
    GenerationPipeline pipeline(provider, geo, TemplateSet::builtin());
    auto outcome = pipeline.run_full_pipeline(sbxtest::carlos_guidance(), {"p-fuzz", "2023-06-01T00:00:00Z"});
    if (!outcome.ok()) continue;
    ++accepted;
    out.check(!has_hard_violation(validate_persona(outcome.persona)), "accepted persona " + std::to_string(i));
  }
  out.check(accepted > 0, "no fuzzed persona was accepted");
  if (out.pass) {
    out.detail = std::to_string(kValidatorCases) + " x3 fuzz cases match oracles, " + std::to_string(accepted) + "/" +
                 std::to_string(kPipelineTrials) + " accepted personas clean, boundaries ok";
  }
  return out;
}

std::int64_t expected_visit_time(LocalDateTime t, const std::string& zone) {
  auto text = format_datetime(LocalDateTime{to_utc(t, zone).time_since_epoch()});
  return sbxtest::webkit_oracle(std::stoi(text.substr(0, 4)), std::stoul(text.substr(5, 2)),
                                std::stoul(text.substr(8, 2)), std::stoi(text.substr(11, 2)),
                                std::stoi(text.substr(14, 2)), std::stoi(text.substr(17, 2)));
}

using Row = std::tuple<std::string, std::string, std::int64_t>;

std::vector<Row> read_back(const std::filesystem::path& path) {
  sqlite3* db = nullptr;
  std::vector<Row> rows;
  if (sqlite3_open_v2(path.c_str(), &db, SQLITE_OPEN_READONLY, nullptr) == SQLITE_OK) {
    sqlite3_stmt* stmt = nullptr;
    sqlite3_prepare_v2(db, "SELECT u.url, u.title, v.visit_time FROM visits v JOIN urls u ON u.id = v.url", -1, &stmt,
                       nullptr);
    while (stmt && sqlite3_step(stmt) == SQLITE_ROW) {
      rows.emplace_back(reinterpret_cast<const char*>(sqlite3_column_text(stmt, 0)),
                        reinterpret_cast<const char*>(sqlite3_column_text(stmt, 1)), sqlite3_column_int64(stmt, 2));
    }
    sqlite3_finalize(stmt);
  }
  sqlite3_close(db);
  std::sort(rows.begin(), rows.end());
  return rows;
}

Outcome history_round_trip() {
  Outcome out;
  out.check(to_webkit_timestamp(sys_days{year{1601} / 1 / 1}) == 0, "1601 anchor");
  out.check(to_webkit_timestamp(sys_days{year{1601} / 1 / 1} + seconds{1}) == 1000000, "one second anchor");
  out.check(to_webkit_timestamp(sys_days{year{1970} / 1 / 1}) == sbxtest::webkit_oracle(1970, 1, 1, 0, 0, 0),
            "1970 anchor");

  std::mt19937_64 rng(1601);
  for (int i = 0; i < kWebkitInstants && out.pass; ++i) {
    int y = static_cast<int>(1601 + rng() % 800);
    unsigned m = static_cast<unsigned>(1 + rng() % 12);
    auto last = static_cast<unsigned>((year{y} / month{m} / std::chrono::last).day());
    unsigned d = static_cast<unsigned>(1 + rng() % last);
    int hh = static_cast<int>(rng() % 24), mm = static_cast<int>(rng() % 60), ss = static_cast<int>(rng() % 60);
    auto t = sys_days{year{y} / m / d} + hours{hh} + minutes{mm} + seconds{ss};
    out.check(to_webkit_timestamp(t) == sbxtest::webkit_oracle(y, m, d, hh, mm, ss), "instant " + std::to_string(i));
  }

  sbxtest::TempDir dir;
  const char* zones[] = {"America/Los_Angeles", "America/Denver", "America/Phoenix", "America/Chicago",
                         "America/New_York"};
  std::size_t rows = 0;
  for (int i = 0; i < kHistorySets && out.pass; ++i) {
    auto entries = sbxtest::clean_browsing(rng, 1 + static_cast<int>(rng() % 7), 1 + static_cast<int>(rng() % 15));
    std::string zone = zones[rng() % 5];
    auto path = dir.path() / ("History" + std::to_string(i));
    write_history_db(entries, zone, path);
    std::vector<Row> expected;
    for (const auto& e : entries) expected.emplace_back(e.url, e.title, expected_visit_time(e.visited_at, zone));
    std::sort(expected.begin(), expected.end());
    out.check(read_back(path) == expected, "set " + std::to_string(i) + " in " + zone);
    rows += expected.size();
    std::filesystem::remove(path);
  }
  if (out.pass) {
    out.detail = std::to_string(kHistorySets) + " sets (" + std::to_string(rows) + " visits), " +
                 std::to_string(kWebkitInstants) + " instants, 3 anchors";
  }
  return out;
}

Outcome server_selection() {
  Outcome out;
  std::mt19937_64 rng(9222);
  std::uniform_real_distribution<double> lat(-60, 60), lon(-170, 170), jitter(-0.004, 0.004);
  int forced = 0;
  for (int i = 0; i < kVpnCases && out.pass; ++i) {
    std::vector<VpnServer> servers;
    int n = 1 + static_cast<int>(rng() % 60);
    for (int k = 0; k < n; ++k) {
      servers.push_back({"s" + std::to_string(k), {lat(rng), lon(rng)}, static_cast<int>(rng() % 101)});
    }
    GeoPoint p{lat(rng), lon(rng)};
    if (i % 2 == 0) {
      // Force ties: clones of the nearest server within a kilometre, some
      // sharing its load, one at exactly the same spot.
      auto nearest = sbxtest::vpn_oracle(p, servers);
      auto base = *std::find_if(servers.begin(), servers.end(), [&](const VpnServer& s) { return s.id == nearest; });
      servers.push_back({"t-same", base.location, base.load_percent});
      for (int k = 0; k < 3; ++k) {
        servers.push_back({"t" + std::to_string(k),
                           {base.location.latitude + jitter(rng), base.location.longitude + jitter(rng)},
                           k == 0 ? base.load_percent : static_cast<int>(rng() % 101)});
      }
      ++forced;
    }
    auto expected = sbxtest::vpn_oracle(p, servers);
    out.check(select_vpn_server(p, servers).id == expected, "case " + std::to_string(i));
    for (int k = 0; k < 3; ++k) {
      std::shuffle(servers.begin(), servers.end(), rng);
      out.check(select_vpn_server(p, servers).id == expected, "permutation of case " + std::to_string(i));
    }
  }
  if (out.pass) {
    out.detail = std::to_string(kVpnCases) + " cases (" + std::to_string(forced) + " with forced ties), 3 permutations each";
  }
  return out;
}

Outcome activation_state_machine() {
  Outcome out;
  sbxtest::ServiceHarness h(2, 2 * kConcurrentActivations);
  std::vector<std::string> ids;
  for (int i = 0; i < kConcurrentActivations; ++i) ids.push_back(h.service.create_persona(sbxtest::carlos_guidance()));
  h.service.wait_idle();
  for (const auto& id : ids) out.check(h.service.get(id).status == PersonaStatus::Complete, id + " not complete");

  std::vector<std::future<int>> futures;
  for (const auto& id : ids) {
    futures.push_back(std::async(std::launch::async, [&h, id] {
      try {
        h.service.activate(id);
        return 1;
      } catch (const Error& e) {
        return e.code() == ErrorCode::AlreadyActive ? 0 : -100;
      }
    }));
  }
  int winners = 0;
  for (auto& f : futures) winners += f.get();
  out.check(winners == 1, "winners: " + std::to_string(winners));
  auto active = h.store.active_id();
  out.check(active.has_value(), "nothing active");
  if (!out.pass) return out;

  auto first = *h.store.latest_activation(*active);
  h.service.deactivate();
  out.check(!h.store.active_id(), "still active after deactivate");
  auto again = h.service.activate(*active);
  out.check(again.plan == first.plan && again.log == first.log, "re-activation differs");
  out.check(h.service.get(*active).status == PersonaStatus::Active, "not active after round-trip");
  h.service.deactivate();

  ScriptedBrowserDriver scripted;
  RecordingBrowserDriver recording(scripted);
  StubVpnClient vpn;
  auto live = execute_plan(first.plan, recording, vpn);
  ReplayBrowserDriver r1(recording.transcript()), r2(recording.transcript());
  auto a = execute_plan(first.plan, r1, vpn);
  auto b = execute_plan(first.plan, r2, vpn);
  out.check(a == b && a == live, "replay logs differ");
  out.check(r1.exhausted() && r2.exhausted(), "replay left commands unconsumed");
  out.check(a.all_ok(), "replayed activation not all ok");
  if (out.pass) {
    out.detail = "1 of " + std::to_string(kConcurrentActivations) + " concurrent activations won, round-trip equal, " +
                 std::to_string(a.steps.size()) + "-step replay logs identical";
  }
  return out;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"overlap-table", overlap_table},
      {"pipeline-determinism", pipeline_determinism},
      {"validator-properties", validator_properties},
      {"history-round-trip", history_round_trip},
      {"server-selection", server_selection},
      {"activation-state-machine", activation_state_machine},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %-26s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
