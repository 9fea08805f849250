// Command-line front end: runs the HTTP service or performs the same
// operations directly against the configured store.
#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "sandbox/core/persona_json.hpp"
#include "sandbox/core/text.hpp"
#include "sandbox/pipeline/scripted_provider.hpp"
#include "sandbox/service/config.hpp"
#include "sandbox/service/http_api.hpp"

namespace {

using namespace sandbox;

ApiServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ParseFailed, path + " is not JSON");
  return j;
}

// "key=value" pairs; numeric-looking values stay strings because the
// attribute patch accepts the same text forms the extraction prompt returns.
Json patch_from_pairs(const std::vector<std::string>& pairs) {
  Json patch = Json::object();
  for (const auto& pair : pairs) {
    auto eq = pair.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::PreconditionFailed, "expected key=value, got " + pair);
    patch[pair.substr(0, eq)] = pair.substr(eq + 1);
  }
  return patch;
}

void print_violations(const std::vector<Violation>& violations) {
  if (violations.empty()) {
    std::cout << "no violations\n";
    return;
  }
  std::cout << format_violation_report(violations);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persona sandbox: generate synthetic personas and activate them in a sandboxed browser"};
  app.require_subcommand(1);
  std::string config_path;
  bool verbose = false;
  app.add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_flag("-v,--verbose", verbose, "debug logging");

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");

  auto* persona = app.add_subcommand("persona", "Persona operations");
  persona->require_subcommand(1);
  std::string text, start_date, end_date;
  int per_day = 15, posts = 6;
  bool no_wait = false;
  auto* create = persona->add_subcommand("create", "Generate a persona from guidance");
  create->add_option("--text", text, "Free-text guidance (may be empty)");
  create->add_option("--start", start_date, "First date, YYYY-MM-DD")->required();
  create->add_option("--end", end_date, "Last date, YYYY-MM-DD")->required();
  create->add_option("--per-day", per_day, "Browsing entries per day");
  create->add_option("--posts", posts, "Total social posts");
  create->add_flag("--no-wait", no_wait, "Return after queueing the job");

  persona->add_subcommand("list", "List stored personas");
  std::string id;
  bool export_doc = false;
  auto* show = persona->add_subcommand("show", "Print a persona record");
  show->add_option("id", id)->required();
  show->add_flag("--export", export_doc, "Print only the persona document");

  std::vector<std::string> sets;
  auto* edit = persona->add_subcommand("edit", "Patch privacy attributes");
  edit->add_option("id", id)->required();
  edit->add_option("--set", sets, "attribute=value, e.g. --set income=90000")->required();

  std::string stage_name;
  auto* regen = persona->add_subcommand("regen", "Regenerate one stage");
  regen->add_option("id", id)->required();
  regen->add_option("stage", stage_name, "description|attributes|portrait_prompt|device|schedule|browsing|posts")
      ->required();

  std::string driver;
  auto* activate = persona->add_subcommand("activate", "Activate a persona");
  activate->add_option("id", id)->required();
  activate->add_option("--driver", driver, "Driver endpoint (scripted, replay:<file>, ws://..., http://...)");

  persona->add_subcommand("deactivate", "Deactivate the active persona");

  auto* violations = persona->add_subcommand("violations", "Validate a stored persona");
  violations->add_option("id", id)->required();

  std::string file;
  auto* validate = app.add_subcommand("validate", "Validate an exported persona document");
  validate->add_option("file", file)->required()->check(CLI::ExistingFile);

  auto* obs = app.add_subcommand("obs", "Ad observations");
  obs->require_subcommand(1);
  auto* ingest = obs->add_subcommand("ingest", "Ingest observations (JSON lines)");
  ingest->add_option("file", file)->required()->check(CLI::ExistingFile);

  bool report_json = false;
  auto* report = app.add_subcommand("report", "Ad overlap report");
  report->add_flag("--json", report_json, "JSON instead of a table");

  auto* fixtures = app.add_subcommand("fixtures", "Replay fixture tools");
  fixtures->require_subcommand(1);
  std::string script, guidance_file, out_dir, label_prefix, created_at = "2023-06-01T00:00:00Z", persona_id;
  auto* record = fixtures->add_subcommand("record", "Run the pipeline on scripted responses and record fixtures");
  record->add_option("--script", script, "JSON map of template name to response(s)")->required()->check(CLI::ExistingFile);
  record->add_option("--guidance", guidance_file, "Guidance JSON")->required()->check(CLI::ExistingFile);
  record->add_option("--out", out_dir, "Fixture directory (text/ is written below it)")->required();
  record->add_option("--id", persona_id, "Persona id");
  record->add_option("--created-at", created_at, "Provenance timestamp");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_default_logger(spdlog::stderr_color_mt("sandbox"));

  try {
    std::optional<std::filesystem::path> cfg_file;
    if (!config_path.empty()) cfg_file = config_path;

    if (*validate) {
      std::ifstream in(file);
      std::string doc((std::istreambuf_iterator<char>(in)), {});
      auto found = validate_persona(import_persona(doc));
      print_violations(found);
      return has_hard_violation(found) ? 1 : 0;
    }

    if (*record) {
      auto templates = TemplateSet::builtin("v1");
      ScriptedTextProvider scripted(templates, ScriptedTextProvider::responses_from_json(read_json_file(script)));
      std::filesystem::path out(out_dir);
      RecordingTextProvider recorder(scripted, out / "text");
      FixtureGeocoder geocoder(out / "geocode.json");
      // Labels name the template each fixture answers.
      CallbackTextProvider labelled(
          [&](const TextGenerationRequest& request) {
            recorder.set_label(classify_prompt(templates, request.prompt).value_or("unknown"));
            return recorder.generate_text(request);
          },
          "replay");
      GenerationPipeline pipeline(labelled, geocoder, templates);
      auto guidance = guidance_from_json(read_json_file(guidance_file));
      auto outcome = pipeline.run_full_pipeline(guidance, {persona_id, created_at});
      if (!outcome.ok()) {
        std::cerr << "pipeline failed at " << to_string(outcome.failure->stage) << ": " << outcome.failure->message
                  << "\n";
        return 1;
      }
      std::cout << export_persona(outcome.persona);
      return 0;
    }

    Runtime runtime(load_config(cfg_file));
    auto& service = runtime.service();

    if (*serve) {
      const auto& cfg = runtime.config();
      ApiServer server(service, cfg.listen_host, cfg.listen_port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      spdlog::info("listening on {}:{} (provider mode {})", server.host(), server.port(),
                   to_string(cfg.provider_mode));
      server.wait();
      g_server = nullptr;
      return 0;
    }

    if (*create) {
      GenerationGuidance g;
      g.text = text;
      auto s = parse_date(start_date), e = parse_date(end_date);
      if (!s || !e) throw Error(ErrorCode::PreconditionFailed, "dates must be YYYY-MM-DD");
      g.date_range = {*s, *e};
      g.browsing_entries_per_day = per_day;
      g.posts_total = posts;
      auto new_id = service.create_persona(g);
      if (no_wait) {
        std::cout << new_id << "\n";
        return 0;
      }
      service.wait_idle();
      auto r = service.get(new_id);
      std::cout << new_id << " " << to_string(r.status) << " " << to_string(r.job.state) << "\n";
      if (r.job.state == JobState::Failed) {
        std::cerr << r.job.error_code << ": " << r.job.message << "\n";
        return 1;
      }
      return 0;
    }
    if (persona->got_subcommand("list")) {
      for (const auto& r : service.list()) {
        std::string name = r.profile.attributes ? r.profile.attributes->first_name + " " + r.profile.attributes->last_name
                                                : std::string("-");
        std::cout << r.profile.id << "\t" << to_string(r.status) << "\t" << to_string(r.job.state) << "\t" << name
                  << "\n";
      }
      return 0;
    }
    if (*show) {
      auto r = service.get(id);
      std::cout << (export_doc ? export_persona(r.profile) : export_record(r));
      return 0;
    }
    if (*edit) {
      auto r = service.update_attributes(id, patch_from_pairs(sets));
      std::cout << attributes_to_json(*r.profile.attributes).dump(2) << "\n";
      return 0;
    }
    if (*regen) {
      auto stage = parse_stage(stage_name);
      if (!stage) throw Error(ErrorCode::PreconditionFailed, "unknown stage " + stage_name);
      auto r = service.regenerate_stage(id, *stage);
      std::cout << id << " " << stage_name << " regenerated";
      if (!r.stale.empty()) {
        std::cout << "; stale:";
        for (Stage s : r.stale) std::cout << " " << to_string(s);
      }
      std::cout << "\n";
      return 0;
    }
    if (*activate) {
      auto result = service.activate(id, driver);
      for (const auto& step : result.log.steps) {
        std::cout << to_string(step.status) << "\t" << step.step << "\t" << step.target;
        if (!step.detail.empty()) std::cout << "\t" << step.detail;
        std::cout << "\n";
      }
      return result.log.all_ok() ? 0 : 2;
    }
    if (persona->got_subcommand("deactivate")) {
      std::cout << service.deactivate() << " deactivated\n";
      return 0;
    }
    if (*violations) {
      auto found = service.violations(id);
      print_violations(found);
      return has_hard_violation(found) ? 1 : 0;
    }
    if (*ingest) {
      std::ifstream in(file);
      auto batch = read_observations_jsonl(in);
      std::cout << service.record_observations(batch) << " observations ingested\n";
      return 0;
    }
    if (*report) {
      auto r = service.overlap_report();
      std::cout << (report_json ? report_to_json(r).dump(2) + "\n" : render_report_table(r));
      return 0;
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
