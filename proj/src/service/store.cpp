#include "sandbox/service/store.hpp"

#include <sqlite3.h>

#include <algorithm>

#include "sandbox/core/persona_json.hpp"

namespace sandbox {
namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS personas(
  id TEXT PRIMARY KEY,
  status TEXT NOT NULL,
  guidance TEXT NOT NULL,
  description TEXT NOT NULL,
  attributes TEXT,
  portrait_prompt TEXT NOT NULL,
  device TEXT,
  provenance TEXT NOT NULL,
  stale TEXT NOT NULL,
  job TEXT NOT NULL,
  reports TEXT NOT NULL,
  created_at TEXT NOT NULL,
  updated_at TEXT NOT NULL);
CREATE UNIQUE INDEX IF NOT EXISTS personas_single_active ON personas(status) WHERE status = 'active';
CREATE TABLE IF NOT EXISTS schedules(
  persona_id TEXT NOT NULL REFERENCES personas(id) ON DELETE CASCADE,
  seq INTEGER NOT NULL,
  start_time TEXT NOT NULL,
  end_time TEXT NOT NULL,
  label TEXT NOT NULL,
  address TEXT NOT NULL,
  PRIMARY KEY(persona_id, seq));
CREATE TABLE IF NOT EXISTS browsing(
  persona_id TEXT NOT NULL REFERENCES personas(id) ON DELETE CASCADE,
  seq INTEGER NOT NULL,
  visited_at TEXT NOT NULL,
  title TEXT NOT NULL,
  url TEXT NOT NULL,
  PRIMARY KEY(persona_id, seq));
CREATE TABLE IF NOT EXISTS posts(
  persona_id TEXT NOT NULL REFERENCES personas(id) ON DELETE CASCADE,
  seq INTEGER NOT NULL,
  posted_at TEXT NOT NULL,
  address TEXT NOT NULL,
  content TEXT NOT NULL,
  images TEXT NOT NULL,
  latitude REAL NOT NULL,
  longitude REAL NOT NULL,
  timezone TEXT NOT NULL,
  locale TEXT NOT NULL,
  PRIMARY KEY(persona_id, seq));
CREATE TABLE IF NOT EXISTS observations(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  site TEXT NOT NULL,
  persona_id TEXT NOT NULL,
  ad_key TEXT NOT NULL,
  observed_at TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS activations(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  persona_id TEXT NOT NULL,
  plan TEXT NOT NULL,
  log TEXT NOT NULL);
)sql";

class Stmt {
 public:
  Stmt(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) fail();
  }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int i, const std::string& v) {
    sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Stmt& bind(int i, std::int64_t v) {
    sqlite3_bind_int64(stmt_, i, v);
    return *this;
  }
  Stmt& bind(int i, double v) {
    sqlite3_bind_double(stmt_, i, v);
    return *this;
  }
  Stmt& bind_null(int i) {
    sqlite3_bind_null(stmt_, i);
    return *this;
  }

  bool row() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    fail();
  }
  void run() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_CONSTRAINT) throw Error(ErrorCode::AlreadyActive, sqlite3_errmsg(db_));
    if (rc != SQLITE_DONE && rc != SQLITE_ROW) fail();
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
  }

  std::string text(int col) const {
    auto p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col))) : std::string();
  }
  bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
  std::int64_t int64(int col) const { return sqlite3_column_int64(stmt_, col); }
  double real(int col) const { return sqlite3_column_double(stmt_, col); }

 private:
  [[noreturn]] void fail() { throw Error(ErrorCode::IoFailure, std::string("store: ") + sqlite3_errmsg(db_)); }

  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

void exec(sqlite3* db, const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw Error(ErrorCode::IoFailure, "store: " + msg);
  }
}

class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) { exec(db_, "BEGIN IMMEDIATE;"); }
  ~Transaction() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK;", nullptr, nullptr, nullptr);
  }
  void commit() {
    exec(db_, "COMMIT;");
    done_ = true;
  }

 private:
  sqlite3* db_;
  bool done_ = false;
};

Json job_to_json(const JobInfo& job) {
  return Json{{"state", std::string(to_string(job.state))},
              {"failed_stage", job.failed_stage ? Json(std::string(to_string(*job.failed_stage))) : Json(nullptr)},
              {"error_code", job.error_code},
              {"message", job.message}};
}

JobInfo job_from_json(const Json& j) {
  JobInfo job;
  auto state = parse_job_state(j.at("state").get<std::string>());
  if (!state) throw Error(ErrorCode::ParseFailed, "unknown job state");
  job.state = *state;
  if (!j.at("failed_stage").is_null()) job.failed_stage = parse_stage(j.at("failed_stage").get<std::string>());
  job.error_code = j.at("error_code").get<std::string>();
  job.message = j.at("message").get<std::string>();
  return job;
}

Json stale_to_json(const std::set<Stage>& stale) {
  Json out = Json::array();
  for (Stage s : kAllStages) {
    if (stale.contains(s)) out.push_back(std::string(to_string(s)));
  }
  return out;
}

std::set<Stage> stale_from_json(const Json& j) {
  std::set<Stage> out;
  for (const auto& s : j) {
    auto stage = parse_stage(s.get<std::string>());
    if (!stage) throw Error(ErrorCode::ParseFailed, "unknown stage in stale list");
    out.insert(*stage);
  }
  return out;
}

Json reports_to_json(const std::vector<StageReport>& reports) {
  Json out = Json::array();
  for (const auto& r : reports) out.push_back(stage_report_to_json(r));
  return out;
}

std::vector<StageReport> reports_from_json(const Json& j) {
  std::vector<StageReport> out;
  for (const auto& r : j) out.push_back(stage_report_from_json(r));
  return out;
}

Json provenance_to_json(const Provenance& p) {
  return Json{{"generator_id", p.generator_id},
              {"prompt_template_version", p.prompt_template_version},
              {"created_at", p.created_at}};
}

}  // namespace

std::string_view to_string(PersonaStatus status) {
  switch (status) {
    case PersonaStatus::Draft: return "draft";
    case PersonaStatus::Complete: return "complete";
    case PersonaStatus::Active: return "active";
  }
  return "draft";
}

std::optional<PersonaStatus> parse_persona_status(std::string_view name) {
  for (auto s : {PersonaStatus::Draft, PersonaStatus::Complete, PersonaStatus::Active}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view to_string(JobState state) {
  switch (state) {
    case JobState::Idle: return "idle";
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Succeeded: return "succeeded";
    case JobState::Failed: return "failed";
  }
  return "idle";
}

std::optional<JobState> parse_job_state(std::string_view name) {
  for (auto s : {JobState::Idle, JobState::Queued, JobState::Running, JobState::Succeeded, JobState::Failed}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

Json record_to_json(const PersonaRecord& r) {
  Json j = persona_to_json(r.profile);
  j["status"] = std::string(to_string(r.status));
  j["stale"] = stale_to_json(r.stale);
  j["job"] = job_to_json(r.job);
  j["reports"] = reports_to_json(r.reports);
  j["created_at"] = r.created_at;
  j["updated_at"] = r.updated_at;
  return j;
}

PersonaRecord record_from_json(const Json& j) {
  try {
    PersonaRecord r;
    r.profile = persona_from_json(j);
    auto status = parse_persona_status(j.at("status").get<std::string>());
    if (!status) throw Error(ErrorCode::ParseFailed, "unknown persona status");
    r.status = *status;
    r.stale = stale_from_json(j.at("stale"));
    r.job = job_from_json(j.at("job"));
    r.reports = reports_from_json(j.at("reports"));
    r.created_at = j.at("created_at").get<std::string>();
    r.updated_at = j.at("updated_at").get<std::string>();
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseFailed, std::string("persona record: ") + e.what());
  }
}

std::string export_record(const PersonaRecord& record) { return record_to_json(record).dump(2) + "\n"; }

PersonaStore::PersonaStore(const std::filesystem::path& path) {
  if (path != ":memory:" && path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
  if (sqlite3_open_v2(path.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw Error(ErrorCode::IoFailure, "cannot open store " + path.string() + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec(db_, "PRAGMA foreign_keys = ON;");
  exec(db_, kSchema);
}

PersonaStore::~PersonaStore() { sqlite3_close(db_); }

void PersonaStore::put(const PersonaRecord& r) {
  std::lock_guard lock(mutex_);
  const auto& p = r.profile;
  require(!p.id.empty(), "persona id must not be empty");
  Transaction tx(db_);
  {
    Stmt del(db_, "DELETE FROM personas WHERE id = ?");
    del.bind(1, p.id).run();
  }
  Stmt ins(db_,
           "INSERT INTO personas(id, status, guidance, description, attributes, portrait_prompt, device, provenance,"
           " stale, job, reports, created_at, updated_at) VALUES(?,?,?,?,?,?,?,?,?,?,?,?,?)");
  ins.bind(1, p.id)
      .bind(2, std::string(to_string(r.status)))
      .bind(3, guidance_to_json(p.guidance).dump())
      .bind(4, p.description)
      .bind(6, p.portrait_prompt)
      .bind(8, provenance_to_json(p.provenance).dump())
      .bind(9, stale_to_json(r.stale).dump())
      .bind(10, job_to_json(r.job).dump())
      .bind(11, reports_to_json(r.reports).dump())
      .bind(12, r.created_at)
      .bind(13, r.updated_at);
  if (p.attributes) {
    ins.bind(5, attributes_to_json(*p.attributes).dump());
  } else {
    ins.bind_null(5);
  }
  if (p.device) {
    ins.bind(7, device_to_json(*p.device).dump());
  } else {
    ins.bind_null(7);
  }
  ins.run();

  Stmt sched(db_, "INSERT INTO schedules VALUES(?,?,?,?,?,?)");
  for (std::size_t i = 0; i < p.schedule.size(); ++i) {
    const auto& e = p.schedule[i];
    sched.bind(1, p.id)
        .bind(2, static_cast<std::int64_t>(i))
        .bind(3, format_datetime(e.start_time))
        .bind(4, format_datetime(e.end_time))
        .bind(5, e.event_label)
        .bind(6, e.address)
        .run();
  }
  Stmt browse(db_, "INSERT INTO browsing VALUES(?,?,?,?,?)");
  for (std::size_t i = 0; i < p.browsing.size(); ++i) {
    const auto& e = p.browsing[i];
    browse.bind(1, p.id)
        .bind(2, static_cast<std::int64_t>(i))
        .bind(3, format_datetime(e.visited_at))
        .bind(4, e.title)
        .bind(5, e.url)
        .run();
  }
  Stmt post(db_, "INSERT INTO posts VALUES(?,?,?,?,?,?,?,?,?,?)");
  for (std::size_t i = 0; i < p.posts.size(); ++i) {
    const auto& e = p.posts[i];
    post.bind(1, p.id)
        .bind(2, static_cast<std::int64_t>(i))
        .bind(3, format_datetime(e.posted_at))
        .bind(4, e.address)
        .bind(5, e.content)
        .bind(6, Json(e.images).dump())
        .bind(7, e.latitude)
        .bind(8, e.longitude)
        .bind(9, e.timezone)
        .bind(10, e.locale)
        .run();
  }
  tx.commit();
}

PersonaRecord PersonaStore::load(const std::string& id) const {
  PersonaRecord r;
  auto& p = r.profile;
  {
    Stmt q(db_,
           "SELECT id, status, guidance, description, attributes, portrait_prompt, device, provenance, stale, job,"
           " reports, created_at, updated_at FROM personas WHERE id = ?");
    q.bind(1, id);
    if (!q.row()) throw Error(ErrorCode::NotFound, "no persona " + id);
    p.id = q.text(0);
    r.status = parse_persona_status(q.text(1)).value_or(PersonaStatus::Draft);
    p.guidance = guidance_from_json(Json::parse(q.text(2)));
    p.description = q.text(3);
    if (!q.is_null(4)) p.attributes = attributes_from_json(Json::parse(q.text(4))).attributes;
    p.portrait_prompt = q.text(5);
    if (!q.is_null(6)) p.device = device_from_json(Json::parse(q.text(6)));
    auto prov = Json::parse(q.text(7));
    p.provenance = {prov.at("generator_id").get<std::string>(), prov.at("prompt_template_version").get<std::string>(),
                    prov.at("created_at").get<std::string>()};
    r.stale = stale_from_json(Json::parse(q.text(8)));
    r.job = job_from_json(Json::parse(q.text(9)));
    r.reports = reports_from_json(Json::parse(q.text(10)));
    r.created_at = q.text(11);
    r.updated_at = q.text(12);
  }
  auto dt = [](const std::string& s) {
    auto t = parse_datetime(s);
    if (!t) throw Error(ErrorCode::ParseFailed, "store: bad timestamp " + s);
    return *t;
  };
  {
    Stmt q(db_, "SELECT start_time, end_time, label, address FROM schedules WHERE persona_id = ? ORDER BY seq");
    q.bind(1, id);
    while (q.row()) p.schedule.push_back({dt(q.text(0)), dt(q.text(1)), q.text(2), q.text(3)});
  }
  {
    Stmt q(db_, "SELECT visited_at, title, url FROM browsing WHERE persona_id = ? ORDER BY seq");
    q.bind(1, id);
    while (q.row()) p.browsing.push_back({dt(q.text(0)), q.text(1), q.text(2)});
  }
  {
    Stmt q(db_,
           "SELECT posted_at, address, content, images, latitude, longitude, timezone, locale FROM posts"
           " WHERE persona_id = ? ORDER BY seq");
    q.bind(1, id);
    while (q.row()) {
      SocialPost post;
      post.posted_at = dt(q.text(0));
      post.address = q.text(1);
      post.content = q.text(2);
      post.images = Json::parse(q.text(3)).get<std::vector<std::string>>();
      post.latitude = q.real(4);
      post.longitude = q.real(5);
      post.timezone = q.text(6);
      post.locale = q.text(7);
      p.posts.push_back(std::move(post));
    }
  }
  return r;
}

std::optional<PersonaRecord> PersonaStore::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  if (!exists(id)) return std::nullopt;
  return load(id);
}

bool PersonaStore::exists(const std::string& id) const {
  std::lock_guard lock(mutex_);
  Stmt q(db_, "SELECT 1 FROM personas WHERE id = ?");
  q.bind(1, id);
  return q.row();
}

std::vector<PersonaRecord> PersonaStore::list() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  {
    Stmt q(db_, "SELECT id FROM personas ORDER BY created_at, id");
    while (q.row()) ids.push_back(q.text(0));
  }
  std::vector<PersonaRecord> out;
  for (const auto& id : ids) out.push_back(load(id));
  return out;
}

std::optional<std::string> PersonaStore::active_id() const {
  std::lock_guard lock(mutex_);
  Stmt q(db_, "SELECT id FROM personas WHERE status = 'active'");
  if (!q.row()) return std::nullopt;
  return q.text(0);
}

void PersonaStore::add_observations(const std::vector<AdObservation>& batch) {
  std::lock_guard lock(mutex_);
  Transaction tx(db_);
  Stmt ins(db_, "INSERT INTO observations(site, persona_id, ad_key, observed_at) VALUES(?,?,?,?)");
  for (const auto& o : batch) ins.bind(1, o.site).bind(2, o.persona_id).bind(3, o.ad_key).bind(4, o.observed_at).run();
  tx.commit();
}

std::vector<AdObservation> PersonaStore::observations() const {
  std::lock_guard lock(mutex_);
  std::vector<AdObservation> out;
  Stmt q(db_, "SELECT site, persona_id, ad_key, observed_at FROM observations ORDER BY id");
  while (q.row()) out.push_back({q.text(0), q.text(1), q.text(2), q.text(3)});
  return out;
}

std::int64_t PersonaStore::add_activation(const ActivationPlan& plan, const ExecutionLog& log) {
  std::lock_guard lock(mutex_);
  Stmt ins(db_, "INSERT INTO activations(persona_id, plan, log) VALUES(?,?,?)");
  ins.bind(1, plan.persona_id).bind(2, plan_to_json(plan).dump()).bind(3, execution_log_to_json(log).dump()).run();
  return sqlite3_last_insert_rowid(db_);
}

std::optional<StoredActivation> PersonaStore::latest_activation(const std::string& persona_id) const {
  std::lock_guard lock(mutex_);
  Stmt q(db_, "SELECT id, plan, log FROM activations WHERE persona_id = ? ORDER BY id DESC LIMIT 1");
  q.bind(1, persona_id);
  if (!q.row()) return std::nullopt;
  return StoredActivation{q.int64(0), plan_from_json(Json::parse(q.text(1))),
                          execution_log_from_json(Json::parse(q.text(2)))};
}

}  // namespace sandbox
