#include "sandbox/replace/history_db.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <map>

#include "sandbox/core/timezone.hpp"
#include "sandbox/validate/validator.hpp"

namespace sandbox {
namespace {

using namespace std::chrono;

constexpr sys_days kWebkitEpoch = sys_days{year{1601} / January / 1};

constexpr const char* kSchema = R"sql(
CREATE TABLE urls(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  url LONGVARCHAR,
  title LONGVARCHAR,
  visit_count INTEGER DEFAULT 0 NOT NULL,
  typed_count INTEGER DEFAULT 0 NOT NULL,
  last_visit_time INTEGER NOT NULL,
  hidden INTEGER DEFAULT 0 NOT NULL);
CREATE TABLE visits(
  id INTEGER PRIMARY KEY,
  url INTEGER NOT NULL,
  visit_time INTEGER NOT NULL,
  from_visit INTEGER,
  transition INTEGER DEFAULT 0 NOT NULL,
  visit_duration INTEGER DEFAULT 0 NOT NULL);
CREATE INDEX visits_url_index ON visits (url);
CREATE INDEX visits_time_index ON visits (visit_time);
CREATE INDEX urls_url_index ON urls (url);
)sql";

class Db {
 public:
  explicit Db(const std::filesystem::path& path) {
    if (sqlite3_open(path.c_str(), &db_) != SQLITE_OK) {
      std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
      sqlite3_close(db_);
      throw Error(ErrorCode::IoFailure, "cannot create history database " + path.string() + ": " + msg);
    }
  }
  ~Db() { sqlite3_close(db_); }
  Db(const Db&) = delete;
  Db& operator=(const Db&) = delete;

  void exec(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "unknown error";
      sqlite3_free(err);
      throw Error(ErrorCode::IoFailure, "history database: " + msg);
    }
  }

  sqlite3_stmt* prepare(const char* sql) {
    sqlite3_stmt* stmt = nullptr;
    if (sqlite3_prepare_v2(db_, sql, -1, &stmt, nullptr) != SQLITE_OK) fail();
    return stmt;
  }

  void step_done(sqlite3_stmt* stmt) {
    if (sqlite3_step(stmt) != SQLITE_DONE) fail();
    sqlite3_reset(stmt);
    sqlite3_clear_bindings(stmt);
  }

  [[noreturn]] void fail() { throw Error(ErrorCode::IoFailure, std::string("history database: ") + sqlite3_errmsg(db_)); }

 private:
  sqlite3* db_ = nullptr;
};

struct Stmt {
  sqlite3_stmt* p;
  ~Stmt() { sqlite3_finalize(p); }
};

struct UrlRow {
  std::int64_t id = 0;
  std::string title;
  std::int64_t visit_count = 0;
  std::int64_t last_visit_time = 0;
};

}  // namespace

std::int64_t to_webkit_timestamp(UtcDateTime instant) {
  if (instant < kWebkitEpoch) throw Error(ErrorCode::OutOfRange, "instant precedes 1601-01-01T00:00:00Z");
  return duration_cast<microseconds>(instant - kWebkitEpoch).count();
}

UtcDateTime from_webkit_timestamp(std::int64_t micros) {
  if (micros < 0) throw Error(ErrorCode::OutOfRange, "negative history timestamp");
  return kWebkitEpoch + duration_cast<seconds>(microseconds{micros});
}

std::size_t write_history_db(std::span<const BrowsingEntry> entries, std::string_view zone,
                             const std::filesystem::path& path) {
  auto violations = validate_browsing(entries, {}, std::nullopt);
  if (has_hard_violation(violations)) {
    throw Error(ErrorCode::ValidationFailed, "browsing history has hard violations: " +
                                                 violations.front().subject + " " + violations.front().message);
  }
  if (!is_supported_zone(zone)) throw Error(ErrorCode::OutOfRange, "unsupported time zone " + std::string(zone));

  // Visits are written in time order; url ids follow first visit.
  std::vector<std::size_t> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return entries[a].visited_at < entries[b].visited_at; });

  std::map<std::string, UrlRow> urls;
  std::vector<std::string> url_order;
  std::vector<std::int64_t> times(entries.size());
  for (std::size_t i : order) {
    const auto& e = entries[i];
    times[i] = to_webkit_timestamp(to_utc(e.visited_at, zone));
    auto [it, inserted] = urls.try_emplace(e.url);
    if (inserted) {
      it->second.id = static_cast<std::int64_t>(url_order.size()) + 1;
      url_order.push_back(e.url);
    }
    // The urls row keeps the title of the latest visit.
    it->second.title = e.title;
    it->second.visit_count += 1;
    it->second.last_visit_time = std::max(it->second.last_visit_time, times[i]);
  }

  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".partial";
  std::filesystem::remove(tmp, ec);
  {
    Db db(tmp);
    db.exec("PRAGMA journal_mode=DELETE;");
    db.exec(kSchema);
    db.exec("BEGIN;");
    Stmt url_stmt{db.prepare(
        "INSERT INTO urls(id, url, title, visit_count, typed_count, last_visit_time, hidden) "
        "VALUES(?, ?, ?, ?, ?, ?, 0)")};
    for (const auto& url : url_order) {
      const auto& row = urls.at(url);
      sqlite3_bind_int64(url_stmt.p, 1, row.id);
      sqlite3_bind_text(url_stmt.p, 2, url.c_str(), -1, SQLITE_TRANSIENT);
      sqlite3_bind_text(url_stmt.p, 3, row.title.c_str(), -1, SQLITE_TRANSIENT);
      sqlite3_bind_int64(url_stmt.p, 4, row.visit_count);
      sqlite3_bind_int64(url_stmt.p, 5, row.visit_count);
      sqlite3_bind_int64(url_stmt.p, 6, row.last_visit_time);
      db.step_done(url_stmt.p);
    }
    Stmt visit_stmt{db.prepare(
        "INSERT INTO visits(id, url, visit_time, from_visit, transition, visit_duration) "
        "VALUES(?, ?, ?, 0, ?, 0)")};
    std::int64_t visit_id = 0;
    for (std::size_t i : order) {
      sqlite3_bind_int64(visit_stmt.p, 1, ++visit_id);
      sqlite3_bind_int64(visit_stmt.p, 2, urls.at(entries[i].url).id);
      sqlite3_bind_int64(visit_stmt.p, 3, times[i]);
      sqlite3_bind_int64(visit_stmt.p, 4, kTypedTransition);
      db.step_done(visit_stmt.p);
    }
    db.exec("COMMIT;");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::IoFailure, "cannot move history database into place at " + path.string() + ": " +
                                          ec.message());
  }
  return entries.size();
}

}  // namespace sandbox
