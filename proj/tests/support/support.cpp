#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "sandbox/core/datetime.hpp"

#ifndef SANDBOX_SOURCE_DIR
#error "SANDBOX_SOURCE_DIR must point at the repository root"
#endif

namespace sbxtest {

namespace fs = std::filesystem;

fs::path source_dir() { return fs::path(SANDBOX_SOURCE_DIR); }

fs::path fixture_path(const std::string& relative) { return source_dir() / "fixtures" / relative; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TempDir::TempDir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  for (int i = 0; i < 100; ++i) {
    auto candidate = fs::temp_directory_path() / (tag + "-" + std::to_string(rng() % 1000000000ULL));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

GenerationGuidance carlos_guidance() {
  GenerationGuidance g;
  g.text = "Financial analyst in Los Angeles, interested in online gaming and sports.";
  g.date_range = {std::chrono::year{2023} / 6 / 5, std::chrono::year{2023} / 6 / 11};
  g.browsing_entries_per_day = 5;
  g.posts_total = 6;
  return g;
}

PrivacyAttributes abigail_attributes() {
  PrivacyAttributes a;
  a.first_name = "Abigail";
  a.last_name = "Patel";
  a.age = 32;
  a.gender = "female";
  a.race = "Asian American";
  a.street = "325 Main St";
  a.city = "Newark";
  a.state = "NJ";
  a.zip_code = "07102";
  a.spoken_language = "English";
  a.educational_background = "bachelor's degree in Marketing";
  a.birthday = std::chrono::year{1991} / 5 / 26;
  a.job = "marketing manager";
  a.income = 85000;
  a.marital_status = "married";
  a.parental_status = "has two children";
  a.online_behavior =
      "She enjoys browsing social media and streaming movies on her mobile phone during her free time. When using "
      "her computer, she prefers using a wireless mouse and keyboard for easy navigation. On the internet, she likes "
      "to shop for clothes and read reviews before making a purchase.";
  return a;
}

// ---- calendar and geometry ----

namespace {

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int month_days(int y, unsigned m) {
  static const int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && leap(y) ? 29 : kDays[m - 1];
}

std::string two(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

std::string stamp(int y, unsigned m, unsigned d, int hh, int mm, int ss) {
  return std::to_string(y) + "-" + two(static_cast<int>(m)) + "-" + two(static_cast<int>(d)) + " " + two(hh) + ":" +
         two(mm) + ":" + two(ss);
}

LocalDateTime parse_or_die(const std::string& text) {
  auto t = parse_datetime(text);
  if (!t) throw std::runtime_error("bad test datetime " + text);
  return *t;
}

}  // namespace

std::int64_t days_since_1601(int year, unsigned month, unsigned day) {
  std::int64_t days = 0;
  for (int y = 1601; y < year; ++y) days += leap(y) ? 366 : 365;
  for (unsigned m = 1; m < month; ++m) days += month_days(year, m);
  return days + static_cast<std::int64_t>(day) - 1;
}

std::int64_t webkit_oracle(int year, unsigned month, unsigned day, int hour, int minute, int second) {
  std::int64_t seconds = days_since_1601(year, month, day) * 86400 + hour * 3600 + minute * 60 + second;
  return seconds * 1000000;
}

double great_circle_km(GeoPoint a, GeoPoint b) {
  const double k = std::numbers::pi / 180.0;
  double c = std::sin(a.latitude * k) * std::sin(b.latitude * k) +
             std::cos(a.latitude * k) * std::cos(b.latitude * k) * std::cos((b.longitude - a.longitude) * k);
  c = std::max(-1.0, std::min(1.0, c));
  return kEarthRadiusKm * std::acos(c);
}

std::string vpn_oracle(GeoPoint point, const std::vector<VpnServer>& servers) {
  struct Row {
    double km;
    int load;
    std::string id;
  };
  std::vector<Row> rows;
  for (const auto& s : servers) rows.push_back({great_circle_km(point, s.location), s.load_percent, s.id});
  double nearest = 1e300;
  for (const auto& r : rows) nearest = std::min(nearest, r.km);
  std::vector<Row> near;
  for (const auto& r : rows) {
    if (r.km <= nearest + kDistanceTieKm) near.push_back(r);
  }
  std::sort(near.begin(), near.end(), [](const Row& a, const Row& b) {
    if (a.load != b.load) return a.load < b.load;
    return a.id < b.id;
  });
  return near.front().id;
}

// ---- validator oracles ----

std::vector<Finding> findings_of(const std::vector<Violation>& violations) {
  std::vector<Finding> out;
  for (const auto& v : violations) out.emplace_back(std::string(to_string(v.code)), v.subject);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Finding> schedule_oracle(const std::vector<ScheduleEvent>& events) {
  std::vector<Finding> out;
  // Group indices by the date text of the start time.
  std::map<std::string, std::vector<std::size_t>> by_day;
  for (std::size_t i = 0; i < events.size(); ++i) {
    by_day[format_datetime(events[i].start_time).substr(0, 10)].push_back(i);
  }
  auto subject = [](std::size_t i) { return "schedule[" + std::to_string(i) + "]"; };
  for (auto& [day, idx] : by_day) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return events[a].start_time < events[b].start_time; });
    if (format_datetime(events[idx[0]].start_time).substr(11) != "00:00:00") {
      out.emplace_back("DayBoundsMissing", subject(idx[0]));
    }
    for (std::size_t k = 1; k < idx.size(); ++k) {
      LocalDateTime latest_end = events[idx[0]].end_time;
      for (std::size_t e = 0; e < k; ++e) latest_end = std::max(latest_end, events[idx[e]].end_time);
      const auto start = events[idx[k]].start_time;
      if (start > latest_end) out.emplace_back("ScheduleGap", subject(idx[k]));
      if (start < latest_end) out.emplace_back("ScheduleOverlap", subject(idx[k]));
    }
    LocalDateTime max_end = events[idx[0]].end_time;
    for (auto i : idx) max_end = std::max(max_end, events[i].end_time);
    std::size_t owner = idx[0];
    for (auto i : idx) {
      if (events[i].end_time == max_end) {
        owner = i;
        break;
      }
    }
    if (format_datetime(max_end) != day + " 23:59:59") out.emplace_back("DayBoundsMissing", subject(owner));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Finding> browsing_oracle(const std::vector<BrowsingEntry>& entries, const std::string& first_day,
                                     const std::string& last_day) {
  std::vector<Finding> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    std::string text = format_datetime(entries[i].visited_at);
    std::string subject = "browsing[" + std::to_string(i) + "]";
    int hour = std::stoi(text.substr(11, 2));
    if (hour < 7) out.emplace_back("NightBrowsing", subject);
    if (text.substr(17, 2) == "00") out.emplace_back("ZeroSeconds", subject);
    for (std::size_t j = 0; j < i; ++j) {
      if (format_datetime(entries[j].visited_at) == text) {
        out.emplace_back("DuplicateTimestamp", subject);
        break;
      }
    }
    std::string day = text.substr(0, 10);
    if (!first_day.empty() && (day < first_day || day > last_day)) out.emplace_back("BrowsingOutsideRange", subject);
  }
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<std::string>& address_pool() {
  static const std::vector<std::string> kPool = {
      "Home - 1457 W Pico Blvd, Los Angeles, CA 90015",  "Gym - 801 S Grand Ave, Los Angeles, CA 90017",
      "Office - 333 Hope Plaza, Los Angeles, CA 90071",  "Cafe - 600 W 7th St, Los Angeles, CA 90017",
      "Park - 1632 Bellevue Ave, Los Angeles, CA 90026", "Market - 212 Central Rd, Pasadena, CA 91101",
      "Library - 630 Fifth Street, Los Angeles, CA 90071",
  };
  return kPool;
}

std::vector<Finding> posts_oracle(const std::vector<SocialPost>& posts, const std::vector<ScheduleEvent>& schedule) {
  std::vector<Finding> out;
  auto street_line = [](const std::string& address) {
    auto dash = address.find(" - ");
    std::string rest = dash == std::string::npos ? address : address.substr(dash + 3);
    return rest.substr(0, rest.find(','));
  };
  for (std::size_t i = 0; i < posts.size(); ++i) {
    const auto& p = posts[i];
    std::string subject = "posts[" + std::to_string(i) + "]";
    std::istringstream words(p.content);
    std::string w;
    std::size_t count = 0;
    while (words >> w) ++count;
    if (count > 140) out.emplace_back("PostOverlength", subject);
    if (p.images.size() > 2) out.emplace_back("ImageCountExceeded", subject);
    if (format_datetime(p.posted_at).substr(17, 2) == "00") out.emplace_back("ZeroSeconds", subject);
    bool located = false;
    for (const auto& e : schedule) {
      if (e.start_time <= p.posted_at && p.posted_at <= e.end_time && street_line(e.address) == street_line(p.address)) {
        located = true;
      }
    }
    if (!located) out.emplace_back("PostLocationMismatch", subject);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool coverage_exact(const std::vector<ScheduleEvent>& events) {
  std::map<std::string, std::vector<const ScheduleEvent*>> by_day;
  for (const auto& e : events) by_day[format_datetime(e.start_time).substr(0, 10)].push_back(&e);
  for (const auto& [day, list] : by_day) {
    auto day_start = parse_or_die(day + " 00:00:00");
    LocalDateTime lo = list.front()->start_time, hi = list.front()->end_time;
    for (auto* e : list) {
      lo = std::min(lo, e->start_time);
      hi = std::max(hi, e->end_time);
    }
    auto offset = [&](LocalDateTime t) { return static_cast<std::size_t>((t - day_start).count()); };
    std::vector<int> cover(offset(hi) + 1, 0);
    for (auto* e : list) {
      for (auto s = offset(e->start_time); s < offset(e->end_time); ++s) ++cover[s];
    }
    for (auto s = offset(lo); s < offset(hi); ++s) {
      if (cover[s] != 1) return false;
    }
  }
  return true;
}

// ---- generators ----

LocalDateTime local(int y, unsigned m, unsigned d, int hh, int mm, int ss) {
  return parse_or_die(stamp(y, m, d, hh, mm, ss));
}

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

LocalDateTime day_base(int offset) { return local(2023, 6, 5) + std::chrono::days{offset}; }

}  // namespace

std::vector<ScheduleEvent> clean_schedule(std::mt19937_64& rng, int days) {
  std::vector<ScheduleEvent> out;
  const auto& pool = address_pool();
  for (int d = 0; d < days; ++d) {
    auto base = day_base(d);
    int parts = uniform(rng, 2, 8);
    std::set<int> cuts;
    while (static_cast<int>(cuts.size()) < parts - 1) cuts.insert(uniform(rng, 60, 86399 - 60));
    std::vector<int> bounds{0};
    bounds.insert(bounds.end(), cuts.begin(), cuts.end());
    bounds.push_back(86399);
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
      auto [label, address] = split_event_location(pool[rng() % pool.size()]);
      out.push_back({base + std::chrono::seconds{bounds[k]}, base + std::chrono::seconds{bounds[k + 1]}, label, address});
    }
  }
  return out;
}

std::vector<ScheduleEvent> fuzz_schedule(std::mt19937_64& rng) {
  auto events = clean_schedule(rng, uniform(rng, 1, 3));
  int edits = uniform(rng, 0, 3);
  for (int k = 0; k < edits && !events.empty(); ++k) {
    std::size_t i = rng() % events.size();
    auto& e = events[i];
    switch (uniform(rng, 0, 5)) {
      case 0: {  // move the start, keeping the event inside its day with positive length
        auto day = std::chrono::floor<std::chrono::days>(e.start_time);
        auto latest = (e.end_time - day).count() - 1;
        e.start_time = day + std::chrono::seconds{uniform(rng, 0, static_cast<int>(latest))};
        break;
      }
      case 1: {  // move the end within the day
        auto day = std::chrono::floor<std::chrono::days>(e.start_time);
        auto earliest = (e.start_time - day).count() + 1;
        e.end_time = day + std::chrono::seconds{uniform(rng, static_cast<int>(earliest), 86399)};
        break;
      }
      case 2:
        events.erase(events.begin() + static_cast<std::ptrdiff_t>(i));
        break;
      case 3:
        events.push_back(e);
        break;
      case 4:
        if (e.end_time - e.start_time > std::chrono::seconds{2}) e.end_time -= std::chrono::seconds{1};
        break;
      default:
        std::shuffle(events.begin(), events.end(), rng);
        break;
    }
  }
  return events;
}

std::vector<BrowsingEntry> clean_browsing(std::mt19937_64& rng, int days, int per_day) {
  static const char* kSites[] = {"https://www.espn.com/nba/", "https://finance.yahoo.com/", "https://www.youtube.com/",
                                 "https://www.reddit.com/r/gaming/", "https://www.reuters.com/markets/"};
  std::vector<BrowsingEntry> out;
  for (int d = 0; d < days; ++d) {
    std::set<int> seconds;
    while (static_cast<int>(seconds.size()) < per_day) {
      int s = uniform(rng, 7 * 3600, 86399);
      if (s % 60 != 0) seconds.insert(s);
    }
    for (int s : seconds) {
      int site = uniform(rng, 0, 4);
      // Titles are a function of the URL so the history round trip is exact.
      std::string url = std::string(kSites[site]) + "page/" + std::to_string(uniform(rng, 1, 40));
      out.push_back({day_base(d) + std::chrono::seconds{s}, "Title of " + url, url});
    }
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::vector<BrowsingEntry> fuzz_browsing(std::mt19937_64& rng) {
  std::vector<BrowsingEntry> out;
  int n = uniform(rng, 0, 25);
  for (int i = 0; i < n; ++i) {
    if (!out.empty() && chance(rng, 0.1)) {
      out.push_back(out[rng() % out.size()]);
      continue;
    }
    int day = uniform(rng, -1, 3);
    int hour = chance(rng, 0.3) ? uniform(rng, 0, 7) : uniform(rng, 6, 23);
    int second = chance(rng, 0.2) ? 0 : uniform(rng, 0, 59);
    auto t = day_base(day) + std::chrono::hours{hour} + std::chrono::minutes{uniform(rng, 0, 59)} +
             std::chrono::seconds{second};
    out.push_back({t, "t", "https://example.com/" + std::to_string(i)});
  }
  return out;
}

std::vector<SocialPost> fuzz_posts(std::mt19937_64& rng, const std::vector<ScheduleEvent>& schedule) {
  std::vector<SocialPost> out;
  int n = uniform(rng, 0, 8);
  const auto& pool = address_pool();
  for (int i = 0; i < n; ++i) {
    SocialPost p;
    if (!schedule.empty() && chance(rng, 0.8)) {
      const auto& e = schedule[rng() % schedule.size()];
      auto span = (e.end_time - e.start_time).count();
      p.posted_at = e.start_time + std::chrono::seconds{uniform(rng, 0, static_cast<int>(std::max<long>(span, 0)))};
      p.address = chance(rng, 0.8) ? e.event_label + " - " + e.address : pool[rng() % pool.size()];
    } else {
      p.posted_at = day_base(uniform(rng, -1, 3)) + std::chrono::seconds{uniform(rng, 0, 86399)};
      p.address = pool[rng() % pool.size()];
    }
    int words = chance(rng, 0.3) ? uniform(rng, 130, 150) : uniform(rng, 1, 40);
    for (int w = 0; w < words; ++w) p.content += (w ? (chance(rng, 0.1) ? "\n  " : " ") : "") + std::string("word");
    p.images.assign(static_cast<std::size_t>(uniform(rng, 0, 3)), "image prompt");
    out.push_back(std::move(p));
  }
  return out;
}

std::pair<int, int> overlap_oracle(const std::map<std::string, std::vector<std::string>>& personas_by_ad) {
  int duplicated = 0, total = 0;
  for (const auto& [ad, personas] : personas_by_ad) {
    ++total;
    std::vector<std::string> distinct;
    for (const auto& p : personas) {
      if (std::find(distinct.begin(), distinct.end(), p) == distinct.end()) distinct.push_back(p);
    }
    if (distinct.size() >= 2) ++duplicated;
  }
  return {duplicated, total};
}

}  // namespace sbxtest
