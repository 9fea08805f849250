#include "sandbox/metrics/overlap.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "sandbox/core/text.hpp"

namespace sandbox {

std::string normalize_ad_key(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(raw)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string normalize_site(std::string_view raw) {
  std::string host = to_lower(trim(raw));
  if (auto scheme = host.find("://"); scheme != std::string::npos) host.erase(0, scheme + 3);
  if (auto end = host.find_first_of("/?#"); end != std::string::npos) host.erase(end);
  if (auto port = host.find(':'); port != std::string::npos) host.erase(port);
  if (host.rfind("www.", 0) == 0) host.erase(0, 4);
  while (!host.empty() && host.back() == '.') host.pop_back();
  return host;
}

AdObservation make_observation(std::string_view site, std::string_view persona_id, std::string_view ad_key,
                               std::string_view observed_at) {
  AdObservation o{normalize_site(site), std::string(trim(persona_id)), normalize_ad_key(ad_key),
                  std::string(trim(observed_at))};
  require(!o.site.empty(), "observation site is empty");
  require(!o.persona_id.empty(), "observation persona_id is empty");
  require(!o.ad_key.empty(), "observation ad_key is empty");
  return o;
}

std::int64_t percent_hundredths(std::int64_t part, std::int64_t total) {
  require(total > 0, "total must be positive");
  // round(part * 10000 / total), half-up, in integers.
  return (part * 20000 + total) / (2 * total);
}

std::string format_hundredths(std::int64_t hundredths) {
  std::string frac = std::to_string(hundredths % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return std::to_string(hundredths / 100) + "." + frac;
}

std::string OverlapRow::rate_text() const { return format_hundredths(rate_hundredths); }

OverlapRow overlap_rate(std::span<const AdObservation> observations) {
  if (observations.empty()) throw Error(ErrorCode::EmptyInput, "no observations for overlap rate");
  std::map<std::string_view, std::set<std::string_view>> personas_by_ad;
  for (const auto& o : observations) personas_by_ad[o.ad_key].insert(o.persona_id);
  OverlapRow row;
  row.site = observations.front().site;
  row.total_ads = static_cast<int>(personas_by_ad.size());
  row.duplicated_ads = static_cast<int>(
      std::count_if(personas_by_ad.begin(), personas_by_ad.end(), [](const auto& kv) { return kv.second.size() >= 2; }));
  row.rate_hundredths = percent_hundredths(row.duplicated_ads, row.total_ads);
  return row;
}

OverlapReport build_report(std::span<const AdObservation> observations) {
  std::map<std::string, std::vector<AdObservation>> by_site;
  for (const auto& o : observations) by_site[o.site].push_back(o);
  OverlapReport report;
  for (const auto& [site, group] : by_site) {
    auto row = overlap_rate(group);
    row.site = site;
    report.rows.push_back(std::move(row));
  }
  return report;
}

Json report_to_json(const OverlapReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back(Json{{"site", r.site},
                        {"duplicated_ads", r.duplicated_ads},
                        {"total_ads", r.total_ads},
                        {"overlap_rate", r.rate_text()}});
  }
  return Json{{"rows", std::move(rows)}};
}

OverlapReport report_from_json(const Json& json) {
  OverlapReport report;
  try {
    for (const auto& r : json.at("rows")) {
      OverlapRow row;
      row.site = r.at("site").get<std::string>();
      row.duplicated_ads = r.at("duplicated_ads").get<int>();
      row.total_ads = r.at("total_ads").get<int>();
      auto rate = r.at("overlap_rate").get<std::string>();
      auto dot = rate.find('.');
      if (dot == std::string::npos || rate.size() != dot + 3) {
        throw Error(ErrorCode::ParseFailed, "overlap_rate must have two decimals: " + rate);
      }
      row.rate_hundredths = std::stoll(rate.substr(0, dot)) * 100 + std::stoll(rate.substr(dot + 1));
      report.rows.push_back(std::move(row));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseFailed, std::string("overlap report: ") + e.what());
  }
  return report;
}

std::string render_report_table(const OverlapReport& report) {
  const std::vector<std::string> header = {"Website", "Duplicated ads", "Total ads", "Overlap rate"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : report.rows) {
    cells.push_back({r.site, std::to_string(r.duplicated_ads), std::to_string(r.total_ads), r.rate_text() + "%"});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& row) {
    std::string out;
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string pad(width[c] - row[c].size(), ' ');
      // First column left-aligned, numbers right-aligned.
      out += c == 0 ? row[c] + pad : pad + row[c];
      out += c + 1 < row.size() ? "  " : "\n";
    }
    return out;
  };
  std::string out = line(header);
  for (const auto& row : cells) out += line(row);
  return out;
}

Json observation_to_json(const AdObservation& o) {
  return Json{{"site", o.site}, {"persona_id", o.persona_id}, {"ad_key", o.ad_key}, {"observed_at", o.observed_at}};
}

AdObservation observation_from_json(const Json& json) {
  try {
    return make_observation(json.at("site").get<std::string>(), json.at("persona_id").get<std::string>(),
                            json.at("ad_key").get<std::string>(), json.value("observed_at", std::string()));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseFailed, std::string("observation: ") + e.what());
  }
}

std::vector<AdObservation> read_observations_jsonl(std::istream& in) {
  std::vector<AdObservation> out;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    try {
      out.push_back(observation_from_json(Json::parse(text)));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::ParseFailed, "line " + std::to_string(number) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace sandbox
