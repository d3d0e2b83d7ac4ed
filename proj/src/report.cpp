// SPDX-License-Identifier: Apache-2.0
#include "aimtrace/report.hpp"

#include <algorithm>

#include "json.hpp"

namespace aimtrace {

namespace {

constexpr const char* kSummaryKeys[] = {"screen_name", "filename", "ip", "owner", "needle", "value_name", "template"};

nlohmann::json event_json(const TimelineEvent& e) {
  nlohmann::json j = {{"artifact_type", std::string(to_string(e.artifact_type))},
                      {"finding_index", e.finding_index},
                      {"label", e.label},
                      {"qualifier", std::string(to_string(e.qualifier))},
                      {"summary", e.summary}};
  if (const auto* tok = std::get_if<RelativeToken>(&e.instant)) {
    j["token"] = tok->text;
  } else {
    j["time"] = format_time(e.instant);
    j["tz"] = std::holds_alternative<UtcTime>(e.instant) ? "utc" : "unknown";
  }
  return j;
}

std::string attribute_list(const std::map<std::string, std::string>& attrs) {
  std::string out;
  for (const auto& [k, v] : attrs) {
    if (!out.empty()) out += ';';
    out += k;
    out += '=';
    for (char ch : v) {
      if (ch == ';' || ch == '\\') out += '\\';
      out += ch;
    }
  }
  return out;
}

}  // namespace

std::string summarize(const Finding& f) {
  std::string s(to_string(f.artifact_type));
  for (const char* key : kSummaryKeys) {
    auto it = f.attributes.find(key);
    if (it != f.attributes.end() && !it->second.empty()) {
      s += " ";
      s += key;
      s += "=";
      s += it->second;
      break;
    }
  }
  s += " @ " + format_locator(f.locator);
  return s;
}

std::vector<TimelineEvent> build_timeline(const Case& c) {
  std::vector<TimelineEvent> out;
  for (std::size_t i = 0; i < c.findings.size(); ++i) {
    const auto& f = c.findings[i];
    for (const auto& ts : f.timestamps) {
      if (ts.qualifier == TimeQualifier::RelativeToken || !sort_key(ts.value)) continue;
      out.push_back({ts.value, ts.qualifier, f.artifact_type, ts.label, summarize(f), i});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const TimelineEvent& a, const TimelineEvent& b) {
    const auto ka = *sort_key(a.instant), kb = *sort_key(b.instant);
    if (ka != kb) return ka < kb;
    if (a.artifact_type != b.artifact_type) return a.artifact_type < b.artifact_type;
    return a.finding_index < b.finding_index;
  });
  return out;
}

std::vector<TimelineEvent> relative_events(const Case& c) {
  std::vector<TimelineEvent> out;
  for (std::size_t i = 0; i < c.findings.size(); ++i) {
    const auto& f = c.findings[i];
    for (const auto& ts : f.timestamps)
      if (ts.qualifier == TimeQualifier::RelativeToken)
        out.push_back({ts.value, ts.qualifier, f.artifact_type, ts.label, summarize(f), i});
  }
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string export_report(const Case& c, ReportFormat format) {
  if (format == ReportFormat::Json) {
    auto doc = nlohmann::json::parse(save_case(c));
    nlohmann::json timeline = nlohmann::json::array();
    for (const auto& e : build_timeline(c)) timeline.push_back(event_json(e));
    nlohmann::json relative = nlohmann::json::array();
    for (const auto& e : relative_events(c)) relative.push_back(event_json(e));
    doc["timeline"] = std::move(timeline);
    doc["relative_timeline"] = std::move(relative);
    return doc.dump(2) + "\n";
  }

  std::string out = "artifact_type,source_id,locator,first_timestamp,qualifier,confidence,attributes\r\n";
  for (const auto& f : c.findings) {
    std::string first, qualifier;
    if (auto e = f.earliest()) {
      first = format_time(e->value);
      qualifier = to_string(e->qualifier);
    } else {
      for (const auto& ts : f.timestamps) {
        if (ts.qualifier != TimeQualifier::RelativeToken) continue;
        first = std::get<RelativeToken>(ts.value).text;
        qualifier = to_string(ts.qualifier);
        break;
      }
    }
    const std::string fields[] = {std::string(to_string(f.artifact_type)),
                                  f.locator.source_id,
                                  format_locator(f.locator),
                                  first,
                                  qualifier,
                                  std::string(to_string(f.confidence)),
                                  attribute_list(f.attributes)};
    for (std::size_t i = 0; i < std::size(fields); ++i) {
      if (i) out += ',';
      out += csv_field(fields[i]);
    }
    out += "\r\n";
  }
  return out;
}

}  // namespace aimtrace
