// SPDX-License-Identifier: Apache-2.0
#include "aimtrace/evidence.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "aimtrace/error.hpp"
#include "json.hpp"

namespace aimtrace {

using nlohmann::json;

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return static_cast<E>(i);
  return std::nullopt;
}

constexpr std::array<std::string_view, 4> kSourceKinds = {"fs-tree", "raw-blob", "pcap", "reg-export"};
constexpr std::array<std::string_view, 15> kArtifactTypes = {
    "install-trace", "uninstall-trace", "autostart",       "mru-trace",  "credential-store",
    "buddy-list",    "im-log",          "im-log-fragment", "keyword-hit", "transfer-event",
    "login-ip",      "endpoint-session", "screen-name",    "profile-url", "user-asset"};
constexpr std::array<std::string_view, 3> kQualifiers = {"exact", "file-metadata", "relative-token"};
constexpr std::array<std::string_view, 3> kConfidences = {"definite", "probable", "heuristic"};

std::string format_clock(std::chrono::microseconds since_epoch) {
  using namespace std::chrono;
  auto days_part = floor<days>(since_epoch);
  year_month_day ymd{sys_days{days_part}};
  auto rest = since_epoch - days_part;
  auto h = duration_cast<hours>(rest);
  rest -= h;
  auto m = duration_cast<minutes>(rest);
  rest -= m;
  auto s = duration_cast<seconds>(rest);
  rest -= s;
  char buf[48];
  int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                        static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                        static_cast<int>(h.count()), static_cast<int>(m.count()),
                        static_cast<int>(s.count()));
  if (rest.count() != 0) std::snprintf(buf + n, sizeof buf - n, ".%06lld", static_cast<long long>(rest.count()));
  return buf;
}

// Parses "YYYY-MM-DDTHH:MM:SS[.ffffff]" into microseconds since the epoch.
std::optional<std::chrono::microseconds> parse_clock(std::string_view s) {
  using namespace std::chrono;
  int Y, M, D, h, m, sec, consumed = 0;
  std::string buf(s);
  if (std::sscanf(buf.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &Y, &M, &D, &h, &m, &sec, &consumed) != 6 ||
      consumed != 19)
    return std::nullopt;
  year_month_day ymd{year{Y}, month{static_cast<unsigned>(M)}, day{static_cast<unsigned>(D)}};
  if (!ymd.ok() || h > 23 || m > 59 || sec > 60) return std::nullopt;
  microseconds frac{0};
  std::string_view tail = s.substr(19);
  if (!tail.empty()) {
    if (tail.front() != '.' || tail.size() != 7) return std::nullopt;
    long long us = 0;
    for (char c : tail.substr(1)) {
      if (c < '0' || c > '9') return std::nullopt;
      us = us * 10 + (c - '0');
    }
    frac = microseconds{us};
  }
  return sys_days{ymd}.time_since_epoch() + hours{h} + minutes{m} + seconds{sec} + frac;
}

json locator_to_json(const Locator& loc) {
  json j;
  j["source_id"] = loc.source_id;
  std::visit(
      [&j](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, FilePath>) {
          j["type"] = "file-path";
          j["path"] = d.path;
        } else if constexpr (std::is_same_v<T, ByteRange>) {
          j["type"] = "byte-range";
          j["offset"] = d.offset;
          j["length"] = d.length;
        } else if constexpr (std::is_same_v<T, PacketRef>) {
          j["type"] = "packet-ref";
          j["packet_index"] = d.packet_index;
          j["flow_id"] = d.flow_id;
        } else {
          j["type"] = "registry-path";
          j["path"] = d.path;
        }
      },
      loc.detail);
  return j;
}

json timestamp_to_json(const Timestamp& ts) {
  json j;
  j["label"] = ts.label;
  j["qualifier"] = to_string(ts.qualifier);
  if (auto* tok = std::get_if<RelativeToken>(&ts.value)) {
    j["token"] = tok->text;
  } else {
    j["time"] = format_time(ts.value);
    j["tz"] = std::holds_alternative<UtcTime>(ts.value) ? "utc" : "unknown";
  }
  return j;
}

json finding_to_json(const Finding& f) {
  json j;
  j["artifact_type"] = to_string(f.artifact_type);
  j["confidence"] = to_string(f.confidence);
  j["locator"] = locator_to_json(f.locator);
  j["attributes"] = json::object();
  for (const auto& [k, v] : f.attributes) j["attributes"][k] = v;
  j["timestamps"] = json::array();
  for (const auto& ts : f.timestamps) j["timestamps"].push_back(timestamp_to_json(ts));
  return j;
}

// Schema errors after a syntactically valid parse have no natural byte offset;
// they report the document length.
[[noreturn]] void schema_error(const std::string& what, std::size_t size) {
  throw ParseError("case file: " + what, size);
}

template <typename E, std::size_t N>
E enum_field(const json& j, const char* key, const std::array<std::string_view, N>& names, std::size_t size) {
  if (!j.contains(key) || !j[key].is_string()) schema_error(std::string("missing string field '") + key + "'", size);
  auto v = lookup<E>(names, j[key].get<std::string>());
  if (!v) schema_error(std::string("bad value for '") + key + "'", size);
  return *v;
}

std::string string_field(const json& j, const char* key, std::size_t size) {
  if (!j.contains(key) || !j[key].is_string()) schema_error(std::string("missing string field '") + key + "'", size);
  return j[key].get<std::string>();
}

std::uint64_t u64_field(const json& j, const char* key, std::size_t size) {
  if (!j.contains(key) || !j[key].is_number_unsigned())
    schema_error(std::string("missing unsigned field '") + key + "'", size);
  return j[key].get<std::uint64_t>();
}

Locator locator_from_json(const json& j, std::size_t size) {
  Locator loc;
  loc.source_id = string_field(j, "source_id", size);
  auto type = string_field(j, "type", size);
  if (type == "file-path") {
    loc.detail = FilePath{string_field(j, "path", size)};
  } else if (type == "byte-range") {
    loc.detail = ByteRange{u64_field(j, "offset", size), u64_field(j, "length", size)};
  } else if (type == "packet-ref") {
    loc.detail = PacketRef{u64_field(j, "packet_index", size), string_field(j, "flow_id", size)};
  } else if (type == "registry-path") {
    loc.detail = RegistryPath{string_field(j, "path", size)};
  } else {
    schema_error("unknown locator type '" + type + "'", size);
  }
  return loc;
}

Timestamp timestamp_from_json(const json& j, std::size_t size) {
  Timestamp ts;
  ts.label = string_field(j, "label", size);
  ts.qualifier = enum_field<TimeQualifier>(j, "qualifier", kQualifiers, size);
  if (ts.qualifier == TimeQualifier::RelativeToken) {
    ts.value = RelativeToken{string_field(j, "token", size)};
    return ts;
  }
  auto text = string_field(j, "time", size);
  auto tz = string_field(j, "tz", size);
  bool zulu = !text.empty() && text.back() == 'Z';
  if (zulu) text.pop_back();
  auto clock = parse_clock(text);
  if (!clock || zulu != (tz == "utc")) schema_error("bad time value", size);
  if (tz == "utc") {
    ts.value = UtcTime{*clock};
  } else if (tz == "unknown") {
    ts.value = LocalTime{*clock};
  } else {
    schema_error("bad tz value '" + tz + "'", size);
  }
  return ts;
}

struct MergeKey {
  std::optional<std::int64_t> earliest;
  ArtifactType type;
  const Locator* locator;
  std::string canonical;
};

bool key_less(const MergeKey& a, const MergeKey& b) {
  if (a.earliest.has_value() != b.earliest.has_value()) return a.earliest.has_value();
  if (a.earliest && *a.earliest != *b.earliest) return *a.earliest < *b.earliest;
  if (a.type != b.type) return a.type < b.type;
  if (auto c = *a.locator <=> *b.locator; c != 0) return c < 0;
  return a.canonical < b.canonical;
}

MergeKey make_key(const Finding& f) {
  auto e = f.earliest();
  return {e ? sort_key(e->value) : std::nullopt, f.artifact_type, &f.locator, canonical_json(f)};
}

}  // namespace

SourceKind locator_kind(const Locator& loc) {
  switch (loc.detail.index()) {
    case 0: return SourceKind::FsTree;
    case 1: return SourceKind::RawBlob;
    case 2: return SourceKind::Pcap;
    default: return SourceKind::RegExport;
  }
}

Timestamp utc_stamp(std::string label, UtcTime t, TimeQualifier q) { return {std::move(label), t, q}; }
Timestamp local_stamp(std::string label, LocalTime t) { return {std::move(label), t, TimeQualifier::Exact}; }
Timestamp relative_stamp(std::string label, std::string token) {
  return {std::move(label), RelativeToken{std::move(token)}, TimeQualifier::RelativeToken};
}

std::optional<std::int64_t> sort_key(const TimeValue& v) {
  if (auto* u = std::get_if<UtcTime>(&v)) return u->time_since_epoch().count();
  if (auto* l = std::get_if<LocalTime>(&v)) return l->time_since_epoch().count();
  return std::nullopt;
}

std::optional<Timestamp> Finding::earliest() const {
  std::optional<Timestamp> best;
  for (const auto& ts : timestamps) {
    auto k = sort_key(ts.value);
    if (!k || ts.qualifier == TimeQualifier::RelativeToken) continue;
    if (!best || *k < *sort_key(best->value) || (*k == *sort_key(best->value) && ts < *best)) best = ts;
  }
  return best;
}

const EvidenceSource* Case::find_source(std::string_view id) const {
  for (const auto& s : sources)
    if (s.id == id) return &s;
  return nullptr;
}

std::string_view to_string(SourceKind k) { return kSourceKinds[static_cast<std::size_t>(k)]; }
std::string_view to_string(ArtifactType t) { return kArtifactTypes[static_cast<std::size_t>(t)]; }
std::string_view to_string(TimeQualifier q) { return kQualifiers[static_cast<std::size_t>(q)]; }
std::string_view to_string(Confidence c) { return kConfidences[static_cast<std::size_t>(c)]; }
std::optional<SourceKind> parse_source_kind(std::string_view s) { return lookup<SourceKind>(kSourceKinds, s); }
std::optional<ArtifactType> parse_artifact_type(std::string_view s) { return lookup<ArtifactType>(kArtifactTypes, s); }
std::optional<TimeQualifier> parse_time_qualifier(std::string_view s) { return lookup<TimeQualifier>(kQualifiers, s); }
std::optional<Confidence> parse_confidence(std::string_view s) { return lookup<Confidence>(kConfidences, s); }

std::string format_time(const TimeValue& v) {
  if (auto* u = std::get_if<UtcTime>(&v)) return format_clock(u->time_since_epoch()) + "Z";
  if (auto* l = std::get_if<LocalTime>(&v)) return format_clock(l->time_since_epoch());
  return std::get<RelativeToken>(v).text;
}

std::string format_locator(const Locator& loc) {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, FilePath>) {
          return "file:" + d.path;
        } else if constexpr (std::is_same_v<T, ByteRange>) {
          return "bytes:" + std::to_string(d.offset) + "+" + std::to_string(d.length);
        } else if constexpr (std::is_same_v<T, PacketRef>) {
          return "packet:" + std::to_string(d.packet_index) + "@" + d.flow_id;
        } else {
          return "registry:" + d.path;
        }
      },
      loc.detail);
}

const EvidenceSource& register_source(Case& c, SourceKind kind, std::string uri, std::string note) {
  if (uri.empty()) throw std::invalid_argument("register_source: empty uri");
  for (const auto& s : c.sources)
    if (s.kind == kind && s.uri == uri)
      throw DuplicateSource("duplicate source: " + std::string(to_string(kind)) + " " + uri);
  std::size_t n = c.sources.size() + 1;
  std::string id;
  do {
    id = "S" + std::to_string(n++);
  } while (c.find_source(id) != nullptr);
  c.sources.push_back({std::move(id), kind, std::move(uri), std::move(note)});
  return c.sources.back();
}

void validate_case(const Case& c) {
  std::set<std::string> ids;
  for (const auto& s : c.sources) {
    if (s.id.empty()) throw Error("source with empty id");
    if (!ids.insert(s.id).second) throw Error("duplicate source id " + s.id);
  }
  for (const auto& f : c.findings) {
    const auto* src = c.find_source(f.locator.source_id);
    if (src == nullptr) throw Error("finding references unknown source '" + f.locator.source_id + "'");
    if (locator_kind(f.locator) != src->kind)
      throw Error("locator " + format_locator(f.locator) + " does not fit source kind " +
                  std::string(to_string(src->kind)));
    for (const auto& ts : f.timestamps)
      if ((ts.qualifier == TimeQualifier::RelativeToken) != std::holds_alternative<RelativeToken>(ts.value))
        throw Error("timestamp qualifier does not match its value");
  }
}

std::string canonical_json(const Finding& f) { return finding_to_json(f).dump(); }

bool finding_less(const Finding& a, const Finding& b) { return key_less(make_key(a), make_key(b)); }

std::vector<Finding> merge_findings(std::vector<Finding> findings) {
  // Group on identity (type, locator, attributes).
  std::sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
    if (a.artifact_type != b.artifact_type) return a.artifact_type < b.artifact_type;
    if (auto c = a.locator <=> b.locator; c != 0) return c < 0;
    return a.attributes < b.attributes;
  });
  std::vector<Finding> merged;
  for (auto& f : findings) {
    if (!merged.empty()) {
      auto& last = merged.back();
      if (last.artifact_type == f.artifact_type && last.locator == f.locator && last.attributes == f.attributes) {
        last.timestamps.insert(last.timestamps.end(), f.timestamps.begin(), f.timestamps.end());
        last.confidence = std::min(last.confidence, f.confidence);
        continue;
      }
    }
    merged.push_back(std::move(f));
  }
  for (auto& f : merged) {
    std::sort(f.timestamps.begin(), f.timestamps.end());
    f.timestamps.erase(std::unique(f.timestamps.begin(), f.timestamps.end()), f.timestamps.end());
  }

  std::vector<std::pair<MergeKey, std::size_t>> keyed;
  keyed.reserve(merged.size());
  for (std::size_t i = 0; i < merged.size(); ++i) keyed.emplace_back(make_key(merged[i]), i);
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return key_less(a.first, b.first); });
  std::vector<Finding> out;
  out.reserve(merged.size());
  for (const auto& [key, i] : keyed) out.push_back(std::move(merged[i]));
  return out;
}

std::string save_case(const Case& c) {
  json j;
  j["format"] = "aimtrace-case";
  j["version"] = 1;
  j["case_id"] = c.case_id;
  j["sources"] = json::array();
  for (const auto& s : c.sources)
    j["sources"].push_back({{"id", s.id}, {"kind", to_string(s.kind)}, {"uri", s.uri}, {"note", s.note}});
  j["findings"] = json::array();
  for (const auto& f : c.findings) j["findings"].push_back(finding_to_json(f));
  return j.dump(2) + "\n";
}

Case load_case(std::string_view bytes) {
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("case file: ") + e.what(), e.byte);
  }
  const auto size = bytes.size();
  if (!j.is_object()) schema_error("top level is not an object", size);
  if (j.value("format", "") != "aimtrace-case") schema_error("not an aimtrace case file", size);
  Case c;
  c.case_id = string_field(j, "case_id", size);
  if (!j.contains("sources") || !j["sources"].is_array()) schema_error("missing sources array", size);
  if (!j.contains("findings") || !j["findings"].is_array()) schema_error("missing findings array", size);
  for (const auto& s : j["sources"]) {
    if (!s.is_object()) schema_error("source is not an object", size);
    c.sources.push_back({string_field(s, "id", size), enum_field<SourceKind>(s, "kind", kSourceKinds, size),
                         string_field(s, "uri", size), string_field(s, "note", size)});
  }
  for (const auto& fj : j["findings"]) {
    if (!fj.is_object()) schema_error("finding is not an object", size);
    Finding f;
    f.artifact_type = enum_field<ArtifactType>(fj, "artifact_type", kArtifactTypes, size);
    f.confidence = enum_field<Confidence>(fj, "confidence", kConfidences, size);
    if (!fj.contains("locator") || !fj["locator"].is_object()) schema_error("missing locator", size);
    f.locator = locator_from_json(fj["locator"], size);
    if (!fj.contains("attributes") || !fj["attributes"].is_object()) schema_error("missing attributes", size);
    for (const auto& [k, v] : fj["attributes"].items()) {
      if (!v.is_string()) schema_error("attribute '" + k + "' is not a string", size);
      f.attributes[k] = v.get<std::string>();
    }
    if (!fj.contains("timestamps") || !fj["timestamps"].is_array()) schema_error("missing timestamps", size);
    for (const auto& tj : fj["timestamps"]) {
      if (!tj.is_object()) schema_error("timestamp is not an object", size);
      f.timestamps.push_back(timestamp_from_json(tj, size));
    }
    c.findings.push_back(std::move(f));
  }
  try {
    validate_case(c);
  } catch (const Error& e) {
    schema_error(e.what(), size);
  }
  return c;
}

void merge_case(Case& into, const Case& other) {
  std::map<std::string, std::string> remap;
  for (const auto& s : other.sources) {
    auto it = std::find_if(into.sources.begin(), into.sources.end(),
                           [&s](const EvidenceSource& e) { return e.kind == s.kind && e.uri == s.uri; });
    if (it != into.sources.end()) {
      remap[s.id] = it->id;
    } else {
      remap[s.id] = register_source(into, s.kind, s.uri, s.note).id;
    }
  }
  auto findings = into.findings;
  for (auto f : other.findings) {
    auto it = remap.find(f.locator.source_id);
    if (it == remap.end()) throw Error("merge: finding references unknown source '" + f.locator.source_id + "'");
    f.locator.source_id = it->second;
    findings.push_back(std::move(f));
  }
  into.findings = merge_findings(std::move(findings));
}

}  // namespace aimtrace
