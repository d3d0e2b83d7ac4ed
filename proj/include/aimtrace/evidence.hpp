// SPDX-License-Identifier: Apache-2.0
//
// Case / evidence / finding model shared by every extractor, plus the
// deterministic merge and the JSON case file.
#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace aimtrace {

enum class SourceKind { FsTree, RawBlob, Pcap, RegExport };

struct EvidenceSource {
  std::string id;
  SourceKind kind = SourceKind::FsTree;
  std::string uri;
  std::string note;

  friend bool operator==(const EvidenceSource&, const EvidenceSource&) = default;
};

struct FilePath {
  std::string path;
  friend auto operator<=>(const FilePath&, const FilePath&) = default;
};
struct ByteRange {
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  friend auto operator<=>(const ByteRange&, const ByteRange&) = default;
};
struct PacketRef {
  std::uint64_t packet_index = 0;
  std::string flow_id;
  friend auto operator<=>(const PacketRef&, const PacketRef&) = default;
};
struct RegistryPath {
  std::string path;
  friend auto operator<=>(const RegistryPath&, const RegistryPath&) = default;
};

struct Locator {
  std::string source_id;
  std::variant<FilePath, ByteRange, PacketRef, RegistryPath> detail;

  friend auto operator<=>(const Locator&, const Locator&) = default;
};

/// The source kind a locator variant is valid for.
SourceKind locator_kind(const Locator& loc);

enum class ArtifactType {
  InstallTrace,
  UninstallTrace,
  Autostart,
  MruTrace,
  CredentialStore,
  BuddyList,
  ImLog,
  ImLogFragment,
  KeywordHit,
  TransferEvent,
  LoginIp,
  EndpointSession,
  ScreenName,
  ProfileUrl,
  UserAsset,
};

enum class TimeQualifier { Exact, FileMetadata, RelativeToken };

enum class Confidence { Definite, Probable, Heuristic };

using UtcTime = std::chrono::sys_time<std::chrono::microseconds>;
using LocalTime = std::chrono::local_time<std::chrono::microseconds>;

/// A clock-relative token such as "00:26.29" that is never promoted to an instant.
struct RelativeToken {
  std::string text;
  friend auto operator<=>(const RelativeToken&, const RelativeToken&) = default;
};

using TimeValue = std::variant<UtcTime, LocalTime, RelativeToken>;

struct Timestamp {
  std::string label;
  TimeValue value;
  TimeQualifier qualifier = TimeQualifier::Exact;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

Timestamp utc_stamp(std::string label, UtcTime t, TimeQualifier q = TimeQualifier::Exact);
Timestamp local_stamp(std::string label, LocalTime t);
Timestamp relative_stamp(std::string label, std::string token);

/// Microseconds since the epoch for dated values, treating naive-local clock
/// readings as if they were UTC. Relative tokens have no sort key.
std::optional<std::int64_t> sort_key(const TimeValue& v);

struct Finding {
  ArtifactType artifact_type = ArtifactType::UserAsset;
  Locator locator;
  std::vector<Timestamp> timestamps;
  std::map<std::string, std::string> attributes;
  Confidence confidence = Confidence::Heuristic;

  /// Earliest dated timestamp (exact or file-metadata, relative tokens skipped).
  std::optional<Timestamp> earliest() const;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct Case {
  std::string case_id;
  std::vector<EvidenceSource> sources;
  std::vector<Finding> findings;

  const EvidenceSource* find_source(std::string_view id) const;

  friend bool operator==(const Case&, const Case&) = default;
};

std::string_view to_string(SourceKind k);
std::string_view to_string(ArtifactType t);
std::string_view to_string(TimeQualifier q);
std::string_view to_string(Confidence c);
std::optional<SourceKind> parse_source_kind(std::string_view s);
std::optional<ArtifactType> parse_artifact_type(std::string_view s);
std::optional<TimeQualifier> parse_time_qualifier(std::string_view s);
std::optional<Confidence> parse_confidence(std::string_view s);

std::string format_time(const TimeValue& v);
std::string format_locator(const Locator& loc);

/// Appends a source with a fresh id ("S1", "S2", ...). Throws DuplicateSource
/// when the same kind+uri is already registered and std::invalid_argument on
/// an empty uri.
const EvidenceSource& register_source(Case& c, SourceKind kind, std::string uri, std::string note = {});

/// Throws Error describing the first violated invariant.
void validate_case(const Case& c);

/// Collapses findings with equal (artifact_type, locator, attributes); their
/// timestamps are unioned and the strongest confidence kept. Output order is
/// (earliest timestamp, artifact_type, locator, canonical form) with undated
/// findings last, so the result is independent of input order.
std::vector<Finding> merge_findings(std::vector<Finding> findings);

/// Total order used by merge_findings.
bool finding_less(const Finding& a, const Finding& b);

/// Canonical JSON text for one finding (used for ordering and the case file).
std::string canonical_json(const Finding& f);

std::string save_case(const Case& c);
/// Throws ParseError on malformed or truncated input and on invariant violations.
Case load_case(std::string_view bytes);

/// Merges `other` into `into`: sources are matched on kind+uri (new ones get
/// fresh ids), locators are remapped, and findings re-merged.
void merge_case(Case& into, const Case& other);

}  // namespace aimtrace
