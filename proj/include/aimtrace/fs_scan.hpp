// SPDX-License-Identifier: Apache-2.0
//
// Path-template scan of an extracted Windows tree, network_log parsing and
// profile URL construction.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aimtrace/evidence.hpp"

namespace aimtrace::fs {

inline constexpr std::string_view kPlaceholders[] = {
    "%AppData%", "%Documents%", "%Desktop%", "%Program Files%", "%Program Files (x86)%", "%SystemRoot%", "%ProgramData%",
};

enum class EntryKind { Any, File, Dir };
/// What happens to a matched file beyond the presence finding.
enum class Handler { None, ImLog, BuddyList, NetworkLog };

struct PathTemplate {
  std::string id;
  /// '/'-separated; may start with one placeholder or with "**" (any depth).
  /// Segments may be "<*>" (any one name, captured) or globs with '*' and '?'.
  std::string pattern;
  ArtifactType artifact_type = ArtifactType::UserAsset;
  Confidence confidence = Confidence::Probable;
  EntryKind kind = EntryKind::Any;
  bool app_folder = false;  // an application folder whose emptiness signals uninstallation
  Handler handler = Handler::None;
  std::string capture_attribute;  // attribute name for the first "<*>" capture, if any
  std::string note;
};

/// Throws std::invalid_argument for placeholders outside the fixed set.
void check_template(const PathTemplate& t);

const std::vector<PathTemplate>& builtin_templates();

/// JSON array of {id, pattern, artifact_type, confidence, kind, handler, capture_attribute, note}.
std::vector<PathTemplate> load_templates(std::string_view json_text);

struct Profile {
  std::string user;
  std::string profile_root;  // relative to the scan root, '/'-separated
};

struct ProfileScan {
  std::vector<Profile> profiles;
  std::vector<std::string> diagnostics;
};

ProfileScan enumerate_profiles(const std::filesystem::path& root);

/// Placeholder → root-relative directory for one profile (machine-wide
/// placeholders are the same for every profile).
std::map<std::string, std::string> placeholder_map(const Profile& p);

struct ScanResult {
  std::vector<Finding> findings;
  std::vector<std::string> diagnostics;
};

/// Findings are merged and sorted; every locator is a path relative to root.
ScanResult scan_tree(const std::filesystem::path& root, const std::string& source_id,
                     const std::vector<PathTemplate>& templates = builtin_templates());

struct HostAddressEntry {
  std::string relative_token;
  std::string connection_id;
  std::string ip;
  friend bool operator==(const HostAddressEntry&, const HostAddressEntry&) = default;
};

/// Lines of the form "<token> Connection <8 hex>: host address <IPv4>".
std::vector<HostAddressEntry> parse_network_log(std::string_view text);
std::optional<HostAddressEntry> parse_network_log_line(std::string_view line);

/// (label, url) pairs for the buddy-icon API and the Lifestream profile.
/// Throws std::invalid_argument for an empty name.
std::vector<std::pair<std::string, std::string>> generate_profile_urls(std::string_view screen_name);

/// Case-insensitive glob over one path segment ('*' and '?').
bool glob_match(std::string_view pattern, std::string_view name);

std::string_view to_string(EntryKind k);
std::string_view to_string(Handler h);

}  // namespace aimtrace::fs
