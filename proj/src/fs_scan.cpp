// SPDX-License-Identifier: Apache-2.0
#include "aimtrace/fs_scan.hpp"

#include <dirent.h>
#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <algorithm>
#include <regex>
#include <set>
#include <stdexcept>

#include "aimtrace/error.hpp"
#include "aimtrace/findings.hpp"
#include "aimtrace/imlog.hpp"
#include "aimtrace/io.hpp"
#include "json.hpp"

namespace aimtrace::fs {

namespace stdfs = std::filesystem;

namespace {

PathTemplate tmpl(std::string id, std::string pattern, ArtifactType type, Confidence conf, EntryKind kind,
                  Handler handler = Handler::None, std::string capture = {}, std::string note = {}) {
  PathTemplate t;
  t.id = std::move(id);
  t.pattern = std::move(pattern);
  t.artifact_type = type;
  t.confidence = conf;
  t.kind = kind;
  t.handler = handler;
  t.capture_attribute = std::move(capture);
  t.note = std::move(note);
  return t;
}

std::vector<std::string> split_path(std::string_view p) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= p.size(); ++i) {
    if (i == p.size() || p[i] == '/' || p[i] == '\\') {
      if (i > start) out.emplace_back(p.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

// Directory listing that leaves the directory's access time alone when the
// process may use O_NOATIME. Names are sorted; "." and ".." are dropped.
std::optional<std::vector<std::string>> list_dir(const stdfs::path& dir, std::string& error) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC | O_NOATIME);
  if (fd < 0 && errno == EPERM) fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) {
    error = std::strerror(errno);
    return std::nullopt;
  }
  DIR* d = ::fdopendir(fd);
  if (d == nullptr) {
    error = std::strerror(errno);
    ::close(fd);
    return std::nullopt;
  }
  std::vector<std::string> names;
  while (const dirent* ent = ::readdir(d)) {
    std::string_view n = ent->d_name;
    if (n != "." && n != "..") names.emplace_back(n);
  }
  ::closedir(d);
  std::sort(names.begin(), names.end());
  return names;
}

bool is_user_placeholder(std::string_view p) { return p == "%AppData%" || p == "%Documents%" || p == "%Desktop%"; }

struct Entry {
  std::string rel;                      // '/'-separated, original case
  std::vector<std::string> components;  // original case
  bool is_dir = false;
  bool is_file = false;
  std::uint64_t size = 0;
  std::optional<UtcTime> modified, accessed, created;
};

UtcTime from_statx(const struct statx_timestamp& t) {
  return UtcTime{std::chrono::seconds{t.tv_sec} + std::chrono::microseconds{t.tv_nsec / 1000}};
}

void fill_metadata(Entry& e, const stdfs::path& full) {
  struct statx sx {};
  if (::statx(AT_FDCWD, full.c_str(), AT_SYMLINK_NOFOLLOW, STATX_BASIC_STATS | STATX_BTIME, &sx) != 0) return;
  e.size = sx.stx_size;
  if (sx.stx_mask & STATX_MTIME) e.modified = from_statx(sx.stx_mtime);
  if (sx.stx_mask & STATX_ATIME) e.accessed = from_statx(sx.stx_atime);
  if (sx.stx_mask & STATX_BTIME) e.created = from_statx(sx.stx_btime);
}

struct Index {
  std::vector<Entry> entries;
  std::set<std::string> dirs_with_files;  // lower-cased rel paths
};

void walk(const stdfs::path& root, const std::string& rel, Index& idx, std::vector<std::string>& diagnostics) {
  std::string error;
  auto names = list_dir(rel.empty() ? root : root / rel, error);
  if (!names) {
    diagnostics.push_back((rel.empty() ? root.string() : rel) + ": " + error);
    return;
  }
  for (const auto& name : *names) {
    Entry e;
    e.rel = rel.empty() ? name : rel + "/" + name;
    e.components = split_path(e.rel);
    const stdfs::path full = root / e.rel;
    std::error_code sec;
    const auto st = stdfs::symlink_status(full, sec);
    if (sec) {
      diagnostics.push_back(e.rel + ": " + sec.message());
      continue;
    }
    e.is_dir = stdfs::is_directory(st);
    e.is_file = stdfs::is_regular_file(st);
    fill_metadata(e, full);  // before descending, so the listing below cannot disturb it
    const bool descend = e.is_dir;
    const std::string child = e.rel;
    idx.entries.push_back(std::move(e));
    if (descend) walk(root, child, idx, diagnostics);
  }
}

Index build_index(const stdfs::path& root, std::vector<std::string>& diagnostics) {
  Index idx;
  walk(root, {}, idx, diagnostics);
  std::sort(idx.entries.begin(), idx.entries.end(), [](const Entry& a, const Entry& b) { return a.rel < b.rel; });
  for (const auto& e : idx.entries) {
    if (!e.is_file) continue;
    std::string prefix;
    for (std::size_t i = 0; i + 1 < e.components.size(); ++i) {
      prefix += (i ? "/" : "") + to_lower(e.components[i]);
      idx.dirs_with_files.insert(prefix);
    }
  }
  return idx;
}

// Segment-wise match of entry components against base + pattern segments.
bool match_segments(const std::vector<std::string>& comps, std::size_t from, const std::vector<std::string>& pat,
                    std::vector<std::string>& captures) {
  if (comps.size() - from != pat.size()) return false;
  captures.clear();
  for (std::size_t i = 0; i < pat.size(); ++i) {
    const auto& c = comps[from + i];
    if (pat[i] == "<*>") {
      captures.push_back(c);
    } else if (!glob_match(pat[i], c)) {
      return false;
    }
  }
  return true;
}

std::vector<std::string> placeholder_bases(std::string_view placeholder, const std::vector<Profile>& profiles) {
  std::vector<std::string> out;
  if (is_user_placeholder(placeholder)) {
    for (const auto& p : profiles) out.push_back(placeholder_map(p).at(std::string(placeholder)));
  } else {
    out.push_back(placeholder_map(Profile{}).at(std::string(placeholder)));
  }
  return out;
}

void add_metadata_times(Finding& f, const Entry& e) {
  if (e.created) f.timestamps.push_back(utc_stamp("created", *e.created, TimeQualifier::FileMetadata));
  if (e.modified) f.timestamps.push_back(utc_stamp("modified", *e.modified, TimeQualifier::FileMetadata));
  if (e.accessed) f.timestamps.push_back(utc_stamp("accessed", *e.accessed, TimeQualifier::FileMetadata));
}

std::optional<std::string> user_of(const Entry& e, const std::vector<Profile>& profiles) {
  const std::string low = to_lower(e.rel);
  for (const auto& p : profiles) {
    const std::string root = to_lower(p.profile_root) + "/";
    if (low.starts_with(root)) return p.user;
  }
  return std::nullopt;
}

}  // namespace

bool glob_match(std::string_view pattern, std::string_view name) {
  std::size_t p = 0, n = 0, star = std::string_view::npos, mark = 0;
  auto eq = [](char a, char b) {
    return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
  };
  while (n < name.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || (pattern[p] != '*' && eq(pattern[p], name[n])))) {
      ++p;
      ++n;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = n;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      n = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

std::string_view to_string(EntryKind k) {
  switch (k) {
    case EntryKind::Any: return "any";
    case EntryKind::File: return "file";
    case EntryKind::Dir: return "dir";
  }
  return "any";
}

std::string_view to_string(Handler h) {
  switch (h) {
    case Handler::None: return "none";
    case Handler::ImLog: return "imlog";
    case Handler::BuddyList: return "blt";
    case Handler::NetworkLog: return "network-log";
  }
  return "none";
}

void check_template(const PathTemplate& t) {
  if (t.id.empty()) throw std::invalid_argument("path template without id");
  const auto segs = split_path(t.pattern);
  if (segs.empty()) throw std::invalid_argument("path template " + t.id + " has an empty pattern");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    if (s.find('%') == std::string::npos) continue;
    const bool known = std::find(std::begin(kPlaceholders), std::end(kPlaceholders), s) != std::end(kPlaceholders);
    if (!known) throw std::invalid_argument("path template " + t.id + ": unknown placeholder " + s);
    if (i != 0) throw std::invalid_argument("path template " + t.id + ": placeholder must lead the pattern");
  }
  for (std::size_t i = 1; i < segs.size(); ++i)
    if (segs[i] == "**") throw std::invalid_argument("path template " + t.id + ": '**' must lead the pattern");
}

const std::vector<PathTemplate>& builtin_templates() {
  using A = ArtifactType;
  using C = Confidence;
  using K = EntryKind;
  static const std::vector<PathTemplate> list = [] {
    std::vector<PathTemplate> v;
    v.push_back(tmpl("program-files-x86-aim", "%Program Files (x86)%/AIM", A::InstallTrace, C::Definite, K::Dir));
    v.back().app_folder = true;
    v.push_back(tmpl("program-files-aim", "%Program Files%/AIM", A::InstallTrace, C::Definite, K::Dir));
    v.back().app_folder = true;
    v.push_back(tmpl("appdata-local-aim", "%AppData%/Local/AIM", A::InstallTrace, C::Definite, K::Dir));
    v.back().app_folder = true;
    v.push_back(tmpl("desktop-link", "%Desktop%/AIM.lnk", A::InstallTrace, C::Probable, K::File));
    v.push_back(tmpl("quick-launch-link", "%AppData%/Roaming/Microsoft/Internet Explorer/Quick Launch/AIM.lnk",
                     A::InstallTrace, C::Probable, K::File));
    v.push_back(tmpl("prefetch-aim", "%SystemRoot%/Prefetch/AIM.EXE*.pf", A::InstallTrace, C::Probable, K::File));
    v.push_back(tmpl("prefetch-aiminst", "%SystemRoot%/Prefetch/AIMINST.EXE*.pf", A::InstallTrace, C::Probable, K::File));
    v.push_back(tmpl("prefetch-aimlan", "%SystemRoot%/Prefetch/AIMLAN~1.EXE*.pf", A::InstallTrace, C::Probable, K::File));
    v.push_back(tmpl("prefetch-setup", "%SystemRoot%/Prefetch/SETUP.EXE*.pf", A::InstallTrace, C::Heuristic, K::File,
                     Handler::None, {}, "generic installer name"));
    v.push_back(tmpl("prefetch-install-aim", "%SystemRoot%/Prefetch/INSTALL_AIM.EXE*.pf", A::InstallTrace,
                     C::Probable, K::File));
    v.push_back(tmpl("prefetch-uninst", "%SystemRoot%/Prefetch/UNINST.EXE*.pf", A::UninstallTrace, C::Probable,
                     K::File));
    v.push_back(tmpl("aimx-bin-local", "%AppData%/Local/aimx.bin", A::CredentialStore, C::Probable, K::File,
                     Handler::None, {}, "AppData/Local location"));
    v.push_back(tmpl("aimx-bin-app-folder", "%AppData%/Local/AIM/aimx.bin", A::CredentialStore, C::Probable, K::File,
                     Handler::None, {}, "application folder location"));
    v.push_back(tmpl("uac-cache", "%AppData%/Local/Microsoft/Windows/INetCache/IE/<*>/AIM_UAC_v2.htm", A::UserAsset,
                     C::Probable, K::File, Handler::None, "cache_id"));
    v.push_back(tmpl("buddy-icon-cache", "%AppData%/Roaming/acccore/caches/users/<*>/buddyicon/bartIDs_devformat_01",
                     A::UserAsset, C::Probable, K::File, Handler::None, "screen_name"));
    v.push_back(tmpl("buddy-list", "**/*.blt", A::BuddyList, C::Definite, K::File, Handler::BuddyList));
    v.push_back(tmpl("im-log", "%Documents%/AIMLogger/<*>/IM Logs/*.html", A::ImLog, C::Definite, K::File,
                     Handler::ImLog));
    v.push_back(tmpl("settings", "%AppData%/Local/AIM/Settings/<*>/settings.xml", A::UserAsset, C::Probable, K::File,
                     Handler::None, "screen_name"));
    v.push_back(tmpl("network-log", "%AppData%/Local/AIM/Logs/network_log_*.txt", A::LoginIp, C::Probable, K::File,
                     Handler::NetworkLog));
    v.push_back(tmpl("nsis-remnant-a", "%AppData%/Local/Temp/A~NSISu_*", A::UninstallTrace, C::Probable, K::Any));
    v.push_back(tmpl("nsis-remnant-b", "%AppData%/Local/Temp/B~NSISu_*", A::UninstallTrace, C::Probable, K::Any));
    v.push_back(tmpl("search-index", "%ProgramData%/Microsoft/Search/Data/Applications/Windows/Windows.edb",
                     A::UserAsset, C::Heuristic, K::File, Handler::None, {}, "search index; contents not parsed"));
    v.push_back(tmpl("search-index-log", "%ProgramData%/Microsoft/Search/Data/Applications/Windows/edb*.log",
                     A::UserAsset, C::Heuristic, K::File, Handler::None, {}, "search index log; contents not parsed"));
    for (const auto& t : v) check_template(t);
    return v;
  }();
  return list;
}

std::vector<PathTemplate> load_templates(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("template catalog: ") + e.what(), e.byte);
  }
  const std::uint64_t end = json_text.size();
  if (!doc.is_array()) throw ParseError("template catalog: expected a JSON array", end);
  std::vector<PathTemplate> out;
  try {
    for (const auto& item : doc) {
      PathTemplate t;
      t.id = item.at("id").get<std::string>();
      t.pattern = item.at("pattern").get<std::string>();
      auto type = parse_artifact_type(item.at("artifact_type").get<std::string>());
      if (!type) throw ParseError("template catalog: unknown artifact_type in " + t.id, end);
      t.artifact_type = *type;
      auto conf = parse_confidence(item.value("confidence", std::string("probable")));
      if (!conf) throw ParseError("template catalog: unknown confidence in " + t.id, end);
      t.confidence = *conf;
      const auto kind = item.value("kind", std::string("any"));
      if (kind == "any") t.kind = EntryKind::Any;
      else if (kind == "file") t.kind = EntryKind::File;
      else if (kind == "dir") t.kind = EntryKind::Dir;
      else throw ParseError("template catalog: unknown kind in " + t.id, end);
      const auto handler = item.value("handler", std::string("none"));
      if (handler == "none") t.handler = Handler::None;
      else if (handler == "imlog") t.handler = Handler::ImLog;
      else if (handler == "blt") t.handler = Handler::BuddyList;
      else if (handler == "network-log") t.handler = Handler::NetworkLog;
      else throw ParseError("template catalog: unknown handler in " + t.id, end);
      t.app_folder = item.value("app_folder", false);
      t.capture_attribute = item.value("capture_attribute", std::string{});
      t.note = item.value("note", std::string{});
      try {
        check_template(t);
      } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("template catalog: ") + e.what(), end);
      }
      out.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("template catalog: ") + e.what(), end);
  }
  return out;
}

ProfileScan enumerate_profiles(const stdfs::path& root) {
  ProfileScan out;
  std::string error;
  auto top = list_dir(root, error);
  if (!top) out.diagnostics.push_back(root.string() + ": " + error);
  std::vector<std::string> users_dirs;
  for (const auto& n : top.value_or(std::vector<std::string>{})) {
    std::error_code sec;
    if (iequals(n, "Users") && stdfs::is_directory(stdfs::symlink_status(root / n, sec))) users_dirs.push_back(n);
  }
  if (users_dirs.empty()) {
    out.diagnostics.push_back("no Users directory under " + root.string());
    return out;
  }
  for (const auto& users : users_dirs) {
    auto names = list_dir(root / users, error);
    if (!names) {
      out.diagnostics.push_back((root / users).string() + ": " + error);
      continue;
    }
    for (const auto& n : *names) {
      std::error_code sec;
      if (stdfs::is_directory(stdfs::symlink_status(root / users / n, sec)))
        out.profiles.push_back(Profile{n, users + "/" + n});
    }
  }
  return out;
}

std::map<std::string, std::string> placeholder_map(const Profile& p) {
  return {
      {"%AppData%", p.profile_root + "/AppData"},
      {"%Documents%", p.profile_root + "/Documents"},
      {"%Desktop%", p.profile_root + "/Desktop"},
      {"%Program Files%", "Program Files"},
      {"%Program Files (x86)%", "Program Files (x86)"},
      {"%SystemRoot%", "Windows"},
      {"%ProgramData%", "ProgramData"},
  };
}

ScanResult scan_tree(const stdfs::path& root, const std::string& source_id,
                     const std::vector<PathTemplate>& templates) {
  ScanResult result;
  for (const auto& t : templates) check_template(t);
  auto profiles = enumerate_profiles(root);
  result.diagnostics = profiles.diagnostics;
  const Index idx = build_index(root, result.diagnostics);

  std::vector<Finding> out;
  struct AppFolder {
    std::string rel;
    bool empty;
  };
  std::vector<AppFolder> app_folders;
  std::vector<std::size_t> app_folder_findings;

  for (const auto& t : templates) {
    const auto segs = split_path(t.pattern);
    struct Candidate {
      std::vector<std::string> base;  // lower-case components, empty for "**"
      std::vector<std::string> rest;
      bool anywhere;
    };
    std::vector<Candidate> candidates;
    if (segs.front() == "**") {
      candidates.push_back({{}, {segs.begin() + 1, segs.end()}, true});
    } else if (segs.front().starts_with('%')) {
      for (const auto& b : placeholder_bases(segs.front(), profiles.profiles)) {
        auto base = split_path(to_lower(b));
        candidates.push_back({base, {segs.begin() + 1, segs.end()}, false});
      }
    } else {
      candidates.push_back({{}, segs, false});
    }

    for (const auto& e : idx.entries) {
      if (t.kind == EntryKind::File && !e.is_file) continue;
      if (t.kind == EntryKind::Dir && !e.is_dir) continue;
      std::vector<std::string> captures;
      bool matched = false;
      for (const auto& c : candidates) {
        if (c.anywhere) {
          if (e.components.size() >= c.rest.size() &&
              match_segments(e.components, e.components.size() - c.rest.size(), c.rest, captures)) {
            matched = true;
            break;
          }
          continue;
        }
        if (e.components.size() < c.base.size()) continue;
        bool base_ok = true;
        for (std::size_t i = 0; i < c.base.size() && base_ok; ++i) base_ok = to_lower(e.components[i]) == c.base[i];
        if (base_ok && match_segments(e.components, c.base.size(), c.rest, captures)) {
          matched = true;
          break;
        }
      }
      if (!matched) continue;

      const Locator where{source_id, FilePath{e.rel}};
      auto decorate = [&](Finding& f) {
        f.attributes["template"] = t.id;
        if (!t.note.empty()) f.attributes["note"] = t.note;
        if (!t.capture_attribute.empty() && !captures.empty()) f.attributes[t.capture_attribute] = captures.front();
        if (auto u = user_of(e, profiles.profiles)) f.attributes["profile"] = *u;
        add_metadata_times(f, e);
      };
      auto presence = [&]() {
        Finding f;
        f.artifact_type = t.artifact_type;
        f.locator = where;
        f.confidence = t.confidence;
        f.attributes["entry"] = e.is_dir ? "directory" : (e.is_file ? "file" : "other");
        if (e.is_file) f.attributes["size"] = std::to_string(e.size);
        if (e.is_dir) f.attributes["empty"] = idx.dirs_with_files.count(to_lower(e.rel)) ? "false" : "true";
        decorate(f);
        return f;
      };

      std::optional<Bytes> content;
      if (t.handler != Handler::None && e.is_file) {
        try {
          content = read_file(root / e.rel);
        } catch (const IoError& err) {
          result.diagnostics.push_back(e.rel + ": " + err.what());
        }
      }

      if (t.handler == Handler::ImLog && content) {
        auto who = imlog::derive_participants_from_path(e.rel);
        auto conv = imlog::parse_im_log(as_chars(*content), who.owner, who.correspondent);
        Finding f = conversation_finding(conv, where, t.confidence);
        f.artifact_type = t.artifact_type;
        decorate(f);
        out.push_back(std::move(f));
      } else if (t.handler == Handler::BuddyList && content) {
        Finding f = buddy_list_text_finding(as_chars(*content), where);
        f.artifact_type = t.artifact_type;
        decorate(f);
        out.push_back(std::move(f));
      } else if (t.handler == Handler::NetworkLog && content) {
        std::string_view text = as_chars(*content);
        std::size_t line_no = 0;
        while (!text.empty() || line_no == 0) {
          ++line_no;
          auto nl = text.find('\n');
          auto line = text.substr(0, nl);
          if (auto entry = parse_network_log_line(line)) {
            Finding f;
            f.artifact_type = t.artifact_type;
            f.locator = where;
            f.confidence = t.confidence;
            f.attributes["ip"] = entry->ip;
            f.attributes["connection_id"] = entry->connection_id;
            f.attributes["line"] = std::to_string(line_no);
            decorate(f);
            f.timestamps.insert(f.timestamps.begin(), relative_stamp("logged", entry->relative_token));
            out.push_back(std::move(f));
          }
          if (nl == std::string_view::npos) break;
          text.remove_prefix(nl + 1);
        }
      } else {
        Finding f = presence();
        if (t.handler != Handler::None && !content) f.attributes["read_error"] = "true";
        if (t.app_folder && e.is_dir) {
          app_folders.push_back({e.rel, f.attributes["empty"] == "true"});
          app_folder_findings.push_back(out.size());
        }
        out.push_back(std::move(f));
      }
    }
  }

  if (!app_folders.empty() &&
      std::all_of(app_folders.begin(), app_folders.end(), [](const AppFolder& a) { return a.empty; })) {
    std::sort(app_folders.begin(), app_folders.end(), [](const AppFolder& a, const AppFolder& b) { return a.rel < b.rel; });
    std::string list;
    for (const auto& a : app_folders) list += (list.empty() ? "" : ";") + a.rel;
    for (auto i : app_folder_findings) out[i].attributes["uninstall_suspected"] = "true";
    Finding f;
    f.artifact_type = ArtifactType::UninstallTrace;
    f.locator = Locator{source_id, FilePath{app_folders.front().rel}};
    f.confidence = Confidence::Probable;
    f.attributes["note"] = "uninstall suspected";
    f.attributes["empty_folders"] = list;
    std::size_t uninstall_files = 0;
    for (const auto& g : out)
      if (g.artifact_type == ArtifactType::UninstallTrace) ++uninstall_files;
    f.attributes["uninstall_remnants"] = std::to_string(uninstall_files);
    out.push_back(std::move(f));
  }

  // Profile URLs for every screen name the tree revealed, anchored at the first file naming it.
  std::map<std::string, std::pair<std::string, Locator>> names;
  for (const auto& f : out) {
    for (const char* key : {"owner", "screen_name"}) {
      auto it = f.attributes.find(key);
      if (it == f.attributes.end() || it->second.empty()) continue;
      if (f.artifact_type == ArtifactType::LoginIp) continue;
      const auto norm = imlog::normalize_screen_name(it->second);
      auto [slot, inserted] = names.try_emplace(norm, it->second, f.locator);
      if (!inserted && f.locator < slot->second.second) slot->second = {it->second, f.locator};
    }
  }
  for (const auto& [norm, named] : names) {
    for (const auto& [label, url] : generate_profile_urls(named.first)) {
      Finding f;
      f.artifact_type = ArtifactType::ProfileUrl;
      f.locator = named.second;
      f.confidence = Confidence::Probable;
      f.attributes["screen_name"] = named.first;
      f.attributes["label"] = label;
      f.attributes["url"] = url;
      out.push_back(std::move(f));
    }
  }

  result.findings = merge_findings(std::move(out));
  return result;
}

std::optional<HostAddressEntry> parse_network_log_line(std::string_view line) {
  static const std::regex re(R"(^[ \t]*(\S+) Connection ([0-9A-Fa-f]{8}): host address ([0-9]{1,3}(?:\.[0-9]{1,3}){3})[ \t]*\r?$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(line.begin(), line.end(), m, re)) return std::nullopt;
  HostAddressEntry e{m[1].str(), m[2].str(), m[3].str()};
  if (!parse_ipv4(e.ip)) return std::nullopt;
  return e;
}

std::vector<HostAddressEntry> parse_network_log(std::string_view text) {
  std::vector<HostAddressEntry> out;
  while (!text.empty()) {
    auto nl = text.find('\n');
    if (auto e = parse_network_log_line(text.substr(0, nl))) out.push_back(std::move(*e));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> generate_profile_urls(std::string_view screen_name) {
  if (screen_name.empty()) throw std::invalid_argument("empty screen name");
  const std::string enc = percent_encode(screen_name);
  return {
      {"buddy-icon", "http://api.oscar.aol.com/expressions/get?f=native&type=buddyIcon&t=" + enc},
      {"lifestream", "http://lifestream.aol.com/" + enc},
  };
}

}  // namespace aimtrace::fs
