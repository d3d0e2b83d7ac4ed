// SPDX-License-Identifier: Apache-2.0
//
// Windows .reg text exports (REGEDIT4 and version 5) and the AIM key lookups.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aimtrace/evidence.hpp"
#include "aimtrace/text.hpp"

namespace aimtrace::reg {

enum class RegVersion { Regedit4, V5 };
enum class ValueType { Sz, ExpandSz, MultiSz, Dword, Qword, Binary, Unknown };

struct RegValue {
  std::string name;  // "" is the default value (@)
  ValueType type = ValueType::Sz;
  std::uint32_t unknown_tag = 0;  // N of hex(N) when type is Unknown
  Bytes data;
  std::optional<std::string> text;  // sz, expand_sz, multi_sz (entries joined by '\n')

  std::optional<std::uint64_t> number() const;

  friend bool operator==(const RegValue&, const RegValue&) = default;
};

struct RegKey {
  std::string path;
  std::vector<RegValue> values;

  const RegValue* find(std::string_view name) const;

  friend bool operator==(const RegKey&, const RegKey&) = default;
};

struct RegExport {
  RegVersion version = RegVersion::V5;
  std::vector<RegKey> keys;  // file order; repeated sections are merged into the first
  std::vector<std::string> diagnostics;

  const RegKey* find_key(std::string_view path) const;

  /// Structural equality; diagnostics are not compared.
  friend bool operator==(const RegExport& a, const RegExport& b) {
    return a.version == b.version && a.keys == b.keys;
  }
};

/// Throws UnsupportedFormat when neither header is present. Malformed lines
/// are skipped and reported in diagnostics as "line N: ...".
RegExport parse_reg_export(ByteView bytes);

/// .reg text (UTF-8, CRLF line endings).
std::string serialize_reg_export(const RegExport& reg);
/// Bytes as regedit writes them: UTF-16LE with BOM for v5, 8-bit for REGEDIT4.
Bytes encode_reg_export(const RegExport& reg);

std::string rot13(std::string_view s);

std::vector<Finding> extract_aim_registry_artifacts(const RegExport& reg, const std::string& source_id);

std::string_view to_string(ValueType t);

}  // namespace aimtrace::reg
