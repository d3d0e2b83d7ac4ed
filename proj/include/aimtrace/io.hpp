// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "aimtrace/text.hpp"

namespace aimtrace {

/// Whole-file read that avoids updating the access time where the platform
/// allows it. Throws IoError.
Bytes read_file(const std::filesystem::path& path);

void write_file(const std::filesystem::path& path, ByteView data);

}  // namespace aimtrace
