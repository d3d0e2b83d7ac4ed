// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aimtrace {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitUnreadable = 2, kExitInternal = 3 };

/// `args` excludes the program name. Machine output goes to `out` (or the
/// --out file), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Default carve keywords before user-supplied screen names are added.
const std::vector<std::string>& default_keywords();

}  // namespace aimtrace
