// SPDX-License-Identifier: Apache-2.0
//
// Conversions from parser results to case findings.
#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "aimtrace/blt.hpp"
#include "aimtrace/carve.hpp"
#include "aimtrace/evidence.hpp"
#include "aimtrace/imlog.hpp"

namespace aimtrace {

Finding buddy_list_finding(const blt::BuddyList& list, const blt::ExtractDiagnostics& diag, Locator where);

/// Parses BLT text; a file that does not parse still yields a heuristic finding
/// carrying the error.
Finding buddy_list_text_finding(std::string_view text, Locator where);

/// im-log for files, im-log-fragment for carved spans.
Finding conversation_finding(const imlog::Conversation& conv, Locator where, Confidence confidence);

/// Carved spans from the aim-imlog signature are parsed as IM logs; other
/// signatures yield a bare fragment finding.
Finding carve_finding(const CarveHit& hit, const std::string& source_id);

Finding keyword_finding(const KeywordHit& hit, const std::string& source_id);

}  // namespace aimtrace
