// SPDX-License-Identifier: Apache-2.0
//
// Timeline construction and report export.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aimtrace/evidence.hpp"

namespace aimtrace {

struct TimelineEvent {
  TimeValue instant;
  TimeQualifier qualifier = TimeQualifier::Exact;
  ArtifactType artifact_type = ArtifactType::UserAsset;
  std::string label;
  std::string summary;
  std::uint64_t finding_index = 0;
};

/// Exact and file-metadata timestamps, ascending; ties by artifact type, then finding index.
std::vector<TimelineEvent> build_timeline(const Case& c);

/// Relative-token timestamps, in finding order. They are never placed on the dated timeline.
std::vector<TimelineEvent> relative_events(const Case& c);

std::string summarize(const Finding& f);

enum class ReportFormat { Json, Csv };

std::string export_report(const Case& c, ReportFormat format);

/// RFC 4180 field quoting.
std::string csv_field(std::string_view s);

}  // namespace aimtrace
