// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "aimtrace/error.hpp"
#include "aimtrace/evidence.hpp"

using namespace aimtrace;
using namespace std::chrono;

namespace {

UtcTime at(std::int64_t secs) { return UtcTime{seconds{secs}}; }

Finding make(ArtifactType t, std::string src, std::string path, std::optional<std::int64_t> when,
             std::map<std::string, std::string> attrs = {}) {
  Finding f;
  f.artifact_type = t;
  f.locator = Locator{std::move(src), FilePath{std::move(path)}};
  if (when) f.timestamps.push_back(utc_stamp("t", at(*when)));
  f.attributes = std::move(attrs);
  f.confidence = Confidence::Probable;
  return f;
}

Case sample_case() {
  Case c;
  c.case_id = "case-1";
  register_source(c, SourceKind::FsTree, "/evidence/tree");
  register_source(c, SourceKind::RawBlob, "mem.vmem");
  register_source(c, SourceKind::Pcap, "cap.pcap", "suspect host");
  std::vector<Finding> fs;
  for (int i = 0; i < 4; ++i) fs.push_back(make(ArtifactType::UserAsset, "S1", "f" + std::to_string(i), 1000 + i));
  for (int i = 0; i < 3; ++i) {
    Finding f;
    f.artifact_type = ArtifactType::KeywordHit;
    f.locator = Locator{"S2", ByteRange{static_cast<std::uint64_t>(i * 100), 13}};
    f.attributes["needle"] = "Cool FileXfer";
    fs.push_back(f);
  }
  for (int i = 0; i < 2; ++i) {
    Finding f;
    f.artifact_type = ArtifactType::EndpointSession;
    f.locator = Locator{"S3", PacketRef{static_cast<std::uint64_t>(i), "10.0.0.1:1-10.0.0.2:443"}};
    f.timestamps.push_back(utc_stamp("first_seen", at(500) + microseconds{17}));
    fs.push_back(f);
  }
  Finding rel = make(ArtifactType::LoginIp, "S1", "network_log_1.txt", std::nullopt, {{"ip", "152.163.9.73"}});
  rel.timestamps.push_back(relative_stamp("logged", "00:26.29"));
  fs.push_back(rel);
  Finding local = make(ArtifactType::ImLog, "S1", "Victim.html", std::nullopt);
  local.timestamps.push_back(local_stamp("first_message", LocalTime{sys_days{2015y / January / 18}.time_since_epoch() + hours{23} + minutes{3} + seconds{39}}));
  fs.push_back(local);
  c.findings = merge_findings(fs);
  return c;
}

}  // namespace

TEST(Evidence, RegisterSource) {
  Case c;
  const auto& s = register_source(c, SourceKind::RawBlob, "mem.vmem");
  EXPECT_EQ(s.id, "S1");
  EXPECT_EQ(c.sources.size(), 1u);
  EXPECT_THROW(register_source(c, SourceKind::RawBlob, "mem.vmem"), DuplicateSource);
  const auto& p = register_source(c, SourceKind::Pcap, "cap.pcap");
  EXPECT_NE(p.id, "S1");
  EXPECT_THROW(register_source(c, SourceKind::Pcap, ""), std::invalid_argument);
}

TEST(Evidence, MergeExamples) {
  EXPECT_TRUE(merge_findings({}).empty());
  const Finding f = make(ArtifactType::UserAsset, "S1", "a", 10);
  EXPECT_EQ(merge_findings({f, f}), std::vector<Finding>{f});
  const Finding t2 = make(ArtifactType::UserAsset, "S1", "b", 20);
  const Finding t1 = make(ArtifactType::UserAsset, "S1", "c", 10);
  EXPECT_EQ(merge_findings({t2, t1}), (std::vector<Finding>{t1, t2}));
}

TEST(Evidence, MergeUnionsTimestampsAndKeepsStrongestConfidence) {
  Finding a = make(ArtifactType::UserAsset, "S1", "a", 10);
  Finding b = make(ArtifactType::UserAsset, "S1", "a", 20);
  b.confidence = Confidence::Definite;
  auto out = merge_findings({a, b});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].timestamps.size(), 2u);
  EXPECT_EQ(out[0].confidence, Confidence::Definite);
}

TEST(Evidence, UndatedFindingsSortLast) {
  const Finding undated = make(ArtifactType::InstallTrace, "S1", "a", std::nullopt);
  const Finding dated = make(ArtifactType::UserAsset, "S1", "b", 5);
  auto out = merge_findings({undated, dated});
  EXPECT_EQ(out.front(), dated);
}

TEST(Evidence, MergeIdempotentAndPermutationInvariant) {
  std::mt19937 rng(11);
  std::vector<Finding> input;
  for (int i = 0; i < 60; ++i) {
    std::optional<std::int64_t> when;
    if (rng() % 3) when = rng() % 20;
    input.push_back(make(static_cast<ArtifactType>(rng() % 15), "S1", "p" + std::to_string(rng() % 10), when,
                         {{"k", std::to_string(rng() % 3)}}));
  }
  const auto base = merge_findings(input);
  EXPECT_EQ(merge_findings(base), base);
  for (int n = 0; n < 50; ++n) {
    std::shuffle(input.begin(), input.end(), rng);
    EXPECT_EQ(merge_findings(input), base);
  }
  // Sorted by the documented key: earliest instant, undated last.
  for (std::size_t i = 1; i < base.size(); ++i) {
    auto a = base[i - 1].earliest(), b = base[i].earliest();
    if (a && b) EXPECT_LE(*sort_key(a->value), *sort_key(b->value));
    if (!a) EXPECT_FALSE(b.has_value());
  }
}

TEST(Evidence, SaveLoadRoundTrip) {
  Case empty;
  empty.case_id = "e";
  EXPECT_EQ(load_case(save_case(empty)), empty);

  const Case c = sample_case();
  ASSERT_EQ(c.sources.size(), 3u);
  ASSERT_EQ(c.findings.size(), 11u);
  const std::string text = save_case(c);
  EXPECT_EQ(load_case(text), c);
  EXPECT_EQ(save_case(load_case(text)), text);
  EXPECT_NE(text.find("\"tz\": \"unknown\""), std::string::npos);
  EXPECT_NE(text.find("2015-01-18T23:03:39"), std::string::npos);
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(Evidence, TruncatedCaseIsParseError) {
  const std::string text = save_case(sample_case());
  for (std::size_t cut : {std::size_t{0}, std::size_t{1}, text.size() / 2, text.size() - 3}) {
    EXPECT_THROW(load_case(std::string_view(text).substr(0, cut)), ParseError) << cut;
  }
}

TEST(Evidence, ValidateRejectsDanglingAndMismatchedLocators) {
  Case c = sample_case();
  c.findings.push_back(make(ArtifactType::UserAsset, "S9", "x", 1));
  EXPECT_THROW(validate_case(c), Error);
  Case d = sample_case();
  d.findings.push_back(make(ArtifactType::UserAsset, "S2", "x", 1));  // file path on a raw blob
  EXPECT_THROW(validate_case(d), Error);
}

TEST(Evidence, MergeCaseRemapsSources) {
  Case a;
  a.case_id = "a";
  register_source(a, SourceKind::FsTree, "tree");
  a.findings.push_back(make(ArtifactType::UserAsset, "S1", "x", 1));
  Case b;
  b.case_id = "b";
  register_source(b, SourceKind::Pcap, "cap");
  register_source(b, SourceKind::FsTree, "tree");
  b.findings.push_back(make(ArtifactType::UserAsset, "S2", "y", 2));
  merge_case(a, b);
  EXPECT_EQ(a.sources.size(), 2u);
  ASSERT_EQ(a.findings.size(), 2u);
  for (const auto& f : a.findings) EXPECT_EQ(f.locator.source_id, "S1");
  EXPECT_NO_THROW(validate_case(a));
}

TEST(Evidence, FormatTime) {
  EXPECT_EQ(format_time(at(1421622219)), "2015-01-18T23:03:39Z");
  EXPECT_EQ(format_time(at(0) + microseconds{5}), "1970-01-01T00:00:00.000005Z");
}
