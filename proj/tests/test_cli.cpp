// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "aimtrace/cli.hpp"
#include "aimtrace/evidence.hpp"
#include "fixtures.hpp"
#include "json.hpp"

using namespace aimtrace;
namespace stdfs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const stdfs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Every extractor, merged into one case, exported both ways.
std::pair<std::string, std::string> pipeline(const fixtures::FixtureSet& fx, const stdfs::path& work) {
  stdfs::create_directories(work);
  auto w = [&](const char* name) { return (work / name).string(); };
  EXPECT_EQ(cli({"--case-id", "demo", "case", "new", "--id", "demo", "--out", w("case.json")}).code, 0);
  EXPECT_EQ(cli({"--case-id", "demo", "scan-fs", "--root", fx.tree.string(), "--out", w("fs.json")}).code, 0);
  EXPECT_EQ(cli({"--case-id", "demo", "carve", "--input", fx.blob.string(), "--screen-name", "Suspect", "--out",
                 w("carve.json")}).code, 0);
  EXPECT_EQ(cli({"--case-id", "demo", "blt", fx.blt.string(), "--out", w("blt.json")}).code, 0);
  EXPECT_EQ(cli({"--case-id", "demo", "imlog", fx.imlog.string(), "--out", w("imlog.json")}).code, 0);
  EXPECT_EQ(cli({"--case-id", "demo", "pcap", fx.pcap.string(), "--out", w("pcap.json")}).code, 0);
  EXPECT_EQ(cli({"--case-id", "demo", "reg", fx.reg.string(), "--out", w("reg.json")}).code, 0);
  EXPECT_EQ(cli({"case", "add", "--case", w("case.json"), w("fs.json"), w("carve.json"), w("blt.json"), w("imlog.json"),
                 w("pcap.json"), w("reg.json")}).code, 0);
  EXPECT_EQ(cli({"report", "--case", w("case.json"), "--format", "json", "--out", w("report.json")}).code, 0);
  EXPECT_EQ(cli({"report", "--case", w("case.json"), "--format", "csv", "--out", w("report.csv")}).code, 0);
  return {slurp(work / "report.json"), slurp(work / "report.csv")};
}

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({"blt", "/nonexistent/missing.blt"}).code, kExitUnreadable);
  EXPECT_EQ(cli({"report", "--case", "x.json", "--format", "xml"}).code, kExitUsage);
  EXPECT_EQ(cli({"--bogus"}).code, kExitUsage);
  EXPECT_EQ(cli({}).code, kExitUsage);
  auto dir = fixtures::temp_dir("cli_codes");
  fixtures::write_text(dir / "bad.json", "{\"case_id\":");
  EXPECT_EQ(cli({"report", "--case", (dir / "bad.json").string(), "--format", "json"}).code, kExitUnreadable);
  fixtures::write_text(dir / "not.pcap", "nothing here");
  auto r = cli({"pcap", (dir / "not.pcap").string()});
  EXPECT_EQ(r.code, kExitUnreadable);
  EXPECT_TRUE(r.out.empty());
  EXPECT_FALSE(r.err.empty());
  stdfs::remove_all(dir);
}

TEST(Cli, BltToStdout) {
  auto dir = fixtures::temp_dir("cli_blt");
  fixtures::write_text(dir / "list.blt", fixtures::scenario_blt());
  auto r = cli({"blt", (dir / "list.blt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  Case c = load_case(r.out);
  ASSERT_EQ(c.findings.size(), 1u);
  EXPECT_EQ(c.findings[0].artifact_type, ArtifactType::BuddyList);
  EXPECT_EQ(c.findings[0].attributes.at("owner"), "Suspect");
  stdfs::remove_all(dir);
}

TEST(Cli, PipelineIsDeterministic) {
  auto dir = fixtures::temp_dir("cli_pipe");
  const auto fx = fixtures::write_fixture_set(dir / "in");
  const auto first = pipeline(fx, dir / "run1");
  const auto second = pipeline(fx, dir / "run2");
  EXPECT_EQ(first.first, second.first);
  EXPECT_EQ(first.second, second.second);

  auto j = nlohmann::json::parse(first.first);
  std::map<std::string, int> types;
  for (const auto& f : j["findings"]) ++types[f["artifact_type"].get<std::string>()];
  for (const char* t : {"install-trace", "autostart", "mru-trace", "buddy-list", "im-log", "im-log-fragment",
                        "keyword-hit", "transfer-event", "login-ip", "endpoint-session", "screen-name", "profile-url"})
    EXPECT_GT(types[t], 0) << t;
  EXPECT_EQ(j["sources"].size(), 6u);
  stdfs::remove_all(dir);
}

TEST(Cli, CaseMergeOrderIndependent) {
  auto dir = fixtures::temp_dir("cli_merge");
  fixtures::write_text(dir / "a.blt", fixtures::scenario_blt());
  fixtures::write_text(dir / "n.reg", fixtures::scenario_reg());
  auto a = (dir / "a.json").string(), b = (dir / "b.json").string();
  ASSERT_EQ(cli({"blt", (dir / "a.blt").string(), "--out", a}).code, 0);
  ASSERT_EQ(cli({"reg", (dir / "n.reg").string(), "--out", b}).code, 0);
  auto ab = cli({"--case-id", "m", "case", "merge", a, b});
  auto ba = cli({"--case-id", "m", "case", "merge", b, a});
  ASSERT_EQ(ab.code, 0) << ab.err;
  // Source ids follow argument order, so compare findings keyed by source uri.
  auto by_uri = [](const std::string& text) {
    Case c = load_case(text);
    std::vector<Finding> out = c.findings;
    for (auto& f : out) f.locator.source_id = c.find_source(f.locator.source_id)->uri;
    return merge_findings(out);
  };
  EXPECT_EQ(by_uri(ab.out), by_uri(ba.out));
  EXPECT_EQ(cli({"case", "merge", a}).code, kExitUsage);
  stdfs::remove_all(dir);
}

TEST(Cli, CarveExtractsSpans) {
  auto dir = fixtures::temp_dir("cli_carve");
  const auto fx = fixtures::write_fixture_set(dir / "in");
  auto r = cli({"carve", "--input", fx.blob.string(), "--extract", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(stdfs::exists(dir / "out" / "aim-imlog_1048576.bin"));
  Case c = load_case(r.out);
  int keyword = 0;
  for (const auto& f : c.findings)
    if (f.artifact_type == ArtifactType::KeywordHit && f.attributes.at("needle") == "Cool FileXfer") {
      ++keyword;
      EXPECT_EQ(f.attributes.at("encoding"), "utf16le");
    }
  EXPECT_EQ(keyword, 1);
  stdfs::remove_all(dir);
}

TEST(Cli, DefaultKeywords) {
  const auto& k = default_keywords();
  EXPECT_NE(std::find(k.begin(), k.end(), "IM history with buddy"), k.end());
  EXPECT_NE(std::find(k.begin(), k.end(), "Cool FileXfer"), k.end());
}
