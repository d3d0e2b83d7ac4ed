// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <set>

#include "aimtrace/error.hpp"
#include "aimtrace/registry.hpp"
#include "fixtures.hpp"
#include "generators.hpp"

using namespace aimtrace;
using namespace aimtrace::reg;

namespace {

RegExport parse_text(const std::string& s) { return parse_reg_export(fixtures::bytes_of(s)); }

std::string oracle_rot13(const std::string& s) { return fixtures::rot13_table(s); }

std::string hex_list(const Bytes& b) {
  std::string out;
  char buf[4];
  for (std::size_t i = 0; i < b.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%02x", b[i]);
    if (i) out += ",";
    out += buf;
  }
  return out;
}

const char* const kHiveA = R"(HKEY_LOCAL_MACHINE\SOFTWARE\Wow6432Node\America Online)";
const char* const kHiveB = R"(HKEY_LOCAL_MACHINE\SOFTWARE\Wow6432Node\AOL)";
const char* const kHiveC = R"(HKEY_CURRENT_USER\Software\America Online)";
const char* const kRunKey = R"(HKEY_CURRENT_USER\Software\Microsoft\Windows\CurrentVersion\Run)";
const char* const kCidKey =
    R"(HKEY_CURRENT_USER\Software\Microsoft\Windows\CurrentVersion\Explorer\ComDlg32\CIDSizeMRU)";
const char* const kUserAssistKey =
    R"(HKEY_CURRENT_USER\Software\Microsoft\Windows\CurrentVersion\Explorer\UserAssist\{CEBFF5CD-ACE2-4F4F-9178-9926F41749EA}\Count)";

std::string scenario_reg() { return fixtures::scenario_reg(); }

bool covers(const std::vector<Finding>& after, const Finding& f) {
  for (const auto& g : after)
    if (g.artifact_type == f.artifact_type && g.locator == f.locator) return true;
  return false;
}

}  // namespace

TEST(Registry, MinimalExport) {
  auto r = parse_text("Windows Registry Editor Version 5.00\r\n\r\n[HKEY_CURRENT_USER\\Software\\X]\r\n");
  EXPECT_EQ(r.version, RegVersion::V5);
  ASSERT_EQ(r.keys.size(), 1u);
  EXPECT_TRUE(r.keys[0].values.empty());
  EXPECT_THROW(parse_text(""), UnsupportedFormat);
  EXPECT_THROW(parse_text("[HKEY_CURRENT_USER\\X]\r\n"), UnsupportedFormat);
}

TEST(Registry, RunValueText) {
  auto r = parse_reg_export(fixtures::bytes_of(scenario_reg()));
  const RegKey* run = r.find_key(kRunKey);
  ASSERT_NE(run, nullptr);
  const RegValue* v = run->find("AIM");
  ASSERT_NE(v, nullptr);
  ASSERT_TRUE(v->text);
  EXPECT_EQ(*v->text, R"("C:\Program Files (x86)\AIM\aim.exe" /d locale=en-US)");
}

TEST(Registry, DwordLittleEndian) {
  auto r = parse_text("REGEDIT4\r\n[HKEY_CURRENT_USER\\X]\r\n\"n\"=dword:0000000a\r\n");
  const RegValue* v = r.keys.at(0).find("n");
  ASSERT_NE(v, nullptr);
  EXPECT_EQ(v->data, (Bytes{0x0A, 0, 0, 0}));
  EXPECT_EQ(v->number(), 10u);
}

TEST(Registry, HexContinuationAndTypes) {
  auto r = parse_text(
      "Windows Registry Editor Version 5.00\r\n[HKEY_CURRENT_USER\\X]\r\n"
      "\"b\"=hex:01,02,\\\r\n  03\r\n"
      "\"e\"=hex(2):25,00,41,00,25,00,00,00\r\n"
      "\"m\"=hex(7):61,00,00,00,62,00,00,00,00,00\r\n"
      "\"q\"=hex(b):01,00,00,00,00,00,00,00\r\n"
      "\"u\"=hex(a):ff\r\n"
      "\"bad\"=nonsense\r\n"
      "\"gone\"=-\r\n");
  const auto& k = r.keys.at(0);
  EXPECT_EQ(k.find("b")->data, (Bytes{1, 2, 3}));
  EXPECT_EQ(k.find("e")->text, "%A%");
  EXPECT_EQ(k.find("m")->text, "a\nb");
  EXPECT_EQ(k.find("q")->number(), 1u);
  EXPECT_EQ(k.find("u")->type, ValueType::Unknown);
  EXPECT_EQ(k.find("u")->unknown_tag, 0xau);
  EXPECT_EQ(k.find("bad"), nullptr);
  EXPECT_EQ(k.find("gone"), nullptr);
  ASSERT_EQ(r.diagnostics.size(), 2u);
  EXPECT_EQ(r.diagnostics[0].rfind("line 9:", 0), 0u);
}

TEST(Registry, Utf16Input) {
  auto text = scenario_reg();
  Bytes b = {0xFF, 0xFE};
  auto w = fixtures::utf16le_of(text);
  b.insert(b.end(), w.begin(), w.end());
  EXPECT_EQ(parse_reg_export(b), parse_text(text));
}

TEST(Registry, Rot13) {
  EXPECT_EQ(rot13("nvz.rkr"), "aim.exe");
  EXPECT_EQ(rot13(""), "");
  std::mt19937 rng(13);
  for (int i = 0; i < 10000; ++i) {
    std::string s(rng() % 40, ' ');
    for (auto& c : s) c = static_cast<char>(rng());
    const auto once = rot13(s);
    EXPECT_EQ(once.size(), s.size());
    EXPECT_EQ(once, oracle_rot13(s));
    EXPECT_EQ(rot13(once), s);
  }
}

TEST(Registry, ScenarioExtraction) {
  auto found = extract_aim_registry_artifacts(parse_text(scenario_reg()), "S1");
  std::map<ArtifactType, int> count;
  for (const auto& f : found) ++count[f.artifact_type];
  EXPECT_GE(found.size(), 5u);
  EXPECT_EQ(count[ArtifactType::InstallTrace], 4);
  EXPECT_EQ(count[ArtifactType::Autostart], 1);
  EXPECT_EQ(count[ArtifactType::MruTrace], 1);
  for (const auto& f : found) {
    EXPECT_TRUE(f.timestamps.empty());
    if (f.artifact_type == ArtifactType::MruTrace) EXPECT_EQ(f.attributes.at("mru"), "CIDSizeMRU");
    if (f.artifact_type == ArtifactType::Autostart) EXPECT_EQ(f.confidence, Confidence::Definite);
    if (f.attributes.count("hive") && f.attributes.at("hive") == kHiveA) {
      EXPECT_EQ(f.attributes.at("emptied"), "true");
      EXPECT_EQ(f.confidence, Confidence::Probable);
    }
    if (f.attributes.count("usage")) EXPECT_NE(f.attributes.at("decoded_name").find("aim.exe"), std::string::npos);
  }
  EXPECT_TRUE(extract_aim_registry_artifacts(RegExport{}, "S1").empty());
}

TEST(Registry, RecentDocs) {
  std::string s = "Windows Registry Editor Version 5.00\r\n\r\n"
                  "[HKEY_CURRENT_USER\\Software\\Microsoft\\Windows\\CurrentVersion\\Explorer\\RecentDocs\\.blt]\r\n"
                  "\"0\"=hex:" + hex_list(fixtures::utf16le_of("savedbuddylist.blt")) + "\r\n"
                  "\"MRUListEx\"=hex:00,00,00,00,ff,ff,ff,ff\r\n";
  auto found = extract_aim_registry_artifacts(parse_text(s), "S1");
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].artifact_type, ArtifactType::MruTrace);
  EXPECT_NE(found[0].attributes.at("entry").find("savedbuddylist.blt"), std::string::npos);
}

TEST(Registry, RoundTripGeneratedExports) {
  std::mt19937 rng(500);
  for (int i = 0; i < 500; ++i) {
    const RegExport r = gen::reg_export(rng);
    const std::string text = serialize_reg_export(r);
    const auto back = parse_text(text);
    ASSERT_EQ(back, r) << text;
    EXPECT_TRUE(back.diagnostics.empty()) << text;
    EXPECT_EQ(parse_reg_export(encode_reg_export(r)), r);
  }
}

TEST(Registry, FuzzIsTotal) {
  std::mt19937 rng(77);
  const std::string seed = scenario_reg();
  for (int i = 0; i < 3000; ++i) {
    std::string s = seed;
    for (int k = 0; k < 10; ++k) s[rng() % s.size()] = static_cast<char>(rng());
    if (i % 3 == 0) s.resize(rng() % s.size());
    try {
      auto r = parse_text(s);
      extract_aim_registry_artifacts(r, "S1");
    } catch (const UnsupportedFormat&) {
    }
  }
  for (int i = 0; i < 1000; ++i) {
    Bytes b(rng() % 200);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    try {
      parse_reg_export(b);
    } catch (const UnsupportedFormat&) {
    }
  }
}

TEST(Registry, ExtractionIsMonotone) {
  std::mt19937 rng(8);
  const auto full = parse_text(scenario_reg());
  for (int round = 0; round < 200; ++round) {
    RegExport sub;
    sub.version = full.version;
    for (const auto& k : full.keys) {
      if (rng() % 2) continue;
      RegKey kk{k.path, {}};
      for (const auto& v : k.values)
        if (rng() % 2) kk.values.push_back(v);
      sub.keys.push_back(kk);
    }
    RegExport more = sub;
    more.keys.push_back(RegKey{"HKEY_CURRENT_USER\\Software\\Other", {}});
    for (auto& k : more.keys)
      for (const auto& fk : full.keys)
        if (fk.path == k.path) k.values = fk.values;
    const auto before = extract_aim_registry_artifacts(sub, "S1");
    const auto after = extract_aim_registry_artifacts(more, "S1");
    for (const auto& f : before) EXPECT_TRUE(covers(after, f)) << canonical_json(f);
  }
}
