// SPDX-License-Identifier: Apache-2.0
//
// Fixture builders shared by the unit tests and the acceptance runner. These
// write formats from scratch and do not call the library code under test.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using Bytes = std::vector<std::uint8_t>;

Bytes bytes_of(const std::string& s);
Bytes utf16le_of(const std::string& ascii);

// ---- pcap ----

struct Frame {
  std::uint32_t sec = 0;
  std::uint32_t usec = 0;
  Bytes data;
};

/// Classic microsecond pcap, Ethernet link type.
Bytes pcap_file(const std::vector<Frame>& frames, bool big_endian = false);

std::uint32_t ipv4(const std::string& dotted);

inline constexpr std::uint8_t kSyn = 0x02, kAck = 0x10, kPsh = 0x08, kFin = 0x01;

Bytes tcp_frame(std::uint32_t src, std::uint16_t sport, std::uint32_t dst, std::uint16_t dport, std::uint32_t seq,
                std::uint32_t ack, std::uint8_t flags, const Bytes& payload);
Bytes udp_frame(std::uint32_t src, std::uint16_t sport, std::uint32_t dst, std::uint16_t dport, const Bytes& payload);

/// A TCP connection with a three-way handshake, emitting frames with
/// increasing timestamps.
class TcpSession {
 public:
  TcpSession(std::vector<Frame>& out, std::uint32_t client, std::uint16_t cport, std::uint32_t server,
             std::uint16_t sport, std::uint32_t start_sec, std::uint32_t client_isn = 1000,
             std::uint32_t server_isn = 5000);
  void client_send(const Bytes& payload);
  void server_send(const Bytes& payload);
  std::size_t frames_emitted() const { return count_; }

 private:
  void push(bool from_client, std::uint8_t flags, const Bytes& payload);
  std::vector<Frame>& out_;
  std::uint32_t client_, server_;
  std::uint16_t cport_, sport_;
  std::uint32_t cseq_, sseq_;
  std::uint32_t sec_, usec_ = 0;
  std::size_t count_ = 0;
};

// ---- OFT ----

struct OftSpec {
  std::uint16_t type = 0x0101;
  std::array<std::uint8_t, 8> cookie{1, 2, 3, 4, 5, 6, 7, 8};
  std::string filename;
  std::uint32_t total_size = 0;
  std::uint32_t size = 0;
  std::uint16_t header_length = 256;
  std::string id = "Cool FileXfer";
};

Bytes oft_header(const OftSpec& s);

// ---- IM logs ----

struct LogMessage {
  std::string sender;
  std::string cls;   // LOCAL / REMOTE
  std::string time;  // "11:03:39 PM"
  std::string body_html;
};

std::string im_log_row(const LogMessage& m, bool double_quotes = false);
std::string im_date_row(const std::string& text);
/// Document wrapper: XML prolog, the "IM history with buddy" title, body, footer.
std::string im_log_document(const std::string& owner, const std::string& buddy, const std::string& rows);

// ---- Buddy list ----

/// The saved list from the buddy-list scenario: owner Suspect, three groups,
/// each with one friendly-named buddy. `sub_block` writes friendly names as
/// per-buddy blocks instead of trailing quoted tokens.
std::string scenario_blt(bool sub_block = false);

// ---- files ----

void write_bytes(const std::filesystem::path& p, const Bytes& b);
void write_text(const std::filesystem::path& p, const std::string& s);

// ---- registry ----

/// v5 .reg text holding the three AIM install hives, a Run value for aim.exe,
/// a CIDSizeMRU entry naming aim.exe in UTF-16LE and a ROT13 UserAssist name.
std::string scenario_reg();

/// ROT13 by explicit letter table.
std::string rot13_table(const std::string& s);

// ---- combined scenario ----

/// Capture with a login session, an ad request whose referer carries
/// sn=Suspect, and a complete direct file transfer.
Bytes scenario_pcap();

struct FixtureSet {
  std::filesystem::path tree, blob, pcap, reg, blt, imlog;
};

/// Writes every scenario input under `dir`.
FixtureSet write_fixture_set(const std::filesystem::path& dir);

// ---- Windows trees ----

/// Populates `root` with one instance of every AIM path location for a single
/// user profile "X". Returns template id -> root-relative path of the planted entry.
std::map<std::string, std::string> build_full_tree(const std::filesystem::path& root);

/// Empty AIM application folders plus uninstaller remnants.
void build_uninstall_tree(const std::filesystem::path& root);

/// The network_log line quoted for AIM logins.
inline constexpr const char* kNetworkLogLine = "00:26.29 Connection 039456E8: host address 152.163.9.73";

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

}  // namespace fixtures
