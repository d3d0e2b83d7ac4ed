// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace fixtures {

Bytes bytes_of(const std::string& s) { return Bytes(s.begin(), s.end()); }

Bytes utf16le_of(const std::string& ascii) {
  Bytes b;
  for (unsigned char c : ascii) {
    b.push_back(c);
    b.push_back(0);
  }
  return b;
}

namespace {

void put16be(Bytes& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v >> 8));
  b.push_back(static_cast<std::uint8_t>(v));
}
void put32be(Bytes& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
}
void put32(Bytes& b, std::uint32_t v, bool be) {
  if (be) {
    put32be(b, v);
  } else {
    for (int s = 0; s < 32; s += 8) b.push_back(static_cast<std::uint8_t>(v >> s));
  }
}
void put16(Bytes& b, std::uint16_t v, bool be) {
  if (be) {
    put16be(b, v);
  } else {
    b.push_back(static_cast<std::uint8_t>(v));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
  }
}

Bytes ethernet_ipv4(std::uint32_t src, std::uint32_t dst, std::uint8_t proto, const Bytes& l4) {
  Bytes f = {0x00, 0x11, 0x22, 0x33, 0x44, 0x55, 0x66, 0x77, 0x88, 0x99, 0xAA, 0xBB, 0x08, 0x00};
  f.push_back(0x45);
  f.push_back(0);
  put16be(f, static_cast<std::uint16_t>(20 + l4.size()));
  put16be(f, 0x1234);
  put16be(f, 0x4000);  // DF
  f.push_back(64);
  f.push_back(proto);
  put16be(f, 0);
  put32be(f, src);
  put32be(f, dst);
  f.insert(f.end(), l4.begin(), l4.end());
  return f;
}

}  // namespace

Bytes pcap_file(const std::vector<Frame>& frames, bool be) {
  Bytes b;
  put32(b, 0xA1B2C3D4, be);
  put16(b, 2, be);
  put16(b, 4, be);
  put32(b, 0, be);
  put32(b, 0, be);
  put32(b, 65535, be);
  put32(b, 1, be);
  for (const auto& fr : frames) {
    put32(b, fr.sec, be);
    put32(b, fr.usec, be);
    put32(b, static_cast<std::uint32_t>(fr.data.size()), be);
    put32(b, static_cast<std::uint32_t>(fr.data.size()), be);
    b.insert(b.end(), fr.data.begin(), fr.data.end());
  }
  return b;
}

std::uint32_t ipv4(const std::string& dotted) {
  std::istringstream in(dotted);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    unsigned part = 0;
    char dot;
    in >> part;
    if (i < 3) in >> dot;
    v = (v << 8) | (part & 0xFF);
  }
  return v;
}

Bytes tcp_frame(std::uint32_t src, std::uint16_t sport, std::uint32_t dst, std::uint16_t dport, std::uint32_t seq,
                std::uint32_t ack, std::uint8_t flags, const Bytes& payload) {
  Bytes t;
  put16be(t, sport);
  put16be(t, dport);
  put32be(t, seq);
  put32be(t, ack);
  t.push_back(0x50);
  t.push_back(flags);
  put16be(t, 65535);
  put16be(t, 0);
  put16be(t, 0);
  t.insert(t.end(), payload.begin(), payload.end());
  return ethernet_ipv4(src, dst, 6, t);
}

Bytes udp_frame(std::uint32_t src, std::uint16_t sport, std::uint32_t dst, std::uint16_t dport, const Bytes& payload) {
  Bytes u;
  put16be(u, sport);
  put16be(u, dport);
  put16be(u, static_cast<std::uint16_t>(8 + payload.size()));
  put16be(u, 0);
  u.insert(u.end(), payload.begin(), payload.end());
  return ethernet_ipv4(src, dst, 17, u);
}

TcpSession::TcpSession(std::vector<Frame>& out, std::uint32_t client, std::uint16_t cport, std::uint32_t server,
                       std::uint16_t sport, std::uint32_t start_sec, std::uint32_t client_isn,
                       std::uint32_t server_isn)
    : out_(out), client_(client), server_(server), cport_(cport), sport_(sport), cseq_(client_isn),
      sseq_(server_isn), sec_(start_sec) {
  push(true, kSyn, {});
  ++cseq_;
  push(false, kSyn | kAck, {});
  ++sseq_;
  push(true, kAck, {});
}

void TcpSession::push(bool from_client, std::uint8_t flags, const Bytes& payload) {
  Frame f;
  f.sec = sec_;
  f.usec = usec_;
  usec_ += 1000;
  if (usec_ >= 1000000) {
    usec_ -= 1000000;
    ++sec_;
  }
  f.data = from_client ? tcp_frame(client_, cport_, server_, sport_, cseq_, sseq_, flags, payload)
                       : tcp_frame(server_, sport_, client_, cport_, sseq_, cseq_, flags, payload);
  out_.push_back(std::move(f));
  ++count_;
}

void TcpSession::client_send(const Bytes& payload) {
  push(true, kAck | kPsh, payload);
  cseq_ += static_cast<std::uint32_t>(payload.size());
}

void TcpSession::server_send(const Bytes& payload) {
  push(false, kAck | kPsh, payload);
  sseq_ += static_cast<std::uint32_t>(payload.size());
}

Bytes oft_header(const OftSpec& s) {
  if (s.header_length < 256) throw std::invalid_argument("OFT header length below 256");
  Bytes h(s.header_length, 0);
  h[0] = 'O';
  h[1] = 'F';
  h[2] = 'T';
  h[3] = '2';
  h[4] = static_cast<std::uint8_t>(s.header_length >> 8);
  h[5] = static_cast<std::uint8_t>(s.header_length);
  h[6] = static_cast<std::uint8_t>(s.type >> 8);
  h[7] = static_cast<std::uint8_t>(s.type);
  for (int i = 0; i < 8; ++i) h[8 + i] = s.cookie[i];
  auto set16 = [&h](std::size_t off, std::uint16_t v) {
    h[off] = static_cast<std::uint8_t>(v >> 8);
    h[off + 1] = static_cast<std::uint8_t>(v);
  };
  auto set32 = [&h](std::size_t off, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) h[off + i] = static_cast<std::uint8_t>(v >> (24 - 8 * i));
  };
  set16(20, 1);  // total files
  set16(22, 1);  // files left
  set16(24, 1);  // total parts
  set16(26, 1);  // parts left
  set32(28, s.total_size);
  set32(32, s.size);
  set32(36, 1421622219);  // 2015-01-18T23:03:39Z
  set32(40, 0xFFFF0000);
  for (std::size_t i = 0; i < s.id.size() && i < 32; ++i) h[68 + i] = static_cast<std::uint8_t>(s.id[i]);
  h[101] = 0x1C;
  h[102] = 0x11;
  for (std::size_t i = 0; i < s.filename.size() && 192 + i < h.size(); ++i)
    h[192 + i] = static_cast<std::uint8_t>(s.filename[i]);
  return h;
}

std::string im_log_row(const LogMessage& m, bool dq) {
  const char q = dq ? '"' : '\'';
  std::string r = "<tr><td class=";
  r += q + m.cls + q + ">" + m.sender + " (" + m.time + ")</td><td class=" + q + "msg" + q + " width=" + q + "100" +
       q + "><FONT face=" + q + "Arial" + q + " size=" + q + "2" + q + " color=" + q + "#000000" + q + ">" +
       m.body_html + "</FONT></td></tr>\r\n";
  return r;
}

std::string im_date_row(const std::string& text) { return "<tr><td class='time'>" + text + "</td></tr>\r\n"; }

std::string im_log_document(const std::string& owner, const std::string& buddy, const std::string& rows) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\r\n<html><head><title>IM history with buddy " + buddy +
         "</title></head>\r\n<body><h3>" + owner + "</h3><table>\r\n" + rows + "</table>\r\n</body>\r\n</html>";
}

std::string scenario_blt(bool sub_block) {
  std::string s = "Config {\n version 1\n}\nUser {\n screenName Suspect\n}\nBuddy {\n list {\n";
  struct Row {
    const char* group;
    const char* buddy;
    const char* friendly;
  };
  const Row rows[] = {{"Buddies", "VictimTwo", "Phantom Friend 1"},
                      {"family", "uf3f1211fc2@gmail.com", "Victim"},
                      {"\"Group 1\"", "VictimThree", "Phantom Buddy 1"}};
  for (const auto& r : rows) {
    s += "  " + std::string(r.group) + " {\n";
    if (sub_block) s += "   " + std::string(r.buddy) + " {\n    friendly \"" + r.friendly + "\"\n   }\n";
    else s += "   " + std::string(r.buddy) + " \"" + r.friendly + "\"\n";
    s += "  }\n";
  }
  s += " }\n}\n";
  return s;
}

void write_bytes(const std::filesystem::path& p, const Bytes& b) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

void write_text(const std::filesystem::path& p, const std::string& s) { write_bytes(p, bytes_of(s)); }

std::filesystem::path temp_dir(const std::string& tag) {
  static std::atomic<int> n{0};
  auto p = std::filesystem::temp_directory_path() /
           ("aimtrace_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::map<std::string, std::string> build_full_tree(const std::filesystem::path& root) {
  const std::string u = "Users/X/";
  const std::string pf = "Windows/Prefetch/";
  const std::string search = "ProgramData/Microsoft/Search/Data/Applications/Windows/";
  std::map<std::string, std::string> planted = {
      {"program-files-x86-aim", "Program Files (x86)/AIM"},
      {"program-files-aim", "Program Files/AIM"},
      {"appdata-local-aim", u + "AppData/Local/AIM"},
      {"desktop-link", u + "Desktop/AIM.lnk"},
      {"quick-launch-link", u + "AppData/Roaming/Microsoft/Internet Explorer/Quick Launch/AIM.lnk"},
      {"prefetch-aim", pf + "AIM.EXE-4B1F2C3D.pf"},
      {"prefetch-aiminst", pf + "AIMINST.EXE-0A1B2C3D.pf"},
      {"prefetch-aimlan", pf + "AIMLAN~1.EXE-11223344.pf"},
      {"prefetch-setup", pf + "SETUP.EXE-55667788.pf"},
      {"prefetch-install-aim", pf + "INSTALL_AIM.EXE-99AABBCC.pf"},
      {"prefetch-uninst", pf + "UNINST.EXE-DDEEFF00.pf"},
      {"aimx-bin-local", u + "AppData/Local/aimx.bin"},
      {"aimx-bin-app-folder", u + "AppData/Local/AIM/aimx.bin"},
      {"uac-cache", u + "AppData/Local/Microsoft/Windows/INetCache/IE/8K2JX4QZ/AIM_UAC_v2.htm"},
      {"buddy-icon-cache", u + "AppData/Roaming/acccore/caches/users/suspect/buddyicon/bartIDs_devformat_01"},
      {"buddy-list", u + "Desktop/savedbuddylist.blt"},
      {"im-log", u + "Documents/AIMLogger/Suspect/IM Logs/Victim.html"},
      {"settings", u + "AppData/Local/AIM/Settings/suspect/settings.xml"},
      {"network-log", u + "AppData/Local/AIM/Logs/network_log_1.txt"},
      {"nsis-remnant-a", u + "AppData/Local/Temp/A~NSISu_.exe"},
      {"nsis-remnant-b", u + "AppData/Local/Temp/B~NSISu_.exe"},
      {"search-index", search + "Windows.edb"},
      {"search-index-log", search + "edb00001.log"},
  };
  for (const auto& [id, rel] : planted) {
    const auto p = root / rel;
    if (id == "program-files-x86-aim" || id == "program-files-aim") {
      write_text(p / "aim.exe", "MZ");
    } else if (id == "appdata-local-aim") {
      std::filesystem::create_directories(p);
    } else if (id == "buddy-list") {
      write_text(p, scenario_blt());
    } else if (id == "im-log") {
      write_text(p, im_log_document("Suspect", "Victim",
                                    im_date_row("Sunday, January 18, 2015") +
                                        im_log_row({"Suspect", "LOCAL", "11:03:39 PM", "hello"})));
    } else if (id == "network-log") {
      write_text(p, std::string("00:00.01 starting\r\n") + kNetworkLogLine + "\r\n");
    } else {
      write_text(p, id);
    }
  }
  return planted;
}

void build_uninstall_tree(const std::filesystem::path& root) {
  std::filesystem::create_directories(root / "Program Files (x86)/AIM");
  std::filesystem::create_directories(root / "Users/X/AppData/Local/AIM");
  write_text(root / "Windows/Prefetch/UNINST.EXE-DDEEFF00.pf", "pf");
  write_text(root / "Users/X/AppData/Local/Temp/A~NSISu_.exe", "a");
  write_text(root / "Users/X/AppData/Local/Temp/B~NSISu_.exe", "b");
}

std::string rot13_table(const std::string& s) {
  const std::string from = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
  const std::string to = "nopqrstuvwxyzabcdefghijklmNOPQRSTUVWXYZABCDEFGHIJKLM";
  std::string out = s;
  for (auto& c : out)
    if (auto p = from.find(c); p != std::string::npos) c = to[p];
  return out;
}

namespace {

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

}  // namespace

std::string scenario_reg() {
  Bytes cid = utf16le_of("aim.exe");
  cid.insert(cid.end(), {0, 0, 0x4e, 0x00});
  const std::string cu = "HKEY_CURRENT_USER\\Software\\Microsoft\\Windows\\CurrentVersion\\";
  std::string s = "Windows Registry Editor Version 5.00\r\n\r\n";
  s += "[HKEY_LOCAL_MACHINE\\SOFTWARE\\Wow6432Node\\America Online]\r\n\r\n";
  s += "[HKEY_LOCAL_MACHINE\\SOFTWARE\\Wow6432Node\\AOL\\AIM]\r\n\"Version\"=\"7.5.23.1\"\r\n\r\n";
  s += "[HKEY_CURRENT_USER\\Software\\America Online]\r\n\r\n";
  s += "[" + cu + "Run]\r\n";
  s += R"("AIM"="\"C:\\Program Files (x86)\\AIM\\aim.exe\" /d locale=en-US")" "\r\n\r\n";
  s += "[" + cu + "Explorer\\ComDlg32\\CIDSizeMRU]\r\n\"0\"=hex:" + hex_list(cid) + "\r\n\r\n";
  s += "[" + cu + "Explorer\\UserAssist\\{CEBFF5CD-ACE2-4F4F-9178-9926F41749EA}\\Count]\r\n";
  s += "\"" + rot13_table(R"({7C5A40EF-A0FB-4BFC-874A-C0F2E0B9FA8E}\\AIM\\aim.exe)") + "\"=hex:00,00,00,00\r\n";
  return s;
}

Bytes scenario_pcap() {
  std::vector<Frame> frames;
  const std::uint32_t host = ipv4("192.168.1.10");
  {
    TcpSession login(frames, host, 49200, ipv4("62.12.173.139"), 443, 1421600000);
    login.client_send(Bytes(64, 0x16));
    login.server_send(Bytes(64, 0x16));
  }
  {
    TcpSession ad(frames, host, 49201, ipv4("64.12.96.217"), 80, 1421600010);
    ad.client_send(bytes_of(
        "GET /addyn/3.0/5113.1/ HTTP/1.1\r\nHost: at.atwola.com\r\nReferer: "
        "http://www.aim.com/redirects/inclient/AIM_UAC_v2.adp?locale=en-US&magic=93321503&width=180&height=150&sn="
        "Suspect\r\n\r\n"));
    ad.server_send(bytes_of("HTTP/1.1 200 OK\r\nContent-Length: 0\r\n\r\n"));
  }
  {
    TcpSession xfer(frames, host, 5190, ipv4("192.168.1.20"), 4443, 1421622219);
    OftSpec spec{0x0101, {9, 8, 7, 6, 5, 4, 3, 2}, "SuspectToVictim.docx", 1200, 1200};
    xfer.client_send(oft_header(spec));
    spec.type = 0x0202;
    xfer.server_send(oft_header(spec));
    xfer.client_send(Bytes(1200, 0x5A));
    spec.type = 0x0204;
    xfer.server_send(oft_header(spec));
  }
  return pcap_file(frames);
}

FixtureSet write_fixture_set(const std::filesystem::path& dir) {
  FixtureSet f;
  f.tree = dir / "tree";
  build_full_tree(f.tree);
  f.blob = dir / "memory.bin";
  {
    std::mt19937 rng(31337);
    Bytes blob(4u << 20);
    for (auto& x : blob) {
      x = static_cast<std::uint8_t>(rng());
      if (x == 0x3C) x = 0x20;
    }
    const auto log = bytes_of(im_log_document(
        "Suspect", "Victim",
        im_date_row("Sunday, January 18, 2015") + im_log_row({"Suspect", "LOCAL", "11:03:39 PM", "hello"})));
    std::copy(log.begin(), log.end(), blob.begin() + 1048576);
    const auto xfer = utf16le_of("Cool FileXfer");
    std::copy(xfer.begin(), xfer.end(), blob.begin() + 3000000);
    write_bytes(f.blob, blob);
  }
  f.pcap = dir / "capture.pcap";
  write_bytes(f.pcap, scenario_pcap());
  f.reg = dir / "ntuser.reg";
  write_text(f.reg, scenario_reg());
  f.blt = dir / "savedbuddylist.blt";
  write_text(f.blt, scenario_blt());
  f.imlog = f.tree / "Users/X/Documents/AIMLogger/Suspect/IM Logs/Victim.html";
  return f;
}

}  // namespace fixtures
