// SPDX-License-Identifier: Apache-2.0
#include "aimtrace/oft3.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <map>
#include <tuple>

namespace aimtrace::net {

namespace {

constexpr std::uint8_t kMagic[4] = {'O', 'F', 'T', '2'};

std::uint16_t be16(const std::uint8_t* p) { return static_cast<std::uint16_t>((p[0] << 8) | p[1]); }
std::uint32_t be32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | p[3];
}

std::string nul_trimmed(const std::uint8_t* p, std::size_t n) {
  const auto* end = static_cast<const std::uint8_t*>(std::memchr(p, 0, n));
  return std::string(reinterpret_cast<const char*>(p), end ? static_cast<std::size_t>(end - p) : n);
}

bool magic_at(ByteView s, std::size_t pos) {
  return s.size() - pos >= 4 && std::memcmp(s.data() + pos, kMagic, 4) == 0;
}

}  // namespace

Oft3Scan scan_oft3(ByteView s) {
  Oft3Scan out;
  std::size_t pos = 0;
  while (pos + 4 <= s.size()) {
    const auto* hit = static_cast<const std::uint8_t*>(std::memchr(s.data() + pos, 'O', s.size() - pos));
    if (!hit) break;
    pos = static_cast<std::size_t>(hit - s.data());
    if (!magic_at(s, pos)) {
      ++pos;
      continue;
    }
    const std::size_t avail = s.size() - pos;
    if (avail < 6) {
      out.diagnostics.push_back("partial OFT header at stream offset " + std::to_string(pos));
      break;
    }
    const std::uint8_t* h = s.data() + pos;
    const std::uint16_t len = be16(h + 4);
    if (len < kOftMinHeaderLength) {
      ++pos;
      continue;
    }
    if (avail < len) {
      out.diagnostics.push_back("partial OFT header at stream offset " + std::to_string(pos) + ": " +
                                std::to_string(avail) + " of " + std::to_string(len) + " bytes present");
      break;
    }
    Oft3Header hdr;
    hdr.id_string = nul_trimmed(h + kOftIdOffset, 32);
    if (hdr.id_string != kOftIdString) {
      ++pos;
      continue;
    }
    hdr.stream_offset = pos;
    hdr.header_length = len;
    hdr.type_code = be16(h + 6);
    std::copy(h + 8, h + 16, hdr.cookie.begin());
    hdr.encrypt = be16(h + 16);
    hdr.compress = be16(h + 18);
    hdr.total_files = be16(h + 20);
    hdr.files_left = be16(h + 22);
    hdr.total_parts = be16(h + 24);
    hdr.parts_left = be16(h + 26);
    hdr.total_size = be32(h + 28);
    hdr.size = be32(h + 32);
    hdr.mod_time = be32(h + 36);
    hdr.checksum = be32(h + 40);
    for (std::size_t i = 0; i < hdr.fork_fields.size(); ++i) hdr.fork_fields[i] = be32(h + 44 + 4 * i);
    hdr.flags = h[100];
    hdr.name_offset = h[101];
    hdr.size_offset = h[102];
    hdr.null_block_clean =
        std::all_of(h + kOftNullBlockOffset, h + kOftNullBlockOffset + kOftNullBlockLength, [](std::uint8_t b) { return b == 0; });
    auto [name, lossy] = sanitize_utf8(nul_trimmed(h + kOftFilenameOffset, len - kOftFilenameOffset));
    hdr.filename = std::move(name);
    hdr.filename_lossy = lossy;
    out.headers.push_back(std::move(hdr));

    pos += len;
    // File data follows a header in the sending direction; when another header
    // comes next instead, nothing is skipped.
    if (!magic_at(s, pos)) pos += std::min<std::size_t>(out.headers.back().size, s.size() - pos);
  }
  return out;
}

std::string_view to_string(TransferStatus s) {
  switch (s) {
    case TransferStatus::Prompted: return "prompted";
    case TransferStatus::Acknowledged: return "acknowledged";
    case TransferStatus::Complete: return "complete";
    case TransferStatus::IncompleteUnknown: return "incomplete-unknown";
  }
  return "incomplete-unknown";
}

std::string_view to_string(TransferMode m) { return m == TransferMode::Proxied ? "proxied" : "direct"; }

FlowHeaders scan_flow(const TcpFlow& flow) {
  return FlowHeaders{scan_oft3(flow.a_to_b.bytes).headers, scan_oft3(flow.b_to_a.bytes).headers};
}

std::vector<TransferEvent> aggregate_transfers(const FlowHeaders& headers, const TcpFlow& flow,
                                               const KnowledgeBase& kb) {
  struct Seen {
    std::uint64_t packet;
    int direction;
    std::uint64_t offset;
    UtcTime ts;
    const Oft3Header* hdr;
  };
  std::map<std::array<std::uint8_t, 8>, std::vector<Seen>> by_cookie;
  auto collect = [&](const std::vector<Oft3Header>& hs, const TcpStream& stream, int direction) {
    for (const auto& h : hs) {
      auto seg = stream.segment_at(h.stream_offset);
      by_cookie[h.cookie].push_back({seg ? seg->packet_index : flow.first_packet, direction, h.stream_offset,
                                     seg ? seg->ts : flow.first_ts, &h});
    }
  };
  collect(headers.a_to_b, flow.a_to_b, 0);
  collect(headers.b_to_a, flow.b_to_a, 1);

  const bool proxied = is_proxy(kb, flow.a.ip) || is_proxy(kb, flow.b.ip);
  std::vector<TransferEvent> out;
  for (auto& [cookie, seen] : by_cookie) {
    std::sort(seen.begin(), seen.end(), [](const Seen& x, const Seen& y) {
      return std::tie(x.packet, x.direction, x.offset) < std::tie(y.packet, y.direction, y.offset);
    });
    TransferEvent ev;
    ev.flow_id = flow.flow_id;
    ev.mode = proxied ? TransferMode::Proxied : TransferMode::Direct;
    ev.peer_ips = {format_ipv4(flow.a.ip), format_ipv4(flow.b.ip)};
    ev.cookie_hex = hex_string(cookie);
    ev.first_packet = seen.front().packet;
    ev.declared_size = seen.front().hdr->total_size;
    for (const auto& s : seen) {
      ev.observed_types.push_back(s.hdr->type_code);
      if (ev.filename.empty()) ev.filename = s.hdr->filename;
      if (s.hdr->type_code == kOftPrompt && !ev.prompt_ts) ev.prompt_ts = s.ts;
      if (s.hdr->type_code == kOftDone && !ev.done_ts) ev.done_ts = s.ts;
    }
    if (ev.done_ts) {
      ev.status = TransferStatus::Complete;
    } else {
      switch (ev.observed_types.back()) {
        case kOftPrompt: ev.status = TransferStatus::Prompted; break;
        case kOftAck: ev.status = TransferStatus::Acknowledged; break;
        default: ev.status = TransferStatus::IncompleteUnknown; break;
      }
    }
    out.push_back(std::move(ev));
  }
  std::sort(out.begin(), out.end(), [](const TransferEvent& x, const TransferEvent& y) {
    return std::tie(x.first_packet, x.cookie_hex) < std::tie(y.first_packet, y.cookie_hex);
  });
  return out;
}

Finding transfer_finding(const TransferEvent& ev, const std::string& source_id) {
  Finding f;
  f.artifact_type = ArtifactType::TransferEvent;
  f.locator = Locator{source_id, PacketRef{ev.first_packet, ev.flow_id}};
  if (ev.prompt_ts) f.timestamps.push_back(utc_stamp("prompt", *ev.prompt_ts));
  if (ev.done_ts) f.timestamps.push_back(utc_stamp("done", *ev.done_ts));
  f.attributes["filename"] = ev.filename;
  f.attributes["status"] = std::string(to_string(ev.status));
  f.attributes["mode"] = std::string(to_string(ev.mode));
  f.attributes["peer_ips"] = ev.peer_ips.first + "," + ev.peer_ips.second;
  f.attributes["declared_size"] = std::to_string(ev.declared_size);
  f.attributes["cookie"] = ev.cookie_hex;
  std::string types;
  for (auto t : ev.observed_types) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%04X", t);
    if (!types.empty()) types += ",";
    types += buf;
  }
  f.attributes["types"] = types;
  f.confidence = ev.status == TransferStatus::Complete ? Confidence::Definite : Confidence::Probable;
  return f;
}

}  // namespace aimtrace::net
