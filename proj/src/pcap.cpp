// SPDX-License-Identifier: Apache-2.0
#include "aimtrace/pcap.hpp"

#include <algorithm>
#include <map>

#include "aimtrace/error.hpp"

namespace aimtrace::net {

namespace {

std::uint16_t be16(const std::uint8_t* p) { return static_cast<std::uint16_t>((p[0] << 8) | p[1]); }
std::uint32_t be32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | p[3];
}
std::uint32_t le32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[3]) << 24) | (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[1]) << 8) | p[0];
}

struct RawSegment {
  std::uint32_t seq;
  bool syn;
  std::uint64_t packet_index;
  UtcTime ts;
  ByteView payload;
};

struct Direction {
  std::vector<RawSegment> segments;
};

struct FlowBuilder {
  Endpoint a, b;
  Direction a_to_b, b_to_a;
  UtcTime first_ts{}, last_ts{};
  std::uint64_t first_packet = 0;
  std::uint64_t packets = 0;
};

TcpStream assemble(const Direction& dir) {
  TcpStream out;
  if (dir.segments.empty()) return out;
  const std::uint32_t ref = dir.segments.front().seq;
  auto rel = [ref](std::uint32_t seq) { return static_cast<std::int64_t>(static_cast<std::int32_t>(seq - ref)); };

  // Stream origin: the byte after the SYN when one was seen, else the lowest data sequence number.
  std::optional<std::int64_t> origin;
  for (const auto& s : dir.segments)
    if (s.syn) {
      origin = rel(s.seq) + 1;
      break;
    }
  struct Placed {
    std::int64_t start;
    const RawSegment* seg;
  };
  std::vector<Placed> placed;
  for (const auto& s : dir.segments) {
    if (s.payload.empty()) continue;
    placed.push_back({rel(s.seq) + (s.syn ? 1 : 0), &s});
  }
  if (placed.empty()) return out;
  if (!origin) {
    origin = placed.front().start;
    for (const auto& p : placed) origin = std::min(*origin, p.start);
  }
  std::stable_sort(placed.begin(), placed.end(), [](const Placed& x, const Placed& y) {
    return x.start != y.start ? x.start < y.start : x.seg->packet_index < y.seg->packet_index;
  });

  std::int64_t cursor = *origin;  // next sequence offset wanted
  for (const auto& p : placed) {
    const std::int64_t end = p.start + static_cast<std::int64_t>(p.seg->payload.size());
    if (end <= cursor) continue;
    if (p.start > cursor) {
      out.gaps.push_back({out.bytes.size(), static_cast<std::uint64_t>(p.start - cursor)});
      cursor = p.start;
    }
    const auto skip = static_cast<std::size_t>(cursor - p.start);
    out.segments.push_back({out.bytes.size(), p.seg->packet_index, p.seg->ts});
    out.bytes.insert(out.bytes.end(), p.seg->payload.begin() + static_cast<std::ptrdiff_t>(skip), p.seg->payload.end());
    cursor = end;
  }
  return out;
}

}  // namespace

PcapFile read_pcap(ByteView bytes) {
  if (bytes.size() < 4) throw UnsupportedFormat("unknown");
  const std::uint32_t magic_le = le32(bytes.data());
  PcapFile file;
  switch (magic_le) {
    case 0xA1B2C3D4: file.big_endian = false; break;
    case 0xD4C3B2A1: file.big_endian = true; break;
    case 0xA1B23C4D:
    case 0x4D3CB2A1: throw UnsupportedFormat("pcap-nanosecond");
    case 0x0A0D0D0A: throw UnsupportedFormat("pcapng");
    default: throw UnsupportedFormat("unknown");
  }
  if (bytes.size() < 24) throw UnsupportedFormat("truncated pcap header");
  auto u32 = [&file](const std::uint8_t* p) { return file.big_endian ? be32(p) : le32(p); };
  file.link_type = u32(bytes.data() + 20) & 0x0FFFFFFF;
  if (file.link_type != kLinkEthernet) throw UnsupportedFormat("pcap link type " + std::to_string(file.link_type));

  std::size_t pos = 24;
  std::uint64_t index = 0;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 16) {
      file.diagnostics.push_back("truncated record header at byte " + std::to_string(pos) + " dropped");
      break;
    }
    const std::uint32_t sec = u32(bytes.data() + pos);
    const std::uint32_t usec = u32(bytes.data() + pos + 4);
    const std::uint32_t incl = u32(bytes.data() + pos + 8);
    const std::uint32_t orig = u32(bytes.data() + pos + 12);
    if (incl > orig) {
      file.diagnostics.push_back("record at byte " + std::to_string(pos) +
                                 " has captured length above original length; reading stopped");
      break;
    }
    if (bytes.size() - pos - 16 < incl) {
      file.diagnostics.push_back("truncated record at byte " + std::to_string(pos) + " dropped");
      break;
    }
    PcapRecord rec;
    rec.index = index++;
    rec.ts = UtcTime{std::chrono::seconds{sec} + std::chrono::microseconds{usec}};
    rec.original_length = orig;
    rec.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos + 16),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + 16 + incl));
    file.records.push_back(std::move(rec));
    pos += 16 + incl;
  }
  return file;
}

std::string Endpoint::str() const { return format_ipv4(ip) + ":" + std::to_string(port); }

std::string make_flow_id(const Endpoint& x, const Endpoint& y) {
  auto sx = x.str(), sy = y.str();
  return sx <= sy ? sx + "-" + sy : sy + "-" + sx;
}

std::optional<TcpStream::Segment> TcpStream::segment_at(std::uint64_t offset) const {
  if (segments.empty()) return std::nullopt;
  auto it = std::upper_bound(segments.begin(), segments.end(), offset,
                             [](std::uint64_t off, const Segment& s) { return off < s.stream_offset; });
  if (it == segments.begin()) return segments.front();
  return *std::prev(it);
}

std::vector<TcpFlow> reassemble_tcp(const std::vector<PcapRecord>& records, ReassemblyStats* stats) {
  ReassemblyStats local;
  ReassemblyStats& st = stats ? *stats : local;
  std::map<std::string, FlowBuilder> flows;

  for (const auto& rec : records) {
    const auto& d = rec.data;
    std::size_t off = 12;
    if (d.size() < 14) {
      ++st.malformed;
      continue;
    }
    std::uint16_t ethertype = be16(d.data() + off);
    off += 2;
    while (ethertype == 0x8100 || ethertype == 0x88A8) {
      if (d.size() < off + 4) break;
      ethertype = be16(d.data() + off + 2);
      off += 4;
    }
    if (ethertype != 0x0800) {
      ++st.non_tcp;
      continue;
    }
    if (d.size() < off + 20 || (d[off] >> 4) != 4) {
      ++st.malformed;
      continue;
    }
    const std::size_t ihl = (d[off] & 0x0F) * 4u;
    const std::size_t total = be16(d.data() + off + 2);
    if (ihl < 20 || total < ihl || d.size() < off + ihl) {
      ++st.malformed;
      continue;
    }
    const std::uint16_t frag = be16(d.data() + off + 6);
    if ((frag & 0x2000) != 0 || (frag & 0x1FFF) != 0) {
      ++st.fragments;
      continue;
    }
    if (d[off + 9] != 6) {
      ++st.non_tcp;
      continue;
    }
    const std::uint32_t src_ip = be32(d.data() + off + 12);
    const std::uint32_t dst_ip = be32(d.data() + off + 16);
    const std::size_t ip_end = std::min(d.size(), off + total);
    const std::size_t tcp = off + ihl;
    if (ip_end < tcp + 20) {
      ++st.malformed;
      continue;
    }
    const std::size_t thl = (d[tcp + 12] >> 4) * 4u;
    if (thl < 20 || ip_end < tcp + thl) {
      ++st.malformed;
      continue;
    }
    Endpoint src{src_ip, be16(d.data() + tcp)};
    Endpoint dst{dst_ip, be16(d.data() + tcp + 2)};
    const std::uint32_t seq = be32(d.data() + tcp + 4);
    const bool syn = (d[tcp + 13] & 0x02) != 0;

    const std::string id = make_flow_id(src, dst);
    auto [it, inserted] = flows.try_emplace(id);
    FlowBuilder& fb = it->second;
    if (inserted) {
      const bool src_first = src.str() <= dst.str();
      fb.a = src_first ? src : dst;
      fb.b = src_first ? dst : src;
      fb.first_ts = rec.ts;
      fb.first_packet = rec.index;
    }
    fb.first_ts = std::min(fb.first_ts, rec.ts);
    fb.last_ts = std::max(fb.last_ts, rec.ts);
    ++fb.packets;
    Direction& dir = (src == fb.a && dst == fb.b) ? fb.a_to_b : fb.b_to_a;
    dir.segments.push_back({seq, syn, rec.index, rec.ts, ByteView(d).subspan(tcp + thl, ip_end - tcp - thl)});
  }

  std::vector<TcpFlow> out;
  for (auto& [id, fb] : flows) {
    TcpFlow f;
    f.flow_id = id;
    f.a = fb.a;
    f.b = fb.b;
    f.a_to_b = assemble(fb.a_to_b);
    f.b_to_a = assemble(fb.b_to_a);
    f.first_ts = fb.first_ts;
    f.last_ts = fb.last_ts;
    f.first_packet = fb.first_packet;
    f.packet_count = fb.packets;
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(), [](const TcpFlow& x, const TcpFlow& y) { return x.first_packet < y.first_packet; });
  return out;
}

}  // namespace aimtrace::net
