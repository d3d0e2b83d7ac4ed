// SPDX-License-Identifier: Apache-2.0
//
// Classic (microsecond) pcap reading and IPv4/TCP flow reassembly.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aimtrace/evidence.hpp"
#include "aimtrace/text.hpp"

namespace aimtrace::net {

struct PcapRecord {
  std::uint64_t index = 0;
  UtcTime ts{};
  std::uint32_t original_length = 0;
  Bytes data;  // link-layer frame as captured
};

struct PcapFile {
  std::uint32_t link_type = 0;
  bool big_endian = false;
  std::vector<PcapRecord> records;
  std::vector<std::string> diagnostics;
};

inline constexpr std::uint32_t kLinkEthernet = 1;

/// Throws UnsupportedFormat naming "pcapng", "pcap-nanosecond", a non-Ethernet
/// link type, or "unknown" for anything else. A truncated final record is
/// dropped with a diagnostic.
PcapFile read_pcap(ByteView bytes);

struct Endpoint {
  std::uint32_t ip = 0;
  std::uint16_t port = 0;

  std::string str() const;
  friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

/// Bytes of one direction, in sequence order. Missing ranges are not filled;
/// gaps records where in `bytes` they fall.
struct TcpStream {
  struct Gap {
    std::uint64_t stream_offset = 0;
    std::uint64_t missing = 0;
  };
  /// Where each packet's first new byte landed.
  struct Segment {
    std::uint64_t stream_offset = 0;
    std::uint64_t packet_index = 0;
    UtcTime ts{};
  };

  Bytes bytes;
  std::vector<Gap> gaps;
  std::vector<Segment> segments;

  /// Segment carrying the byte at `offset` (nullopt for an empty stream).
  std::optional<Segment> segment_at(std::uint64_t offset) const;
};

struct TcpFlow {
  std::string flow_id;  // "ipA:portA-ipB:portB", lexicographically smaller endpoint first
  Endpoint a;
  Endpoint b;
  TcpStream a_to_b;
  TcpStream b_to_a;
  UtcTime first_ts{};
  UtcTime last_ts{};
  std::uint64_t first_packet = 0;
  std::uint64_t packet_count = 0;
};

struct ReassemblyStats {
  std::size_t non_tcp = 0;
  std::size_t malformed = 0;
  std::size_t fragments = 0;
};

/// Ethernet (optionally 802.1Q tagged) / IPv4 / TCP. Flows come back in order
/// of their first packet. Retransmitted and overlapping bytes are taken once.
std::vector<TcpFlow> reassemble_tcp(const std::vector<PcapRecord>& records, ReassemblyStats* stats = nullptr);

std::string make_flow_id(const Endpoint& x, const Endpoint& y);

}  // namespace aimtrace::net
