// SPDX-License-Identifier: Apache-2.0
//
// OFT file-transfer header dissection and per-flow transfer aggregation.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aimtrace/endpoints.hpp"
#include "aimtrace/evidence.hpp"
#include "aimtrace/pcap.hpp"

namespace aimtrace::net {

inline constexpr std::size_t kOftMinHeaderLength = 256;
inline constexpr std::size_t kOftIdOffset = 68;
inline constexpr std::size_t kOftNullBlockOffset = 103;
inline constexpr std::size_t kOftNullBlockLength = 89;
inline constexpr std::size_t kOftFilenameOffset = 192;
inline constexpr std::string_view kOftIdString = "Cool FileXfer";

inline constexpr std::uint16_t kOftPrompt = 0x0101;
inline constexpr std::uint16_t kOftAck = 0x0202;
inline constexpr std::uint16_t kOftDone = 0x0204;

struct Oft3Header {
  std::uint64_t stream_offset = 0;
  std::uint16_t header_length = 0;
  std::uint16_t type_code = 0;
  std::array<std::uint8_t, 8> cookie{};
  std::uint16_t encrypt = 0;
  std::uint16_t compress = 0;
  std::uint16_t total_files = 0;
  std::uint16_t files_left = 0;
  std::uint16_t total_parts = 0;
  std::uint16_t parts_left = 0;
  std::uint32_t total_size = 0;
  std::uint32_t size = 0;
  std::uint32_t mod_time = 0;
  std::uint32_t checksum = 0;  // stored, never validated
  // Resource-fork and progress fields at 44..67, kept raw.
  std::array<std::uint32_t, 6> fork_fields{};
  std::string id_string;
  std::uint8_t flags = 0;
  std::uint8_t name_offset = 0;
  std::uint8_t size_offset = 0;
  bool null_block_clean = true;  // all 89 bytes before the filename are zero
  std::string filename;
  bool filename_lossy = false;
};

struct Oft3Scan {
  std::vector<Oft3Header> headers;
  std::vector<std::string> diagnostics;
};

Oft3Scan scan_oft3(ByteView stream);
inline std::vector<Oft3Header> parse_oft3(ByteView stream) { return scan_oft3(stream).headers; }

enum class TransferStatus { Prompted, Acknowledged, Complete, IncompleteUnknown };
enum class TransferMode { Direct, Proxied };

std::string_view to_string(TransferStatus s);
std::string_view to_string(TransferMode m);

struct TransferEvent {
  std::string flow_id;
  std::string filename;
  TransferStatus status = TransferStatus::IncompleteUnknown;
  TransferMode mode = TransferMode::Direct;
  std::pair<std::string, std::string> peer_ips;
  std::uint64_t declared_size = 0;
  std::optional<UtcTime> prompt_ts;
  std::optional<UtcTime> done_ts;
  std::string cookie_hex;
  std::vector<std::uint16_t> observed_types;
  std::uint64_t first_packet = 0;
};

struct FlowHeaders {
  std::vector<Oft3Header> a_to_b;
  std::vector<Oft3Header> b_to_a;
};

FlowHeaders scan_flow(const TcpFlow& flow);

/// One event per cookie, ordered by first packet.
std::vector<TransferEvent> aggregate_transfers(const FlowHeaders& headers, const TcpFlow& flow,
                                               const KnowledgeBase& kb);

Finding transfer_finding(const TransferEvent& ev, const std::string& source_id);

}  // namespace aimtrace::net
