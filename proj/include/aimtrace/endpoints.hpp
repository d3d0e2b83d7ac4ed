// SPDX-License-Identifier: Apache-2.0
//
// Endpoint knowledge base and the HTTP screen-name scan.
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "aimtrace/evidence.hpp"
#include "aimtrace/pcap.hpp"

namespace aimtrace::net {

inline constexpr std::string_view kRoleTags[] = {"login", "crl", "ocsp", "messaging", "proxy", "advert", "web"};

struct EndpointRecord {
  std::string ip;
  std::uint8_t prefix_len = 32;  // 32 = exact address
  std::string owner;
  std::vector<std::string> urls;
  std::set<std::string> role_tags;

  friend bool operator==(const EndpointRecord&, const EndpointRecord&) = default;
};

using KnowledgeBase = std::vector<EndpointRecord>;

const KnowledgeBase& builtin_knowledge_base();

/// JSON array of {ip, prefix_len?, owner, urls, role_tags}. Throws ParseError.
KnowledgeBase load_knowledge_base(std::string_view json_text);

bool record_matches(const EndpointRecord& r, std::uint32_t ip);
bool is_proxy(const KnowledgeBase& kb, std::uint32_t ip);

/// One endpoint-session finding per (flow, matching record).
std::vector<Finding> classify_endpoints(const std::vector<TcpFlow>& flows, const KnowledgeBase& kb,
                                        const std::string& source_id);

/// `sn` values from AIM_UAC_v2.adp / at.atwola.com request targets and Referers.
std::vector<Finding> scan_http_screen_names(const std::vector<TcpFlow>& flows, const std::string& source_id);

/// Value of `key` in the query part of `url`, percent-decoded.
std::optional<std::string> query_param(std::string_view url, std::string_view key);

}  // namespace aimtrace::net
