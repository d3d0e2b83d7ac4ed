// SPDX-License-Identifier: Apache-2.0
#include "aimtrace/endpoints.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "aimtrace/error.hpp"
#include "json.hpp"

namespace aimtrace::net {

namespace {

EndpointRecord row(std::string ip, std::string owner, std::vector<std::string> urls, std::set<std::string> roles,
                   std::uint8_t prefix = 32) {
  return EndpointRecord{std::move(ip), prefix, std::move(owner), std::move(urls), std::move(roles)};
}

std::string join(const std::vector<std::string>& v, std::string_view sep) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

std::string join(const std::set<std::string>& v, std::string_view sep) {
  return join(std::vector<std::string>(v.begin(), v.end()), sep);
}

std::uint32_t prefix_mask(std::uint8_t len) {
  return len == 0 ? 0u : (len >= 32 ? 0xFFFFFFFFu : ~((1u << (32 - len)) - 1u));
}

}  // namespace

const KnowledgeBase& builtin_knowledge_base() {
  static const KnowledgeBase kb = [] {
    const std::string aol = "AOL. Inc.";
    KnowledgeBase k;
    k.push_back(row("62.12.173.139", "Cyberlink Internet Services AG", {"Kdc-aim.egslb.aol.com", "Kdc.uas.aol.com"},
                    {"login"}));
    k.push_back(row("64.12.104.89", aol, {"bos-m016a-new-rdr2.blue.aol.com"}, {"messaging"}));
    k.push_back(row("149.174.110.118", aol, {"www.aol.com"}, {"web"}));
    k.push_back(row("205.188.14.120", aol, {"ars.oscar.aol.com"}, {"proxy"}));
    k.push_back(row("205.188.87.7", aol, {"crl.egslb.aol.com", "crl.aol.com"}, {"crl"}));
    k.push_back(row("205.188.88.125", aol, {"abapi.abweb.aol.com"}, {"web"}));
    k.push_back(row("205.188.98.4", aol, {"ocsp.egslb.aol.com", "ocsp.web.aol.com"}, {"ocsp"}));
    k.push_back(row("207.200.74.66", aol, {"www.aim.com"}, {"web"}));
    k.push_back(row("199.7.52.72", "", {"ocsp.verisign.net", "ocsp.verisign.com"}, {"ocsp"}));
    k.push_back(row("207.200.74.12", aol, {"my.screenname.aol.com.aol.akadns.net", "my.screenname.aol.com"},
                    {"login"}));
    k.push_back(row("64.12.96.217", aol, {"at.atwola.com"}, {"advert"}));
    k.push_back(row("207.200.74.71", aol, {"at.atwola.com"}, {"advert"}));
    k.push_back(row("64.12.104.0", aol, {}, {"messaging"}, 24));
    return k;
  }();
  return kb;
}

KnowledgeBase load_knowledge_base(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("knowledge base: ") + e.what(), e.byte);
  }
  const std::uint64_t end = json_text.size();
  if (!doc.is_array()) throw ParseError("knowledge base: expected a JSON array", end);
  KnowledgeBase kb;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("ip") || !item["ip"].is_string())
      throw ParseError("knowledge base: each row needs a string \"ip\"", end);
    EndpointRecord r;
    r.ip = item["ip"].get<std::string>();
    if (!parse_ipv4(r.ip)) throw ParseError("knowledge base: bad IPv4 address " + r.ip, end);
    try {
      r.prefix_len = static_cast<std::uint8_t>(item.value("prefix_len", 32));
      r.owner = item.value("owner", std::string{});
      r.urls = item.value("urls", std::vector<std::string>{});
      for (const auto& t : item.value("role_tags", std::vector<std::string>{})) {
        if (std::find(std::begin(kRoleTags), std::end(kRoleTags), t) == std::end(kRoleTags))
          throw ParseError("knowledge base: unknown role tag " + t, end);
        r.role_tags.insert(t);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("knowledge base: ") + e.what(), end);
    }
    if (r.prefix_len > 32) throw ParseError("knowledge base: prefix_len above 32", end);
    kb.push_back(std::move(r));
  }
  return kb;
}

bool record_matches(const EndpointRecord& r, std::uint32_t ip) {
  auto base = parse_ipv4(r.ip);
  if (!base) return false;
  const auto mask = prefix_mask(r.prefix_len);
  return (ip & mask) == (*base & mask);
}

bool is_proxy(const KnowledgeBase& kb, std::uint32_t ip) {
  return std::any_of(kb.begin(), kb.end(),
                     [ip](const EndpointRecord& r) { return r.role_tags.count("proxy") && record_matches(r, ip); });
}

std::vector<Finding> classify_endpoints(const std::vector<TcpFlow>& flows, const KnowledgeBase& kb,
                                        const std::string& source_id) {
  std::vector<Finding> out;
  for (const auto& flow : flows) {
    for (const auto* ep : {&flow.a, &flow.b}) {
      const Endpoint& peer = ep == &flow.a ? flow.b : flow.a;
      const bool exact_known = std::any_of(kb.begin(), kb.end(), [ep](const EndpointRecord& r) {
        return r.prefix_len == 32 && record_matches(r, ep->ip);
      });
      for (const auto& r : kb) {
        if (!record_matches(r, ep->ip)) continue;
        // A broader prefix rule adds nothing once the exact address is listed.
        if (r.prefix_len < 32 && exact_known) continue;
        Finding f;
        f.artifact_type = ArtifactType::EndpointSession;
        f.locator = Locator{source_id, PacketRef{flow.first_packet, flow.flow_id}};
        f.timestamps = {utc_stamp("first_seen", flow.first_ts), utc_stamp("last_seen", flow.last_ts)};
        f.attributes["owner"] = r.owner;
        f.attributes["urls"] = join(r.urls, ", ");
        f.attributes["role_tags"] = join(r.role_tags, ",");
        f.attributes["endpoint"] = ep->str();
        f.attributes["peer"] = peer.str();
        f.attributes["port"] = std::to_string(ep->port);
        f.attributes["peer_port"] = std::to_string(peer.port);
        f.attributes["flow_id"] = flow.flow_id;
        f.attributes["packets"] = std::to_string(flow.packet_count);
        f.attributes["match"] = r.prefix_len == 32 ? "exact" : r.ip + "/" + std::to_string(r.prefix_len);
        if (ep->port == 443 && r.role_tags.count("messaging")) f.attributes["note"] = "probable conversation session";
        f.confidence = r.prefix_len == 32 ? Confidence::Definite : Confidence::Probable;
        out.push_back(std::move(f));
      }
    }
  }
  return merge_findings(std::move(out));
}

std::optional<std::string> query_param(std::string_view url, std::string_view key) {
  auto q = url.find('?');
  if (q == std::string_view::npos) return std::nullopt;
  std::string_view query = url.substr(q + 1);
  if (auto hash = query.find('#'); hash != std::string_view::npos) query = query.substr(0, hash);
  while (!query.empty()) {
    auto amp = query.find('&');
    std::string_view pair = query.substr(0, amp);
    auto eq = pair.find('=');
    std::string_view k = pair.substr(0, eq);
    if (k == key) return percent_decode(eq == std::string_view::npos ? std::string_view{} : pair.substr(eq + 1));
    if (amp == std::string_view::npos) break;
    query.remove_prefix(amp + 1);
  }
  return std::nullopt;
}

namespace {

constexpr std::string_view kMethods[] = {"GET", "POST", "HEAD", "PUT", "DELETE", "OPTIONS", "CONNECT", "TRACE", "PATCH"};
constexpr std::string_view kAdvertHost = "at.atwola.com";
constexpr std::string_view kUacPage = "AIM_UAC_v2.adp";

std::string_view url_host(std::string_view url) {
  auto scheme = url.find("://");
  if (scheme == std::string_view::npos) return {};
  std::string_view rest = url.substr(scheme + 3);
  rest = rest.substr(0, rest.find_first_of("/?#"));
  if (auto at = rest.rfind('@'); at != std::string_view::npos) rest.remove_prefix(at + 1);
  return rest.substr(0, rest.find(':'));
}

struct Request {
  std::uint64_t offset;
  std::string target;
  std::string host;
  std::string referer;
};

std::vector<Request> http_requests(std::string_view s) {
  std::vector<Request> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t eol = s.find('\n', pos);
    std::string_view line = s.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    const std::size_t line_start = pos;
    pos = eol == std::string_view::npos ? s.size() : eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    auto sp1 = line.find(' ');
    if (sp1 == std::string_view::npos) continue;
    auto method = line.substr(0, sp1);
    if (std::find(std::begin(kMethods), std::end(kMethods), method) == std::end(kMethods)) continue;
    auto sp2 = line.rfind(' ');
    if (sp2 == sp1 || !line.substr(sp2 + 1).starts_with("HTTP/1.")) continue;
    Request req{line_start, std::string(trim(line.substr(sp1 + 1, sp2 - sp1 - 1))), {}, {}};

    while (pos < s.size()) {
      std::size_t e = s.find('\n', pos);
      std::string_view h = s.substr(pos, e == std::string_view::npos ? std::string_view::npos : e - pos);
      pos = e == std::string_view::npos ? s.size() : e + 1;
      if (!h.empty() && h.back() == '\r') h.remove_suffix(1);
      if (h.empty()) break;
      auto colon = h.find(':');
      if (colon == std::string_view::npos) continue;
      auto name = h.substr(0, colon);
      auto value = trim(h.substr(colon + 1));
      if (iequals(name, "Host")) req.host = std::string(value.substr(0, value.find(':')));
      else if (iequals(name, "Referer")) req.referer = std::string(value);
    }
    out.push_back(std::move(req));
  }
  return out;
}

}  // namespace

std::vector<Finding> scan_http_screen_names(const std::vector<TcpFlow>& flows, const std::string& source_id) {
  struct Hit {
    std::uint64_t packet;
    std::string flow_id;
    std::uint64_t offset;
    UtcTime ts;
    std::string via;
    std::string url;
  };
  std::map<std::string, std::vector<Hit>> by_name;

  for (const auto& flow : flows) {
    for (const auto* stream : {&flow.a_to_b, &flow.b_to_a}) {
      for (const auto& req : http_requests(as_chars(stream->bytes))) {
        auto seg = stream->segment_at(req.offset);
        auto record = [&](const std::string& url, const char* via) {
          auto sn = query_param(url, "sn");
          if (!sn || sn->empty()) return;
          by_name[*sn].push_back(
              {seg ? seg->packet_index : flow.first_packet, flow.flow_id, req.offset, seg ? seg->ts : flow.first_ts,
               via, url});
        };
        const bool target_ok = icontains(req.target, kUacPage) || iequals(req.host, kAdvertHost) ||
                                iequals(url_host(req.target), kAdvertHost);
        if (target_ok) record(req.target, "request-target");
        if (!req.referer.empty() &&
            (icontains(req.referer, kUacPage) || iequals(url_host(req.referer), kAdvertHost)))
          record(req.referer, "referer");
      }
    }
  }

  std::vector<Finding> out;
  for (auto& [name, hits] : by_name) {
    std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) {
      return std::tie(x.packet, x.flow_id, x.offset, x.via) < std::tie(y.packet, y.flow_id, y.offset, y.via);
    });
    const Hit& first = hits.front();
    Finding f;
    f.artifact_type = ArtifactType::ScreenName;
    f.locator = Locator{source_id, PacketRef{first.packet, first.flow_id}};
    f.timestamps = {utc_stamp("first_seen", first.ts)};
    f.attributes["screen_name"] = name;
    f.attributes["via"] = first.via;
    f.attributes["url"] = first.url;
    f.attributes["occurrences"] = std::to_string(hits.size());
    f.confidence = Confidence::Probable;
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace aimtrace::net
