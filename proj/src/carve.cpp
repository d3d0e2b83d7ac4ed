// SPDX-License-Identifier: Apache-2.0
#include "aimtrace/carve.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <istream>
#include <stdexcept>

#include "aimtrace/error.hpp"
#include "json.hpp"

namespace aimtrace {

namespace {

Bytes bytes_of(std::string_view s) { return Bytes(s.begin(), s.end()); }

}  // namespace

void check_signature(const Signature& sig) {
  if (sig.header.empty()) throw std::invalid_argument("signature '" + sig.name + "': empty header");
  if (sig.footer && sig.footer->empty()) throw std::invalid_argument("signature '" + sig.name + "': empty footer");
  if (sig.validator_phrase && sig.validator_phrase->empty())
    throw std::invalid_argument("signature '" + sig.name + "': empty validator phrase");
  std::uint64_t min_len = sig.header.size() + (sig.footer ? sig.footer->size() : 0);
  if (sig.max_length < min_len)
    throw std::invalid_argument("signature '" + sig.name + "': max_length below header+footer length");
}

std::vector<Signature> builtin_signatures() {
  Signature imlog;
  imlog.name = "aim-imlog";
  imlog.header = {0x3C, 0x3F, 0x78, 0x6D, 0x6C, 0x20, 0x76, 0x65, 0x72, 0x73, 0x69, 0x6F, 0x6E, 0x3D, 0x22};
  imlog.footer = Bytes{0x3C, 0x2F, 0x62, 0x6F, 0x64, 0x79, 0x3E, 0x0D, 0x0A, 0x3C, 0x2F, 0x68, 0x74, 0x6D, 0x6C, 0x3E};
  imlog.validator_phrase = bytes_of("IM history with buddy");
  imlog.max_length = kDefaultCarveMaxLength;
  return {imlog};
}

std::string_view to_string(Encoding e) { return e == Encoding::Ascii ? "ascii" : "utf16le"; }

std::optional<Bytes> encode_needle(std::string_view needle, Encoding enc) {
  if (enc == Encoding::Ascii) return bytes_of(needle);
  Bytes out;
  out.reserve(needle.size() * 2);
  for (char c : needle) {
    if (static_cast<unsigned char>(c) >= 0x80) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>(c));
    out.push_back(0);
  }
  return out;
}

BlobScanner::BlobScanner(std::vector<Signature> signatures, std::vector<std::string> needles,
                         std::vector<Encoding> encodings)
    : sigs_(std::move(signatures)), needles_(std::move(needles)), state_(sigs_.size()) {
  for (std::size_t i = 0; i < sigs_.size(); ++i) {
    check_signature(sigs_[i]);
    patterns_.push_back({sigs_[i].header, Role::Header, i});
    if (sigs_[i].validator_phrase) patterns_.push_back({*sigs_[i].validator_phrase, Role::Phrase, i});
    if (sigs_[i].footer) patterns_.push_back({*sigs_[i].footer, Role::Footer, i});
  }
  std::sort(encodings.begin(), encodings.end());
  encodings.erase(std::unique(encodings.begin(), encodings.end()), encodings.end());
  for (std::size_t i = 0; i < needles_.size(); ++i) {
    if (needles_[i].empty()) throw std::invalid_argument("keyword_search: empty needle");
    for (auto enc : encodings) {
      // Non-ASCII needles are only searched as raw (UTF-8) bytes.
      if (auto b = encode_needle(needles_[i], enc)) patterns_.push_back({std::move(*b), Role::Needle, i, enc});
    }
  }
  // Headers must be open and validator phrases known before a footer closes a span.
  std::stable_sort(patterns_.begin(), patterns_.end(),
                   [](const Pattern& a, const Pattern& b) { return a.role < b.role; });
}

void BlobScanner::close(std::size_t sig, std::uint64_t start, std::uint64_t length, bool terminated) {
  const auto& s = sigs_[sig];
  bool validated = false;
  if (s.validator_phrase) {
    const auto& phrases = state_[sig].phrases;
    auto it = std::lower_bound(phrases.begin(), phrases.end(), start);
    validated = it != phrases.end() && *it + s.validator_phrase->size() <= start + length;
  }
  CarveHit hit;
  hit.signature_name = s.name;
  hit.offset = start;
  hit.length = length;
  auto first = window_.begin() + static_cast<std::ptrdiff_t>(start - base_);
  hit.payload.assign(first, first + static_cast<std::ptrdiff_t>(length));
  hit.validated = validated;
  hit.terminated = terminated;
  carves_.push_back(std::move(hit));
}

void BlobScanner::emit_keyword(const PendingKeyword& k, std::uint64_t end) {
  const auto& p = patterns_[k.pattern];
  KeywordHit hit;
  hit.needle = needles_[p.owner];
  hit.encoding = p.encoding;
  hit.offset = k.offset;
  hit.context_offset = k.offset >= kKeywordContext ? k.offset - kKeywordContext : 0;
  std::uint64_t ctx_end = std::min(end, k.offset + p.bytes.size() + kKeywordContext);
  auto first = window_.begin() + static_cast<std::ptrdiff_t>(hit.context_offset - base_);
  hit.context.assign(first, first + static_cast<std::ptrdiff_t>(ctx_end - hit.context_offset));
  keywords_.push_back(std::move(hit));
}

void BlobScanner::feed(ByteView chunk) {
  if (finished_) throw std::logic_error("BlobScanner::feed after finish");
  window_.insert(window_.end(), chunk.begin(), chunk.end());
  const std::uint64_t end = position();

  for (std::size_t pi = 0; pi < patterns_.size(); ++pi) {
    auto& p = patterns_[pi];
    const std::size_t len = p.bytes.size();
    if (end < len) continue;
    const std::uint64_t last_start = end - len;
    const std::uint8_t first_byte = p.bytes.front();
    std::uint64_t from = p.next;
    while (from <= last_start) {
      const auto* base_ptr = window_.data() + (from - base_);
      const auto* hitp = static_cast<const std::uint8_t*>(
          std::memchr(base_ptr, first_byte, static_cast<std::size_t>(last_start - from + 1)));
      if (hitp == nullptr) break;
      const std::uint64_t at = from + static_cast<std::uint64_t>(hitp - base_ptr);
      if (std::memcmp(hitp, p.bytes.data(), len) == 0) {
        switch (p.role) {
          case Role::Header:
            state_[p.owner].open.push_back(at);
            break;
          case Role::Phrase:
            state_[p.owner].phrases.push_back(at);
            break;
          case Role::Footer: {
            auto& st = state_[p.owner];
            const auto& sig = sigs_[p.owner];
            const std::size_t hlen = sig.header.size();
            while (!st.open.empty() && st.open.front() + hlen <= at) {
              const std::uint64_t h = st.open.front();
              st.open.pop_front();
              const std::uint64_t span = at + len - h;
              if (span <= sig.max_length) {
                close(p.owner, h, span, true);
              } else {
                close(p.owner, h, sig.max_length, false);
              }
            }
            break;
          }
          case Role::Needle:
            pending_.push_back({pi, at});
            break;
        }
      }
      from = at + 1;
    }
    p.next = std::max(p.next, last_start + 1);
  }

  // Spans that can no longer meet a footer within max_length.
  for (std::size_t i = 0; i < sigs_.size(); ++i) {
    auto& open = state_[i].open;
    while (!open.empty() && open.front() + sigs_[i].max_length <= end) {
      close(i, open.front(), sigs_[i].max_length, false);
      open.pop_front();
    }
  }

  std::erase_if(pending_, [&](const PendingKeyword& k) {
    if (k.offset + patterns_[k.pattern].bytes.size() + kKeywordContext > end) return false;
    emit_keyword(k, end);
    return true;
  });

  compact();
}

void BlobScanner::compact() {
  std::uint64_t retain = position();
  for (const auto& p : patterns_) {
    std::uint64_t need = p.next;
    if (p.role == Role::Needle) need = need >= kKeywordContext ? need - kKeywordContext : 0;
    retain = std::min(retain, need);
  }
  for (std::size_t i = 0; i < sigs_.size(); ++i) {
    auto& st = state_[i];
    if (!st.open.empty()) retain = std::min(retain, st.open.front());
    // Phrases before the oldest span that could still be open are dead.
    std::uint64_t live = st.open.empty() ? position() : st.open.front();
    for (const auto& p : patterns_)
      if (p.role == Role::Header && p.owner == i) live = std::min(live, p.next);
    while (!st.phrases.empty() && st.phrases.front() < live) st.phrases.pop_front();
  }
  for (const auto& k : pending_)
    retain = std::min(retain, k.offset >= kKeywordContext ? k.offset - kKeywordContext : 0);
  retain = std::max(retain, base_);
  const std::uint64_t drop = retain - base_;
  if (drop >= (1u << 16) && drop >= window_.size() / 2) {
    window_.erase(window_.begin(), window_.begin() + static_cast<std::ptrdiff_t>(drop));
    base_ = retain;
  }
}

void BlobScanner::finish() {
  if (finished_) return;
  finished_ = true;
  const std::uint64_t end = position();
  for (std::size_t i = 0; i < sigs_.size(); ++i) {
    for (auto h : state_[i].open) close(i, h, end - h, false);
    state_[i].open.clear();
  }
  for (const auto& k : pending_) emit_keyword(k, end);
  pending_.clear();
  std::sort(carves_.begin(), carves_.end(), [](const CarveHit& a, const CarveHit& b) {
    return std::tie(a.offset, a.signature_name, a.length) < std::tie(b.offset, b.signature_name, b.length);
  });
  std::sort(keywords_.begin(), keywords_.end(), [](const KeywordHit& a, const KeywordHit& b) {
    return std::tie(a.offset, a.encoding, a.needle) < std::tie(b.offset, b.encoding, b.needle);
  });
  window_.clear();
  window_.shrink_to_fit();
}

void run_scanner(BlobScanner& scanner, std::istream& in, std::size_t chunk_size) {
  if (chunk_size == 0) throw std::invalid_argument("chunk size must be positive");
  std::vector<char> buf(chunk_size);
  while (true) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (in.bad()) throw IoError("read failed", scanner.position() + got);
    if (got > 0) scanner.feed({reinterpret_cast<const std::uint8_t*>(buf.data()), got});
    if (!in) break;
  }
  scanner.finish();
}

std::vector<CarveHit> scan_signatures(std::istream& in, const std::vector<Signature>& sigs, std::size_t chunk_size) {
  BlobScanner scanner(sigs, {}, {});
  run_scanner(scanner, in, chunk_size);
  return scanner.carve_hits();
}

std::vector<CarveHit> scan_signatures(ByteView blob, const std::vector<Signature>& sigs, std::size_t chunk_size) {
  if (chunk_size == 0) throw std::invalid_argument("chunk size must be positive");
  BlobScanner scanner(sigs, {}, {});
  for (std::size_t off = 0; off < blob.size(); off += chunk_size)
    scanner.feed(blob.subspan(off, std::min(chunk_size, blob.size() - off)));
  scanner.finish();
  return scanner.carve_hits();
}

std::vector<KeywordHit> keyword_search(std::istream& in, const std::vector<std::string>& needles,
                                       const std::vector<Encoding>& encodings, std::size_t chunk_size) {
  BlobScanner scanner({}, needles, encodings);
  run_scanner(scanner, in, chunk_size);
  return scanner.keyword_hits();
}

std::vector<KeywordHit> keyword_search(ByteView blob, const std::vector<std::string>& needles,
                                       const std::vector<Encoding>& encodings, std::size_t chunk_size) {
  if (chunk_size == 0) throw std::invalid_argument("chunk size must be positive");
  BlobScanner scanner({}, needles, encodings);
  for (std::size_t off = 0; off < blob.size(); off += chunk_size)
    scanner.feed(blob.subspan(off, std::min(chunk_size, blob.size() - off)));
  scanner.finish();
  return scanner.keyword_hits();
}

}  // namespace aimtrace

namespace aimtrace {

namespace {

Bytes parse_hex_bytes(std::string_view s, const std::string& what, std::uint64_t end) {
  Bytes out;
  int hi = -1;
  for (char c : s) {
    if (c == ' ' || c == ',') continue;
    if (!std::isxdigit(static_cast<unsigned char>(c))) throw ParseError("signature catalog: bad hex in " + what, end);
    const int v = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : std::tolower(c) - 'a' + 10;
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(static_cast<std::uint8_t>(hi << 4 | v));
      hi = -1;
    }
  }
  if (hi >= 0) throw ParseError("signature catalog: odd hex digit count in " + what, end);
  return out;
}

}  // namespace

std::vector<Signature> load_signatures(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("signature catalog: ") + e.what(), e.byte);
  }
  const std::uint64_t end = json_text.size();
  if (!doc.is_array()) throw ParseError("signature catalog: expected a JSON array", end);
  std::vector<Signature> out;
  try {
    for (const auto& item : doc) {
      Signature s;
      s.name = item.at("name").get<std::string>();
      s.header = parse_hex_bytes(item.at("header").get<std::string>(), s.name, end);
      if (item.contains("footer")) s.footer = parse_hex_bytes(item["footer"].get<std::string>(), s.name, end);
      s.max_length = item.value("max_length", kDefaultCarveMaxLength);
      if (item.contains("validator_phrase")) {
        const auto phrase = item["validator_phrase"].get<std::string>();
        s.validator_phrase = Bytes(phrase.begin(), phrase.end());
      }
      try {
        check_signature(s);
      } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("signature catalog: ") + e.what(), end);
      }
      out.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("signature catalog: ") + e.what(), end);
  }
  return out;
}

}  // namespace aimtrace
