// SPDX-License-Identifier: Apache-2.0
//
// Signature carving and dual-encoding keyword search over raw blobs (memory
// dumps, swap, unallocated space). Both run on one streaming engine whose
// memory use is bounded by the largest signature span, not the blob size.
#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aimtrace/text.hpp"

namespace aimtrace {

struct Signature {
  std::string name;
  Bytes header;
  std::optional<Bytes> footer;
  std::uint64_t max_length = 0;
  std::optional<Bytes> validator_phrase;
};

/// Throws std::invalid_argument when header is empty or max_length is too
/// small to hold header and footer.
void check_signature(const Signature& sig);

inline constexpr std::uint64_t kDefaultCarveMaxLength = 4ull << 20;

/// Built-in catalog; contains "aim-imlog" (XML prolog header, </body></html>
/// footer, "IM history with buddy" validator).
std::vector<Signature> builtin_signatures();

/// JSON array of {name, header, footer?, max_length?, validator_phrase?};
/// header/footer are hex strings (spaces allowed), validator_phrase is text.
/// Throws ParseError.
std::vector<Signature> load_signatures(std::string_view json_text);

struct CarveHit {
  std::string signature_name;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  Bytes payload;
  bool validated = false;   // validator phrase lies inside the span
  bool terminated = false;  // span closed by a footer (always false for footerless signatures)

  friend bool operator==(const CarveHit&, const CarveHit&) = default;
};

enum class Encoding { Ascii, Utf16le };

std::string_view to_string(Encoding e);

struct KeywordHit {
  std::string needle;
  Encoding encoding = Encoding::Ascii;
  std::uint64_t offset = 0;
  std::uint64_t context_offset = 0;  // absolute offset of context[0]
  Bytes context;                     // up to 64 bytes either side of the match

  friend bool operator==(const KeywordHit&, const KeywordHit&) = default;
};

inline constexpr std::uint64_t kKeywordContext = 64;

/// Byte pattern for a needle under an encoding. UTF-16LE is only defined for
/// ASCII needles; returns nullopt otherwise.
std::optional<Bytes> encode_needle(std::string_view needle, Encoding enc);

/// Streaming scanner. feed() any number of chunks, then finish() once.
/// Results do not depend on how the input is chunked.
class BlobScanner {
 public:
  /// Throws std::invalid_argument for invalid signatures or empty needles.
  BlobScanner(std::vector<Signature> signatures, std::vector<std::string> needles,
              std::vector<Encoding> encodings);

  void feed(ByteView chunk);
  void finish();

  std::uint64_t position() const { return base_ + window_.size(); }

  /// Sorted by offset; valid after finish().
  const std::vector<CarveHit>& carve_hits() const { return carves_; }
  const std::vector<KeywordHit>& keyword_hits() const { return keywords_; }

 private:
  enum class Role { Header, Phrase, Footer, Needle };
  struct Pattern {
    Bytes bytes;
    Role role;
    std::size_t owner;  // signature index, or needle index
    Encoding encoding = Encoding::Ascii;
    std::uint64_t next = 0;  // first absolute start not yet examined
  };
  struct PendingKeyword {
    std::size_t pattern;
    std::uint64_t offset;
  };
  struct SigState {
    std::deque<std::uint64_t> open;     // header offsets awaiting a footer
    std::deque<std::uint64_t> phrases;  // validator phrase offsets
  };

  void close(std::size_t sig, std::uint64_t start, std::uint64_t length, bool terminated);
  void emit_keyword(const PendingKeyword& k, std::uint64_t end);
  void compact();

  std::vector<Signature> sigs_;
  std::vector<std::string> needles_;
  std::vector<Pattern> patterns_;
  std::vector<SigState> state_;
  std::deque<PendingKeyword> pending_;
  Bytes window_;
  std::uint64_t base_ = 0;
  bool finished_ = false;
  std::vector<CarveHit> carves_;
  std::vector<KeywordHit> keywords_;
};

/// Reads `in` in chunk_size pieces. Throws IoError with the offset reached on
/// read failure.
std::vector<CarveHit> scan_signatures(std::istream& in, const std::vector<Signature>& sigs,
                                      std::size_t chunk_size = 1 << 20);
std::vector<CarveHit> scan_signatures(ByteView blob, const std::vector<Signature>& sigs,
                                      std::size_t chunk_size = 1 << 20);

/// Case-sensitive search for every needle under every requested encoding.
std::vector<KeywordHit> keyword_search(std::istream& in, const std::vector<std::string>& needles,
                                       const std::vector<Encoding>& encodings, std::size_t chunk_size = 1 << 20);
std::vector<KeywordHit> keyword_search(ByteView blob, const std::vector<std::string>& needles,
                                       const std::vector<Encoding>& encodings, std::size_t chunk_size = 1 << 20);

/// Runs `scanner` over the stream. Throws IoError on read failure.
void run_scanner(BlobScanner& scanner, std::istream& in, std::size_t chunk_size);

}  // namespace aimtrace
