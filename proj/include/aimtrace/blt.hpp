// SPDX-License-Identifier: Apache-2.0
//
// Manually saved AIM Buddy List (.BLT) files: a brace-delimited token tree
//
//   User { screenName Suspect }
//   Buddy { list { Buddies { VictimTwo "Phantom Friend 1" } } }
//
// parsed into a BuddyList (owner, ordered groups, buddies with optional
// friendly names).
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aimtrace/error.hpp"

namespace aimtrace::blt {

/// A bare/quoted token, or a named block when is_block is set.
struct Node {
  std::string text;  // token text or block name, quotes stripped
  bool quoted = false;
  bool is_block = false;
  std::size_t line = 0;
  std::vector<Node> children;
};

struct Document {
  std::vector<Node> top;
  bool lossy = false;  // input was not valid UTF-8 and was repaired
};

inline constexpr std::size_t kMaxDepth = 256;

/// Throws SyntaxError on unbalanced braces, unterminated quotes, a '{' with
/// no name before it, or nesting deeper than kMaxDepth.
Document parse(std::string_view text);

enum class FriendlyForm { None, TrailingQuoted, SubBlock };

struct Buddy {
  std::string screen_name;
  std::optional<std::string> friendly_name;
  FriendlyForm form = FriendlyForm::None;  // how the friendly name was written; not part of identity

  friend bool operator==(const Buddy& a, const Buddy& b) {
    return a.screen_name == b.screen_name && a.friendly_name == b.friendly_name;
  }
};

struct Group {
  std::string name;
  std::vector<Buddy> buddies;
  friend bool operator==(const Group&, const Group&) = default;
};

struct BuddyList {
  std::string owner_screen_name;
  std::vector<Group> groups;
  friend bool operator==(const BuddyList&, const BuddyList&) = default;
};

class MissingOwner : public Error {
 public:
  using Error::Error;
};

struct ExtractDiagnostics {
  std::size_t duplicate_groups = 0;
  std::size_t duplicate_buddies = 0;
};

/// Throws MissingOwner without a User block holding a screenName pair. A
/// missing Buddy/list yields zero groups.
BuddyList extract_buddy_list(const Document& doc, ExtractDiagnostics* diag = nullptr);

std::string serialize(const BuddyList& list);

std::string_view to_string(FriendlyForm f);

}  // namespace aimtrace::blt
