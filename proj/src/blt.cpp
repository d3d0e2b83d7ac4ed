// SPDX-License-Identifier: Apache-2.0
#include "aimtrace/blt.hpp"

#include <algorithm>
#include <set>

#include "aimtrace/text.hpp"

namespace aimtrace::blt {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

const Node* find_block(const std::vector<Node>& nodes, std::string_view name) {
  for (const auto& n : nodes)
    if (n.is_block && iequals(n.text, name)) return &n;
  return nullptr;
}

// Value following `key` among the plain tokens of a block.
std::optional<std::string> keyed_token(const std::vector<Node>& nodes, std::initializer_list<std::string_view> keys) {
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (nodes[i].is_block || nodes[i + 1].is_block) continue;
    for (auto k : keys)
      if (!nodes[i].quoted && iequals(nodes[i].text, k)) return nodes[i + 1].text;
  }
  return std::nullopt;
}

bool needs_quotes(std::string_view s) {
  if (s.empty()) return true;
  return std::any_of(s.begin(), s.end(),
                     [](char c) { return is_space(c) || c == '"' || c == '\\' || c == '{' || c == '}'; });
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string word(std::string_view s) { return needs_quotes(s) ? quote(s) : std::string(s); }

}  // namespace

Document parse(std::string_view raw) {
  auto [text, lossy] = sanitize_utf8(raw);
  Document doc;
  doc.lossy = lossy;

  std::vector<Node*> stack;  // open blocks; each points into its parent's children
  auto current = [&]() -> std::vector<Node>& { return stack.empty() ? doc.top : stack.back()->children; };

  std::size_t line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (is_space(c)) {
      ++i;
    } else if (c == '{') {
      auto& nodes = current();
      if (nodes.empty() || nodes.back().is_block) throw SyntaxError("'{' without a block name", line);
      if (stack.size() >= kMaxDepth) throw SyntaxError("blocks nested too deeply", line);
      nodes.back().is_block = true;
      nodes.back().line = line;
      stack.push_back(&nodes.back());
      ++i;
    } else if (c == '}') {
      if (stack.empty()) throw SyntaxError("unbalanced '}'", line);
      stack.pop_back();
      ++i;
    } else if (c == '"') {
      const std::size_t start_line = line;
      std::string value;
      ++i;
      bool closed = false;
      while (i < text.size()) {
        char q = text[i];
        if (q == '\\' && i + 1 < text.size() && (text[i + 1] == '"' || text[i + 1] == '\\')) {
          value.push_back(text[i + 1]);
          i += 2;
          continue;
        }
        if (q == '"') {
          closed = true;
          ++i;
          break;
        }
        if (q == '\n') ++line;
        value.push_back(q);
        ++i;
      }
      if (!closed) throw SyntaxError("unterminated quoted string", start_line);
      current().push_back({std::move(value), true, false, start_line, {}});
    } else {
      std::size_t j = i;
      while (j < text.size() && !is_space(text[j]) && text[j] != '{' && text[j] != '}' && text[j] != '"') ++j;
      current().push_back({text.substr(i, j - i), false, false, line, {}});
      i = j;
    }
  }
  if (!stack.empty()) throw SyntaxError("unbalanced '{' (block '" + stack.back()->text + "' never closed)", stack.back()->line);
  return doc;
}

BuddyList extract_buddy_list(const Document& doc, ExtractDiagnostics* diag) {
  ExtractDiagnostics local;
  ExtractDiagnostics& d = diag ? *diag : local;

  BuddyList list;
  const Node* user = find_block(doc.top, "User");
  if (user == nullptr) throw MissingOwner("no-owner: BLT has no User block");
  auto owner = keyed_token(user->children, {"screenName"});
  if (!owner || owner->empty()) throw MissingOwner("no-owner: User block has no screenName");
  list.owner_screen_name = *owner;

  const Node* buddy = find_block(doc.top, "Buddy");
  const Node* groups = buddy ? find_block(buddy->children, "list") : nullptr;
  if (groups == nullptr) return list;

  std::set<std::string> group_names;
  for (const auto& g : groups->children) {
    if (!g.is_block) continue;
    if (!group_names.insert(g.text).second) {
      ++d.duplicate_groups;
      continue;
    }
    Group group{g.text, {}};
    std::set<std::string> seen;
    const auto& entries = g.children;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const Node& e = entries[i];
      Buddy b{e.text, std::nullopt, FriendlyForm::None};
      if (e.is_block) {
        if (auto f = keyed_token(e.children, {"friendly", "friendlyName", "alias", "nick", "nickname"})) {
          b.friendly_name = *f;
          b.form = FriendlyForm::SubBlock;
        } else if (e.children.size() == 1 && !e.children[0].is_block && e.children[0].quoted) {
          b.friendly_name = e.children[0].text;
          b.form = FriendlyForm::SubBlock;
        }
      } else if (i + 1 < entries.size() && !entries[i + 1].is_block && entries[i + 1].quoted) {
        b.friendly_name = entries[i + 1].text;
        b.form = FriendlyForm::TrailingQuoted;
        ++i;
      }
      if (!seen.insert(b.screen_name).second) {
        ++d.duplicate_buddies;
        continue;
      }
      group.buddies.push_back(std::move(b));
    }
    list.groups.push_back(std::move(group));
  }
  return list;
}

std::string serialize(const BuddyList& list) {
  std::string out = "Config {\n version 1\n}\nUser {\n screenName " + word(list.owner_screen_name) + "\n}\n";
  out += "Buddy {\n list {\n";
  for (const auto& g : list.groups) {
    out += "  " + word(g.name) + " {\n";
    for (std::size_t i = 0; i < g.buddies.size(); ++i) {
      const auto& b = g.buddies[i];
      out += "   " + word(b.screen_name);
      if (b.friendly_name) {
        out += " " + quote(*b.friendly_name);
      } else if (i + 1 < g.buddies.size() && needs_quotes(g.buddies[i + 1].screen_name)) {
        // A quoted name right after would read back as this buddy's friendly name.
        out += " {\n   }";
      }
      out += "\n";
    }
    out += "  }\n";
  }
  out += " }\n}\n";
  return out;
}

std::string_view to_string(FriendlyForm f) {
  switch (f) {
    case FriendlyForm::TrailingQuoted: return "trailing-quoted";
    case FriendlyForm::SubBlock: return "sub-block";
    default: return "none";
  }
}

}  // namespace aimtrace::blt
