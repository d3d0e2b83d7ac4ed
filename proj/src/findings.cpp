// SPDX-License-Identifier: Apache-2.0
#include "aimtrace/findings.hpp"

#include "aimtrace/error.hpp"
#include "json.hpp"

namespace aimtrace {

Finding buddy_list_finding(const blt::BuddyList& list, const blt::ExtractDiagnostics& diag, Locator where) {
  Finding f;
  f.artifact_type = ArtifactType::BuddyList;
  f.locator = std::move(where);
  f.confidence = Confidence::Definite;
  nlohmann::json groups = nlohmann::json::array();
  std::size_t buddies = 0, friendly = 0;
  for (const auto& g : list.groups) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& b : g.buddies) {
      nlohmann::json m = {{"screen_name", b.screen_name}};
      if (b.friendly_name) {
        m["friendly_name"] = *b.friendly_name;
        m["friendly_form"] = std::string(blt::to_string(b.form));
        ++friendly;
      }
      members.push_back(std::move(m));
      ++buddies;
    }
    groups.push_back({{"name", g.name}, {"buddies", std::move(members)}});
  }
  f.attributes["owner"] = list.owner_screen_name;
  f.attributes["group_count"] = std::to_string(list.groups.size());
  f.attributes["buddy_count"] = std::to_string(buddies);
  f.attributes["friendly_name_count"] = std::to_string(friendly);
  f.attributes["groups"] = groups.dump();
  if (diag.duplicate_groups) f.attributes["duplicate_groups"] = std::to_string(diag.duplicate_groups);
  if (diag.duplicate_buddies) f.attributes["duplicate_buddies"] = std::to_string(diag.duplicate_buddies);
  return f;
}

Finding buddy_list_text_finding(std::string_view text, Locator where) {
  try {
    auto doc = blt::parse(text);
    blt::ExtractDiagnostics diag;
    auto list = blt::extract_buddy_list(doc, &diag);
    Finding f = buddy_list_finding(list, diag, std::move(where));
    if (doc.lossy) f.attributes["lossy"] = "true";
    return f;
  } catch (const Error& e) {
    Finding f;
    f.artifact_type = ArtifactType::BuddyList;
    f.locator = std::move(where);
    f.confidence = Confidence::Heuristic;
    f.attributes["parse_error"] = e.what();
    return f;
  }
}

Finding conversation_finding(const imlog::Conversation& conv, Locator where, Confidence confidence) {
  Finding f;
  f.artifact_type = conv.origin == imlog::Origin::Carved ? ArtifactType::ImLogFragment : ArtifactType::ImLog;
  f.locator = std::move(where);
  f.confidence = confidence;
  if (conv.owner_screen_name) f.attributes["owner"] = *conv.owner_screen_name;
  if (conv.correspondent_screen_name) f.attributes["correspondent"] = *conv.correspondent_screen_name;
  f.attributes["message_count"] = std::to_string(conv.messages.size());
  f.attributes["date_rows"] = std::to_string(conv.date_rows);
  if (conv.skipped_rows) f.attributes["skipped_rows"] = std::to_string(conv.skipped_rows);
  if (conv.lossy) f.attributes["lossy"] = "true";

  nlohmann::json msgs = nlohmann::json::array();
  std::optional<LocalTime> first, last;
  for (const auto& m : conv.messages) {
    nlohmann::json j = {{"sender", m.sender_screen_name},
                        {"direction", std::string(imlog::to_string(m.direction))},
                        {"class", m.raw_class},
                        {"text", m.body_text}};
    if (m.sent_at) {
      j["time"] = format_time(*m.sent_at);
      if (!first || *m.sent_at < *first) first = m.sent_at;
      if (!last || *m.sent_at > *last) last = m.sent_at;
    }
    msgs.push_back(std::move(j));
  }
  f.attributes["messages"] = msgs.dump();
  if (first) f.timestamps.push_back(local_stamp("first_message", *first));
  if (last && last != first) f.timestamps.push_back(local_stamp("last_message", *last));
  return f;
}

Finding carve_finding(const CarveHit& hit, const std::string& source_id) {
  const Confidence conf = hit.validated ? Confidence::Probable : Confidence::Heuristic;
  Locator where{source_id, ByteRange{hit.offset, hit.length}};
  Finding f;
  if (hit.signature_name == "aim-imlog") {
    auto conv = imlog::parse_im_log(as_chars(hit.payload), std::nullopt, std::nullopt, imlog::Origin::Carved);
    f = conversation_finding(conv, std::move(where), conf);
  } else {
    f.artifact_type = ArtifactType::ImLogFragment;
    f.locator = std::move(where);
    f.confidence = conf;
  }
  f.attributes["signature"] = hit.signature_name;
  f.attributes["validated"] = hit.validated ? "true" : "false";
  f.attributes["terminated"] = hit.terminated ? "true" : "false";
  return f;
}

Finding keyword_finding(const KeywordHit& hit, const std::string& source_id) {
  Finding f;
  f.artifact_type = ArtifactType::KeywordHit;
  const auto needle_len = encode_needle(hit.needle, hit.encoding).value_or(Bytes{}).size();
  f.locator = Locator{source_id, ByteRange{hit.offset, needle_len}};
  f.confidence = Confidence::Heuristic;
  f.attributes["needle"] = hit.needle;
  f.attributes["encoding"] = std::string(to_string(hit.encoding));
  f.attributes["context_offset"] = std::to_string(hit.context_offset);
  f.attributes["context"] = hex_string(hit.context);
  std::string preview;
  if (hit.encoding == Encoding::Utf16le) {
    preview = utf16le_to_utf8(hit.context);
  } else {
    preview.assign(hit.context.begin(), hit.context.end());
  }
  for (auto& c : preview)
    if (static_cast<unsigned char>(c) < 0x20 || c == 0x7F) c = '.';
  f.attributes["context_text"] = sanitize_utf8(preview).first;
  return f;
}

}  // namespace aimtrace
