#include "convtok/corpus.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "convtok/error.hpp"
#include "convtok/io.hpp"

namespace convtok {

namespace {

const std::array<std::string, kNumTokenKinds> kSurfaces = {"[SC]", "[EP]",
                                                           "[NE]", "[/NE]"};

bool has_whitespace(const std::string& s) {
  for (unsigned char c : s) {
    if (std::isspace(c)) return true;
  }
  return false;
}

}  // namespace

const std::string& token_surface(TokenKind kind) {
  return kSurfaces[static_cast<int>(kind)];
}

namespace {
const std::array<std::string, kNumTokenKinds> kKindNames = {"SC", "EP",
                                                            "NE_OPEN",
                                                            "NE_CLOSE"};
}  // namespace

const std::string& token_kind_name(TokenKind kind) {
  return kKindNames[static_cast<int>(kind)];
}

bool token_kind_from_name(const std::string& name, TokenKind& kind) {
  for (int i = 0; i < kNumTokenKinds; ++i) {
    if (kKindNames[i] == name) {
      kind = static_cast<TokenKind>(i);
      return true;
    }
  }
  return false;
}

bool token_from_surface(const std::string& s, TokenKind& kind) {
  for (int i = 0; i < kNumTokenKinds; ++i) {
    if (kSurfaces[i] == s) {
      kind = static_cast<TokenKind>(i);
      return true;
    }
  }
  return false;
}

bool is_reserved_surface(const std::string& s) {
  TokenKind ignored;
  return token_from_surface(s, ignored);
}

Item Item::word(std::string w) {
  Item item;
  item.type = Type::Word;
  item.text = std::move(w);
  return item;
}

Item Item::task(TokenKind k) {
  Item item;
  item.type = Type::Token;
  item.token = k;
  return item;
}

const std::string& Item::surface() const {
  return is_token() ? token_surface(token) : text;
}

bool Item::operator==(const Item& other) const {
  if (type != other.type) return false;
  return is_token() ? token == other.token : text == other.text;
}

std::vector<Item> parse_tagged_text(const std::string& text) {
  std::vector<Item> items;
  std::istringstream in(text);
  std::string piece;
  while (in >> piece) {
    TokenKind kind;
    if (token_from_surface(piece, kind)) {
      items.push_back(Item::task(kind));
    } else {
      items.push_back(Item::word(piece));
    }
  }
  return items;
}

std::string format_items(std::span<const Item> items) {
  std::string out;
  for (const Item& item : items) {
    if (!out.empty()) out += ' ';
    out += item.surface();
  }
  return out;
}

void validate_conversation(const Conversation& conversation) {
  const std::string& id = conversation.id;
  if (id.empty()) {
    throw ValidationError("conversation with empty id");
  }
  if (conversation.segments.empty()) {
    throw ValidationError("conversation \"" + id + "\": no segments");
  }
  double prev_start = conversation.segments.front().start;
  for (size_t si = 0; si < conversation.segments.size(); ++si) {
    const Segment& seg = conversation.segments[si];
    const std::string where =
        "conversation \"" + id + "\": segments[" + std::to_string(si) + "]";
    if (!(seg.start >= 0)) {
      throw ValidationError(where + ".start: negative time");
    }
    if (!(seg.end > seg.start)) {
      throw ValidationError(where + ".end: must be > start");
    }
    if (seg.start < prev_start) {
      throw ValidationError(where + ".start: segments not sorted by start");
    }
    prev_start = seg.start;
    if (seg.speaker.empty()) {
      throw ValidationError(where + ".speaker: empty");
    }
    for (size_t wi = 0; wi < seg.words.size(); ++wi) {
      const std::string& w = seg.words[wi];
      if (w.empty() || has_whitespace(w)) {
        throw ValidationError(where + ".words[" + std::to_string(wi) +
                              "]: words must be non-empty and whitespace-free");
      }
      if (is_reserved_surface(w)) {
        throw ValidationError(where + ".words[" + std::to_string(wi) +
                              "]: reserved task-token string \"" + w + "\"");
      }
    }
    int prev_end = -1;
    for (size_t ei = 0; ei < seg.entities.size(); ++ei) {
      const EntitySpan& span = seg.entities[ei];
      const std::string efield =
          where + ".entities[" + std::to_string(ei) + "]";
      if (span.start_word < 0 || span.end_word < span.start_word ||
          span.end_word >= static_cast<int>(seg.words.size())) {
        throw ValidationError(efield + ": span [" +
                              std::to_string(span.start_word) + "," +
                              std::to_string(span.end_word) +
                              "] out of word bounds (" +
                              std::to_string(seg.words.size()) + " words)");
      }
      // Spans are kept sorted and disjoint; nesting or overlap is rejected.
      if (span.start_word <= prev_end) {
        throw ValidationError(efield + ": overlaps or nests with the previous span");
      }
      prev_end = span.end_word;
    }
  }
}

namespace {

using nlohmann::json;

json segment_to_json(const Segment& seg) {
  json entities = json::array();
  for (const EntitySpan& e : seg.entities) {
    entities.push_back({e.start_word, e.end_word});
  }
  return json{{"start", seg.start},
              {"end", seg.end},
              {"speaker", seg.speaker},
              {"words", seg.words},
              {"entities", entities}};
}

Segment segment_from_json(const json& j) {
  Segment seg;
  seg.start = j.at("start").get<double>();
  seg.end = j.at("end").get<double>();
  seg.speaker = j.at("speaker").get<std::string>();
  seg.words = j.at("words").get<std::vector<std::string>>();
  for (const json& e : j.at("entities")) {
    if (!e.is_array() || e.size() != 2) {
      throw ValidationError("entity span must be a two-element array");
    }
    seg.entities.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  return seg;
}

}  // namespace

std::string conversation_to_json_line(const Conversation& conversation) {
  json segments = json::array();
  for (const Segment& seg : conversation.segments) {
    segments.push_back(segment_to_json(seg));
  }
  return json{{"id", conversation.id}, {"segments", segments}}.dump();
}

Conversation conversation_from_json_line(const std::string& line) {
  json j = json::parse(line);
  Conversation conversation;
  conversation.id = j.at("id").get<std::string>();
  for (const json& s : j.at("segments")) {
    conversation.segments.push_back(segment_from_json(s));
  }
  return conversation;
}

std::vector<Conversation> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open for reading: " + path.string());
  }
  std::vector<Conversation> conversations;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Conversation conversation;
    try {
      conversation = conversation_from_json_line(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": parse error: " + e.what());
    }
    validate_conversation(conversation);
    conversations.push_back(std::move(conversation));
  }
  if (in.bad()) {
    throw IoError("read failed: " + path.string());
  }
  return conversations;
}

void save_corpus(const std::vector<Conversation>& conversations,
                 const std::filesystem::path& path) {
  std::string out;
  for (const Conversation& c : conversations) {
    out += conversation_to_json_line(c);
    out += '\n';
  }
  write_text_file_atomic(path, out);
}

}  // namespace convtok
