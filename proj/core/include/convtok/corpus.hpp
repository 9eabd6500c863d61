#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace convtok {

// The four inline task tokens. Their reserved surface strings never appear
// inside transcript words.
enum class TokenKind { SC, EP, NeOpen, NeClose };

inline constexpr int kNumTokenKinds = 4;

// "[SC]", "[EP]", "[NE]", "[/NE]"
const std::string& token_surface(TokenKind kind);

// Wire names used by the JSONL formats: "SC", "EP", "NE_OPEN", "NE_CLOSE".
const std::string& token_kind_name(TokenKind kind);
bool token_kind_from_name(const std::string& name, TokenKind& kind);

// Parses a reserved surface string. Returns false if `s` is not one.
bool token_from_surface(const std::string& s, TokenKind& kind);

bool is_reserved_surface(const std::string& s);

// One element of a tagged word sequence: a transcript word or a task token.
struct Item {
  enum class Type { Word, Token };

  Type type = Type::Word;
  std::string text;              // word text; empty for tokens
  TokenKind token = TokenKind::SC;

  static Item word(std::string w);
  static Item task(TokenKind k);

  bool is_word() const { return type == Type::Word; }
  bool is_token() const { return type == Type::Token; }
  bool is_token(TokenKind k) const { return is_token() && token == k; }

  // Word text, or the reserved token string.
  const std::string& surface() const;

  bool operator==(const Item& other) const;
};

// Splits whitespace-separated tagged text into items; reserved surface
// strings become tokens. Inverse of format_items.
std::vector<Item> parse_tagged_text(const std::string& text);
std::string format_items(std::span<const Item> items);

// Inclusive word-index span of one annotated entity within a segment.
struct EntitySpan {
  int start_word = 0;
  int end_word = 0;

  bool operator==(const EntitySpan&) const = default;
};

// A contiguous, single-speaker, time-stamped transcript unit.
struct Segment {
  double start = 0;              // seconds
  double end = 0;                // seconds
  std::string speaker;
  std::vector<std::string> words;
  std::vector<EntitySpan> entities;

  double duration() const { return end - start; }
  bool operator==(const Segment&) const = default;
};

struct Conversation {
  std::string id;
  std::vector<Segment> segments;

  double start() const { return segments.front().start; }
  double end() const { return segments.back().end; }
  bool operator==(const Conversation&) const = default;
};

// Checks every Segment/Conversation invariant: at least one segment, segments
// sorted by start, end > start, words free of reserved token strings and
// whitespace, entity spans in bounds, non-overlapping and non-nested.
// Throws ValidationError naming the conversation id and offending field.
void validate_conversation(const Conversation& conversation);

// Loads a corpus from JSONL, one conversation per line:
//   {"id": str, "segments": [{"start": s, "end": s, "speaker": str,
//     "words": [str], "entities": [[int,int]]}]}
// Every invariant is validated; parse errors carry the 1-based line number.
std::vector<Conversation> load_corpus(const std::filesystem::path& path);

// Writes the JSONL form read back bit-exactly by load_corpus.
void save_corpus(const std::vector<Conversation>& conversations,
                 const std::filesystem::path& path);

std::string conversation_to_json_line(const Conversation& conversation);
Conversation conversation_from_json_line(const std::string& line);

}  // namespace convtok
