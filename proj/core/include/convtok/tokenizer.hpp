#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "convtok/corpus.hpp"

namespace convtok {

// Word-boundary marker prefixed to word-initial pieces (U+2581, the
// conventional "lower one eighth block"). Task tokens never carry it.
inline constexpr std::string_view kWordMarker = "▁";

struct MergeRule {
  std::string left;
  std::string right;
  std::string merged;

  bool operator==(const MergeRule&) const = default;
};

// A byte-pair-encoding vocabulary in which every protected string (the task
// tokens) is a single piece with its own id, never split during training or
// encoding.
struct Vocab {
  static constexpr int kPadId = 0;
  static constexpr int kUnkId = 1;
  static constexpr int kBosId = 2;
  static constexpr int kEosId = 3;

  std::vector<std::string> pieces;                  // id -> piece string
  std::unordered_map<std::string, int> piece_ids;   // piece string -> id
  std::vector<std::string> protected_pieces;
  std::vector<MergeRule> merges;

  int size() const { return static_cast<int>(pieces.size()); }
  // Piece id, or kUnkId when the string is not in the vocabulary.
  int id_of(const std::string& piece) const;
  bool is_protected(const std::string& piece) const;

  bool operator==(const Vocab&) const = default;
};

// Greedy BPE over the words of a token-augmented corpus. Words are split
// into codepoints behind a word-boundary marker; the most frequent adjacent
// pair is merged until `vocab_size` pieces exist or no pair occurs twice.
// Ties break on the lexicographically smallest pair, so training is a pure
// function of (corpus, vocab_size, protected set).
//
// Throws ValidationError when vocab_size is below 4 reserved + protected +
// base characters, or when a protected string collides with another piece.
Vocab train_bpe(const std::vector<std::vector<Item>>& corpus, int vocab_size,
                const std::vector<std::string>& protected_tokens);

// Convenience overload over prepared utterances.
Vocab train_bpe_utterances(const std::vector<struct Utterance>& utterances,
                           int vocab_size,
                           const std::vector<std::string>& protected_tokens);

// The smallest admissible vocab_size for this corpus and protected set.
int min_vocab_size(const std::vector<std::vector<Item>>& corpus,
                   const std::vector<std::string>& protected_tokens);

// Task tokens encode to exactly one id; unknown codepoints become <unk>.
std::vector<int> encode(const Vocab& vocab, std::span<const Item> items);

// Inverse of encode on in-alphabet input. Protected pieces decode to task
// tokens, other pieces reassemble into words at marker boundaries.
// Throws ValidationError on an out-of-range id.
std::vector<Item> decode(const Vocab& vocab, std::span<const int> ids);

// Plain-text vocab file: header (version, size, protected list), one piece
// per line with id, then the merge rules. Loadable bit-exactly.
std::string vocab_to_string(const Vocab& vocab);
Vocab vocab_from_string(const std::string& text);
void save_vocab(const Vocab& vocab, const std::filesystem::path& path);
Vocab load_vocab(const std::filesystem::path& path);

}  // namespace convtok
