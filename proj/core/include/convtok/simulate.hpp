#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "convtok/augment.hpp"
#include "convtok/corpus.hpp"
#include "convtok/extract.hpp"
#include "convtok/rng.hpp"

namespace convtok {

struct IntRange {
  long lo = 0;
  long hi = 0;
};

struct RealRange {
  double lo = 0;
  double hi = 0;
};

// Shape of the synthetic corpus. Everything is driven by the seed; the same
// config always yields byte-identical conversations.
struct SimConfig {
  std::uint64_t seed = 42;
  long conversations = 20;
  IntRange speakers{1, 3};
  IntRange segments{8, 16};
  RealRange segment_duration{2.0, 9.0};  // seconds
  double words_per_second = 2.5;
  double entity_rate = 0.05;  // chance per word that an entity starts there
  IntRange entity_words{1, 3};
  RealRange pause{0.1, 1.0};  // gap between consecutive segments
  double speaker_change_prob = 0.65;
  std::string id_prefix = "conv";
};

// Deterministic synthetic conversations; each one passes
// validate_conversation. Conversation k depends only on (seed, k).
std::vector<Conversation> generate_corpus(const SimConfig& config);

// Corruption applied on top of the perfect emission schedule.
struct NoiseConfig {
  std::uint64_t seed = 42;
  double sub_rate = 0;
  double del_rate = 0;
  double ins_rate = 0;          // chance of an extra word after each word
  double token_drop_rate = 0;   // each task token dropped independently
  long frame_jitter = 0;        // emission frames shifted by U[-j, +j]
};

// One applied corruption, stated against the token-stripped reference words
// so a scorer can replay the exact damage.
struct Edit {
  enum class Kind { Substitute, Delete, Insert, DropToken };

  Kind kind = Kind::Substitute;
  int ref_word = 0;     // word index; for Insert, the insertion point
  std::string word;     // replacement / inserted word
  TokenKind token = TokenKind::SC;  // for DropToken
  int token_index = 0;              // occurrence number of that kind

  bool operator==(const Edit&) const = default;
};

struct UtteranceEdits {
  std::string utterance;  // utterance_key of the corrupted utterance
  std::vector<Edit> edits;
};

struct CorruptResult {
  Hypothesis hypothesis;
  std::vector<Edit> edits;
};

// Builds the reference emission schedule for the utterance, then applies
// word substitutions/deletions/insertions, token drops, and frame jitter
// (clamped so frames stay non-negative and non-decreasing). At most one
// edit of each kind touches a given word position, so the edit list replays
// exactly via apply_word_edits.
CorruptResult corrupt(const Utterance& utterance,
                      const Conversation& conversation,
                      const NoiseConfig& noise, const FrameSpec& frames,
                      Rng rng);

// corrupt() for every utterance; utterance i uses the stream
// Rng(noise.seed).split(i). Conversations are looked up by id.
std::vector<CorruptResult> corrupt_corpus(
    const std::vector<Utterance>& utterances,
    const std::vector<Conversation>& conversations, const NoiseConfig& noise,
    const FrameSpec& frames);

// Replays the logged word edits: the result equals the token-stripped word
// sequence of the corrupted hypothesis.
std::vector<std::string> apply_word_edits(
    const std::vector<std::string>& ref_words, const std::vector<Edit>& edits);

// Number of word-level edits (substitute + delete + insert) in the log; an
// upper bound on the minimal edit distance.
long word_edit_count(const std::vector<Edit>& edits);

// Edit-log JSONL, one line per utterance:
//   {"utt": key, "edits": [{"kind": "sub"|"del"|"ins", "ref_word": i,
//                           "word": str?} |
//                          {"kind": "drop", "token": name, "index": i}]}
void save_edit_log(const std::vector<UtteranceEdits>& log,
                   const std::filesystem::path& path);
std::vector<UtteranceEdits> load_edit_log(const std::filesystem::path& path);

std::string edits_to_json_line(const UtteranceEdits& entry);
UtteranceEdits edits_from_json_line(const std::string& line);

}  // namespace convtok
