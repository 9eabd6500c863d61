#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "convtok/corpus.hpp"

namespace convtok {

// Which task tokens to emit. Empty set = plain ASR text.
struct TaskSet {
  bool sc = true;
  bool ep = true;
  bool ne = true;

  static TaskSet all() { return {true, true, true}; }
  static TaskSet none() { return {false, false, false}; }

  bool operator==(const TaskSet&) const = default;
};

// Parses "sc,ep,ne" (any subset, any order; empty string = none).
// Throws ValidationError on an unknown task name.
TaskSet task_set_from_string(const std::string& s);
std::string task_set_to_string(const TaskSet& tasks);

struct PackConfig {
  double max_duration = 20.0;  // seconds
  TaskSet tasks = TaskSet::all();
};

// A packed span of consecutive segments with its tagged word sequence.
// One utterance is one training/evaluation unit.
struct Utterance {
  std::string conversation_id;
  double audio_start = 0;
  double audio_end = 0;
  std::vector<Item> items;
  std::vector<int> source_segments;  // indices into the conversation
  bool oversize = false;             // single segment longer than max_duration

  double duration() const { return audio_end - audio_start; }
  bool operator==(const Utterance&) const = default;
};

// Greedy left-to-right packing: starting at the first unconsumed segment,
// the window extends while (last.end - first.start) <= max_duration. A lone
// segment longer than max_duration becomes its own utterance, flagged
// oversize. Items are left empty; augment_text fills them.
std::vector<Utterance> pack_segments(const Conversation& conversation,
                                     const PackConfig& config);

// Tags the concatenated words of the given segments:
//   - EP after each segment's words            (if tasks.ep)
//   - SC after the EP position when the next segment changes speaker
//                                              (if tasks.sc)
//   - NE_OPEN ... NE_CLOSE around entity spans (if tasks.ne)
// Tokens of excluded tasks are omitted entirely.
std::vector<Item> augment_text(const Conversation& conversation,
                               const std::vector<int>& segment_indices,
                               const TaskSet& tasks);

// pack_segments + augment_text for every utterance.
std::vector<Utterance> prepare_conversation(const Conversation& conversation,
                                            const PackConfig& config);

// Removes every task token, preserving word order.
std::vector<std::string> strip_tokens(std::span<const Item> items);

struct StatsReport {
  size_t utterance_count = 0;
  size_t word_count = 0;
  double total_duration = 0;  // seconds, sum of packed spans
  std::array<size_t, kNumTokenKinds> token_counts{};
  // 100 * count / word_count; tokens are excluded from the denominator.
  std::array<double, kNumTokenKinds> token_pct{};
  size_t entity_count = 0;           // NE_OPEN..NE_CLOSE pairs
  size_t unique_entity_count = 0;    // distinct surface forms
};

StatsReport corpus_stats(const std::vector<Utterance>& utterances);

// Human-readable stats block. States the percentage convention in a header
// comment line.
std::string format_stats(const StatsReport& stats);

// Utterance JSONL:
//   {"conversation_id": str, "audio_start": s, "audio_end": s,
//    "items": [{"w": str} | {"t": "SC"|"EP"|"NE_OPEN"|"NE_CLOSE"}],
//    "source_segments": [int], "oversize": bool}
void save_utterances(const std::vector<Utterance>& utterances,
                     const std::filesystem::path& path);
std::vector<Utterance> load_utterances(const std::filesystem::path& path);

std::string utterance_to_json_line(const Utterance& utterance);
Utterance utterance_from_json_line(const std::string& line);

// Tag-structure checks shared by load_utterances and the generators:
// NE depth stays in {0,1} and ends at 0; when EP tokens are present, every
// SC is immediately preceded by an EP and count(EP) >= count(SC).
void validate_items(std::span<const Item> items, const std::string& where);

}  // namespace convtok
