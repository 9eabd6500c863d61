#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "convtok/augment.hpp"
#include "convtok/corpus.hpp"

namespace convtok {

// Acoustic frame geometry of the encoder front end.
struct FrameSpec {
  double frame_duration = 0.025;  // seconds
  double frame_stride = 0.020;    // seconds
};

struct UtteranceRef {
  std::string conversation_id;
  double audio_start = 0;

  bool operator==(const UtteranceRef&) const = default;
};

struct Emission {
  Item item;
  long frame = 0;  // acoustic frame index at which the item was emitted

  bool operator==(const Emission&) const = default;
};

// A decoded utterance: the symbol sequence with emission frame indices.
struct Hypothesis {
  UtteranceRef ref;
  std::vector<Emission> emissions;

  std::vector<Item> items() const;
  bool operator==(const Hypothesis&) const = default;
};

struct TimedEvent {
  TokenKind kind = TokenKind::SC;  // SC or EP
  double time = 0;                 // seconds, conversation clock
};

// An extracted entity: its words plus the inclusive index span it occupies
// in the token-stripped word sequence.
struct Entity {
  std::vector<std::string> words;
  int start_word = 0;
  int end_word = 0;

  bool operator==(const Entity&) const = default;
};

struct ExtractionResult {
  std::vector<Entity> entities;
  int unmatched_open = 0;
  int unmatched_close = 0;
};

// Left-to-right scan: an NE_OPEN pairs with the nearest following NE_CLOSE
// that has no intervening NE_OPEN (a later open discards the earlier one).
// An empty pair yields no entity but one unmatched open and one unmatched
// close. Leftover tokens are counted.
ExtractionResult extract_entities(std::span<const Item> items);
ExtractionResult extract_entities(const Hypothesis& hyp);

// audio_start + frame_index * frame_stride (frame-start convention).
double token_time(long frame_index, const FrameSpec& spec, double audio_start);

// One event per SC/EP emission, in emission order.
std::vector<TimedEvent> extract_timed_events(const Hypothesis& hyp,
                                             const FrameSpec& spec);

struct Interval {
  double start = 0;
  double end = 0;

  double length() const { return end - start; }
  bool operator==(const Interval&) const = default;
};

// Speaker-change times partition [start, end] into turns; duplicate or
// out-of-bounds times produce no zero-length turns.
std::vector<Interval> turns_from_events(const std::vector<double>& change_times,
                                        double start, double end);

// Within each utterance span, speech runs from the span start (or the
// previous endpoint) to each endpoint time; audio after the last endpoint is
// non-speech, and a span with no endpoint claims no speech. Both inputs
// sorted; endpoint times are clamped into the span that contains them.
std::vector<Interval> speech_regions_from_endpoints(
    const std::vector<double>& ep_times, const std::vector<Interval>& spans);

// The deterministic emission schedule a perfect decoder would produce for a
// reference utterance: each word is emitted at the frame nearest its end
// time (words spread uniformly over their segment), EP at the segment end,
// SC at the same frame as the EP it follows, NE_OPEN/NE_CLOSE at the entity
// boundary words. Shared by the hypothesis simulator and the reference side
// of time-based scoring so both quantize times identically.
Hypothesis reference_emissions(const Utterance& utterance,
                               const Conversation& conversation,
                               const FrameSpec& spec);

// "conversation_id@start" with the start serialized the same way the JSONL
// writers print it, so keys built from loaded files and keys built in memory
// agree. Used to pair reference utterances with hypotheses.
std::string utterance_key(const UtteranceRef& ref);
std::string utterance_key(const std::string& conversation_id,
                          double audio_start);

// Hypothesis JSONL:
//   {"conversation_id": str, "audio_start": s,
//    "emissions": [{"w": str, "f": int} | {"t": "SC"|..., "f": int}]}
void save_hypotheses(const std::vector<Hypothesis>& hypotheses,
                     const std::filesystem::path& path);
std::vector<Hypothesis> load_hypotheses(const std::filesystem::path& path);

std::string hypothesis_to_json_line(const Hypothesis& hyp);
Hypothesis hypothesis_from_json_line(const std::string& line);

}  // namespace convtok
