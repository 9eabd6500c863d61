#pragma once

#include <span>
#include <string>
#include <vector>

#include "convtok/align.hpp"
#include "convtok/augment.hpp"
#include "convtok/corpus.hpp"
#include "convtok/extract.hpp"

namespace convtok {

// Pooled true/false positive and false negative counts. When both sides are
// empty there was nothing to find and nothing was claimed, so precision,
// recall and F1 are all 1; otherwise an empty denominator scores 0.
struct Prf {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;

  Prf& operator+=(const Prf& other);
  bool operator==(const Prf&) const = default;
};

struct NerCounts {
  Prf exact;
  Prf soft;
};

// Alignment-mediated entity matching over two tagged item sequences.
// Entities are extracted from both sides, the token-stripped words are
// aligned, and reference entities are matched one-to-one to hypothesis
// entities greedily in reading order:
//   exact: identical word sequences whose span extremes are linked by
//          alignment matches
//   soft:  any match or substitution link joins the two spans
// Unmatched reference entities count as misses; unmatched hypothesis
// entities and stray hypothesis open/close tags count as false alarms.
NerCounts ner_match(std::span<const Item> ref_items,
                    std::span<const Item> hyp_items);

// Token-level detection counts for one token kind, read off the minimal
// alignment of the full tagged sequences: aligned identical tokens are hits,
// the rest of the hypothesis tokens are false alarms, the rest of the
// reference tokens are misses.
Prf token_text_prf(std::span<const Item> ref_items,
                   std::span<const Item> hyp_items, TokenKind kind);

// Greedy matching of two time lists under |ref - hyp| <= collar. Inputs are
// sorted copies, matched earliest-first; for sorted lists this attains the
// maximum one-to-one matching.
Prf timestamp_prf(std::vector<double> ref_times, std::vector<double> hyp_times,
                  double collar);

struct CoveragePurity {
  double coverage = 1;
  double purity = 1;
  double f1 = 1;
};

// Sums behind coverage/purity so scores can be pooled across utterances:
// coverage = cov_num / cov_den, purity = pur_num / pur_den.
struct CpSums {
  double cov_num = 0;
  double cov_den = 0;
  double pur_num = 0;
  double pur_den = 0;

  CpSums& operator+=(const CpSums& other);
};

// Both partitions must cover the same extent (throws ValidationError
// otherwise). For every reference turn the numerator takes its largest
// overlap with any hypothesis turn; coverage divides by total reference
// time, purity is the same with the roles swapped.
CpSums coverage_purity_sums(const std::vector<Interval>& ref_turns,
                            const std::vector<Interval>& hyp_turns);
CoveragePurity coverage_purity(const std::vector<Interval>& ref_turns,
                               const std::vector<Interval>& hyp_turns);
CoveragePurity coverage_purity_from_sums(const CpSums& sums);

struct DetectionReport {
  double fa = 0;  // false-alarm speech time / reference speech time
  double ms = 0;  // missed speech time / reference speech time
  double der = 0;  // (fa_time + miss_time) / reference speech time
  double fa_time = 0;
  double miss_time = 0;
  double ref_speech = 0;
  // No reference speech at all: rates fall back to the total span length.
  bool degenerate = false;
};

// Speech/non-speech detection error. Interval lists may overlap or touch;
// they are merged before the sweep.
DetectionReport detection_metrics(std::vector<Interval> ref_speech,
                                  std::vector<Interval> hyp_speech,
                                  double total_duration);
DetectionReport detection_rates(double fa_time, double miss_time,
                                double ref_speech, double total_duration);

struct EvalConfig {
  TaskSet tasks = TaskSet::all();
  double collar = 0.250;  // seconds, for timed SC/EP matching
  FrameSpec frames;
};

// Headline numbers for one utterance, kept for the per-utterance table.
struct UtteranceScore {
  UtteranceRef ref;
  WerResult wer;
  Prf ner_exact;
  Prf ner_soft;
  Prf scd_text;
  Prf ep_text;
  Prf scd_time;
  Prf ep_time;
  CpSums cp;
  double fa_time = 0;
  double miss_time = 0;
  double ref_speech = 0;
  double span = 0;
};

struct EvalReport {
  // Corpus scores are micro-averages: counts and times are pooled over all
  // utterances first, then turned into rates once.
  WerResult wer;
  Prf ner_exact;
  Prf ner_soft;
  Prf scd_text;
  Prf ep_text;
  Prf scd_time;
  Prf ep_time;
  CoveragePurity cp;
  DetectionReport detection;
  std::vector<UtteranceScore> per_utterance;
};

// Scores hypotheses against reference utterances. The conversations supply
// segment timing for the reference side, which is quantized through the
// same frame grid as the hypotheses. Every reference utterance must have
// exactly one hypothesis with the same (conversation_id, audio_start) key
// and vice versa. Only tasks in config.tasks are scored; other task tokens
// are dropped from both sides first.
EvalReport evaluate_corpus(const std::vector<Conversation>& conversations,
                           const std::vector<Utterance>& references,
                           const std::vector<Hypothesis>& hypotheses,
                           const EvalConfig& config);

// Machine-readable corpus scores:
//   {"wer": r, "ner_exact": {"p","r","f1","tp","fp","fn"}, "ner_soft": ...,
//    "scd_text": ..., "ep_text": ..., "scd_time": ..., "ep_time": ...,
//    "coverage": c, "purity": p, "cp_f1": f, "fa": a, "ms": m, "der": d}
std::string report_json(const EvalReport& report);

// One row per utterance, tab-separated, with a header line.
std::string report_tsv(const EvalReport& report);

// Human-readable block for terminal output.
std::string report_summary(const EvalReport& report);

}  // namespace convtok
