#include "convtok/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "json.hpp"

#include "convtok/error.hpp"

namespace convtok {

double Prf::precision() const {
  if (tp + fp == 0) return fn == 0 ? 1.0 : 0.0;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double Prf::recall() const {
  if (tp + fn == 0) return fp == 0 ? 1.0 : 0.0;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double Prf::f1() const {
  const double p = precision();
  const double r = recall();
  if (p + r == 0) return 0.0;
  return 2.0 * p * r / (p + r);
}

Prf& Prf::operator+=(const Prf& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  return *this;
}

NerCounts ner_match(std::span<const Item> ref_items,
                    std::span<const Item> hyp_items) {
  const ExtractionResult ref_ex = extract_entities(ref_items);
  const ExtractionResult hyp_ex = extract_entities(hyp_items);
  const std::vector<std::string> ref_words = strip_tokens(ref_items);
  const std::vector<std::string> hyp_words = strip_tokens(hyp_items);
  const Alignment al = levenshtein_align(ref_words, hyp_words);

  // ref word -> hyp word joined by an alignment match, -1 otherwise
  std::vector<long> match_link(ref_words.size(), -1);
  // every match or substitution link, for soft overlap
  std::vector<std::pair<long, long>> links;
  for (const AlignOp& op : al.ops) {
    if (op.op == EditOp::Match) {
      match_link[*op.ref_index] = static_cast<long>(*op.hyp_index);
    }
    if (op.op == EditOp::Match || op.op == EditOp::Substitute) {
      links.emplace_back(static_cast<long>(*op.ref_index),
                         static_cast<long>(*op.hyp_index));
    }
  }

  auto exact_ok = [&](const Entity& r, const Entity& h) {
    return r.words == h.words && match_link[r.start_word] == h.start_word &&
           match_link[r.end_word] == h.end_word;
  };
  auto soft_ok = [&](const Entity& r, const Entity& h) {
    for (const auto& [ri, hi] : links) {
      if (ri >= r.start_word && ri <= r.end_word && hi >= h.start_word &&
          hi <= h.end_word) {
        return true;
      }
    }
    return false;
  };

  auto greedy = [&](auto&& ok) {
    Prf prf;
    std::vector<bool> used(hyp_ex.entities.size(), false);
    for (const Entity& r : ref_ex.entities) {
      bool matched = false;
      for (size_t h = 0; h < hyp_ex.entities.size(); ++h) {
        if (!used[h] && ok(r, hyp_ex.entities[h])) {
          used[h] = true;
          matched = true;
          break;
        }
      }
      matched ? ++prf.tp : ++prf.fn;
    }
    for (bool u : used) {
      if (!u) ++prf.fp;
    }
    prf.fp += hyp_ex.unmatched_open + hyp_ex.unmatched_close;
    prf.fn += ref_ex.unmatched_open + ref_ex.unmatched_close;
    return prf;
  };

  return {greedy(exact_ok), greedy(soft_ok)};
}

Prf token_text_prf(std::span<const Item> ref_items,
                   std::span<const Item> hyp_items, TokenKind kind) {
  const Alignment al = align_items(ref_items, hyp_items);
  auto count_kind = [kind](std::span<const Item> items) {
    long n = 0;
    for (const Item& it : items) {
      if (it.is_token(kind)) ++n;
    }
    return n;
  };
  long hits = 0;
  for (const AlignOp& op : al.ops) {
    if (op.op == EditOp::Match && ref_items[*op.ref_index].is_token(kind)) {
      ++hits;
    }
  }
  return {hits, count_kind(hyp_items) - hits, count_kind(ref_items) - hits};
}

Prf timestamp_prf(std::vector<double> ref_times, std::vector<double> hyp_times,
                  double collar) {
  std::sort(ref_times.begin(), ref_times.end());
  std::sort(hyp_times.begin(), hyp_times.end());
  long tp = 0;
  size_t i = 0;
  size_t j = 0;
  while (i < ref_times.size() && j < hyp_times.size()) {
    if (std::abs(ref_times[i] - hyp_times[j]) <= collar) {
      ++tp;
      ++i;
      ++j;
    } else if (hyp_times[j] < ref_times[i]) {
      ++j;
    } else {
      ++i;
    }
  }
  return {tp, static_cast<long>(hyp_times.size()) - tp,
          static_cast<long>(ref_times.size()) - tp};
}

namespace {

double total_length(const std::vector<Interval>& intervals) {
  double sum = 0;
  for (const Interval& iv : intervals) sum += iv.length();
  return sum;
}

double best_overlap_sum(const std::vector<Interval>& a,
                        const std::vector<Interval>& b) {
  double sum = 0;
  for (const Interval& x : a) {
    double best = 0;
    for (const Interval& y : b) {
      best = std::max(best, std::min(x.end, y.end) - std::max(x.start, y.start));
    }
    sum += best;
  }
  return sum;
}

}  // namespace

CpSums& CpSums::operator+=(const CpSums& other) {
  cov_num += other.cov_num;
  cov_den += other.cov_den;
  pur_num += other.pur_num;
  pur_den += other.pur_den;
  return *this;
}

CpSums coverage_purity_sums(const std::vector<Interval>& ref_turns,
                            const std::vector<Interval>& hyp_turns) {
  constexpr double kTol = 1e-9;
  const bool same_extent =
      ref_turns.empty() == hyp_turns.empty() &&
      (ref_turns.empty() ||
       (std::abs(ref_turns.front().start - hyp_turns.front().start) <= kTol &&
        std::abs(ref_turns.back().end - hyp_turns.back().end) <= kTol));
  if (!same_extent) {
    throw ValidationError(
        "coverage/purity: turn partitions cover different extents");
  }
  CpSums sums;
  sums.cov_num = best_overlap_sum(ref_turns, hyp_turns);
  sums.cov_den = total_length(ref_turns);
  sums.pur_num = best_overlap_sum(hyp_turns, ref_turns);
  sums.pur_den = total_length(hyp_turns);
  return sums;
}

CoveragePurity coverage_purity_from_sums(const CpSums& sums) {
  CoveragePurity cp;
  cp.coverage = sums.cov_den > 0 ? sums.cov_num / sums.cov_den : 1.0;
  cp.purity = sums.pur_den > 0 ? sums.pur_num / sums.pur_den : 1.0;
  cp.f1 = cp.coverage + cp.purity > 0
              ? 2.0 * cp.coverage * cp.purity / (cp.coverage + cp.purity)
              : 0.0;
  return cp;
}

CoveragePurity coverage_purity(const std::vector<Interval>& ref_turns,
                               const std::vector<Interval>& hyp_turns) {
  return coverage_purity_from_sums(coverage_purity_sums(ref_turns, hyp_turns));
}

namespace {

std::vector<Interval> merge_intervals(std::vector<Interval> intervals) {
  std::erase_if(intervals, [](const Interval& iv) { return iv.length() <= 0; });
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) {
              return a.start < b.start;
            });
  std::vector<Interval> merged;
  for (const Interval& iv : intervals) {
    if (!merged.empty() && iv.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, iv.end);
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

// Both lists merged and sorted.
double intersection_length(const std::vector<Interval>& a,
                           const std::vector<Interval>& b) {
  double sum = 0;
  size_t i = 0;
  size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].start, b[j].start);
    const double hi = std::min(a[i].end, b[j].end);
    if (hi > lo) sum += hi - lo;
    (a[i].end < b[j].end) ? ++i : ++j;
  }
  return sum;
}

}  // namespace

DetectionReport detection_rates(double fa_time, double miss_time,
                                double ref_speech, double total_duration) {
  DetectionReport report;
  report.fa_time = fa_time;
  report.miss_time = miss_time;
  report.ref_speech = ref_speech;
  double denom = ref_speech;
  if (denom <= 0) {
    report.degenerate = true;
    denom = total_duration;
  }
  if (denom > 0) {
    report.fa = fa_time / denom;
    report.ms = miss_time / denom;
    report.der = (fa_time + miss_time) / denom;
  }
  return report;
}

DetectionReport detection_metrics(std::vector<Interval> ref_speech,
                                  std::vector<Interval> hyp_speech,
                                  double total_duration) {
  const std::vector<Interval> ref = merge_intervals(std::move(ref_speech));
  const std::vector<Interval> hyp = merge_intervals(std::move(hyp_speech));
  const double ref_total = total_length(ref);
  const double hyp_total = total_length(hyp);
  const double inter = intersection_length(ref, hyp);
  return detection_rates(std::max(0.0, hyp_total - inter),
                         std::max(0.0, ref_total - inter), ref_total,
                         total_duration);
}

namespace {

bool task_enabled(const TaskSet& tasks, TokenKind kind) {
  switch (kind) {
    case TokenKind::SC:
      return tasks.sc;
    case TokenKind::EP:
      return tasks.ep;
    default:
      return tasks.ne;
  }
}

std::vector<Item> filter_items(std::span<const Item> items,
                               const TaskSet& tasks) {
  std::vector<Item> out;
  out.reserve(items.size());
  for (const Item& item : items) {
    if (item.is_word() || task_enabled(tasks, item.token)) out.push_back(item);
  }
  return out;
}

Hypothesis filter_hypothesis(const Hypothesis& hyp, const TaskSet& tasks) {
  Hypothesis out;
  out.ref = hyp.ref;
  out.emissions.reserve(hyp.emissions.size());
  for (const Emission& e : hyp.emissions) {
    if (e.item.is_word() || task_enabled(tasks, e.item.token)) {
      out.emissions.push_back(e);
    }
  }
  return out;
}

std::vector<double> event_times(const std::vector<TimedEvent>& events,
                                TokenKind kind) {
  std::vector<double> times;
  for (const TimedEvent& ev : events) {
    if (ev.kind == kind) times.push_back(ev.time);
  }
  return times;
}

}  // namespace

EvalReport evaluate_corpus(const std::vector<Conversation>& conversations,
                           const std::vector<Utterance>& references,
                           const std::vector<Hypothesis>& hypotheses,
                           const EvalConfig& config) {
  std::map<std::string, const Conversation*> conv_by_id;
  for (const Conversation& conv : conversations) {
    if (!conv_by_id.emplace(conv.id, &conv).second) {
      throw ValidationError("duplicate conversation id \"" + conv.id + "\"");
    }
  }
  std::map<std::string, const Hypothesis*> hyp_by_key;
  for (const Hypothesis& hyp : hypotheses) {
    if (!hyp_by_key.emplace(utterance_key(hyp.ref), &hyp).second) {
      throw ValidationError("duplicate hypothesis for utterance " +
                            utterance_key(hyp.ref));
    }
  }
  std::set<std::string> ref_keys;
  for (const Utterance& utt : references) {
    const std::string key =
        utterance_key(utt.conversation_id, utt.audio_start);
    if (!ref_keys.insert(key).second) {
      throw ValidationError("duplicate reference utterance " + key);
    }
    if (!hyp_by_key.count(key)) {
      throw ValidationError("no hypothesis for utterance " + key);
    }
  }
  for (const Hypothesis& hyp : hypotheses) {
    if (!ref_keys.count(utterance_key(hyp.ref))) {
      throw ValidationError("no reference utterance for hypothesis " +
                            utterance_key(hyp.ref));
    }
  }

  EvalReport report;
  CpSums cp_sums;
  double fa_time = 0;
  double miss_time = 0;
  double ref_speech_time = 0;
  double total_span = 0;

  for (const Utterance& utt : references) {
    auto conv_it = conv_by_id.find(utt.conversation_id);
    if (conv_it == conv_by_id.end()) {
      throw ValidationError("unknown conversation \"" + utt.conversation_id +
                            "\" in reference utterances");
    }
    const Conversation& conv = *conv_it->second;
    const Hypothesis& hyp_raw =
        *hyp_by_key.at(utterance_key(utt.conversation_id, utt.audio_start));

    Utterance ref_utt = utt;
    ref_utt.items = filter_items(utt.items, config.tasks);
    const Hypothesis hyp = filter_hypothesis(hyp_raw, config.tasks);
    const std::vector<Item> hyp_items = hyp.items();

    UtteranceScore score;
    score.ref = {utt.conversation_id, utt.audio_start};
    score.span = utt.duration();

    const std::vector<std::string> ref_words = strip_tokens(ref_utt.items);
    const std::vector<std::string> hyp_words = strip_tokens(hyp_items);
    score.wer = wer(ref_words, hyp_words);

    if (config.tasks.ne) {
      const NerCounts counts = ner_match(ref_utt.items, hyp_items);
      score.ner_exact = counts.exact;
      score.ner_soft = counts.soft;
    }
    if (config.tasks.sc) {
      score.scd_text = token_text_prf(ref_utt.items, hyp_items, TokenKind::SC);
    }
    if (config.tasks.ep) {
      score.ep_text = token_text_prf(ref_utt.items, hyp_items, TokenKind::EP);
    }

    // The reference side of the timed scores goes through the same frame
    // grid as the hypotheses, so a perfect hypothesis scores perfectly.
    const Hypothesis ref_sched =
        reference_emissions(ref_utt, conv, config.frames);
    const std::vector<TimedEvent> ref_events =
        extract_timed_events(ref_sched, config.frames);
    const std::vector<TimedEvent> hyp_events =
        extract_timed_events(hyp, config.frames);

    if (config.tasks.sc) {
      const std::vector<double> ref_sc = event_times(ref_events, TokenKind::SC);
      const std::vector<double> hyp_sc = event_times(hyp_events, TokenKind::SC);
      score.scd_time = timestamp_prf(ref_sc, hyp_sc, config.collar);
      score.cp = coverage_purity_sums(
          turns_from_events(ref_sc, utt.audio_start, utt.audio_end),
          turns_from_events(hyp_sc, utt.audio_start, utt.audio_end));
    }
    if (config.tasks.ep) {
      const std::vector<double> ref_ep = event_times(ref_events, TokenKind::EP);
      const std::vector<double> hyp_ep = event_times(hyp_events, TokenKind::EP);
      score.ep_time = timestamp_prf(ref_ep, hyp_ep, config.collar);
      const std::vector<Interval> spans{{utt.audio_start, utt.audio_end}};
      const DetectionReport det = detection_metrics(
          speech_regions_from_endpoints(ref_ep, spans),
          speech_regions_from_endpoints(hyp_ep, spans), utt.duration());
      score.fa_time = det.fa_time;
      score.miss_time = det.miss_time;
      score.ref_speech = det.ref_speech;
    }

    report.wer.substitutions += score.wer.substitutions;
    report.wer.deletions += score.wer.deletions;
    report.wer.insertions += score.wer.insertions;
    report.wer.matches += score.wer.matches;
    report.wer.ref_len += score.wer.ref_len;
    report.wer.hyp_len += score.wer.hyp_len;
    report.ner_exact += score.ner_exact;
    report.ner_soft += score.ner_soft;
    report.scd_text += score.scd_text;
    report.ep_text += score.ep_text;
    report.scd_time += score.scd_time;
    report.ep_time += score.ep_time;
    cp_sums += score.cp;
    fa_time += score.fa_time;
    miss_time += score.miss_time;
    ref_speech_time += score.ref_speech;
    total_span += score.span;

    report.per_utterance.push_back(std::move(score));
  }

  if (report.wer.ref_len > 0) {
    report.wer.rate = static_cast<double>(report.wer.errors()) /
                      static_cast<double>(report.wer.ref_len);
  } else if (report.wer.hyp_len > 0) {
    report.wer.rate = static_cast<double>(report.wer.hyp_len);
    report.wer.degenerate_reference = true;
  }
  report.cp = coverage_purity_from_sums(cp_sums);
  report.detection =
      detection_rates(fa_time, miss_time, ref_speech_time, total_span);
  return report;
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json prf_json(const Prf& prf) {
  return {{"p", prf.precision()}, {"r", prf.recall()}, {"f1", prf.f1()},
          {"tp", prf.tp},         {"fp", prf.fp},      {"fn", prf.fn}};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string report_json(const EvalReport& report) {
  ordered_json j{{"wer", report.wer.rate},
                 {"ner_exact", prf_json(report.ner_exact)},
                 {"ner_soft", prf_json(report.ner_soft)},
                 {"scd_text", prf_json(report.scd_text)},
                 {"ep_text", prf_json(report.ep_text)},
                 {"scd_time", prf_json(report.scd_time)},
                 {"ep_time", prf_json(report.ep_time)},
                 {"coverage", report.cp.coverage},
                 {"purity", report.cp.purity},
                 {"cp_f1", report.cp.f1},
                 {"fa", report.detection.fa},
                 {"ms", report.detection.ms},
                 {"der", report.detection.der}};
  return j.dump(2) + "\n";
}

std::string report_tsv(const EvalReport& report) {
  std::string out =
      "conversation_id\taudio_start\tref_words\twer\tner_exact_f1\t"
      "ner_soft_f1\tscd_text_f1\tep_text_f1\tscd_time_f1\tep_time_f1\t"
      "coverage\tpurity\tder\n";
  for (const UtteranceScore& u : report.per_utterance) {
    const CoveragePurity cp = coverage_purity_from_sums(u.cp);
    const DetectionReport det =
        detection_rates(u.fa_time, u.miss_time, u.ref_speech, u.span);
    out += u.ref.conversation_id;
    out += '\t';
    out += fmt(u.ref.audio_start);
    out += '\t';
    out += std::to_string(u.wer.ref_len);
    out += '\t';
    out += fmt(u.wer.rate);
    out += '\t';
    out += fmt(u.ner_exact.f1());
    out += '\t';
    out += fmt(u.ner_soft.f1());
    out += '\t';
    out += fmt(u.scd_text.f1());
    out += '\t';
    out += fmt(u.ep_text.f1());
    out += '\t';
    out += fmt(u.scd_time.f1());
    out += '\t';
    out += fmt(u.ep_time.f1());
    out += '\t';
    out += fmt(cp.coverage);
    out += '\t';
    out += fmt(cp.purity);
    out += '\t';
    out += fmt(det.der);
    out += '\n';
  }
  return out;
}

std::string report_summary(const EvalReport& report) {
  auto prf_line = [](const std::string& name, const Prf& prf) {
    return name + "  P=" + fmt(prf.precision()) + " R=" + fmt(prf.recall()) +
           " F1=" + fmt(prf.f1()) + "  (tp=" + std::to_string(prf.tp) +
           " fp=" + std::to_string(prf.fp) +
           " fn=" + std::to_string(prf.fn) + ")\n";
  };
  std::string out;
  out += "utterances " + std::to_string(report.per_utterance.size()) + "\n";
  out += "wer        " + fmt(report.wer.rate) + "  (S=" +
         std::to_string(report.wer.substitutions) + " D=" +
         std::to_string(report.wer.deletions) + " I=" +
         std::to_string(report.wer.insertions) + " / ref words=" +
         std::to_string(report.wer.ref_len) + ")" +
         (report.wer.degenerate_reference ? "  [empty reference]" : "") + "\n";
  out += prf_line("ner exact ", report.ner_exact);
  out += prf_line("ner soft  ", report.ner_soft);
  out += prf_line("scd text  ", report.scd_text);
  out += prf_line("ep text   ", report.ep_text);
  out += prf_line("scd time  ", report.scd_time);
  out += prf_line("ep time   ", report.ep_time);
  out += "coverage   " + fmt(report.cp.coverage) + "\n";
  out += "purity     " + fmt(report.cp.purity) + "\n";
  out += "cp f1      " + fmt(report.cp.f1) + "\n";
  out += "fa         " + fmt(report.detection.fa) + "\n";
  out += "ms         " + fmt(report.detection.ms) + "\n";
  out += "der        " + fmt(report.detection.der) +
         (report.detection.degenerate ? "  [no reference speech]" : "") + "\n";
  return out;
}

}  // namespace convtok
