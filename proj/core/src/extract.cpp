#include "convtok/extract.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "convtok/error.hpp"
#include "convtok/io.hpp"

namespace convtok {

std::vector<Item> Hypothesis::items() const {
  std::vector<Item> out;
  out.reserve(emissions.size());
  for (const Emission& e : emissions) out.push_back(e.item);
  return out;
}

ExtractionResult extract_entities(std::span<const Item> items) {
  ExtractionResult result;
  bool open = false;
  int open_start = 0;
  std::vector<std::string> open_words;
  int word_count = 0;
  for (const Item& item : items) {
    if (item.is_word()) {
      if (open) open_words.push_back(item.text);
      ++word_count;
    } else if (item.is_token(TokenKind::NeOpen)) {
      if (open) ++result.unmatched_open;  // outer open is discarded
      open = true;
      open_start = word_count;
      open_words.clear();
    } else if (item.is_token(TokenKind::NeClose)) {
      if (!open) {
        ++result.unmatched_close;
      } else if (open_words.empty()) {
        // An empty pair is degenerate tagging, not an entity.
        ++result.unmatched_open;
        ++result.unmatched_close;
        open = false;
      } else {
        result.entities.push_back(
            {std::move(open_words), open_start, word_count - 1});
        open_words = {};
        open = false;
      }
    }
  }
  if (open) ++result.unmatched_open;
  return result;
}

ExtractionResult extract_entities(const Hypothesis& hyp) {
  return extract_entities(hyp.items());
}

double token_time(long frame_index, const FrameSpec& spec,
                  double audio_start) {
  return audio_start + static_cast<double>(frame_index) * spec.frame_stride;
}

std::vector<TimedEvent> extract_timed_events(const Hypothesis& hyp,
                                             const FrameSpec& spec) {
  std::vector<TimedEvent> events;
  for (const Emission& e : hyp.emissions) {
    if (e.item.is_token(TokenKind::SC) || e.item.is_token(TokenKind::EP)) {
      events.push_back(
          {e.item.token, token_time(e.frame, spec, hyp.ref.audio_start)});
    }
  }
  return events;
}

std::vector<Interval> turns_from_events(const std::vector<double>& change_times,
                                        double start, double end) {
  std::vector<Interval> turns;
  if (!(end > start)) return turns;
  double prev = start;
  for (double t : change_times) {
    if (t > prev && t < end) {
      turns.push_back({prev, t});
      prev = t;
    }
  }
  turns.push_back({prev, end});
  return turns;
}

std::vector<Interval> speech_regions_from_endpoints(
    const std::vector<double>& ep_times, const std::vector<Interval>& spans) {
  // Assign each endpoint to the nearest span and clamp it inside.
  std::vector<std::vector<double>> per_span(spans.size());
  for (double t : ep_times) {
    size_t best = spans.size();
    double best_dist = 0;
    for (size_t s = 0; s < spans.size(); ++s) {
      double d = 0;
      if (t < spans[s].start) {
        d = spans[s].start - t;
      } else if (t > spans[s].end) {
        d = t - spans[s].end;
      }
      if (best == spans.size() || d < best_dist) {
        best = s;
        best_dist = d;
      }
    }
    if (best < spans.size()) {
      per_span[best].push_back(
          std::clamp(t, spans[best].start, spans[best].end));
    }
  }
  std::vector<Interval> regions;
  for (size_t s = 0; s < spans.size(); ++s) {
    std::sort(per_span[s].begin(), per_span[s].end());
    double prev = spans[s].start;
    for (double t : per_span[s]) {
      if (t > prev) {
        regions.push_back({prev, t});
        prev = t;
      }
    }
  }
  return regions;
}

namespace {

// End time of word `wi` within a segment whose words are spread uniformly.
double word_end_time(const Segment& seg, size_t wi) {
  return seg.start + (static_cast<double>(wi) + 1.0) * seg.duration() /
                         static_cast<double>(seg.words.size());
}

double word_start_time(const Segment& seg, size_t wi) {
  return seg.start + static_cast<double>(wi) * seg.duration() /
                         static_cast<double>(seg.words.size());
}

}  // namespace

Hypothesis reference_emissions(const Utterance& utterance,
                               const Conversation& conversation,
                               const FrameSpec& spec) {
  const std::string where =
      "utterance " + utterance.conversation_id + "@" +
      std::to_string(utterance.audio_start);
  Hypothesis hyp;
  hyp.ref = {utterance.conversation_id, utterance.audio_start};

  std::vector<const Segment*> segs;
  for (int idx : utterance.source_segments) {
    if (idx < 0 || idx >= static_cast<int>(conversation.segments.size())) {
      throw ValidationError(where + ": source segment index " +
                            std::to_string(idx) + " out of range");
    }
    segs.push_back(&conversation.segments[idx]);
  }

  size_t si = 0;  // current segment (within segs)
  size_t wi = 0;  // next word within that segment
  size_t ep_seen = 0;
  double prev_time = utterance.audio_start;
  long prev_frame = 0;

  auto skip_exhausted = [&](size_t s, size_t w) {
    while (s < segs.size() && w >= segs[s]->words.size()) {
      ++s;
      w = 0;
    }
    return std::pair<size_t, size_t>(s, w);
  };

  auto emit = [&](const Item& item, double time) {
    long frame = std::lround((time - utterance.audio_start) /
                             spec.frame_stride);
    frame = std::max({frame, prev_frame, 0L});
    hyp.emissions.push_back({item, frame});
    prev_frame = frame;
    prev_time = std::max(prev_time, time);
  };

  for (const Item& item : utterance.items) {
    if (item.is_word()) {
      std::tie(si, wi) = skip_exhausted(si, wi);
      if (si >= segs.size() || segs[si]->words[wi] != item.text) {
        throw ValidationError(where +
                              ": items do not match the conversation's "
                              "segment words");
      }
      emit(item, word_end_time(*segs[si], wi));
      ++wi;
    } else if (item.is_token(TokenKind::EP)) {
      if (ep_seen >= segs.size()) {
        throw ValidationError(where + ": more [EP] tokens than segments");
      }
      emit(item, segs[ep_seen]->end);
      ++ep_seen;
    } else if (item.is_token(TokenKind::SC)) {
      emit(item, prev_time);  // co-located with the boundary it follows
    } else if (item.is_token(TokenKind::NeOpen)) {
      auto [ns, nw] = skip_exhausted(si, wi);
      emit(item, ns < segs.size() ? word_start_time(*segs[ns], nw)
                                  : prev_time);
    } else {  // NeClose
      emit(item, prev_time);
    }
  }
  return hyp;
}

namespace {

using nlohmann::json;

}  // namespace

std::string utterance_key(const std::string& conversation_id,
                          double audio_start) {
  return conversation_id + "@" + json(audio_start).dump();
}

std::string utterance_key(const UtteranceRef& ref) {
  return utterance_key(ref.conversation_id, ref.audio_start);
}

std::string hypothesis_to_json_line(const Hypothesis& hyp) {
  json emissions = json::array();
  for (const Emission& e : hyp.emissions) {
    if (e.item.is_word()) {
      emissions.push_back({{"w", e.item.text}, {"f", e.frame}});
    } else {
      emissions.push_back({{"t", token_kind_name(e.item.token)}, {"f", e.frame}});
    }
  }
  return json{{"conversation_id", hyp.ref.conversation_id},
              {"audio_start", hyp.ref.audio_start},
              {"emissions", emissions}}
      .dump();
}

Hypothesis hypothesis_from_json_line(const std::string& line) {
  json j = json::parse(line);
  Hypothesis hyp;
  hyp.ref.conversation_id = j.at("conversation_id").get<std::string>();
  hyp.ref.audio_start = j.at("audio_start").get<double>();
  for (const json& e : j.at("emissions")) {
    Emission emission;
    emission.frame = e.at("f").get<long>();
    if (e.contains("w")) {
      emission.item = Item::word(e.at("w").get<std::string>());
    } else {
      TokenKind kind;
      const std::string name = e.at("t").get<std::string>();
      if (!token_kind_from_name(name, kind)) {
        throw ValidationError("unknown token kind \"" + name + "\"");
      }
      emission.item = Item::task(kind);
    }
    hyp.emissions.push_back(std::move(emission));
  }
  return hyp;
}

std::vector<Hypothesis> load_hypotheses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open for reading: " + path.string());
  }
  std::vector<Hypothesis> hypotheses;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Hypothesis hyp;
    try {
      hyp = hypothesis_from_json_line(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": parse error: " + e.what());
    }
    long prev = 0;
    for (const Emission& e : hyp.emissions) {
      if (e.frame < 0 || e.frame < prev) {
        throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                              ": emission frames must be non-negative and "
                              "non-decreasing");
      }
      prev = e.frame;
    }
    hypotheses.push_back(std::move(hyp));
  }
  if (in.bad()) {
    throw IoError("read failed: " + path.string());
  }
  return hypotheses;
}

void save_hypotheses(const std::vector<Hypothesis>& hypotheses,
                     const std::filesystem::path& path) {
  std::string out;
  for (const Hypothesis& h : hypotheses) {
    out += hypothesis_to_json_line(h);
    out += '\n';
  }
  write_text_file_atomic(path, out);
}

}  // namespace convtok
