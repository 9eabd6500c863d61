#include "convtok/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"

#include "convtok/error.hpp"
#include "convtok/io.hpp"

namespace convtok {

namespace {

// Generic conversational vocabulary for synthetic corpora.
const std::vector<std::string>& word_inventory() {
  static const std::vector<std::string> words = {
      "account",  "address",  "afternoon", "agent",    "alright",
      "anything", "balance",  "billing",   "business", "call",
      "calling",  "can",      "card",      "care",     "center",
      "change",   "charge",   "check",     "city",     "claim",
      "company",  "computer", "confirm",   "contact",  "correct",
      "cost",     "could",    "customer",  "date",     "day",
      "detail",   "device",   "different", "dollars",  "done",
      "email",    "evening",  "everything", "exactly", "forward",
      "found",    "get",      "give",      "good",     "great",
      "happy",    "have",     "hear",      "hello",    "help",
      "here",     "hold",     "home",      "hour",     "info",
      "issue",    "just",     "know",      "last",     "let",
      "like",     "line",     "look",      "machine",  "make",
      "manager",  "maybe",    "meeting",   "minute",   "moment",
      "monday",   "money",    "month",     "morning",  "name",
      "need",     "new",      "next",      "no",       "note",
      "number",   "office",   "okay",      "one",      "order",
      "payment",  "perfect",  "person",    "phone",    "plan",
      "please",   "policy",   "price",     "problem",  "process",
      "question", "ready",    "really",    "reason",   "record",
      "refund",   "repeat",   "report",    "request",  "right",
      "schedule", "second",   "see",       "send",     "service",
      "set",      "should",   "sorry",     "speak",    "start",
      "status",   "street",   "sure",      "system",   "take",
      "talk",     "team",     "tell",      "that",     "there",
      "thing",    "think",    "this",      "though",   "through",
      "time",     "today",    "tomorrow",  "total",    "transfer",
      "try",      "two",      "understand", "update",  "wait",
      "want",     "week",     "welcome",   "what",     "when",
      "where",    "which",    "will",      "with",     "word",
      "work",     "would",    "yeah",      "year",     "yes",
      "zero",
  };
  return words;
}

std::string pick_word(Rng& rng) {
  const auto& inv = word_inventory();
  return inv[rng.next_int(0, static_cast<long>(inv.size()) - 1)];
}

// A replacement guaranteed to differ from `original`.
std::string pick_other_word(Rng& rng, const std::string& original) {
  const auto& inv = word_inventory();
  size_t idx =
      static_cast<size_t>(rng.next_int(0, static_cast<long>(inv.size()) - 1));
  if (inv[idx] == original) idx = (idx + 1) % inv.size();
  return inv[idx];
}

void check_range(const IntRange& r, long min_lo, const std::string& name) {
  if (r.lo > r.hi || r.lo < min_lo) {
    throw ValidationError("invalid " + name + " range [" +
                          std::to_string(r.lo) + ", " + std::to_string(r.hi) +
                          "]");
  }
}

void check_range(const RealRange& r, double min_lo, const std::string& name) {
  if (r.lo > r.hi || r.lo < min_lo) {
    throw ValidationError("invalid " + name + " range [" +
                          std::to_string(r.lo) + ", " + std::to_string(r.hi) +
                          "]");
  }
}

void check_rate(double rate, const std::string& name) {
  if (rate < 0 || rate > 1) {
    throw ValidationError(name + " must be in [0, 1], got " +
                          std::to_string(rate));
  }
}

}  // namespace

std::vector<Conversation> generate_corpus(const SimConfig& config) {
  if (config.conversations < 0) {
    throw ValidationError("conversation count must be non-negative");
  }
  check_range(config.speakers, 1, "speakers");
  check_range(config.segments, 1, "segments");
  check_range(config.segment_duration, 1e-9, "segment_duration");
  check_range(config.entity_words, 1, "entity_words");
  check_range(config.pause, 0.0, "pause");
  check_rate(config.entity_rate, "entity_rate");
  check_rate(config.speaker_change_prob, "speaker_change_prob");
  if (config.words_per_second <= 0) {
    throw ValidationError("words_per_second must be positive");
  }

  std::vector<Conversation> corpus;
  const Rng root(config.seed);
  for (long k = 0; k < config.conversations; ++k) {
    Rng rng = root.split(static_cast<std::uint64_t>(k));
    Conversation conv;
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "%04ld", k);
    conv.id = config.id_prefix + suffix;

    const long n_speakers = rng.next_int(config.speakers.lo, config.speakers.hi);
    const long n_segments = rng.next_int(config.segments.lo, config.segments.hi);
    double t = 0;
    long speaker = rng.next_int(0, n_speakers - 1);
    for (long s = 0; s < n_segments; ++s) {
      if (s > 0) {
        t += rng.next_real(config.pause.lo, config.pause.hi);
        if (n_speakers > 1 && rng.bernoulli(config.speaker_change_prob)) {
          speaker = (speaker + rng.next_int(1, n_speakers - 1)) % n_speakers;
        }
      }
      Segment seg;
      seg.start = t;
      const double dur =
          rng.next_real(config.segment_duration.lo, config.segment_duration.hi);
      seg.end = t + dur;
      t = seg.end;
      seg.speaker = "spk" + std::to_string(speaker);

      const long n_words =
          std::max(1L, std::lround(dur * config.words_per_second));
      for (long w = 0; w < n_words; ++w) seg.words.push_back(pick_word(rng));

      long w = 0;
      while (w < n_words) {
        if (rng.bernoulli(config.entity_rate)) {
          long len = rng.next_int(config.entity_words.lo, config.entity_words.hi);
          len = std::min(len, n_words - w);
          seg.entities.push_back(
              {static_cast<int>(w), static_cast<int>(w + len - 1)});
          w += len;
        } else {
          ++w;
        }
      }
      conv.segments.push_back(std::move(seg));
    }
    validate_conversation(conv);
    corpus.push_back(std::move(conv));
  }
  return corpus;
}

CorruptResult corrupt(const Utterance& utterance,
                      const Conversation& conversation,
                      const NoiseConfig& noise, const FrameSpec& frames,
                      Rng rng) {
  check_rate(noise.sub_rate, "sub_rate");
  check_rate(noise.del_rate, "del_rate");
  check_rate(noise.ins_rate, "ins_rate");
  check_rate(noise.token_drop_rate, "token_drop_rate");
  if (noise.frame_jitter < 0) {
    throw ValidationError("frame_jitter must be non-negative");
  }

  const Hypothesis schedule =
      reference_emissions(utterance, conversation, frames);
  CorruptResult result;
  result.hypothesis.ref = schedule.ref;

  int w = 0;
  std::array<int, kNumTokenKinds> token_seen{};
  for (const Emission& e : schedule.emissions) {
    if (e.item.is_word()) {
      if (rng.bernoulli(noise.del_rate)) {
        result.edits.push_back(
            {Edit::Kind::Delete, w, "", TokenKind::SC, 0});
      } else if (rng.bernoulli(noise.sub_rate)) {
        std::string repl = pick_other_word(rng, e.item.text);
        result.hypothesis.emissions.push_back({Item::word(repl), e.frame});
        result.edits.push_back(
            {Edit::Kind::Substitute, w, std::move(repl), TokenKind::SC, 0});
      } else {
        result.hypothesis.emissions.push_back(e);
      }
      if (rng.bernoulli(noise.ins_rate)) {
        std::string extra = pick_word(rng);
        result.hypothesis.emissions.push_back({Item::word(extra), e.frame});
        result.edits.push_back(
            {Edit::Kind::Insert, w + 1, std::move(extra), TokenKind::SC, 0});
      }
      ++w;
    } else {
      const int occurrence = token_seen[static_cast<int>(e.item.token)]++;
      if (rng.bernoulli(noise.token_drop_rate)) {
        result.edits.push_back(
            {Edit::Kind::DropToken, 0, "", e.item.token, occurrence});
      } else {
        result.hypothesis.emissions.push_back(e);
      }
    }
  }

  if (noise.frame_jitter > 0) {
    long prev = 0;
    for (Emission& e : result.hypothesis.emissions) {
      long f = e.frame + rng.next_int(-noise.frame_jitter, noise.frame_jitter);
      f = std::max({f, prev, 0L});
      e.frame = f;
      prev = f;
    }
  }
  return result;
}

std::vector<CorruptResult> corrupt_corpus(
    const std::vector<Utterance>& utterances,
    const std::vector<Conversation>& conversations, const NoiseConfig& noise,
    const FrameSpec& frames) {
  std::map<std::string, const Conversation*> by_id;
  for (const Conversation& conv : conversations) {
    if (!by_id.emplace(conv.id, &conv).second) {
      throw ValidationError("duplicate conversation id \"" + conv.id + "\"");
    }
  }
  const Rng root(noise.seed);
  std::vector<CorruptResult> results;
  results.reserve(utterances.size());
  for (size_t i = 0; i < utterances.size(); ++i) {
    const Utterance& utt = utterances[i];
    auto it = by_id.find(utt.conversation_id);
    if (it == by_id.end()) {
      throw ValidationError("unknown conversation \"" + utt.conversation_id +
                            "\" in utterances");
    }
    results.push_back(
        corrupt(utt, *it->second, noise, frames, root.split(i)));
  }
  return results;
}

std::vector<std::string> apply_word_edits(
    const std::vector<std::string>& ref_words,
    const std::vector<Edit>& edits) {
  std::map<int, std::string> subs;
  std::set<int> dels;
  std::map<int, std::string> inserts;
  for (const Edit& e : edits) {
    switch (e.kind) {
      case Edit::Kind::Substitute:
        subs[e.ref_word] = e.word;
        break;
      case Edit::Kind::Delete:
        dels.insert(e.ref_word);
        break;
      case Edit::Kind::Insert:
        inserts[e.ref_word] = e.word;
        break;
      case Edit::Kind::DropToken:
        break;
    }
  }
  std::vector<std::string> out;
  for (int i = 0; i < static_cast<int>(ref_words.size()); ++i) {
    if (!dels.count(i)) {
      auto s = subs.find(i);
      out.push_back(s != subs.end() ? s->second : ref_words[i]);
    }
    auto a = inserts.find(i + 1);
    if (a != inserts.end()) out.push_back(a->second);
  }
  return out;
}

long word_edit_count(const std::vector<Edit>& edits) {
  long n = 0;
  for (const Edit& e : edits) {
    if (e.kind != Edit::Kind::DropToken) ++n;
  }
  return n;
}

namespace {

using nlohmann::json;

json edit_to_json(const Edit& e) {
  switch (e.kind) {
    case Edit::Kind::Substitute:
      return {{"kind", "sub"}, {"ref_word", e.ref_word}, {"word", e.word}};
    case Edit::Kind::Delete:
      return {{"kind", "del"}, {"ref_word", e.ref_word}};
    case Edit::Kind::Insert:
      return {{"kind", "ins"}, {"ref_word", e.ref_word}, {"word", e.word}};
    case Edit::Kind::DropToken:
    default:
      return {{"kind", "drop"},
              {"token", token_kind_name(e.token)},
              {"index", e.token_index}};
  }
}

Edit edit_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  Edit e;
  if (kind == "sub" || kind == "ins") {
    e.kind = kind == "sub" ? Edit::Kind::Substitute : Edit::Kind::Insert;
    e.ref_word = j.at("ref_word").get<int>();
    e.word = j.at("word").get<std::string>();
  } else if (kind == "del") {
    e.kind = Edit::Kind::Delete;
    e.ref_word = j.at("ref_word").get<int>();
  } else if (kind == "drop") {
    e.kind = Edit::Kind::DropToken;
    const std::string name = j.at("token").get<std::string>();
    if (!token_kind_from_name(name, e.token)) {
      throw ValidationError("unknown token kind \"" + name + "\"");
    }
    e.token_index = j.at("index").get<int>();
  } else {
    throw ValidationError("unknown edit kind \"" + kind + "\"");
  }
  return e;
}

}  // namespace

std::string edits_to_json_line(const UtteranceEdits& entry) {
  json edits = json::array();
  for (const Edit& e : entry.edits) edits.push_back(edit_to_json(e));
  return json{{"utt", entry.utterance}, {"edits", edits}}.dump();
}

UtteranceEdits edits_from_json_line(const std::string& line) {
  const json j = json::parse(line);
  UtteranceEdits entry;
  entry.utterance = j.at("utt").get<std::string>();
  for (const json& e : j.at("edits")) entry.edits.push_back(edit_from_json(e));
  return entry;
}

void save_edit_log(const std::vector<UtteranceEdits>& log,
                   const std::filesystem::path& path) {
  std::string out;
  for (const UtteranceEdits& entry : log) {
    out += edits_to_json_line(entry);
    out += '\n';
  }
  write_text_file_atomic(path, out);
}

std::vector<UtteranceEdits> load_edit_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open for reading: " + path.string());
  }
  std::vector<UtteranceEdits> log;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      log.push_back(edits_from_json_line(line));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": parse error: " + e.what());
    }
  }
  if (in.bad()) {
    throw IoError("read failed: " + path.string());
  }
  return log;
}

}  // namespace convtok
