#include "convtok/augment.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "convtok/error.hpp"
#include "convtok/io.hpp"

namespace convtok {

TaskSet task_set_from_string(const std::string& s) {
  TaskSet tasks = TaskSet::none();
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, ',')) {
    if (part.empty()) continue;
    if (part == "sc") {
      tasks.sc = true;
    } else if (part == "ep") {
      tasks.ep = true;
    } else if (part == "ne") {
      tasks.ne = true;
    } else {
      throw ValidationError("unknown task \"" + part +
                            "\" (expected sc, ep, ne)");
    }
  }
  return tasks;
}

std::string task_set_to_string(const TaskSet& tasks) {
  std::string out;
  auto add = [&out](const char* name) {
    if (!out.empty()) out += ',';
    out += name;
  };
  if (tasks.sc) add("sc");
  if (tasks.ep) add("ep");
  if (tasks.ne) add("ne");
  return out;
}

std::vector<Utterance> pack_segments(const Conversation& conversation,
                                     const PackConfig& config) {
  if (!(config.max_duration > 0)) {
    throw ValidationError("max_duration must be > 0");
  }
  const auto& segments = conversation.segments;
  std::vector<Utterance> utterances;
  size_t i = 0;
  while (i < segments.size()) {
    Utterance utt;
    utt.conversation_id = conversation.id;
    utt.audio_start = segments[i].start;
    size_t j = i;
    if (segments[i].end - segments[i].start > config.max_duration) {
      // A lone segment longer than the bound is kept whole.
      utt.oversize = true;
    } else {
      while (j + 1 < segments.size() &&
             segments[j + 1].end - segments[i].start <= config.max_duration) {
        ++j;
      }
    }
    utt.audio_end = segments[j].end;
    for (size_t k = i; k <= j; ++k) {
      utt.source_segments.push_back(static_cast<int>(k));
    }
    utterances.push_back(std::move(utt));
    i = j + 1;
  }
  return utterances;
}

std::vector<Item> augment_text(const Conversation& conversation,
                               const std::vector<int>& segment_indices,
                               const TaskSet& tasks) {
  std::vector<Item> items;
  for (size_t n = 0; n < segment_indices.size(); ++n) {
    const Segment& seg = conversation.segments.at(segment_indices[n]);
    size_t next_entity = 0;
    for (size_t wi = 0; wi < seg.words.size(); ++wi) {
      if (tasks.ne && next_entity < seg.entities.size() &&
          static_cast<int>(wi) == seg.entities[next_entity].start_word) {
        items.push_back(Item::task(TokenKind::NeOpen));
      }
      items.push_back(Item::word(seg.words[wi]));
      if (tasks.ne && next_entity < seg.entities.size() &&
          static_cast<int>(wi) == seg.entities[next_entity].end_word) {
        items.push_back(Item::task(TokenKind::NeClose));
        ++next_entity;
      }
    }
    if (tasks.ep) {
      items.push_back(Item::task(TokenKind::EP));
    }
    if (tasks.sc && n + 1 < segment_indices.size()) {
      const Segment& next = conversation.segments.at(segment_indices[n + 1]);
      if (next.speaker != seg.speaker) {
        items.push_back(Item::task(TokenKind::SC));
      }
    }
  }
  return items;
}

std::vector<Utterance> prepare_conversation(const Conversation& conversation,
                                            const PackConfig& config) {
  std::vector<Utterance> utterances = pack_segments(conversation, config);
  for (Utterance& utt : utterances) {
    utt.items = augment_text(conversation, utt.source_segments, config.tasks);
  }
  return utterances;
}

std::vector<std::string> strip_tokens(std::span<const Item> items) {
  std::vector<std::string> words;
  for (const Item& item : items) {
    if (item.is_word()) words.push_back(item.text);
  }
  return words;
}

StatsReport corpus_stats(const std::vector<Utterance>& utterances) {
  StatsReport stats;
  std::set<std::string> surfaces;
  for (const Utterance& utt : utterances) {
    ++stats.utterance_count;
    stats.total_duration += utt.duration();
    std::string entity;       // surface of the currently open entity
    bool in_entity = false;
    for (const Item& item : utt.items) {
      if (item.is_word()) {
        ++stats.word_count;
        if (in_entity) {
          if (!entity.empty()) entity += ' ';
          entity += item.text;
        }
        continue;
      }
      ++stats.token_counts[static_cast<int>(item.token)];
      if (item.token == TokenKind::NeOpen) {
        in_entity = true;
        entity.clear();
      } else if (item.token == TokenKind::NeClose && in_entity) {
        ++stats.entity_count;
        surfaces.insert(entity);
        in_entity = false;
      }
    }
  }
  stats.unique_entity_count = surfaces.size();
  for (int k = 0; k < kNumTokenKinds; ++k) {
    stats.token_pct[k] =
        stats.word_count == 0
            ? 0.0
            : 100.0 * static_cast<double>(stats.token_counts[k]) /
                  static_cast<double>(stats.word_count);
  }
  return stats;
}

std::string format_stats(const StatsReport& stats) {
  std::ostringstream out;
  out << "# token percentages = 100 * token count / word count"
      << " (tokens excluded from the denominator)\n";
  out << "utterances\t" << stats.utterance_count << '\n';
  out << "words\t" << stats.word_count << '\n';
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", stats.total_duration / 3600.0);
  out << "duration_h\t" << buf << '\n';
  for (int k = 0; k < kNumTokenKinds; ++k) {
    TokenKind kind = static_cast<TokenKind>(k);
    std::snprintf(buf, sizeof(buf), "%.2f", stats.token_pct[k]);
    out << token_surface(kind) << "\tn=" << stats.token_counts[k] << "\tpct="
        << buf << '\n';
  }
  out << "#NE\t" << stats.entity_count << '\n';
  out << "#uniq\t" << stats.unique_entity_count << '\n';
  return out.str();
}

void validate_items(std::span<const Item> items, const std::string& where) {
  int ne_depth = 0;
  size_t ep_count = 0;
  size_t sc_count = 0;
  for (const Item& item : items) {
    if (item.is_token(TokenKind::NeOpen)) {
      if (++ne_depth > 1) {
        throw ValidationError(where + ": nested [NE]");
      }
    } else if (item.is_token(TokenKind::NeClose)) {
      if (--ne_depth < 0) {
        throw ValidationError(where + ": unmatched [/NE]");
      }
    }
    if (item.is_token(TokenKind::SC)) ++sc_count;
    if (item.is_token(TokenKind::EP)) ++ep_count;
  }
  if (ne_depth != 0) {
    throw ValidationError(where + ": unclosed [NE]");
  }
  // EP-adjacency only applies when the EP task was enabled at all.
  if (ep_count > 0) {
    if (ep_count < sc_count) {
      throw ValidationError(where + ": more [SC] than [EP]");
    }
    bool after_ep = false;
    for (const Item& item : items) {
      if (item.is_token(TokenKind::SC) && !after_ep) {
        throw ValidationError(where + ": [SC] not immediately after [EP]");
      }
      after_ep = item.is_token(TokenKind::EP);
    }
  }
}

namespace {

using nlohmann::json;

json items_to_json(const std::vector<Item>& items) {
  json arr = json::array();
  for (const Item& item : items) {
    if (item.is_word()) {
      arr.push_back({{"w", item.text}});
    } else {
      arr.push_back({{"t", token_kind_name(item.token)}});
    }
  }
  return arr;
}

std::vector<Item> items_from_json(const json& arr) {
  std::vector<Item> items;
  for (const json& j : arr) {
    if (j.contains("w")) {
      items.push_back(Item::word(j.at("w").get<std::string>()));
    } else {
      TokenKind kind;
      const std::string name = j.at("t").get<std::string>();
      if (!token_kind_from_name(name, kind)) {
        throw ValidationError("unknown token kind \"" + name + "\"");
      }
      items.push_back(Item::task(kind));
    }
  }
  return items;
}

}  // namespace

std::string utterance_to_json_line(const Utterance& utterance) {
  return json{{"conversation_id", utterance.conversation_id},
              {"audio_start", utterance.audio_start},
              {"audio_end", utterance.audio_end},
              {"items", items_to_json(utterance.items)},
              {"source_segments", utterance.source_segments},
              {"oversize", utterance.oversize}}
      .dump();
}

Utterance utterance_from_json_line(const std::string& line) {
  json j = json::parse(line);
  Utterance utt;
  utt.conversation_id = j.at("conversation_id").get<std::string>();
  utt.audio_start = j.at("audio_start").get<double>();
  utt.audio_end = j.at("audio_end").get<double>();
  utt.items = items_from_json(j.at("items"));
  utt.source_segments = j.at("source_segments").get<std::vector<int>>();
  utt.oversize = j.at("oversize").get<bool>();
  return utt;
}

void save_utterances(const std::vector<Utterance>& utterances,
                     const std::filesystem::path& path) {
  std::string out;
  for (const Utterance& u : utterances) {
    out += utterance_to_json_line(u);
    out += '\n';
  }
  write_text_file_atomic(path, out);
}

std::vector<Utterance> load_utterances(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open for reading: " + path.string());
  }
  std::vector<Utterance> utterances;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Utterance utt;
    try {
      utt = utterance_from_json_line(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": parse error: " + e.what());
    }
    if (utt.audio_end < utt.audio_start) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": audio_end before audio_start");
    }
    validate_items(utt.items,
                   path.string() + ":" + std::to_string(lineno));
    utterances.push_back(std::move(utt));
  }
  if (in.bad()) {
    throw IoError("read failed: " + path.string());
  }
  return utterances;
}

}  // namespace convtok
