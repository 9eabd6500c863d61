#include "convtok/tokenizer.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "convtok/augment.hpp"
#include "convtok/error.hpp"
#include "convtok/io.hpp"

namespace convtok {

namespace {

const std::string kMarker{kWordMarker};
const std::vector<std::string> kReserved = {"<pad>", "<unk>", "<bos>",
                                            "<eos>"};

// Splits a UTF-8 string into codepoint-sized chunks. An invalid lead or
// truncated sequence falls back to a single byte, keeping the split total.
std::vector<std::string> utf8_chars(const std::string& s) {
  std::vector<std::string> chars;
  size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    size_t len = 1;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
    }
    if (i + len > s.size()) len = 1;
    chars.push_back(s.substr(i, len));
    i += len;
  }
  return chars;
}

using SymbolSeq = std::vector<std::string>;

SymbolSeq word_symbols(const std::string& word) {
  SymbolSeq seq;
  seq.push_back(kMarker);
  for (std::string& c : utf8_chars(word)) seq.push_back(std::move(c));
  return seq;
}

void add_piece(Vocab& vocab, const std::string& piece) {
  vocab.piece_ids.emplace(piece, vocab.size());
  vocab.pieces.push_back(piece);
}

struct CorpusSymbols {
  // word type -> (symbol sequence, frequency); std::map keeps iteration
  // deterministic.
  std::map<std::string, std::pair<SymbolSeq, long>> words;
  std::set<std::string> chars;
};

CorpusSymbols collect_symbols(const std::vector<std::vector<Item>>& corpus) {
  CorpusSymbols out;
  out.chars.insert(kMarker);
  for (const std::vector<Item>& items : corpus) {
    for (const Item& item : items) {
      if (!item.is_word()) continue;
      auto [it, inserted] = out.words.try_emplace(
          item.text, std::pair<SymbolSeq, long>{{}, 0});
      if (inserted) {
        it->second.first = word_symbols(item.text);
        for (size_t k = 1; k < it->second.first.size(); ++k) {
          out.chars.insert(it->second.first[k]);
        }
      }
      ++it->second.second;
    }
  }
  return out;
}

int base_piece_count(const CorpusSymbols& symbols, size_t protected_count) {
  return static_cast<int>(kReserved.size() + protected_count +
                          symbols.chars.size());
}

}  // namespace

int Vocab::id_of(const std::string& piece) const {
  auto it = piece_ids.find(piece);
  return it == piece_ids.end() ? kUnkId : it->second;
}

bool Vocab::is_protected(const std::string& piece) const {
  return std::find(protected_pieces.begin(), protected_pieces.end(), piece) !=
         protected_pieces.end();
}

int min_vocab_size(const std::vector<std::vector<Item>>& corpus,
                   const std::vector<std::string>& protected_tokens) {
  return base_piece_count(collect_symbols(corpus), protected_tokens.size());
}

Vocab train_bpe(const std::vector<std::vector<Item>>& corpus, int vocab_size,
                const std::vector<std::string>& protected_tokens) {
  CorpusSymbols symbols = collect_symbols(corpus);

  const int minimum = base_piece_count(symbols, protected_tokens.size());
  if (vocab_size < minimum) {
    throw ValidationError(
        "vocab_size " + std::to_string(vocab_size) + " too small; minimum is " +
        std::to_string(minimum) + " (" + std::to_string(kReserved.size()) +
        " reserved + " + std::to_string(protected_tokens.size()) +
        " protected + " + std::to_string(symbols.chars.size()) +
        " base characters)");
  }

  Vocab vocab;
  for (const std::string& r : kReserved) add_piece(vocab, r);
  for (const std::string& p : protected_tokens) {
    if (vocab.piece_ids.count(p) || symbols.chars.count(p)) {
      throw ValidationError("protected string \"" + p +
                            "\" collides with another piece");
    }
    add_piece(vocab, p);
    vocab.protected_pieces.push_back(p);
  }
  for (const std::string& c : symbols.chars) add_piece(vocab, c);

  // A merge may never assemble a reserved or protected surface out of
  // ordinary characters; such pairs simply stay split forever.
  std::set<std::string> blocked(kReserved.begin(), kReserved.end());
  blocked.insert(protected_tokens.begin(), protected_tokens.end());

  // Greedy merge loop. Pair counts are rebuilt each round; corpora here are
  // desk scale and word types collapse quickly.
  while (vocab.size() < vocab_size) {
    std::map<std::pair<std::string, std::string>, long> pair_counts;
    for (const auto& [text, entry] : symbols.words) {
      const SymbolSeq& seq = entry.first;
      for (size_t k = 0; k + 1 < seq.size(); ++k) {
        pair_counts[{seq[k], seq[k + 1]}] += entry.second;
      }
    }
    // First maximum in map order = lexicographically smallest pair on ties.
    const std::pair<std::string, std::string>* best = nullptr;
    long best_count = 1;  // a pair must occur at least twice to merge
    for (const auto& [pair, count] : pair_counts) {
      if (count > best_count && !blocked.count(pair.first + pair.second)) {
        best = &pair;
        best_count = count;
      }
    }
    if (best == nullptr) break;

    const std::string merged = best->first + best->second;
    vocab.merges.push_back({best->first, best->second, merged});
    if (!vocab.piece_ids.count(merged)) add_piece(vocab, merged);

    for (auto& [text, entry] : symbols.words) {
      SymbolSeq& seq = entry.first;
      if (seq.size() < 2) continue;
      SymbolSeq out;
      out.reserve(seq.size());
      for (size_t k = 0; k < seq.size(); ++k) {
        if (k + 1 < seq.size() && seq[k] == best->first &&
            seq[k + 1] == best->second) {
          out.push_back(merged);
          ++k;
        } else {
          out.push_back(seq[k]);
        }
      }
      seq = std::move(out);
    }
  }
  return vocab;
}

Vocab train_bpe_utterances(const std::vector<Utterance>& utterances,
                           int vocab_size,
                           const std::vector<std::string>& protected_tokens) {
  std::vector<std::vector<Item>> corpus;
  corpus.reserve(utterances.size());
  for (const Utterance& u : utterances) corpus.push_back(u.items);
  return train_bpe(corpus, vocab_size, protected_tokens);
}

namespace {

// Applies merge rules to a word's symbols in rank order (lowest first,
// leftmost occurrence on equal rank), reproducing the training segmentation.
void apply_merges(
    const std::map<std::pair<std::string, std::string>, int>& ranks,
    SymbolSeq& seq) {
  while (seq.size() > 1) {
    int best_rank = -1;
    size_t best_pos = 0;
    for (size_t k = 0; k + 1 < seq.size(); ++k) {
      auto it = ranks.find({seq[k], seq[k + 1]});
      if (it != ranks.end() && (best_rank < 0 || it->second < best_rank)) {
        best_rank = it->second;
        best_pos = k;
      }
    }
    if (best_rank < 0) break;
    seq[best_pos] += seq[best_pos + 1];
    seq.erase(seq.begin() + static_cast<long>(best_pos) + 1);
  }
}

}  // namespace

std::vector<int> encode(const Vocab& vocab, std::span<const Item> items) {
  std::map<std::pair<std::string, std::string>, int> ranks;
  for (size_t r = 0; r < vocab.merges.size(); ++r) {
    ranks.emplace(std::pair{vocab.merges[r].left, vocab.merges[r].right},
                  static_cast<int>(r));
  }
  std::vector<int> ids;
  for (const Item& item : items) {
    if (item.is_token()) {
      ids.push_back(vocab.id_of(token_surface(item.token)));
      continue;
    }
    SymbolSeq seq = word_symbols(item.text);
    apply_merges(ranks, seq);
    for (const std::string& sym : seq) {
      ids.push_back(vocab.id_of(sym));
    }
  }
  return ids;
}

std::vector<Item> decode(const Vocab& vocab, std::span<const int> ids) {
  std::vector<Item> items;
  std::string word;
  bool in_word = false;
  auto flush = [&items, &word, &in_word]() {
    if (in_word && !word.empty()) items.push_back(Item::word(word));
    word.clear();
    in_word = false;
  };
  for (int id : ids) {
    if (id < 0 || id >= vocab.size()) {
      throw ValidationError("piece id " + std::to_string(id) +
                            " out of range (vocab size " +
                            std::to_string(vocab.size()) + ")");
    }
    const std::string& piece = vocab.pieces[id];
    if (id == Vocab::kPadId || id == Vocab::kBosId || id == Vocab::kEosId) {
      continue;
    }
    if (vocab.is_protected(piece)) {
      flush();
      TokenKind kind;
      if (token_from_surface(piece, kind)) {
        items.push_back(Item::task(kind));
      } else {
        items.push_back(Item::word(piece));
      }
      continue;
    }
    if (piece.compare(0, kMarker.size(), kMarker) == 0) {
      flush();
      in_word = true;
      word = piece.substr(kMarker.size());
    } else {
      // <unk> and continuation pieces extend the current word.
      in_word = true;
      word += piece;
    }
  }
  flush();
  return items;
}

std::string vocab_to_string(const Vocab& vocab) {
  std::ostringstream out;
  out << "convtok-vocab v1\n";
  out << "vocab_size\t" << vocab.size() << '\n';
  out << "protected\t" << vocab.protected_pieces.size();
  for (const std::string& p : vocab.protected_pieces) out << '\t' << p;
  out << '\n';
  out << "pieces\t" << vocab.size() << '\n';
  for (int id = 0; id < vocab.size(); ++id) {
    out << id << '\t' << vocab.pieces[id] << '\n';
  }
  out << "merges\t" << vocab.merges.size() << '\n';
  for (const MergeRule& m : vocab.merges) {
    out << m.left << '\t' << m.right << '\t' << m.merged << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t pos = 0;
  while (true) {
    size_t tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return fields;
}

[[noreturn]] void bad_vocab(const std::string& why) {
  throw ValidationError("malformed vocab file: " + why);
}

}  // namespace

Vocab vocab_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next_line = [&in, &line](const char* what) {
    if (!std::getline(in, line)) bad_vocab(std::string("missing ") + what);
  };

  next_line("header");
  if (line != "convtok-vocab v1") bad_vocab("unknown header \"" + line + "\"");

  next_line("vocab_size");
  auto size_fields = split_tabs(line);
  if (size_fields.size() != 2 || size_fields[0] != "vocab_size") {
    bad_vocab("expected vocab_size line");
  }
  const int size = std::stoi(size_fields[1]);

  next_line("protected list");
  auto prot_fields = split_tabs(line);
  if (prot_fields.size() < 2 || prot_fields[0] != "protected") {
    bad_vocab("expected protected line");
  }
  const int n_protected = std::stoi(prot_fields[1]);
  if (static_cast<int>(prot_fields.size()) != n_protected + 2) {
    bad_vocab("protected count mismatch");
  }

  Vocab vocab;
  for (int i = 0; i < n_protected; ++i) {
    vocab.protected_pieces.push_back(prot_fields[i + 2]);
  }

  next_line("pieces header");
  auto piece_fields = split_tabs(line);
  if (piece_fields.size() != 2 || piece_fields[0] != "pieces" ||
      std::stoi(piece_fields[1]) != size) {
    bad_vocab("expected pieces header matching vocab_size");
  }
  for (int id = 0; id < size; ++id) {
    next_line("piece");
    auto fields = split_tabs(line);
    if (fields.size() != 2 || std::stoi(fields[0]) != id) {
      bad_vocab("piece line " + std::to_string(id));
    }
    if (vocab.piece_ids.count(fields[1])) {
      bad_vocab("duplicate piece \"" + fields[1] + "\"");
    }
    add_piece(vocab, fields[1]);
  }

  next_line("merges header");
  auto merge_fields = split_tabs(line);
  if (merge_fields.size() != 2 || merge_fields[0] != "merges") {
    bad_vocab("expected merges header");
  }
  const int n_merges = std::stoi(merge_fields[1]);
  for (int i = 0; i < n_merges; ++i) {
    next_line("merge rule");
    auto fields = split_tabs(line);
    if (fields.size() != 3 || fields[0] + fields[1] != fields[2]) {
      bad_vocab("merge rule " + std::to_string(i));
    }
    vocab.merges.push_back({fields[0], fields[1], fields[2]});
  }
  for (const std::string& p : vocab.protected_pieces) {
    if (!vocab.piece_ids.count(p)) {
      bad_vocab("protected piece \"" + p + "\" missing from pieces");
    }
  }
  return vocab;
}

void save_vocab(const Vocab& vocab, const std::filesystem::path& path) {
  write_text_file_atomic(path, vocab_to_string(vocab));
}

Vocab load_vocab(const std::filesystem::path& path) {
  return vocab_from_string(read_text_file(path));
}

}  // namespace convtok
