#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "convtok/corpus.hpp"

namespace convtok {

enum class EditOp { Match, Substitute, Delete, Insert };

struct AlignOp {
  EditOp op = EditOp::Match;
  std::optional<std::size_t> ref_index;  // set for match/substitute/delete
  std::optional<std::size_t> hyp_index;  // set for match/substitute/insert
};

struct Alignment {
  std::vector<AlignOp> ops;
  int distance = 0;
  int matches = 0;
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
};

// Minimal-cost alignment under unit costs (match 0, sub/del/ins 1).
// Ties in the backtrace resolve match > substitute > delete > insert.
Alignment levenshtein_align(std::span<const std::string> ref,
                            std::span<const std::string> hyp);

// Distance only, straight from the Wagner-Fischer recurrence. Kept separate
// from the backtracing version so the two routes cross-check each other.
int levenshtein_distance(std::span<const std::string> ref,
                         std::span<const std::string> hyp);

struct WerResult {
  double rate = 0;
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int matches = 0;
  std::size_t ref_len = 0;
  std::size_t hyp_len = 0;
  // True when |ref| = 0 but |hyp| > 0; the rate is then |hyp| / 1.
  bool degenerate_reference = false;

  int errors() const { return substitutions + deletions + insertions; }
};

// (S + D + I) / |ref| over token-stripped word sequences.
WerResult wer(std::span<const std::string> ref_words,
              std::span<const std::string> hyp_words);

// Surface strings of an item sequence; task tokens keep their reserved
// forms, so a token only ever aligns with the identical token.
std::vector<std::string> item_surfaces(std::span<const Item> items);

Alignment align_items(std::span<const Item> ref, std::span<const Item> hyp);

}  // namespace convtok
