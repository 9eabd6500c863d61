#include "convtok/align.hpp"

#include <algorithm>

namespace convtok {

Alignment levenshtein_align(std::span<const std::string> ref,
                            std::span<const std::string> hyp) {
  const size_t m = ref.size();
  const size_t n = hyp.size();
  // Full DP matrix; fine at the sequence lengths this toolkit sees.
  std::vector<int> cost((m + 1) * (n + 1));
  auto at = [&cost, n](size_t i, size_t j) -> int& {
    return cost[i * (n + 1) + j];
  };
  for (size_t i = 0; i <= m; ++i) at(i, 0) = static_cast<int>(i);
  for (size_t j = 0; j <= n; ++j) at(0, j) = static_cast<int>(j);
  for (size_t i = 1; i <= m; ++i) {
    for (size_t j = 1; j <= n; ++j) {
      int diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      int del = at(i - 1, j) + 1;
      int ins = at(i, j - 1) + 1;
      at(i, j) = std::min({diag, del, ins});
    }
  }

  Alignment alignment;
  alignment.distance = at(m, n);
  // Backtrace, preferring match > substitute > delete > insert.
  size_t i = m;
  size_t j = n;
  std::vector<AlignOp>& ops = alignment.ops;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] &&
        at(i, j) == at(i - 1, j - 1)) {
      ops.push_back({EditOp::Match, i - 1, j - 1});
      --i;
      --j;
    } else if (i > 0 && j > 0 && ref[i - 1] != hyp[j - 1] &&
               at(i, j) == at(i - 1, j - 1) + 1) {
      ops.push_back({EditOp::Substitute, i - 1, j - 1});
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ops.push_back({EditOp::Delete, i - 1, std::nullopt});
      --i;
    } else {
      ops.push_back({EditOp::Insert, std::nullopt, j - 1});
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());
  for (const AlignOp& op : ops) {
    switch (op.op) {
      case EditOp::Match: ++alignment.matches; break;
      case EditOp::Substitute: ++alignment.substitutions; break;
      case EditOp::Delete: ++alignment.deletions; break;
      case EditOp::Insert: ++alignment.insertions; break;
    }
  }
  return alignment;
}

int levenshtein_distance(std::span<const std::string> ref,
                         std::span<const std::string> hyp) {
  const size_t m = ref.size();
  const size_t n = hyp.size();
  std::vector<int> prev(n + 1);
  std::vector<int> cur(n + 1);
  for (size_t j = 0; j <= n; ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= m; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= n; ++j) {
      int diag = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({diag, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

WerResult wer(std::span<const std::string> ref_words,
              std::span<const std::string> hyp_words) {
  Alignment alignment = levenshtein_align(ref_words, hyp_words);
  WerResult result;
  result.substitutions = alignment.substitutions;
  result.deletions = alignment.deletions;
  result.insertions = alignment.insertions;
  result.matches = alignment.matches;
  result.ref_len = ref_words.size();
  result.hyp_len = hyp_words.size();
  if (ref_words.empty()) {
    result.degenerate_reference = !hyp_words.empty();
    result.rate = static_cast<double>(hyp_words.size());
  } else {
    result.rate = static_cast<double>(result.errors()) /
                  static_cast<double>(ref_words.size());
  }
  return result;
}

std::vector<std::string> item_surfaces(std::span<const Item> items) {
  std::vector<std::string> surfaces;
  surfaces.reserve(items.size());
  for (const Item& item : items) surfaces.push_back(item.surface());
  return surfaces;
}

Alignment align_items(std::span<const Item> ref, std::span<const Item> hyp) {
  return levenshtein_align(item_surfaces(ref), item_surfaces(hyp));
}

}  // namespace convtok
