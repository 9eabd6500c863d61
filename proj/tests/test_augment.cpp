#include "doctest.h"

#include "convtok/augment.hpp"
#include "convtok/corpus.hpp"
#include "convtok/error.hpp"

#include "test_util.hpp"

using namespace convtok;

namespace {

Segment make_segment(double start, double end, const std::string& speaker,
                     std::vector<std::string> words,
                     std::vector<EntitySpan> entities = {}) {
  Segment seg;
  seg.start = start;
  seg.end = end;
  seg.speaker = speaker;
  seg.words = std::move(words);
  seg.entities = std::move(entities);
  return seg;
}

Conversation tagged_fixture() {
  Conversation conv;
  conv.id = "c1";
  conv.segments = {
      make_segment(0.0, 2.0, "alice", {"hello", "there", "friend"}, {{1, 2}}),
      make_segment(2.5, 4.0, "bob", {"good", "morning"}),
  };
  return conv;
}

}  // namespace

TEST_CASE("task_set_from_string parses subsets") {
  CHECK(task_set_from_string("sc,ep,ne") == TaskSet::all());
  CHECK(task_set_from_string("") == TaskSet::none());
  CHECK(task_set_from_string("ne") == TaskSet{false, false, true});
  CHECK(task_set_from_string("ep,sc") == TaskSet{true, true, false});
  CHECK_THROWS_AS(task_set_from_string("sc,bogus"), ValidationError);
  CHECK(task_set_to_string(TaskSet{true, false, true}) == "sc,ne");
}

TEST_CASE("pack_segments groups greedily under the duration window") {
  Conversation conv;
  conv.id = "c";
  conv.segments = {
      make_segment(0, 8, "a", {"w"}),
      make_segment(9, 15, "a", {"w"}),
      make_segment(16, 22, "b", {"w"}),
      make_segment(30, 34, "b", {"w"}),
  };
  const auto utts = pack_segments(conv, {20.0, TaskSet::all()});
  REQUIRE(utts.size() == 2);
  CHECK(utts[0].source_segments == std::vector<int>{0, 1});
  CHECK(utts[0].audio_start == 0.0);
  CHECK(utts[0].audio_end == 15.0);
  CHECK_FALSE(utts[0].oversize);
  CHECK(utts[1].source_segments == std::vector<int>{2, 3});
  CHECK(utts[1].audio_start == 16.0);
  CHECK(utts[1].audio_end == 34.0);
}

TEST_CASE("pack_segments includes a window that exactly hits the limit") {
  Conversation conv;
  conv.id = "c";
  conv.segments = {
      make_segment(0, 5, "a", {"w"}),
      make_segment(10, 20, "a", {"w"}),  // 20 - 0 == limit
      make_segment(21, 22, "a", {"w"}),
  };
  const auto utts = pack_segments(conv, {20.0, TaskSet::all()});
  REQUIRE(utts.size() == 2);
  CHECK(utts[0].source_segments == std::vector<int>{0, 1});
  CHECK(utts[1].source_segments == std::vector<int>{2});
}

TEST_CASE("a lone over-long segment is kept whole and flagged") {
  Conversation conv;
  conv.id = "c";
  conv.segments = {
      make_segment(0, 25, "a", {"w"}),
      make_segment(26, 28, "a", {"w"}),
  };
  const auto utts = pack_segments(conv, {20.0, TaskSet::all()});
  REQUIRE(utts.size() == 2);
  CHECK(utts[0].oversize);
  CHECK(utts[0].duration() == 25.0);
  CHECK_FALSE(utts[1].oversize);
}

TEST_CASE("augment_text places tokens per task set") {
  const auto conv = tagged_fixture();
  const std::vector<int> both{0, 1};

  SUBCASE("all tasks") {
    CHECK(format_items(augment_text(conv, both, TaskSet::all())) ==
          "hello [NE] there friend [/NE] [EP] [SC] good morning [EP]");
  }
  SUBCASE("endpointing only") {
    CHECK(format_items(augment_text(conv, both, {false, true, false})) ==
          "hello there friend [EP] good morning [EP]");
  }
  SUBCASE("speaker change only") {
    CHECK(format_items(augment_text(conv, both, {true, false, false})) ==
          "hello there friend [SC] good morning");
  }
  SUBCASE("entities only") {
    CHECK(format_items(augment_text(conv, both, {false, false, true})) ==
          "hello [NE] there friend [/NE] good morning");
  }
  SUBCASE("no tasks gives plain text") {
    CHECK(format_items(augment_text(conv, both, TaskSet::none())) ==
          "hello there friend good morning");
  }
}

TEST_CASE("augment_text emits no SC when the speaker stays the same") {
  auto conv = tagged_fixture();
  conv.segments[1].speaker = "alice";
  CHECK(format_items(augment_text(conv, {0, 1}, TaskSet::all())) ==
        "hello [NE] there friend [/NE] [EP] good morning [EP]");
}

TEST_CASE("augment_text never puts SC at the utterance boundary") {
  const auto conv = tagged_fixture();
  for (const auto& indices :
       {std::vector<int>{0}, std::vector<int>{1}, std::vector<int>{0, 1}}) {
    const auto items = augment_text(conv, indices, TaskSet::all());
    REQUIRE_FALSE(items.empty());
    CHECK_FALSE(items.front().is_token(TokenKind::SC));
    CHECK_FALSE(items.back().is_token(TokenKind::SC));
  }
}

TEST_CASE("strip_tokens recovers the plain words") {
  const auto conv = tagged_fixture();
  const auto items = augment_text(conv, {0, 1}, TaskSet::all());
  CHECK(strip_tokens(items) ==
        std::vector<std::string>{"hello", "there", "friend", "good",
                                 "morning"});
}

TEST_CASE("prepare_conversation fills items for every packed utterance") {
  const auto conv = tagged_fixture();
  const auto utts = prepare_conversation(conv, {20.0, TaskSet::all()});
  REQUIRE(utts.size() == 1);
  CHECK(utts[0].conversation_id == "c1");
  CHECK(utts[0].audio_start == 0.0);
  CHECK(utts[0].audio_end == 4.0);
  CHECK(format_items(utts[0].items) ==
        "hello [NE] there friend [/NE] [EP] [SC] good morning [EP]");
  CHECK_NOTHROW(validate_items(utts[0].items, "test"));
}

TEST_CASE("corpus_stats counts tokens against the word denominator") {
  const auto utts =
      prepare_conversation(tagged_fixture(), {20.0, TaskSet::all()});
  const StatsReport stats = corpus_stats(utts);
  CHECK(stats.utterance_count == 1);
  CHECK(stats.word_count == 5);
  CHECK(stats.total_duration == doctest::Approx(4.0));
  CHECK(stats.token_counts[static_cast<int>(TokenKind::SC)] == 1);
  CHECK(stats.token_counts[static_cast<int>(TokenKind::EP)] == 2);
  CHECK(stats.token_counts[static_cast<int>(TokenKind::NeOpen)] == 1);
  CHECK(stats.token_counts[static_cast<int>(TokenKind::NeClose)] == 1);
  CHECK(stats.token_pct[static_cast<int>(TokenKind::EP)] ==
        doctest::Approx(40.0));
  CHECK(stats.token_pct[static_cast<int>(TokenKind::SC)] ==
        doctest::Approx(20.0));
  CHECK(stats.entity_count == 1);
  CHECK(stats.unique_entity_count == 1);
  const std::string text = format_stats(stats);
  CHECK(text.find("word count") != std::string::npos);
}

TEST_CASE("utterance JSONL round-trips") {
  TempDir tmp;
  const auto utts =
      prepare_conversation(tagged_fixture(), {20.0, TaskSet::all()});
  const auto path = tmp.file("utts.jsonl");
  save_utterances(utts, path);
  CHECK(load_utterances(path) == utts);
}

TEST_CASE("validate_items rejects malformed tag structure") {
  auto items = [](const char* text) { return parse_tagged_text(text); };

  CHECK_NOTHROW(validate_items(items("a [EP] [SC] b [EP]"), "t"));
  CHECK_NOTHROW(validate_items(items("a [SC] b"), "t"));  // no EP in play
  CHECK_THROWS_AS(validate_items(items("a [SC] b [EP]"), "t"),
                  ValidationError);
  CHECK_THROWS_AS(validate_items(items("[NE] a"), "t"), ValidationError);
  CHECK_THROWS_AS(validate_items(items("a [/NE]"), "t"), ValidationError);
  CHECK_THROWS_AS(validate_items(items("[NE] [NE] a [/NE] [/NE]"), "t"),
                  ValidationError);
}

TEST_CASE("load_utterances rejects files that break tag invariants") {
  TempDir tmp;
  auto utts = prepare_conversation(tagged_fixture(), {20.0, TaskSet::all()});
  // corrupt: SC without a preceding EP while EPs exist
  auto& items = utts[0].items;
  for (size_t i = 0; i + 1 < items.size(); ++i) {
    if (items[i].is_token(TokenKind::EP) &&
        items[i + 1].is_token(TokenKind::SC)) {
      std::swap(items[i], items[i + 1]);
      break;
    }
  }
  const auto path = tmp.file("bad.jsonl");
  save_utterances(utts, path);
  CHECK_THROWS_AS(load_utterances(path), ValidationError);
}
