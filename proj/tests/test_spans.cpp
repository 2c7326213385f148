#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <vector>

#include "deid/spans.hpp"

using namespace deid;

TEST_CASE("priorities order label classes") {
  CHECK(default_priority(Label::Per) == 0);
  CHECK(default_priority(Label::Mail) == 1);
  CHECK(default_priority(Label::Code) == 2);
  CHECK(default_priority(Label::Loc) == 3);
  CHECK(default_priority(Label::Org) == 4);
  CHECK(default_priority(Label::Date) == 5);
  CHECK(default_priority(Label::JobTitle) == 6);
  CHECK(default_priority(Label::Title) == 7);
  CHECK(default_priority(Label::Gender) == 8);
  CHECK(default_priority(Label::Website) == 9);
  CHECK(default_priority(Label::Num) == 10);
}

TEST_CASE("longer candidate beats higher-priority shorter one") {
  // A 2..12 ORG overlaps a 2..8 PER: length wins before priority.
  std::vector<CandidateSpan> cands = {
      make_candidate(2, 8, Label::Per, "ner"),
      make_candidate(2, 12, Label::Org, "lexicon"),
  };
  auto merged = merge_spans(cands);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0] == SelectedSpan{2, 12, Label::Org, "lexicon"});
}

TEST_CASE("equal length falls back to label priority") {
  std::vector<CandidateSpan> cands = {
      make_candidate(2, 8, Label::Org, "lexicon"),
      make_candidate(2, 8, Label::Per, "ner"),
  };
  auto merged = merge_spans(cands);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].label == Label::Per);
  CHECK(merged[0].source == "ner");
}

TEST_CASE("equal length and priority fall back to start then source") {
  {
    std::vector<CandidateSpan> cands = {
        make_candidate(4, 8, Label::Per, "ner"),
        make_candidate(2, 6, Label::Per, "ner"),
    };
    auto merged = merge_spans(cands);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].start == 2);
  }
  {
    std::vector<CandidateSpan> cands = {
        make_candidate(2, 6, Label::Per, "zeta"),
        make_candidate(2, 6, Label::Per, "alpha"),
    };
    auto merged = merge_spans(cands);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].source == "alpha");
  }
}

TEST_CASE("non-overlapping candidates all survive, output sorted by start") {
  std::vector<CandidateSpan> cands = {
      make_candidate(20, 25, Label::Loc, "a"),
      make_candidate(0, 5, Label::Per, "b"),
      make_candidate(10, 15, Label::Date, "c"),
  };
  auto merged = merge_spans(cands);
  REQUIRE(merged.size() == 3);
  CHECK(merged[0].start == 0);
  CHECK(merged[1].start == 10);
  CHECK(merged[2].start == 20);
}

TEST_CASE("touching spans do not conflict") {
  std::vector<CandidateSpan> cands = {
      make_candidate(0, 5, Label::Per, "a"),
      make_candidate(5, 9, Label::Loc, "b"),
  };
  CHECK(merge_spans(cands).size() == 2);
}

TEST_CASE("a discarded candidate does not shadow later ones") {
  // The big span eats the middle candidate; the right candidate overlaps
  // only the middle one and must therefore survive.
  std::vector<CandidateSpan> cands = {
      make_candidate(0, 10, Label::Per, "a"),
      make_candidate(8, 14, Label::Loc, "b"),    // overlaps winner: discarded
      make_candidate(12, 14, Label::Date, "c"),  // overlaps only the discarded one
  };
  auto merged = merge_spans(cands);
  REQUIRE(merged.size() == 2);
  CHECK(merged[0].start == 0);
  CHECK(merged[1] == SelectedSpan{12, 14, Label::Date, "c"});
}

TEST_CASE("empty input") {
  CHECK(merge_spans({}).empty());
}

namespace {

// Literal restatement of the selection rule: repeatedly pick the best
// remaining candidate and drop everything that overlaps it.
std::vector<SelectedSpan> repeated_selection(std::vector<CandidateSpan> pool) {
  std::vector<SelectedSpan> picked;
  while (!pool.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i)
      if (detail::candidate_wins(pool[i], pool[best])) best = i;
    const CandidateSpan win = pool[best];
    picked.push_back({win.start, win.end, win.label, win.source});
    std::vector<CandidateSpan> rest;
    for (const CandidateSpan& c : pool)
      if (!ranges_intersect(c.start, c.end, win.start, win.end)) rest.push_back(c);
    pool = std::move(rest);
  }
  std::sort(picked.begin(), picked.end(),
            [](const SelectedSpan& a, const SelectedSpan& b) { return a.start < b.start; });
  return picked;
}

}  // namespace

TEST_CASE("sweep merge equals repeated selection on random candidate sets") {
  std::mt19937 rng(1234);
  const char* sources[] = {"ner", "dates", "numbers", "lexicon"};
  for (int round = 0; round < 400; ++round) {
    std::vector<CandidateSpan> cands;
    const int n = std::uniform_int_distribution<int>(0, 10)(rng);
    for (int i = 0; i < n; ++i) {
      std::size_t start = std::uniform_int_distribution<std::size_t>(0, 30)(rng);
      std::size_t len = 1 + std::uniform_int_distribution<std::size_t>(0, 7)(rng);
      Label label = all_labels[std::uniform_int_distribution<std::size_t>(0, 10)(rng)];
      cands.push_back(make_candidate(start, start + len, label,
                                     sources[std::uniform_int_distribution<int>(0, 3)(rng)]));
    }
    auto fast = merge_spans(cands);
    auto slow = repeated_selection(cands);
    CHECK(fast == slow);

    // Results never overlap and are sorted.
    for (std::size_t i = 1; i < fast.size(); ++i) {
      CHECK(fast[i - 1].end <= fast[i].start);
    }
  }
}

TEST_CASE("merge is independent of candidate order") {
  std::mt19937 rng(555);
  std::vector<CandidateSpan> cands = {
      make_candidate(0, 4, Label::Per, "ner"),
      make_candidate(2, 8, Label::Loc, "lexicon"),
      make_candidate(6, 12, Label::Org, "lexicon"),
      make_candidate(6, 12, Label::Date, "dates"),
      make_candidate(13, 15, Label::Num, "numbers"),
  };
  auto reference = merge_spans(cands);
  for (int i = 0; i < 40; ++i) {
    std::shuffle(cands.begin(), cands.end(), rng);
    CHECK(merge_spans(cands) == reference);
  }
}
