#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "deid/dataset.hpp"
#include "deid/tokenizer.hpp"
#include "deid/unicode.hpp"

using namespace deid;

namespace {

std::vector<std::string> tags_of(const std::vector<TaggedToken>& tagged) {
  std::vector<std::string> tags;
  tags.reserve(tagged.size());
  for (const TaggedToken& t : tagged) tags.push_back(to_string(t.tag));
  return tags;
}

}  // namespace

TEST_CASE("title expansion closes the list under the prefix rules") {
  JobTitleList list = expand_job_titles({"senior adviseur", "analist"});
  CHECK(list.titles == std::vector<std::string>{
                           "senior adviseur",
                           "senior analist",
                           "adviseur",
                           "analist",
                       });
}

TEST_CASE("title expansion is idempotent") {
  JobTitleList once = expand_job_titles({"senior adviseur", "analist", "senior senior x"});
  JobTitleList twice = expand_job_titles(once.titles);
  CHECK(once.titles == twice.titles);

  // The degenerate double prefix strips one layer at a time and never
  // manufactures a triple.
  JobTitleList weird = expand_job_titles({"senior senior x"});
  CHECK(weird.titles == std::vector<std::string>{"senior senior x", "senior x", "x"});
}

TEST_CASE("title expansion deduplicates case-insensitively, keeping the first spelling") {
  JobTitleList list = expand_job_titles({"Analist", "analist", "ANALIST"});
  CHECK(list.titles == std::vector<std::string>{"senior Analist", "Analist"});
}

TEST_CASE("title expansion trims and drops empty entries") {
  JobTitleList list = expand_job_titles({"  adviseur\t", "", "   "});
  CHECK(list.titles == std::vector<std::string>{"senior adviseur", "adviseur"});
}

TEST_CASE("the bare prefix word is itself a valid title") {
  JobTitleList list = expand_job_titles({"senior"});
  CHECK(list.titles == std::vector<std::string>{"senior senior", "senior"});
}

TEST_CASE("title expansion honours a custom prefix") {
  JobTitleList list = expand_job_titles({"chef"}, "interim");
  CHECK(list.titles == std::vector<std::string>{"interim chef", "chef"});
}

TEST_CASE("expansion orders by code points, not bytes") {
  // "éénheidsch" has 10 code points but 12 bytes; it must outrank an
  // 11-code-point ASCII title only if longer in code points (it is not).
  JobTitleList list = expand_job_titles({"éénheidsch", "beheerderxx"});
  REQUIRE(list.titles.size() == 4);
  CHECK(unicode::length(list.titles[2]) >= unicode::length(list.titles[3]));
  CHECK(list.titles[2] == "beheerderxx");  // 11 cps before 10 cps
  CHECK(list.titles[3] == "éénheidsch");
}

TEST_CASE("stoplist removes exact titles case-insensitively") {
  JobTitleList list = expand_job_titles({"medewerker", "adviseur"});
  JobTitleList kept = apply_stoplist(std::move(list), {"Medewerker", " ADVISEUR\t"});
  // Only the exact stop-listed surfaces go; the senior variants remain.
  CHECK(kept.titles == std::vector<std::string>{"senior medewerker", "senior adviseur"});
}

TEST_CASE("title list files are one entry per line with no comment syntax") {
  std::istringstream in(
      "adviseur\n"
      "  senior analist  \n"
      "\n"
      "# not a comment\n");
  std::vector<std::string> titles = read_title_list(in);
  CHECK(titles == std::vector<std::string>{"adviseur", "senior analist", "# not a comment"});
}

TEST_CASE("labeling projects titles onto tokens as iob2") {
  JobTitleList titles = expand_job_titles({"senior beleidsmedewerker", "analist"});
  auto tokens = tokenize("De senior beleidsmedewerker en de analist .");
  auto tagged = label_tokens(tokens, titles);
  CHECK(tags_of(tagged) == std::vector<std::string>{
                               "O", "B-JOBTITLE", "I-JOBTITLE", "O", "O", "B-JOBTITLE", "O"});
  // Token payloads ride along untouched.
  REQUIRE(tagged.size() == tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) CHECK(tagged[i].token == tokens[i]);
}

TEST_CASE("longer titles win where titles overlap") {
  JobTitleList titles = expand_job_titles({"analist"});
  // "senior analist" precedes "analist" in the expanded list, so the pair
  // of tokens is tagged as one entity rather than O + B.
  auto tagged = label_tokens(tokenize("een senior analist hier"), titles);
  CHECK(tags_of(tagged) == std::vector<std::string>{"O", "B-JOBTITLE", "I-JOBTITLE", "O"});

  // Without the senior token the shorter title still applies.
  auto bare = label_tokens(tokenize("de analist"), titles);
  CHECK(tags_of(bare) == std::vector<std::string>{"O", "B-JOBTITLE"});
}

TEST_CASE("consumed tokens are never retagged") {
  JobTitleList titles;
  titles.titles = {"netwerk beheerder", "beheerder applicaties"};
  auto tagged = label_tokens(tokenize("netwerk beheerder applicaties"), titles);
  // The first title claims tokens 0-1; the second no longer fits and token
  // 2 stays outside.
  CHECK(tags_of(tagged) == std::vector<std::string>{"B-JOBTITLE", "I-JOBTITLE", "O"});
}

TEST_CASE("adjacent occurrences stay separate entities") {
  JobTitleList titles = expand_job_titles({"analist"});
  auto tagged = label_tokens(tokenize("analist analist"), titles);
  CHECK(tags_of(tagged) == std::vector<std::string>{"B-JOBTITLE", "B-JOBTITLE"});
}

TEST_CASE("title matching folds case and diacritics rules like the rest of the engine") {
  JobTitleList titles = expand_job_titles({"financiën-specialist"});
  auto tagged = label_tokens(tokenize("De FINANCIËN-Specialist komt"), titles);
  CHECK(tags_of(tagged) == std::vector<std::string>{"O", "B-JOBTITLE", "O"});
}

TEST_CASE("label_texts pairs every document with its tagged tokens") {
  JobTitleList titles = expand_job_titles({"adviseur"});
  std::vector<Document> docs = {
      {"d1", "de adviseur"},
      {"d2", "geen titel hier"},
  };
  auto labeled = label_texts(docs, titles);
  REQUIRE(labeled.size() == 2);
  CHECK(labeled[0].first == docs[0]);
  CHECK(tags_of(labeled[0].second) == std::vector<std::string>{"O", "B-JOBTITLE"});
  CHECK(tags_of(labeled[1].second) == std::vector<std::string>{"O", "O", "O"});
}

TEST_CASE("dataset statistics aggregate entities and surfaces") {
  JobTitleList titles = expand_job_titles({"adviseur", "senior analist"});
  std::vector<Document> docs = {
      {"d1", "de Adviseur en de adviseur"},
      {"d2", "een senior analist"},
      {"d3", "niets"},
  };
  DatasetStats stats = dataset_stats(label_texts(docs, titles));
  CHECK(stats.token_count == 5 + 3 + 1);
  CHECK(stats.entity_count == 3);
  CHECK(stats.distinct_surface_count == 2);
  REQUIRE(stats.top.size() == 2);
  CHECK(stats.top[0].surface == "adviseur");  // folded; counted twice
  CHECK(stats.top[0].count == 2);
  CHECK(stats.top[1].surface == "senior analist");
  CHECK(stats.top[1].count == 1);
}

TEST_CASE("dataset statistics break frequency ties lexicographically and honour top_k") {
  JobTitleList titles;
  titles.titles = {"xx", "aa", "mm"};
  std::vector<Document> docs = {{"d1", "xx aa mm"}};
  DatasetStats stats = dataset_stats(label_texts(docs, titles), 2);
  REQUIRE(stats.top.size() == 2);
  CHECK(stats.top[0].surface == "aa");
  CHECK(stats.top[1].surface == "mm");
  CHECK(stats.distinct_surface_count == 3);
}

TEST_CASE("random labeling keeps tags well-formed and surfaces known") {
  std::mt19937 rng(90210);
  const std::vector<std::string> vocab = {"aa", "bb", "cc", "dd"};
  for (int round = 0; round < 200; ++round) {
    // Random titles of one to three vocabulary words.
    std::vector<std::string> raw;
    const int title_count = 1 + std::uniform_int_distribution<int>(0, 3)(rng);
    for (int t = 0; t < title_count; ++t) {
      std::string title;
      const int words = 1 + std::uniform_int_distribution<int>(0, 2)(rng);
      for (int w = 0; w < words; ++w) {
        if (w) title += ' ';
        title += vocab[std::uniform_int_distribution<std::size_t>(0, 3)(rng)];
      }
      raw.push_back(title);
    }
    JobTitleList titles = expand_job_titles(raw);

    std::string text;
    const int length = std::uniform_int_distribution<int>(0, 12)(rng);
    for (int w = 0; w < length; ++w) {
      if (w) text += ' ';
      if (std::uniform_int_distribution<int>(0, 4)(rng) == 0)
        text += "senior";
      else
        text += vocab[std::uniform_int_distribution<std::size_t>(0, 3)(rng)];
    }

    auto tokens = tokenize(text);
    auto tagged = label_tokens(tokens, titles);
    REQUIRE(tagged.size() == tokens.size());

    // Well-formed: I only ever continues a tagged span.
    CHECK_FALSE(find_orphan_i(tagged).has_value());

    // Every tagged entity reads back as a known title.
    std::set<std::string> known;
    for (const std::string& t : titles.titles) known.insert(unicode::fold_utf8(t));
    std::size_t i = 0;
    while (i < tagged.size()) {
      if (tagged[i].tag.kind != IOB2Tag::Kind::B) {
        ++i;
        continue;
      }
      std::string surface = unicode::fold_utf8(tagged[i].token.surface);
      std::size_t j = i + 1;
      while (j < tagged.size() && tagged[j].tag.kind == IOB2Tag::Kind::I) {
        surface += ' ';
        surface += unicode::fold_utf8(tagged[j].token.surface);
        ++j;
      }
      CHECK(known.count(surface) == 1);
      i = j;
    }

    // Maximality: no title occurrence survives entirely untagged.
    std::vector<std::string> folded;
    for (const Token& t : tokens) folded.push_back(unicode::fold_utf8(t.surface));
    for (const std::string& title : titles.titles) {
      std::vector<std::string> tt;
      for (const Token& t : tokenize(title)) tt.push_back(unicode::fold_utf8(t.surface));
      if (tt.empty() || tt.size() > folded.size()) continue;
      for (std::size_t p = 0; p + tt.size() <= folded.size(); ++p) {
        bool matches_free = true;
        for (std::size_t k = 0; k < tt.size() && matches_free; ++k)
          matches_free = folded[p + k] == tt[k] && tagged[p + k].tag.is_o();
        CHECK_FALSE(matches_free);
      }
    }
  }
}
