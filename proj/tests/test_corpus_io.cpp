#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "deid/corpus.hpp"
#include "deid/corpus_io.hpp"

using namespace deid;

TEST_CASE("field escaping round trips") {
  const std::string samples[] = {"", "plain", "line\nbreak", "back\\slash",
                                 "tab\there", "\\n is not a newline", "\n\\\t"};
  for (const std::string& s : samples) {
    const std::string esc = escape_field(s);
    CHECK(esc.find('\n') == std::string::npos);
    CHECK(esc.find('\t') == std::string::npos);
    CHECK(unescape_field(esc, "<t>", 1) == s);
  }
  CHECK(escape_field("a\tb") == "a\\tb");
  CHECK_THROWS_AS(unescape_field("trailing\\", "<t>", 1), ParseError);
  CHECK_THROWS_AS(unescape_field("bad \\x escape", "<t>", 1), ParseError);
}

TEST_CASE("corpus round trip") {
  std::vector<Document> docs = {
      {"doc-1", "Eerste regel.\nTweede regel."},
      {"doc-2", "Gewone tekst met \\ erin."},
      {"doc-3", ""},
      {"doc-4", "Financi\xc3\xabn"},
  };
  std::ostringstream out;
  write_corpus(out, docs);
  std::istringstream in(out.str());
  CHECK(read_corpus(in) == docs);
}

TEST_CASE("corpus reader skips comments and blank lines") {
  std::istringstream in(
      "# a comment\n"
      "\n"
      "d1\thello\n"
      "# another\n"
      "d2\tworld\n");
  auto docs = read_corpus(in);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "d1");
  CHECK(docs[1].text == "world");
}

TEST_CASE("corpus reader rejects malformed input") {
  {
    std::istringstream in("no-tab-here\n");
    CHECK_THROWS_AS(read_corpus(in), ParseError);
  }
  {
    std::istringstream in("\ttext without id\n");
    CHECK_THROWS_AS(read_corpus(in), ParseError);
  }
  {
    std::istringstream in("d1\ta\nd1\tb\n");
    CHECK_THROWS_MATCHES(read_corpus(in), ParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("duplicate document id 'd1'")));
  }
  {
    std::istringstream in("d1\tbroken \xff utf8\n");
    CHECK_THROWS_AS(read_corpus(in), unicode::Utf8Error);
  }
}

TEST_CASE("annotation file round trip") {
  std::vector<Annotation> anns = {
      {"d1", 0, 7, Label::Title, "mevrouw"},
      {"d1", 8, 14, Label::Per, "Jansen"},
      {"d2", 3, 8, Label::Loc, "Breda"},
  };
  std::ostringstream out;
  write_annotations(out, anns);
  CHECK(out.str().rfind(std::string(annotation_header) + "\n", 0) == 0);
  std::istringstream in(out.str());
  CHECK(read_annotations(in) == anns);
}

TEST_CASE("annotation reader errors") {
  {
    std::istringstream in("doc_id\tstart\tend\n");  // wrong header
    CHECK_THROWS_AS(read_annotations(in), ParseError);
  }
  {
    std::istringstream in(std::string(annotation_header) + "\nd1\t0\t4\tPER\n");
    CHECK_THROWS_MATCHES(read_annotations(in), ParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("expected 5 columns")));
  }
  {
    std::istringstream in(std::string(annotation_header) + "\nd1\t0\t4\tPERSON\tAnna\n");
    CHECK_THROWS_MATCHES(read_annotations(in), ParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("unknown label 'PERSON'")));
  }
  {
    std::istringstream in(std::string(annotation_header) + "\nd1\tx\t4\tPER\tAnna\n");
    CHECK_THROWS_AS(read_annotations(in), ParseError);
  }
  {
    std::istringstream in(std::string(annotation_header) + "\nd1\t4\t4\tPER\tAnna\n");
    CHECK_THROWS_MATCHES(read_annotations(in), ParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("empty span")));
  }
  {
    std::istringstream in("");  // empty file means no annotations
    CHECK(read_annotations(in).empty());
  }
  {
    std::istringstream in("# only comments\n");
    CHECK_THROWS_AS(read_annotations(in), ParseError);
  }
}

TEST_CASE("iob2 round trip preserves surfaces and tags") {
  std::vector<std::vector<TaggedToken>> docs(2);
  docs[0] = {
      {{"mevrouw", 0, 7}, IOB2Tag::b(Label::Title)},
      {{"Jansen", 8, 14}, IOB2Tag::b(Label::Per)},
      {{".", 14, 15}, IOB2Tag::o()},
  };
  docs[1] = {
      {{"Den", 0, 3}, IOB2Tag::b(Label::Loc)},
      {{"Haag", 4, 8}, IOB2Tag::i(Label::Loc)},
  };
  std::ostringstream out;
  write_iob2(out, docs);
  CHECK(out.str() ==
        "mevrouw\tB-TITLE\n"
        "Jansen\tB-PER\n"
        ".\tO\n"
        "\n"
        "Den\tB-LOC\n"
        "Haag\tI-LOC\n"
        "\n");

  std::istringstream in(out.str());
  auto back = read_iob2(in);
  REQUIRE(back.size() == 2);
  for (std::size_t d = 0; d < 2; ++d) {
    REQUIRE(back[d].size() == docs[d].size());
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      CHECK(back[d][i].token.surface == docs[d][i].token.surface);
      CHECK(back[d][i].tag == docs[d][i].tag);
    }
  }
  // Offsets follow the single-space layout convention.
  CHECK(back[0][1].token.start == 8);
  CHECK(back[0][2].token.start == 15);
  CHECK(back[1][1].token.end == 8);
}

TEST_CASE("iob2 reader handles empty documents and a missing final blank line") {
  std::istringstream in("\na\tO\n\n\nb\tB-PER");
  auto docs = read_iob2(in);
  REQUIRE(docs.size() == 4);
  CHECK(docs[0].empty());
  CHECK(docs[1].size() == 1);
  CHECK(docs[2].empty());
  REQUIRE(docs[3].size() == 1);
  CHECK(docs[3][0].tag == IOB2Tag::b(Label::Per));
}

TEST_CASE("iob2 reader enforces tag grammar") {
  {
    std::istringstream in("a\tO\tanything\n");
    CHECK_THROWS_AS(read_iob2(in), ParseError);
  }
  {
    std::istringstream in("a\tB_PER\n");
    CHECK_THROWS_MATCHES(read_iob2(in), ParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("malformed tag 'B_PER'")));
  }
  {
    std::istringstream in("\ta\n");
    CHECK_THROWS_AS(read_iob2(in), ParseError);
  }
}

TEST_CASE("iob2 reader orphan handling") {
  const std::string text =
      "een\tO\n"
      "twee\tI-PER\n"
      "\n";
  {
    std::istringstream in(text);
    CHECK_THROWS_MATCHES(read_iob2(in), ParseError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(
                             "orphan I tag at token index 1")));
  }
  {
    std::istringstream in(text);
    auto docs = read_iob2(in, "<t>", Iob2Policy::Repair);
    REQUIRE(docs.size() == 1);
    CHECK(docs[0][1].tag == IOB2Tag::b(Label::Per));
  }
  {
    // I directly after a B of a different label is also an orphan.
    std::istringstream in("a\tB-PER\nb\tI-LOC\n\n");
    CHECK_THROWS_AS(read_iob2(in), ParseError);
    std::istringstream in2("a\tB-PER\nb\tI-PER\n\n");
    CHECK_NOTHROW(read_iob2(in2));
  }
}

TEST_CASE("random iob2 documents survive a write/read cycle") {
  std::mt19937 rng(99);
  std::vector<std::vector<TaggedToken>> docs;
  const char* words[] = {"aan", "de", "Grote", "Markt", "12", "b.v", "\xc3\xa9\xc3\xa9n"};
  for (int d = 0; d < 50; ++d) {
    std::vector<TaggedToken> doc;
    int n = std::uniform_int_distribution<int>(0, 12)(rng);
    std::size_t offset = 0;
    bool in_span = false;
    Label current = Label::Per;
    for (int i = 0; i < n; ++i) {
      Token tok;
      tok.surface = words[std::uniform_int_distribution<int>(0, 6)(rng)];
      tok.start = offset;
      tok.end = offset + unicode::length(tok.surface);
      offset = tok.end + 1;
      int choice = std::uniform_int_distribution<int>(0, 3)(rng);
      IOB2Tag tag = IOB2Tag::o();
      if (choice == 1 || (choice == 2 && !in_span)) {
        current = all_labels[std::uniform_int_distribution<std::size_t>(0, 10)(rng)];
        tag = IOB2Tag::b(current);
      } else if (choice == 2) {
        tag = IOB2Tag::i(current);
      }
      in_span = !tag.is_o();
      doc.push_back({std::move(tok), tag});
    }
    docs.push_back(std::move(doc));
  }

  std::ostringstream out;
  write_iob2(out, docs);
  std::istringstream in(out.str());
  auto back = read_iob2(in);
  REQUIRE(back.size() == docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    REQUIRE(back[d].size() == docs[d].size());
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      CHECK(back[d][i].token.surface == docs[d][i].token.surface);
      CHECK(back[d][i].tag == docs[d][i].tag);
      CHECK(back[d][i].token.start == docs[d][i].token.start);  // inputs already single-spaced
      CHECK(back[d][i].token.end == docs[d][i].token.end);
    }
  }
}
