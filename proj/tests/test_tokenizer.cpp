#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>
#include <vector>

#include "deid/patterns.hpp"
#include "deid/tokenizer.hpp"
#include "deid/unicode.hpp"

using namespace deid;

namespace {

std::vector<std::string> surfaces(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const Token& t : tokens) out.push_back(t.surface);
  return out;
}

}  // namespace

TEST_CASE("token shape matchers") {
  CHECK(patterns::is_email("j.doe@minfin.nl"));
  CHECK(patterns::is_email("J.DOE@MINFIN.NL"));
  CHECK(patterns::is_email("a_b%c+d-e@sub.example.org"));
  CHECK_FALSE(patterns::is_email("@minfin.nl"));
  CHECK_FALSE(patterns::is_email("doe@"));
  CHECK_FALSE(patterns::is_email("a@b@c.nl"));
  CHECK_FALSE(patterns::is_email("doe@minfin"));      // no dot in domain
  CHECK_FALSE(patterns::is_email("doe@minfin.n"));    // one-letter tld
  CHECK_FALSE(patterns::is_email("doe@minfin.n1"));   // digit in tld
  CHECK_FALSE(patterns::is_email("doe@min..nl"));     // empty label
  CHECK_FALSE(patterns::is_email("jan jansen@x.nl"));  // space

  CHECK(patterns::is_website("www.example.nl"));
  CHECK(patterns::is_website("https://p-direkt.nl/portal"));
  CHECK(patterns::is_website("http://a.b"));
  CHECK(patterns::is_website("example.nl"));
  CHECK(patterns::is_website("example.nl/path?q=1"));
  CHECK(patterns::is_website("WWW.EXAMPLE.NL"));
  CHECK_FALSE(patterns::is_website("j.doe@minfin.nl"));  // mail, not web
  CHECK_FALSE(patterns::is_website("www."));
  CHECK_FALSE(patterns::is_website("https://"));
  CHECK_FALSE(patterns::is_website("example"));
  CHECK_FALSE(patterns::is_website("1.5"));

  CHECK(patterns::is_iban("NL91ABNA0417164300"));
  CHECK(patterns::is_iban("DE89370400440532013000"));
  CHECK_FALSE(patterns::is_iban("NL91ABNA04171"));       // 9 after prefix: too short
  CHECK_FALSE(patterns::is_iban("N191ABNA0417164300"));  // digit in country code
  CHECK_FALSE(patterns::is_iban("NLX1ABNA0417164300"));  // letter in check digits
  CHECK_FALSE(patterns::is_iban("NL91ABNA-417164300"));

  CHECK(patterns::is_number_run("10"));
  CHECK(patterns::is_number_run("0612345678"));
  CHECK_FALSE(patterns::is_number_run("1"));
  CHECK_FALSE(patterns::is_number_run("12a"));
  CHECK_FALSE(patterns::is_number_run(""));

  CHECK(patterns::is_email_material("j.doe@minfin"));
  CHECK(patterns::is_email_material(".nl"));
  CHECK_FALSE(patterns::is_email_material("nl)"));
  CHECK_FALSE(patterns::is_email_material(""));
}

TEST_CASE("whitespace splitting and punctuation peeling") {
  CHECK(surfaces(tokenize("mevrouw Jansen woont in Breda .")) ==
        std::vector<std::string>{"mevrouw", "Jansen", "woont", "in", "Breda", "."});
  CHECK(surfaces(tokenize("(Breda).")) == std::vector<std::string>{"(", "Breda", ")", "."});
  CHECK(surfaces(tokenize("  \t\n  ")).empty());
  CHECK(surfaces(tokenize("")).empty());
  CHECK(surfaces(tokenize("...")) == std::vector<std::string>{".", ".", "."});
  CHECK(surfaces(tokenize("dhr. Jansen")) == std::vector<std::string>{"dhr", ".", "Jansen"});
}

TEST_CASE("hyphens and apostrophes stay attached between word characters") {
  CHECK(surfaces(tokenize("Noord-Brabant")) == std::vector<std::string>{"Noord-Brabant"});
  CHECK(surfaces(tokenize("03-11-2016")) == std::vector<std::string>{"03-11-2016"});
  CHECK(surfaces(tokenize("'s-Hertogenbosch")) ==
        std::vector<std::string>{"'", "s-Hertogenbosch"});
  CHECK(surfaces(tokenize("d\xe2\x80\x99" "Artagnan")) ==
        std::vector<std::string>{"d\xe2\x80\x99" "Artagnan"});
  CHECK(surfaces(tokenize("a--b")) == std::vector<std::string>{"a", "-", "-", "b"});
  CHECK(surfaces(tokenize("co-")) == std::vector<std::string>{"co", "-"});
  CHECK(surfaces(tokenize("12:30")) == std::vector<std::string>{"12", ":", "30"});
}

TEST_CASE("email awareness") {
  TokenizerConfig aware;  // defaults on
  TokenizerConfig naive;
  naive.email_aware = false;

  CHECK(surfaces(tokenize("Mail johndoe@example.com vandaag.", aware)) ==
        std::vector<std::string>{"Mail", "johndoe@example.com", "vandaag", "."});
  CHECK(surfaces(tokenize("Mail johndoe@example.com vandaag.", naive)) ==
        std::vector<std::string>{"Mail", "johndoe", "@", "example", ".", "com",
                                 "vandaag", "."});

  // Trailing punctuation never sticks to the address.
  CHECK(surfaces(tokenize("(j.doe@minfin.nl),", aware)) ==
        std::vector<std::string>{"(", "j.doe@minfin.nl", ")", ","});
}

TEST_CASE("url awareness") {
  TokenizerConfig aware;
  TokenizerConfig naive;
  naive.url_aware = false;

  CHECK(surfaces(tokenize("zie www.example.nl.", aware)) ==
        std::vector<std::string>{"zie", "www.example.nl", "."});
  CHECK(surfaces(tokenize("zie www.example.nl.", naive)) ==
        std::vector<std::string>{"zie", "www", ".", "example", ".", "nl", "."});
  CHECK(surfaces(tokenize("op https://p-direkt.nl/portal staat", aware)) ==
        std::vector<std::string>{"op", "https://p-direkt.nl/portal", "staat"});
}

TEST_CASE("token offsets index code points, not bytes") {
  const std::string text = "Financi\xc3\xabn is daar";  // ë is one code point
  std::vector<Token> tokens = tokenize(text);
  REQUIRE(tokens.size() == 3);
  CHECK(tokens[0].start == 0);
  CHECK(tokens[0].end == 9);
  CHECK(tokens[1].start == 10);
  CHECK(tokens[2].surface == "daar");
  CHECK(tokens[2].end == 17);
}

TEST_CASE("tokenizer structural properties hold on fuzzed input") {
  std::mt19937 rng(20260814);
  const std::u32string alphabet = U"ab1.-@ ()'ë’ \n/:wz";
  for (int round = 0; round < 300; ++round) {
    std::u32string cps;
    const int n = std::uniform_int_distribution<int>(0, 60)(rng);
    for (int i = 0; i < n; ++i)
      cps += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
    const std::string text = unicode::encode_utf8(cps);

    for (TokenizerConfig config : {TokenizerConfig{true, true}, TokenizerConfig{false, false}}) {
      std::vector<Token> tokens = tokenize(text, config);

      std::vector<bool> covered(cps.size(), false);
      std::size_t prev_end = 0;
      for (const Token& tok : tokens) {
        REQUIRE(tok.start < tok.end);
        REQUIRE(tok.end <= cps.size());
        REQUIRE(tok.start >= prev_end);  // ordered, non-overlapping
        prev_end = tok.end;
        // Surface is exactly the text slice.
        CHECK(tok.surface ==
              unicode::encode_utf8(std::u32string_view(cps).substr(tok.start,
                                                                   tok.end - tok.start)));
        for (std::size_t cp = tok.start; cp < tok.end; ++cp) {
          CHECK_FALSE(unicode::is_space(cps[cp]));
          covered[cp] = true;
        }
      }
      // Every non-whitespace code point belongs to exactly one token.
      for (std::size_t cp = 0; cp < cps.size(); ++cp)
        CHECK(covered[cp] == !unicode::is_space(cps[cp]));
    }
  }
}
