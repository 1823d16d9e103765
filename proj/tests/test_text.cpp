#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <random>

#include "promptqa/text.hpp"

using namespace promptqa;

TEST_CASE("tokenize_spans yields alnum runs with exact offsets") {
  auto toks = tokenize_spans("Hello, world! 42x");
  REQUIRE(toks.size() == 3);
  CHECK(toks[0].text == "Hello");
  CHECK(toks[0].begin == 0);
  CHECK(toks[0].end == 5);
  CHECK(toks[1].text == "world");
  CHECK(toks[1].begin == 7);
  CHECK(toks[2].text == "42x");
  CHECK(toks[2].begin == 14);
  CHECK(toks[2].end == 17);
}

TEST_CASE("inner apostrophes stay inside the token") {
  auto toks = tokenize_spans("don't stop 'quoted' o'clock'");
  REQUIRE(toks.size() == 4);
  CHECK(toks[0].text == "don't");
  CHECK(toks[1].text == "stop");
  CHECK(toks[2].text == "quoted");  // surrounding quotes are separators
  CHECK(toks[3].text == "o'clock");  // trailing quote dropped
}

TEST_CASE("tokenize_lower folds case") {
  auto toks = tokenize_lower("Why EPS Grew");
  REQUIRE(toks.size() == 3);
  CHECK(toks[0] == "why");
  CHECK(toks[1] == "eps");
  CHECK(toks[2] == "grew");
}

TEST_CASE("empty and separator-only inputs produce no tokens") {
  CHECK(tokenize_spans("").empty());
  CHECK(tokenize_spans(" ... --- !!").empty());
}

TEST_CASE("case predicates") {
  CHECK(is_all_caps("EPS"));
  CHECK(is_all_caps("B2B"));
  CHECK_FALSE(is_all_caps("Eps"));
  CHECK_FALSE(is_all_caps("A"));  // needs at least two letters
  CHECK_FALSE(is_all_caps("42"));
  CHECK(starts_upper("Terex"));
  CHECK_FALSE(starts_upper("terex"));
  CHECK_FALSE(starts_upper(""));
}

TEST_CASE("split_sentences covers the whole string without gaps") {
  std::string text = "One. Two! Three? trailing";
  auto sents = split_sentences(text);
  REQUIRE(sents.size() == 4);
  CHECK(sents[0].begin == 0);
  CHECK(sents[0].end == 4);
  CHECK(text.substr(sents[1].begin, sents[1].end - sents[1].begin) == " Two!");
  CHECK(sents[3].end == text.size());
  for (std::size_t i = 1; i < sents.size(); ++i)
    CHECK(sents[i].begin == sents[i - 1].end);
}

TEST_CASE("split_sentences without terminal punctuation is one span") {
  auto sents = split_sentences("no punctuation here");
  REQUIRE(sents.size() == 1);
  CHECK(sents[0].begin == 0);
  CHECK(sents[0].end == 19);
}

namespace {

// Independent whitespace token counter used as the oracle for count_tokens.
std::size_t oracle_count(const std::string& s) {
  std::istringstream ss(s);
  std::string tok;
  std::size_t n = 0;
  while (ss >> tok) ++n;
  return n;
}

}  // namespace

TEST_CASE("count_tokens equals a stream-extraction oracle on random strings") {
  std::mt19937 rng(42);
  const std::string alphabet = "ab c\t d\n e  ,.";
  for (int trial = 0; trial < 200; ++trial) {
    std::string s;
    std::size_t len = rng() % 40;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
    CHECK(count_tokens(s) == oracle_count(s));
  }
  CHECK(count_tokens("") == 0);
  CHECK(count_tokens("   ") == 0);
  CHECK(count_tokens("one") == 1);
}

TEST_CASE("load_word_set skips comments, lowercases, errors on missing file") {
  std::string path = std::string(PQA_FIXTURE_DIR) + "/tmp_words.txt";
  {
    std::ofstream out(path);
    out << "# comment\nAlpha\n\nbeta\r\n";
  }
  WordSet ws = load_word_set(path);
  CHECK(ws.size() == 2);
  CHECK(ws.count("alpha") == 1);
  CHECK(ws.count("beta") == 1);
  CHECK(ws.count("# comment") == 0);
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_word_set("/nonexistent/words.txt"), std::runtime_error);
}
