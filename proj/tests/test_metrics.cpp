#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "promptqa/metrics.hpp"

using namespace promptqa;

namespace {

const std::string kFixtures = PQA_FIXTURE_DIR;

// Independent brute-force scorer: its own normalization and quadratic
// multiset overlap, sharing no code with the library implementation.
std::vector<std::string> oracle_tokens(const std::string& text) {
  std::string cleaned;
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::ispunct(u)) continue;  // SQuAD convention: punctuation is removed
    cleaned += static_cast<char>(std::tolower(u));
  }
  std::istringstream ss(cleaned);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok)
    if (tok != "a" && tok != "an" && tok != "the") out.push_back(tok);
  return out;
}

double oracle_f1(const std::string& pred, const std::string& gold) {
  auto p = oracle_tokens(pred);
  auto g = oracle_tokens(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::vector<bool> used(g.size(), false);
  int common = 0;
  for (const auto& t : p) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!used[j] && g[j] == t) {
        used[j] = true;
        ++common;
        break;
      }
    }
  }
  if (common == 0) return 0.0;
  return 2.0 * common / static_cast<double>(p.size() + g.size());
}

int oracle_em(const std::string& pred, const std::string& gold) {
  auto p = oracle_tokens(pred);
  auto g = oracle_tokens(gold);
  return p == g ? 1 : 0;
}

}  // namespace

TEST_CASE("normalize_answer lowercases, strips punctuation and articles") {
  CHECK(normalize_answer("The Answer!") == "answer");
  CHECK(normalize_answer("An  apple a day.") == "apple day");
  CHECK(normalize_answer("") == "");
  CHECK(normalize_answer("a an the") == "");
  CHECK(normalize_answer("five-year period") == "fiveyear period");
}

TEST_CASE("worked case scores F1 0.75 exactly") {
  CHECK(token_f1("gain greater insight", "gain greater insight into customer") ==
        0.75);
}

TEST_CASE("token_f1 edge cases") {
  CHECK(token_f1("", "") == 1.0);
  CHECK(token_f1("a", "the") == 1.0);  // both normalize to empty
  CHECK(token_f1("", "gold") == 0.0);
  CHECK(token_f1("pred", "") == 0.0);
  CHECK(token_f1("x y", "p q") == 0.0);
  CHECK(token_f1("same", "same") == 1.0);
  // multiset counting: repeated pred token cannot match one gold token twice
  CHECK(token_f1("one one two", "one two two") == doctest::Approx(2.0 / 3));
}

TEST_CASE("exact_match is normalization-insensitive") {
  CHECK(exact_match("Paris", "paris") == 1);
  CHECK(exact_match("the Paris", "Paris") == 1);
  CHECK(exact_match("Paris!", "Paris") == 1);
  CHECK(exact_match("Paris France", "Paris") == 0);
}

TEST_CASE("golden 20-pair file matches the brute-force oracle to 1e-9") {
  auto preds = load_predictions(kFixtures + "/golden_predictions.json");
  Dataset gold = load_dataset(kFixtures + "/golden_gold.jsonl",
                              DatasetFormat::causal_jsonl);
  REQUIRE(preds.size() == 20);
  REQUIRE(gold.examples.size() == 20);
  for (const auto& ex : gold.examples) {
    const std::string& p = preds.at(ex.id);
    CHECK(token_f1(p, ex.answer_text) ==
          doctest::Approx(oracle_f1(p, ex.answer_text)).epsilon(1e-9));
    CHECK(exact_match(p, ex.answer_text) == oracle_em(p, ex.answer_text));
  }
}

TEST_CASE("token_f1 properties: symmetry, bounds, EM implies F1 = 1") {
  std::mt19937 rng(7);
  const std::vector<std::string> words{"gain", "insight", "the", "market",
                                       "share", "a", "growth", "value"};
  for (int trial = 0; trial < 300; ++trial) {
    auto sample = [&] {
      std::string s;
      std::size_t len = rng() % 6;
      for (std::size_t i = 0; i < len; ++i) {
        if (i) s += ' ';
        s += words[rng() % words.size()];
      }
      return s;
    };
    std::string p = sample(), g = sample();
    double f = token_f1(p, g);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    CHECK(f == doctest::Approx(token_f1(g, p)).epsilon(1e-12));
    if (exact_match(p, g)) CHECK(f == 1.0);
  }
}

TEST_CASE("evaluate: max over golds, missing scored zero, unknown id rejected") {
  Dataset gold;
  QaExample ex;
  ex.id = "g1";
  ex.domain = "d1";
  ex.question = "Why?";
  ex.context = "canonical answer or alternative gold";
  ex.answer_text = "canonical answer";
  ex.answer_start = 0;
  ex.extra_gold_texts = {"alternative gold"};
  gold.examples.push_back(ex);
  QaExample ex2 = ex;
  ex2.id = "g2";
  ex2.domain = "d2";
  ex2.extra_gold_texts.clear();
  gold.examples.push_back(ex2);

  EvalResult r = evaluate({{"g1", "alternative gold"}}, gold);
  CHECK(r.per_example.at("g1").em == 1);  // second gold matched
  CHECK(r.per_example.at("g1").f1 == 1.0);
  CHECK(r.per_example.at("g2").f1 == 0.0);
  REQUIRE(r.missing_ids.size() == 1);
  CHECK(r.missing_ids[0] == "g2");
  CHECK(r.n == 2);
  CHECK(r.macro_f1 == doctest::Approx(0.5));
  CHECK(r.em_rate == doctest::Approx(0.5));
  CHECK(r.by_domain.at("d1").macro_f1 == doctest::Approx(1.0));
  CHECK(r.by_domain.at("d2").n == 1);

  CHECK_THROWS_AS(evaluate({{"nosuch", "x"}}, gold), ValidationError);
}

TEST_CASE("eval report writes json and csv") {
  Dataset gold = load_dataset(kFixtures + "/golden_gold.jsonl",
                              DatasetFormat::causal_jsonl);
  auto preds = load_predictions(kFixtures + "/golden_predictions.json");
  EvalResult r = evaluate(preds, gold);

  std::string jpath = kFixtures + "/tmp_eval.json";
  std::string cpath = kFixtures + "/tmp_eval.csv";
  write_eval_report(r, jpath, cpath, R"({"config":{},"version":"t"})");
  std::ifstream jin(jpath);
  nlohmann::json doc;
  jin >> doc;
  CHECK(doc["n"] == 20);
  CHECK(doc["macro_f1"].get<double>() == doctest::Approx(r.macro_f1));
  CHECK(doc.contains("_meta"));
  std::ifstream cin_(cpath);
  std::string header;
  std::getline(cin_, header);
  CHECK(header == "id,f1,em");
  int lines = 0;
  std::string line;
  while (std::getline(cin_, line)) ++lines;
  CHECK(lines == 20);
  std::remove(jpath.c_str());
  std::remove(cpath.c_str());
}

TEST_CASE("load_predictions rejects non-object files") {
  std::string path = kFixtures + "/tmp_predlist.json";
  {
    std::ofstream out(path);
    out << "[1,2,3]\n";
  }
  CHECK_THROWS_AS(load_predictions(path), std::runtime_error);
  std::remove(path.c_str());
}
