#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "promptqa/annotators.hpp"
#include "promptqa/corpus_stats.hpp"

using namespace promptqa;

namespace {

const std::string kFixtures = PQA_FIXTURE_DIR;
const std::string kData = PQA_DATA_DIR;

Dataset load_why_fixture() {
  return load_dataset(kFixtures + "/why_pmi.jsonl", DatasetFormat::causal_jsonl);
}

std::map<std::string, std::string> qtypes_of(const Dataset& ds) {
  std::map<std::string, std::string> out;
  for (const auto& ex : ds.examples)
    out[ex.id] = to_string(classify_question_type(ex.question));
  return out;
}

// Direct-count NPMI oracle over explicit (type, word) event lists.
double oracle_npmi(const std::vector<std::pair<std::string, std::string>>& events,
                   const std::string& type, const std::string& word) {
  double total = static_cast<double>(events.size());
  double joint = 0, n_word = 0, n_type = 0;
  for (const auto& [t, w] : events) {
    if (t == type && w == word) ++joint;
    if (w == word) ++n_word;
    if (t == type) ++n_type;
  }
  double p_joint = joint / total;
  if (p_joint >= 1.0) return 1.0;
  double pmi = std::log(p_joint / ((n_word / total) * (n_type / total)));
  return pmi / (-std::log(p_joint));
}

}  // namespace

TEST_CASE("build_vocab counts question and context tokens, honors min_count") {
  Dataset ds;
  QaExample ex;
  ex.id = "v1";
  ex.domain = "d";
  ex.question = "why why unique?";
  ex.context = "why answer answer.";
  ex.answer_text = "answer";
  ex.answer_start = 4;
  ds.examples.push_back(ex);

  Vocab v1 = build_vocab(ds, 1, {});
  CHECK(v1.counts.at("why") == 3);
  CHECK(v1.counts.at("answer") == 2);
  CHECK(v1.counts.at("unique") == 1);
  CHECK(v1.total_count == 6);

  Vocab v2 = build_vocab(ds, 2, {});
  CHECK(v2.contains("why"));
  CHECK_FALSE(v2.contains("unique"));

  Vocab v3 = build_vocab(ds, 1, WordSet{"why"});
  CHECK_FALSE(v3.contains("why"));

  CHECK_THROWS_AS(build_vocab(Dataset{}, 1, {}), std::invalid_argument);
  CHECK_THROWS_AS(build_vocab(ds, 0, {}), std::invalid_argument);
}

TEST_CASE("sentence-window events exclude the answer span's own tokens") {
  Dataset ds;
  QaExample ex;
  ex.id = "s1";
  ex.domain = "d";
  ex.question = "Why did it happen?";
  ex.context = "Before sentence. It happened because rain fell hard. After sentence.";
  ex.answer_text = "rain fell";
  ex.answer_start = ex.context.find("rain fell");
  REQUIRE(ex.span_valid());
  ds.examples.push_back(ex);

  Vocab vocab = build_vocab(ds, 1, {});
  PmiCounts counts = count_cooccurrences(ds, {{"s1", "why"}}, 0, vocab);
  // middle sentence only, minus the span: it, happened, because, hard
  CHECK(counts.per_word.count("because") == 1);
  CHECK(counts.per_word.count("hard") == 1);
  CHECK(counts.per_word.count("rain") == 0);
  CHECK(counts.per_word.count("fell") == 0);
  CHECK(counts.per_word.count("before") == 0);
  CHECK(counts.per_word.count("after") == 0);
  CHECK(counts.total == 4);
}

TEST_CASE("token windows clip at context edges and scale with the radius") {
  Dataset ds;
  QaExample ex;
  ex.id = "t1";
  ex.domain = "d";
  ex.question = "Why?";
  ex.context = "alpha beta gamma target delta epsilon zeta";
  ex.answer_text = "target";
  ex.answer_start = ex.context.find("target");
  ds.examples.push_back(ex);
  Vocab vocab = build_vocab(ds, 1, {});

  PmiCounts w1 = count_cooccurrences(ds, {{"t1", "why"}}, 1, vocab);
  CHECK(w1.total == 2);  // gamma, delta
  CHECK(w1.per_word.count("gamma") == 1);
  CHECK(w1.per_word.count("delta") == 1);

  PmiCounts w10 = count_cooccurrences(ds, {{"t1", "why"}}, 10, vocab);
  CHECK(w10.total == 6);  // everything but the span itself
}

TEST_CASE("count_cooccurrences demands a type for every example") {
  Dataset ds = load_why_fixture();
  Vocab vocab = build_vocab(ds, 1, {});
  CHECK_THROWS_AS(count_cooccurrences(ds, {}, 0, vocab), std::invalid_argument);
}

TEST_CASE("NPMI equals the direct-count oracle to 1e-12") {
  Dataset ds = load_why_fixture();
  WordSet stopwords = load_word_set(kData + "/stopwords.txt");
  Vocab vocab = build_vocab(ds, 1, stopwords);
  auto qtypes = qtypes_of(ds);
  PmiCounts counts = count_cooccurrences(ds, qtypes, 0, vocab);
  PmiTable table = compute_pmi(ds, qtypes, 0, vocab);

  // replay the counted events as an explicit list for the oracle
  std::vector<std::pair<std::string, std::string>> events;
  for (const auto& [key, n] : counts.joint)
    for (std::size_t i = 0; i < n; ++i) events.push_back(key);
  REQUIRE(events.size() == counts.total);
  REQUIRE(!table.entries.empty());
  for (const auto& [key, entry] : table.entries) {
    double expect = oracle_npmi(events, key.first, key.second);
    CHECK(std::abs(entry.npmi - expect) <= 1e-12);
    CHECK(entry.npmi <= 1.0 + 1e-12);
  }
}

TEST_CASE("single-event table scores npmi 1 by convention") {
  Dataset ds;
  QaExample ex;
  ex.id = "one";
  ex.domain = "d";
  ex.question = "Why?";
  ex.context = "happened because target";
  ex.answer_text = "target";
  ex.answer_start = ex.context.find("target");
  ds.examples.push_back(ex);
  Vocab vocab;
  vocab.counts["because"] = 1;
  vocab.total_count = 1;
  PmiTable table = compute_pmi(ds, {{"one", "why"}}, 0, vocab);
  REQUIRE(table.entries.size() == 1);
  CHECK(table.entries.at({"why", "because"}).npmi == 1.0);
}

TEST_CASE("raw PMI mode skips normalization") {
  Dataset ds = load_why_fixture();
  Vocab vocab = build_vocab(ds, 1, load_word_set(kData + "/stopwords.txt"));
  auto qtypes = qtypes_of(ds);
  PmiCounts counts = count_cooccurrences(ds, qtypes, 0, vocab);
  PmiTable raw = scores_from_counts(counts, 0, false);
  PmiTable norm = scores_from_counts(counts, 0, true);
  for (const auto& [key, e] : raw.entries) {
    double denom = -std::log(static_cast<double>(e.cooccur_count) / counts.total);
    CHECK(norm.entries.at(key).npmi == doctest::Approx(e.npmi / denom).epsilon(1e-12));
  }
}

TEST_CASE("empty corpus raises the no-events error") {
  PmiCounts empty;
  CHECK_THROWS_WITH_AS(scores_from_counts(empty, 0), "no co-occurrence events",
                       std::runtime_error);
}

TEST_CASE("sharded counts merge to the whole-corpus table") {
  Dataset ds = load_why_fixture();
  Vocab vocab = build_vocab(ds, 1, load_word_set(kData + "/stopwords.txt"));
  auto qtypes = qtypes_of(ds);

  Dataset shard1, shard2;
  for (std::size_t i = 0; i < ds.examples.size(); ++i)
    (i % 2 ? shard1 : shard2).examples.push_back(ds.examples[i]);
  PmiCounts c1 = count_cooccurrences(shard1, qtypes, 0, vocab);
  c1.merge(count_cooccurrences(shard2, qtypes, 0, vocab));
  PmiCounts whole = count_cooccurrences(ds, qtypes, 0, vocab);

  CHECK(c1.total == whole.total);
  CHECK(c1.joint == whole.joint);
  CHECK(c1.per_word == whole.per_word);
  CHECK(c1.per_type == whole.per_type);
  PmiTable merged = scores_from_counts(c1, 0);
  PmiTable direct = scores_from_counts(whole, 0);
  for (const auto& [key, e] : direct.entries)
    CHECK(merged.entries.at(key).npmi == e.npmi);
}

TEST_CASE("because ranks in the top words for type why on the why fixture") {
  Dataset ds = load_why_fixture();
  Vocab vocab = build_vocab(ds, 1, load_word_set(kData + "/stopwords.txt"));
  PmiTable table = compute_pmi(ds, qtypes_of(ds), 0, vocab);
  auto top = top_k_words(table, "why", 50);
  CHECK(std::find(top.begin(), top.end(), "because") != top.end());
}

TEST_CASE("top_k ordering matches an independent sort oracle") {
  Dataset ds = load_why_fixture();
  Vocab vocab = build_vocab(ds, 1, {});
  PmiTable table = compute_pmi(ds, qtypes_of(ds), 0, vocab);
  auto top = top_k_words(table, "why", 1000);

  struct Row {
    std::string word;
    double npmi;
    std::size_t n;
  };
  std::vector<Row> rows;
  for (const auto& [key, e] : table.entries)
    if (key.first == "why") rows.push_back({key.second, e.npmi, e.cooccur_count});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.npmi != b.npmi) return a.npmi > b.npmi;
    if (a.n != b.n) return a.n > b.n;
    return a.word < b.word;
  });
  REQUIRE(top.size() == rows.size());
  for (std::size_t i = 0; i < top.size(); ++i) CHECK(top[i] == rows[i].word);
  CHECK(top_k_words(table, "why", 2).size() == 2);
  CHECK_THROWS_AS(top_k_words(table, "nosuchtype", 5), std::invalid_argument);
  CHECK_THROWS_AS(top_k_words(table, "why", 0), std::invalid_argument);
}

TEST_CASE("pmi tables round-trip through jsonl") {
  Dataset ds = load_why_fixture();
  Vocab vocab = build_vocab(ds, 1, load_word_set(kData + "/stopwords.txt"));
  PmiTable table = compute_pmi(ds, qtypes_of(ds), 0, vocab);
  std::string path = kFixtures + "/tmp_pmi.jsonl";
  write_pmi_jsonl(table, path, R"({"config":{},"version":"t"})");
  PmiTable back = read_pmi_jsonl(path);
  CHECK(back.total_events == table.total_events);
  CHECK(back.window == table.window);
  CHECK(back.normalized == table.normalized);
  REQUIRE(back.entries.size() == table.entries.size());
  for (const auto& [key, e] : table.entries) {
    CHECK(back.entries.at(key).npmi == e.npmi);
    CHECK(back.entries.at(key).cooccur_count == e.cooccur_count);
  }
  std::remove(path.c_str());
}

TEST_CASE("word overlap: identical 100, disjoint 0, fixture 50 / 66.67") {
  Dataset a = load_dataset(kFixtures + "/overlap_a.jsonl",
                           DatasetFormat::causal_jsonl);
  Dataset b = load_dataset(kFixtures + "/overlap_b.jsonl",
                           DatasetFormat::causal_jsonl);

  OverlapReport same = word_overlap(a, a, {});
  CHECK(same.a_to_b_pct == 100.0);
  CHECK(same.b_to_a_pct == 100.0);

  OverlapReport rep = word_overlap(a, b, {});
  CHECK(rep.vocab_a == 4);
  CHECK(rep.vocab_b == 3);
  CHECK(rep.a_to_b_pct == doctest::Approx(50.0).epsilon(1e-4));
  CHECK(rep.b_to_a_pct == doctest::Approx(66.67).epsilon(1e-4));

  Dataset c;
  QaExample ex;
  ex.id = "c1";
  ex.domain = "c";
  ex.question = "zeta?";
  ex.context = "omega psi";
  ex.answer_text = "omega";
  ex.answer_start = 0;
  c.examples.push_back(ex);
  OverlapReport none = word_overlap(a, c, {});
  CHECK(none.a_to_b_pct == 0.0);
  CHECK(none.b_to_a_pct == 0.0);

  CHECK_THROWS_AS(word_overlap(a, Dataset{}, {}), std::invalid_argument);
}

TEST_CASE("domain blocklist surfaces domain-exclusive words first") {
  Dataset ds = load_dataset(kFixtures + "/two_domain.jsonl",
                            DatasetFormat::causal_jsonl);
  WordSet stopwords = load_word_set(kData + "/stopwords.txt");
  auto words = domain_blocklist(ds, 10, stopwords);
  REQUIRE(words.size() == 10);
  // words in both domains ("week", "grew") sit behind exclusive ones
  for (const auto& w : words) {
    CHECK(w != "week");
    CHECK(w != "grew");
  }
  CHECK(std::find(words.begin(), words.end(), "machinery") != words.end());
  CHECK(std::find(words.begin(), words.end(), "shopper") != words.end());
}
