#pragma once

#include <map>
#include <string>
#include <vector>

#include "promptqa/dataset.hpp"
#include "promptqa/text.hpp"

namespace promptqa {

struct Vocab {
  std::map<std::string, std::size_t> counts;
  std::size_t total_count = 0;
  WordSet stopwords;

  bool contains(const std::string& w) const { return counts.count(w) != 0; }
};

// Lowercased word counts over questions and contexts; tokens below min_count
// or in the stopword set are excluded.
Vocab build_vocab(const Dataset& ds, std::size_t min_count,
                  const WordSet& stopwords);

struct PmiEntry {
  double npmi = 0.0;
  std::size_t cooccur_count = 0;
  std::size_t word_count = 0;
  std::size_t type_count = 0;
};

struct PmiTable {
  // (question_type, word) -> entry
  std::map<std::pair<std::string, std::string>, PmiEntry> entries;
  std::size_t total_events = 0;
  // 0 = whole sentence containing the answer span (default), otherwise the
  // number of tokens counted on each side of the span.
  std::size_t window = 0;
  bool normalized = true;  // NPMI by default; raw PMI when false
};

// Mergeable co-occurrence counts, so sharded corpora can be combined before
// scores are derived.
struct PmiCounts {
  std::map<std::pair<std::string, std::string>, std::size_t> joint;
  std::map<std::string, std::size_t> per_word;
  std::map<std::string, std::size_t> per_type;
  std::size_t total = 0;

  void merge(const PmiCounts& other);
};

PmiCounts count_cooccurrences(const Dataset& ds,
                              const std::map<std::string, std::string>& qtypes,
                              std::size_t window, const Vocab& vocab);

PmiTable scores_from_counts(const PmiCounts& counts, std::size_t window,
                            bool normalized = true);

// count + score in one pass. `qtypes` maps example id -> question type tag;
// every example must be covered.
PmiTable compute_pmi(const Dataset& ds,
                     const std::map<std::string, std::string>& qtypes,
                     std::size_t window, const Vocab& vocab,
                     bool normalized = true);

// Words for `qtype` sorted by npmi descending; ties broken by higher
// cooccur_count, then lexicographically.
std::vector<std::string> top_k_words(const PmiTable& table,
                                     const std::string& qtype, std::size_t k);

void write_pmi_jsonl(const PmiTable& table, const std::string& path,
                     const std::string& meta_json = "");
PmiTable read_pmi_jsonl(const std::string& path);

struct OverlapReport {
  std::string dataset_a;
  std::string dataset_b;
  double a_to_b_pct = 0.0;  // 100 * |Va ∩ Vb| / |Va|
  double b_to_a_pct = 0.0;  // 100 * |Va ∩ Vb| / |Vb|
  std::size_t vocab_a = 0;
  std::size_t vocab_b = 0;
};

OverlapReport word_overlap(const Dataset& a, const Dataset& b,
                           const WordSet& stopwords);

// Top-N candidate domain-leak terms: content words ranked by how exclusively
// they occur in a single domain (max per-domain share of the word's
// occurrences), ties broken by total count. Seeds validate_template blocklists.
std::vector<std::string> domain_blocklist(const Dataset& ds, std::size_t top_n,
                                          const WordSet& stopwords);

}  // namespace promptqa
