#pragma once

#include <map>
#include <string>
#include <vector>

#include "promptqa/dataset.hpp"

namespace promptqa {

// SQuAD-style answer normalization: lowercase, strip punctuation, drop the
// English articles a/an/the, collapse whitespace.
std::string normalize_answer(const std::string& text);

// Token-overlap F1 over normalized token multisets. Both sides empty -> 1;
// exactly one side empty -> 0.
double token_f1(const std::string& pred, const std::string& gold);

// 1 iff the normalized strings are equal.
int exact_match(const std::string& pred, const std::string& gold);

struct ExampleScore {
  double f1 = 0.0;
  int em = 0;
};

struct DomainScore {
  double macro_f1 = 0.0;
  double em_rate = 0.0;
  std::size_t n = 0;
};

struct EvalResult {
  std::map<std::string, ExampleScore> per_example;
  double macro_f1 = 0.0;
  double em_rate = 0.0;
  std::map<std::string, DomainScore> by_domain;
  std::size_t n = 0;
  std::vector<std::string> missing_ids;  // gold ids without a prediction, scored 0
};

// Scores each gold example with max over its gold texts; a prediction for an
// unknown id is an error.
EvalResult evaluate(const std::map<std::string, std::string>& predictions,
                    const Dataset& gold);

// SQuAD evaluator convention: one JSON object, id -> answer string.
std::map<std::string, std::string> load_predictions(const std::string& path);

void write_eval_report(const EvalResult& result, const std::string& json_path,
                       const std::string& csv_path = "",
                       const std::string& meta_json = "");

}  // namespace promptqa
