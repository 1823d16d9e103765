#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace promptqa {

// One question/context/answer record. `answer_start` is a 0-based character
// offset into `context`; the span must reproduce `answer_text` exactly.
struct QaExample {
  std::string id;
  std::string domain;
  std::string question;
  std::string context;
  std::string answer_text;
  std::size_t answer_start = 0;
  std::string source;
  // Additional gold answer texts beyond the canonical span (SQuAD records may
  // carry several); used only at evaluation time (max over golds).
  std::vector<std::string> extra_gold_texts;

  bool span_valid() const {
    return answer_start + answer_text.size() <= context.size() &&
           context.compare(answer_start, answer_text.size(), answer_text) == 0;
  }
};

struct Dataset {
  std::string name;
  std::vector<QaExample> examples;

  std::set<std::string> domains() const;
  const QaExample* find(const std::string& id) const;
};

enum class DatasetFormat { squad_json, newsqa, causal_jsonl };

DatasetFormat parse_format(const std::string& name);

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when records violate QaExample invariants; carries the offending ids.
struct ValidationError : std::runtime_error {
  std::vector<std::string> ids;
  ValidationError(const std::string& msg, std::vector<std::string> bad_ids)
      : std::runtime_error(msg), ids(std::move(bad_ids)) {}
};

// Per-record rejections that the loader reports instead of silently dropping.
struct LoadReport {
  struct Rejection {
    std::string id;
    std::string reason;
  };
  std::vector<Rejection> rejected;
};

// Parses `path` in the declared format and validates every record.
// Records with unrecoverable span mismatches go to `report` (if given) and an
// empty report raises ValidationError when `strict` is true.
Dataset load_dataset(const std::string& path, DatasetFormat format,
                     LoadReport* report = nullptr, bool strict = true);

// Normalized interchange format: JSON-lines, one QaExample per line with keys
// id, domain, question, context, answer_text, answer_start, source.
// `meta_json` (optional) is written first as a {"_meta": ...} line.
void export_jsonl(const Dataset& ds, const std::string& path,
                  const std::string& meta_json = "");

struct SplitPlan {
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
  double ratios[3] = {0, 0, 0};
};

// Per-domain shuffled 3-way split, deterministic under (seed, dataset order).
// Sizes are floor-allocated from the ratios; the remainder goes to train.
std::map<std::string, SplitPlan> split_by_domain(const Dataset& ds,
                                                 double train_ratio,
                                                 double dev_ratio,
                                                 double test_ratio,
                                                 std::uint64_t seed);

enum class SetupKind { setup1_domain, setup2_cross_dataset };

struct ExperimentPlan {
  std::string label;  // e.g. "S -> N"
  SetupKind setup = SetupKind::setup2_cross_dataset;
  std::vector<std::string> source_train;
  std::vector<std::string> source_dev;
  std::vector<std::string> source_test;
  std::vector<std::string> target_test;
};

// Cross-dataset plan: train/select on the source dataset, evaluate ID on the
// source test split and OOD on the target test split.
ExperimentPlan make_cross_setup(const Dataset& source, const Dataset& target,
                                std::uint64_t seed);

}  // namespace promptqa
