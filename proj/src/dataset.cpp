#include "promptqa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace promptqa {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Exact-span check with a local recovery pass: if the declared offset does not
// match, take the nearest occurrence of the answer text in the context.
bool fix_span(QaExample& ex) {
  if (ex.span_valid()) return true;
  if (ex.answer_text.empty()) return false;
  std::size_t best = std::string::npos;
  std::size_t pos = ex.context.find(ex.answer_text);
  while (pos != std::string::npos) {
    if (best == std::string::npos ||
        std::llabs(static_cast<long long>(pos) - static_cast<long long>(ex.answer_start)) <
            std::llabs(static_cast<long long>(best) - static_cast<long long>(ex.answer_start))) {
      best = pos;
    }
    pos = ex.context.find(ex.answer_text, pos + 1);
  }
  if (best == std::string::npos) return false;
  ex.answer_start = best;
  return true;
}

void add_example(Dataset& ds, QaExample ex, LoadReport& report) {
  if (ex.question.empty() || ex.context.empty()) {
    report.rejected.push_back({ex.id, "empty question or context"});
    return;
  }
  if (!fix_span(ex)) {
    report.rejected.push_back({ex.id, "answer span does not match context"});
    return;
  }
  ds.examples.push_back(std::move(ex));
}

Dataset load_squad(const std::string& path, LoadReport& report) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!doc.contains("data") || !doc["data"].is_array())
    throw ParseError(path + ": missing top-level \"data\" array");

  Dataset ds;
  ds.name = "squad";
  for (const auto& article : doc["data"]) {
    for (const auto& para : article.value("paragraphs", json::array())) {
      std::string context = para.value("context", "");
      for (const auto& qa : para.value("qas", json::array())) {
        QaExample ex;
        ex.id = qa.value("id", "");
        ex.domain = "squad";
        ex.source = "squad";
        ex.question = qa.value("question", "");
        ex.context = context;
        const auto& answers = qa.value("answers", json::array());
        if (answers.empty()) {
          report.rejected.push_back({ex.id, "no answers"});
          continue;
        }
        // First answer is the canonical span; all distinct texts are kept as
        // evaluation golds.
        ex.answer_text = answers[0].value("text", "");
        ex.answer_start = answers[0].value("answer_start", 0u);
        for (std::size_t i = 1; i < answers.size(); ++i) {
          std::string t = answers[i].value("text", "");
          if (t != ex.answer_text &&
              std::find(ex.extra_gold_texts.begin(), ex.extra_gold_texts.end(), t) ==
                  ex.extra_gold_texts.end()) {
            ex.extra_gold_texts.push_back(std::move(t));
          }
        }
        add_example(ds, std::move(ex), report);
      }
    }
  }
  return ds;
}

Dataset load_newsqa(const std::string& path, LoadReport& report) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!doc.contains("data") || !doc["data"].is_array())
    throw ParseError(path + ": missing top-level \"data\" array");

  Dataset ds;
  ds.name = "newsqa";
  for (const auto& story : doc["data"]) {
    std::string story_id = story.value("storyId", "");
    std::string text = story.value("text", "");
    int qi = 0;
    for (const auto& q : story.value("questions", json::array())) {
      QaExample ex;
      ex.id = story_id + ":" + std::to_string(qi++);
      ex.domain = "newsqa";
      ex.source = "newsqa";
      ex.question = q.value("q", "");
      ex.context = text;
      // The consensus field resolves crowd answers to one char span; stories
      // marked bad/no-answer carry no span and are rejected with a report.
      if (!q.contains("consensus") || !q["consensus"].is_object() ||
          !q["consensus"].contains("s") || !q["consensus"].contains("e")) {
        report.rejected.push_back({ex.id, "no consensus span"});
        continue;
      }
      std::size_t s = q["consensus"].value("s", 0u);
      std::size_t e = q["consensus"].value("e", 0u);
      if (e <= s || e > text.size()) {
        report.rejected.push_back({ex.id, "invalid consensus span"});
        continue;
      }
      ex.answer_start = s;
      ex.answer_text = text.substr(s, e - s);
      // NewsQA spans often include a trailing space or newline.
      while (!ex.answer_text.empty() &&
             (ex.answer_text.back() == ' ' || ex.answer_text.back() == '\n')) {
        ex.answer_text.pop_back();
      }
      add_example(ds, std::move(ex), report);
    }
  }
  return ds;
}

Dataset load_jsonl(const std::string& path, LoadReport& report) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  Dataset ds;
  ds.name = "causalqa";
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (rec.contains("_meta")) continue;
    QaExample ex;
    ex.id = rec.value("id", "line" + std::to_string(lineno));
    ex.domain = rec.value("domain", ds.name);
    ex.source = rec.value("source", ds.name);
    ex.question = rec.value("question", "");
    ex.context = rec.value("context", "");
    ex.answer_text = rec.contains("answer_text") ? rec.value("answer_text", "")
                                                 : rec.value("answer", "");
    ex.answer_start = rec.value("answer_start", 0u);
    if (rec.contains("gold_texts"))
      ex.extra_gold_texts = rec["gold_texts"].get<std::vector<std::string>>();
    add_example(ds, std::move(ex), report);
  }
  return ds;
}

std::vector<std::string> shuffled_ids(const std::vector<std::string>& ids,
                                      std::uint64_t seed) {
  std::vector<std::string> out = ids;
  // Hand-rolled Fisher-Yates: std::shuffle's sequence is not pinned by the
  // standard and the split must be byte-identical across toolchains.
  std::mt19937_64 rng(seed);
  for (std::size_t i = out.size(); i > 1; --i) {
    std::size_t j = rng() % i;
    std::swap(out[i - 1], out[j]);
  }
  return out;
}

SplitPlan split_ids(const std::vector<std::string>& ids, double r0, double r1,
                    double r2, std::uint64_t seed, const std::string& who) {
  const std::size_t n = ids.size();
  std::size_t n_train = static_cast<std::size_t>(std::floor(n * r0));
  std::size_t n_dev = static_cast<std::size_t>(std::floor(n * r1));
  std::size_t n_test = static_cast<std::size_t>(std::floor(n * r2));
  n_train += n - (n_train + n_dev + n_test);  // remainder to train
  if (n < 3 || n_train == 0 || n_dev == 0 || n_test == 0)
    throw std::invalid_argument("domain \"" + who +
                                "\" too small to populate all three splits");
  std::vector<std::string> order = shuffled_ids(ids, seed);
  SplitPlan plan;
  plan.seed = seed;
  plan.ratios[0] = r0;
  plan.ratios[1] = r1;
  plan.ratios[2] = r2;
  plan.train.assign(order.begin(), order.begin() + n_train);
  plan.dev.assign(order.begin() + n_train, order.begin() + n_train + n_dev);
  plan.test.assign(order.begin() + n_train + n_dev, order.end());
  return plan;
}

}  // namespace

std::set<std::string> Dataset::domains() const {
  std::set<std::string> out;
  for (const auto& ex : examples) out.insert(ex.domain);
  return out;
}

const QaExample* Dataset::find(const std::string& id) const {
  for (const auto& ex : examples)
    if (ex.id == id) return &ex;
  return nullptr;
}

DatasetFormat parse_format(const std::string& name) {
  if (name == "squad_json" || name == "squad") return DatasetFormat::squad_json;
  if (name == "newsqa") return DatasetFormat::newsqa;
  if (name == "causal_jsonl" || name == "jsonl") return DatasetFormat::causal_jsonl;
  throw std::invalid_argument("unknown dataset format: " + name);
}

Dataset load_dataset(const std::string& path, DatasetFormat format,
                     LoadReport* report, bool strict) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  Dataset ds;
  switch (format) {
    case DatasetFormat::squad_json: ds = load_squad(path, rep); break;
    case DatasetFormat::newsqa: ds = load_newsqa(path, rep); break;
    case DatasetFormat::causal_jsonl: ds = load_jsonl(path, rep); break;
  }
  // Duplicate ids violate the Dataset invariant regardless of report mode.
  std::set<std::string> seen;
  std::vector<std::string> dups;
  for (const auto& ex : ds.examples)
    if (!seen.insert(ex.id).second) dups.push_back(ex.id);
  if (!dups.empty()) throw ValidationError("duplicate example ids", dups);

  if (strict && !report && !rep.rejected.empty()) {
    std::vector<std::string> ids;
    std::string msg = "records failed validation:";
    for (const auto& r : rep.rejected) {
      ids.push_back(r.id);
      msg += " " + r.id + " (" + r.reason + ")";
    }
    throw ValidationError(msg, ids);
  }
  return ds;
}

void export_jsonl(const Dataset& ds, const std::string& path,
                  const std::string& meta_json) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (!meta_json.empty()) out << "{\"_meta\": " << meta_json << "}\n";
  for (const auto& ex : ds.examples) {
    json rec{{"id", ex.id},
             {"domain", ex.domain},
             {"question", ex.question},
             {"context", ex.context},
             {"answer_text", ex.answer_text},
             {"answer_start", ex.answer_start},
             {"source", ex.source}};
    if (!ex.extra_gold_texts.empty()) rec["gold_texts"] = ex.extra_gold_texts;
    out << rec.dump() << "\n";
  }
}

std::map<std::string, SplitPlan> split_by_domain(const Dataset& ds,
                                                 double train_ratio,
                                                 double dev_ratio,
                                                 double test_ratio,
                                                 std::uint64_t seed) {
  if (train_ratio < 0 || dev_ratio < 0 || test_ratio < 0 ||
      std::abs(train_ratio + dev_ratio + test_ratio - 1.0) > 1e-9)
    throw std::invalid_argument("ratios must be non-negative and sum to 1");

  std::map<std::string, std::vector<std::string>> by_domain;
  for (const auto& ex : ds.examples) by_domain[ex.domain].push_back(ex.id);

  std::map<std::string, SplitPlan> out;
  for (const auto& [domain, ids] : by_domain) {
    out[domain] = split_ids(ids, train_ratio, dev_ratio, test_ratio,
                            seed ^ fnv1a(domain), domain);
  }
  return out;
}

ExperimentPlan make_cross_setup(const Dataset& source, const Dataset& target,
                                std::uint64_t seed) {
  if (source.name == target.name)
    throw std::invalid_argument("setup2 requires two distinct datasets, got \"" +
                                source.name + "\" twice");
  auto ids_of = [](const Dataset& ds) {
    std::vector<std::string> ids;
    ids.reserve(ds.examples.size());
    for (const auto& ex : ds.examples) ids.push_back(ex.id);
    return ids;
  };
  SplitPlan src = split_ids(ids_of(source), 0.8, 0.1, 0.1, seed, source.name);
  SplitPlan tgt = split_ids(ids_of(target), 0.8, 0.1, 0.1, seed, target.name);

  ExperimentPlan plan;
  plan.setup = SetupKind::setup2_cross_dataset;
  auto initial = [](const std::string& s) {
    return s.empty() ? std::string("?")
                     : std::string(1, static_cast<char>(std::toupper(
                           static_cast<unsigned char>(s[0]))));
  };
  plan.label = initial(source.name) + " -> " + initial(target.name);
  plan.source_train = std::move(src.train);
  plan.source_dev = std::move(src.dev);
  plan.source_test = std::move(src.test);
  plan.target_test = std::move(tgt.test);
  return plan;
}

}  // namespace promptqa
