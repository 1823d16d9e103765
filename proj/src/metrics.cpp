#include "promptqa/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace promptqa {

std::string normalize_answer(const std::string& text) {
  std::string lowered;
  lowered.reserve(text.size());
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::ispunct(u)) continue;
    lowered += static_cast<char>(std::tolower(u));
  }
  std::istringstream ss(lowered);
  std::string tok, out;
  while (ss >> tok) {
    if (tok == "a" || tok == "an" || tok == "the") continue;
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

namespace {

std::vector<std::string> norm_tokens(const std::string& text) {
  std::istringstream ss(normalize_answer(text));
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

}  // namespace

double token_f1(const std::string& pred, const std::string& gold) {
  std::vector<std::string> p = norm_tokens(pred);
  std::vector<std::string> g = norm_tokens(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::map<std::string, int> gold_counts;
  for (const auto& t : g) ++gold_counts[t];
  int overlap = 0;
  for (const auto& t : p) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  // Harmonic mean of precision and recall, in the exact integer-ratio form
  // 2c / (|p| + |g|) so round cases (e.g. 3-vs-5 token overlap 3 -> 0.75)
  // come out bit-exact.
  return 2.0 * overlap / static_cast<double>(p.size() + g.size());
}

int exact_match(const std::string& pred, const std::string& gold) {
  return normalize_answer(pred) == normalize_answer(gold) ? 1 : 0;
}

EvalResult evaluate(const std::map<std::string, std::string>& predictions,
                    const Dataset& gold) {
  std::vector<std::string> unknown;
  for (const auto& [id, _] : predictions) {
    if (!gold.find(id)) unknown.push_back(id);
  }
  if (!unknown.empty())
    throw ValidationError("predictions for unknown ids", unknown);

  EvalResult result;
  std::map<std::string, std::pair<double, double>> domain_sums;  // f1, em
  std::map<std::string, std::size_t> domain_n;
  for (const auto& ex : gold.examples) {
    ExampleScore score;
    auto it = predictions.find(ex.id);
    if (it == predictions.end()) {
      result.missing_ids.push_back(ex.id);  // missing -> scored 0, reported
    } else {
      std::vector<std::string> golds{ex.answer_text};
      golds.insert(golds.end(), ex.extra_gold_texts.begin(),
                   ex.extra_gold_texts.end());
      for (const auto& g : golds) {
        score.f1 = std::max(score.f1, token_f1(it->second, g));
        score.em = std::max(score.em, exact_match(it->second, g));
      }
    }
    result.per_example[ex.id] = score;
    result.macro_f1 += score.f1;
    result.em_rate += score.em;
    domain_sums[ex.domain].first += score.f1;
    domain_sums[ex.domain].second += score.em;
    ++domain_n[ex.domain];
  }
  result.n = gold.examples.size();
  if (result.n > 0) {
    result.macro_f1 /= result.n;
    result.em_rate /= result.n;
  }
  for (const auto& [domain, sums] : domain_sums) {
    DomainScore ds;
    ds.n = domain_n[domain];
    ds.macro_f1 = sums.first / ds.n;
    ds.em_rate = sums.second / ds.n;
    result.by_domain[domain] = ds;
  }
  return result;
}

std::map<std::string, std::string> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open predictions file: " + path);
  json doc;
  in >> doc;
  if (!doc.is_object())
    throw std::runtime_error(path + ": predictions must be a JSON object");
  std::map<std::string, std::string> out;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() == "_meta") continue;
    out[it.key()] = it.value().get<std::string>();
  }
  return out;
}

void write_eval_report(const EvalResult& result, const std::string& json_path,
                       const std::string& csv_path,
                       const std::string& meta_json) {
  json by_domain = json::object();
  for (const auto& [domain, ds] : result.by_domain) {
    by_domain[domain] = {{"macro_f1", ds.macro_f1},
                         {"em_rate", ds.em_rate},
                         {"n", ds.n}};
  }
  json doc{
      // Macro F1 here is the mean of per-example token-overlap F1 scores, the
      // evaluation-practice reading of the per-token formula.
      {"macro_f1", result.macro_f1},
      {"em_rate", result.em_rate},
      {"n", result.n},
      {"by_domain", by_domain},
      {"missing_ids", result.missing_ids},
  };
  if (!meta_json.empty()) doc["_meta"] = json::parse(meta_json);
  std::ofstream out(json_path);
  if (!out) throw std::runtime_error("cannot write " + json_path);
  out << doc.dump(2) << "\n";

  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path);
    csv << "id,f1,em\n";
    for (const auto& [id, score] : result.per_example) {
      csv << id << "," << score.f1 << "," << score.em << "\n";
    }
  }
}

}  // namespace promptqa
