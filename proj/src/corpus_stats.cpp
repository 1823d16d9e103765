#include "promptqa/corpus_stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

using nlohmann::json;

namespace promptqa {

Vocab build_vocab(const Dataset& ds, std::size_t min_count,
                  const WordSet& stopwords) {
  if (ds.examples.empty()) throw std::invalid_argument("empty dataset");
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");

  std::map<std::string, std::size_t> raw;
  for (const auto& ex : ds.examples) {
    for (const auto& tok : tokenize_lower(ex.question)) ++raw[tok];
    for (const auto& tok : tokenize_lower(ex.context)) ++raw[tok];
  }
  Vocab v;
  v.stopwords = stopwords;
  for (const auto& [tok, count] : raw) {
    if (count < min_count || stopwords.count(tok)) continue;
    v.counts[tok] = count;
    v.total_count += count;
  }
  return v;
}

void PmiCounts::merge(const PmiCounts& other) {
  for (const auto& [key, n] : other.joint) joint[key] += n;
  for (const auto& [w, n] : other.per_word) per_word[w] += n;
  for (const auto& [t, n] : other.per_type) per_type[t] += n;
  total += other.total;
}

namespace {

// Tokens eligible as co-occurrence events for one example: vocab tokens in
// the counting window around the gold span, the span's own tokens excluded.
std::vector<std::string> window_tokens(const QaExample& ex, std::size_t window,
                                       const Vocab& vocab) {
  const std::size_t span_begin = ex.answer_start;
  const std::size_t span_end = ex.answer_start + ex.answer_text.size();
  std::vector<Token> toks = tokenize_spans(ex.context);

  std::size_t lo = 0, hi = 0;  // token index range [lo, hi)
  if (window == 0) {
    // Whole sentence containing the span.
    SentenceSpan sent{0, ex.context.size()};
    for (const auto& s : split_sentences(ex.context)) {
      if (span_begin >= s.begin && span_begin < s.end) {
        sent = s;
        break;
      }
    }
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i].end <= sent.begin) lo = i + 1;
      if (toks[i].begin < sent.end) hi = i + 1;
    }
  } else {
    std::size_t first_in = toks.size(), last_in = 0;
    bool any = false;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i].end > span_begin && toks[i].begin < span_end) {
        if (!any) first_in = i;
        last_in = i;
        any = true;
      }
    }
    if (!any) return {};
    lo = first_in >= window ? first_in - window : 0;
    hi = std::min(toks.size(), last_in + 1 + window);
  }

  std::vector<std::string> out;
  for (std::size_t i = lo; i < hi && i < toks.size(); ++i) {
    if (toks[i].end > span_begin && toks[i].begin < span_end) continue;
    std::string w = to_lower(toks[i].text);
    if (vocab.contains(w)) out.push_back(std::move(w));
  }
  return out;
}

}  // namespace

PmiCounts count_cooccurrences(const Dataset& ds,
                              const std::map<std::string, std::string>& qtypes,
                              std::size_t window, const Vocab& vocab) {
  PmiCounts counts;
  for (const auto& ex : ds.examples) {
    auto it = qtypes.find(ex.id);
    if (it == qtypes.end())
      throw std::invalid_argument("no question type for example " + ex.id);
    const std::string& type = it->second;
    for (const auto& w : window_tokens(ex, window, vocab)) {
      ++counts.joint[{type, w}];
      ++counts.per_word[w];
      ++counts.per_type[type];
      ++counts.total;
    }
  }
  return counts;
}

PmiTable scores_from_counts(const PmiCounts& counts, std::size_t window,
                            bool normalized) {
  if (counts.total == 0)
    throw std::runtime_error("no co-occurrence events");
  PmiTable table;
  table.window = window;
  table.normalized = normalized;
  table.total_events = counts.total;
  const double total = static_cast<double>(counts.total);
  for (const auto& [key, joint_count] : counts.joint) {
    const auto& [type, word] = key;
    PmiEntry e;
    e.cooccur_count = joint_count;
    e.word_count = counts.per_word.at(word);
    e.type_count = counts.per_type.at(type);
    const double p_joint = joint_count / total;
    const double p_word = e.word_count / total;
    const double p_type = e.type_count / total;
    const double pmi = std::log(p_joint / (p_word * p_type));
    if (!normalized) {
      e.npmi = pmi;
    } else if (p_joint >= 1.0) {
      e.npmi = 1.0;  // single-event table: perfect association by convention
    } else {
      e.npmi = pmi / (-std::log(p_joint));
    }
    table.entries[key] = e;
  }
  return table;
}

PmiTable compute_pmi(const Dataset& ds,
                     const std::map<std::string, std::string>& qtypes,
                     std::size_t window, const Vocab& vocab, bool normalized) {
  return scores_from_counts(count_cooccurrences(ds, qtypes, window, vocab),
                            window, normalized);
}

std::vector<std::string> top_k_words(const PmiTable& table,
                                     const std::string& qtype, std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  struct Row {
    std::string word;
    double npmi;
    std::size_t cooccur;
  };
  std::vector<Row> rows;
  for (const auto& [key, e] : table.entries) {
    if (key.first == qtype) rows.push_back({key.second, e.npmi, e.cooccur_count});
  }
  if (rows.empty())
    throw std::invalid_argument("unknown question type: " + qtype);
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.npmi != b.npmi) return a.npmi > b.npmi;
    if (a.cooccur != b.cooccur) return a.cooccur > b.cooccur;
    return a.word < b.word;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < rows.size() && i < k; ++i)
    out.push_back(rows[i].word);
  return out;
}

void write_pmi_jsonl(const PmiTable& table, const std::string& path,
                     const std::string& meta_json) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (!meta_json.empty()) out << "{\"_meta\": " << meta_json << "}\n";
  json header{{"total_events", table.total_events},
              {"window", table.window},
              {"normalized", table.normalized}};
  out << json{{"_pmi_header", header}}.dump() << "\n";
  for (const auto& [key, e] : table.entries) {
    out << json{{"type", key.first},
                {"word", key.second},
                {"npmi", e.npmi},
                {"cooccur_count", e.cooccur_count},
                {"word_count", e.word_count},
                {"type_count", e.type_count}}
               .dump()
        << "\n";
  }
}

PmiTable read_pmi_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  PmiTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    if (rec.contains("_meta")) continue;
    if (rec.contains("_pmi_header")) {
      const auto& h = rec["_pmi_header"];
      table.total_events = h.value("total_events", 0u);
      table.window = h.value("window", 0u);
      table.normalized = h.value("normalized", true);
      continue;
    }
    PmiEntry e;
    e.npmi = rec.value("npmi", 0.0);
    e.cooccur_count = rec.value("cooccur_count", 0u);
    e.word_count = rec.value("word_count", 0u);
    e.type_count = rec.value("type_count", 0u);
    table.entries[{rec.value("type", ""), rec.value("word", "")}] = e;
  }
  return table;
}

OverlapReport word_overlap(const Dataset& a, const Dataset& b,
                           const WordSet& stopwords) {
  if (a.examples.empty() || b.examples.empty())
    throw std::invalid_argument("word_overlap needs two non-empty datasets");
  Vocab va = build_vocab(a, 1, stopwords);
  Vocab vb = build_vocab(b, 1, stopwords);
  std::size_t inter = 0;
  for (const auto& [w, _] : va.counts)
    if (vb.contains(w)) ++inter;
  OverlapReport rep;
  rep.dataset_a = a.name;
  rep.dataset_b = b.name;
  rep.vocab_a = va.counts.size();
  rep.vocab_b = vb.counts.size();
  rep.a_to_b_pct = 100.0 * inter / va.counts.size();
  rep.b_to_a_pct = 100.0 * inter / vb.counts.size();
  return rep;
}

std::vector<std::string> domain_blocklist(const Dataset& ds, std::size_t top_n,
                                          const WordSet& stopwords) {
  std::map<std::string, std::map<std::string, std::size_t>> per_domain;
  std::map<std::string, std::size_t> totals;
  for (const auto& ex : ds.examples) {
    for (const auto& text : {ex.question, ex.context}) {
      for (const auto& tok : tokenize_lower(text)) {
        if (stopwords.count(tok)) continue;
        ++per_domain[tok][ex.domain];
        ++totals[tok];
      }
    }
  }
  struct Row {
    std::string word;
    double ratio;
    std::size_t total;
  };
  std::vector<Row> rows;
  for (const auto& [word, domains] : per_domain) {
    std::size_t max_domain = 0;
    for (const auto& [_, n] : domains) max_domain = std::max(max_domain, n);
    rows.push_back({word, static_cast<double>(max_domain) / totals[word],
                    totals[word]});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    if (a.total != b.total) return a.total > b.total;
    return a.word < b.word;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < rows.size() && i < top_n; ++i)
    out.push_back(rows[i].word);
  return out;
}

}  // namespace promptqa
