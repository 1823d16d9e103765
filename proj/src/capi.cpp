#include "promptqa.h"

#include <exception>
#include <fstream>
#include <memory>
#include <string>

#include "json.hpp"
#include "promptqa/annotators.hpp"
#include "promptqa/config.hpp"
#include "promptqa/corpus_stats.hpp"
#include "promptqa/dataset.hpp"
#include "promptqa/lpft.hpp"
#include "promptqa/metrics.hpp"
#include "promptqa/prompts.hpp"

using nlohmann::json;
using namespace promptqa;

namespace {

thread_local std::string g_last_error;

template <typename Fn>
pqa_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PQA_OK;
  } catch (const ParseError& e) {
    g_last_error = e.what();
    return PQA_ERR_PARSE;
  } catch (const ValidationError& e) {
    g_last_error = e.what();
    return PQA_ERR_VALIDATION;
  } catch (const TemplateError& e) {
    g_last_error = e.what();
    return PQA_ERR_VALIDATION;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return PQA_ERR_INVALID_ARGUMENT;
  } catch (const std::out_of_range& e) {
    g_last_error = e.what();
    return PQA_ERR_INVALID_ARGUMENT;
  } catch (const std::domain_error& e) {
    g_last_error = e.what();
    return PQA_ERR_INVALID_ARGUMENT;
  } catch (const std::runtime_error& e) {
    g_last_error = e.what();
    return PQA_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PQA_ERR_INTERNAL;
  }
}

json parse_options(const char* options_json) {
  if (options_json == nullptr || *options_json == '\0') return json::object();
  json opts = json::parse(options_json);
  if (!opts.is_object()) throw std::invalid_argument("options must be a JSON object");
  return opts;
}

std::string require(const char* arg, const char* name) {
  if (arg == nullptr || *arg == '\0')
    throw std::invalid_argument(std::string(name) + " must not be null");
  return arg;
}

std::string meta_for(const json& effective) {
  return json{{"config", effective}, {"version", kToolVersion}}.dump();
}

WordSet stopwords_from(const json& opts, const char* key = "stopwords") {
  if (opts.contains(key)) return load_word_set(opts[key].get<std::string>());
  return {};
}

}  // namespace

extern "C" {

const char* pqa_version(void) { return kToolVersion; }

const char* pqa_last_error(void) { return g_last_error.c_str(); }

struct pqa_dataset {
  Dataset ds;
};

pqa_status pqa_dataset_load(const char* path, const char* format,
                            pqa_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(format, "format");
    if (out == nullptr) throw std::invalid_argument("out must not be null");
    auto handle = std::make_unique<pqa_dataset>();
    handle->ds = load_dataset(path, parse_format(format));
    *out = handle.release();
  });
}

void pqa_dataset_free(pqa_dataset* ds) { delete ds; }

long pqa_dataset_size(const pqa_dataset* ds) {
  return ds == nullptr ? -1 : static_cast<long>(ds->ds.examples.size());
}

pqa_status pqa_dataset_export(const pqa_dataset* ds, const char* out_path,
                              const char* meta_json) {
  return guarded([&] {
    if (ds == nullptr) throw std::invalid_argument("dataset handle is null");
    require(out_path, "out_path");
    export_jsonl(ds->ds, out_path, meta_json ? meta_json : "");
  });
}

pqa_status pqa_ingest(const char* in_path, const char* format,
                      const char* out_jsonl, const char* report_json,
                      const char* options_json) {
  return guarded([&] {
    json opts = parse_options(options_json);
    opts["input"] = require(in_path, "in_path");
    opts["format"] = require(format, "format");

    LoadReport report;
    Dataset ds = load_dataset(in_path, parse_format(format),
                              report_json ? &report : nullptr);
    export_jsonl(ds, require(out_jsonl, "out_jsonl"), meta_for(opts));

    if (report_json) {
      json rejected = json::array();
      for (const auto& r : report.rejected)
        rejected.push_back({{"id", r.id}, {"reason", r.reason}});
      json doc{{"_meta", json::parse(meta_for(opts))},
               {"loaded", ds.examples.size()},
               {"rejected", rejected}};
      std::ofstream out(report_json);
      if (!out) throw std::runtime_error(std::string("cannot write ") + report_json);
      out << doc.dump(2) << "\n";
    }
  });
}

pqa_status pqa_split(const char* in_jsonl, double train_ratio, double dev_ratio,
                     double test_ratio, unsigned long long seed,
                     const char* out_manifest_json) {
  return guarded([&] {
    Dataset ds = load_dataset(require(in_jsonl, "in_jsonl"),
                              DatasetFormat::causal_jsonl);
    auto plans = split_by_domain(ds, train_ratio, dev_ratio, test_ratio, seed);

    json domains = json::object();
    for (const auto& [domain, plan] : plans) {
      domains[domain] = {{"train", plan.train},
                        {"dev", plan.dev},
                        {"test", plan.test}};
    }
    json effective{{"input", in_jsonl},
                   {"ratios", {train_ratio, dev_ratio, test_ratio}},
                   {"seed", seed}};
    json doc{{"_meta", json::parse(meta_for(effective))},
             {"seed", seed},
             {"ratios", {train_ratio, dev_ratio, test_ratio}},
             {"domains", domains}};
    std::ofstream out(require(out_manifest_json, "out_manifest_json"));
    if (!out) throw std::runtime_error(std::string("cannot write ") + out_manifest_json);
    out << doc.dump(2) << "\n";
  });
}

pqa_status pqa_pmi(const char* in_jsonl, const char* out_jsonl,
                   const char* options_json) {
  return guarded([&] {
    json opts = parse_options(options_json);
    opts["input"] = require(in_jsonl, "in_jsonl");
    const std::size_t window = opts.value("window", 0u);
    const std::size_t min_count = opts.value("min_count", 1u);
    const bool normalized = opts.value("normalized", true);
    opts["window"] = window;
    opts["min_count"] = min_count;
    opts["normalized"] = normalized;

    Dataset ds = load_dataset(in_jsonl, DatasetFormat::causal_jsonl);
    WordSet stopwords = stopwords_from(opts);
    Vocab vocab = build_vocab(ds, min_count, stopwords);
    std::map<std::string, std::string> qtypes;
    for (const auto& ex : ds.examples)
      qtypes[ex.id] = to_string(classify_question_type(ex.question));
    PmiTable table = compute_pmi(ds, qtypes, window, vocab, normalized);
    write_pmi_jsonl(table, require(out_jsonl, "out_jsonl"), meta_for(opts));
  });
}

pqa_status pqa_augment(const char* in_jsonl, const char* family,
                       const char* data_dir, const char* out_jsonl,
                       const char* options_json) {
  return guarded([&] {
    json opts = parse_options(options_json);
    opts["input"] = require(in_jsonl, "in_jsonl");
    opts["family"] = require(family, "family");
    const std::string dir = require(data_dir, "data_dir");
    const std::size_t budget = opts.value("budget", 512u);
    const bool marker = opts.value("marker", false);
    opts["budget"] = budget;
    opts["marker"] = marker;

    TemplateFamily fam = parse_family(family);
    Dataset ds = load_dataset(in_jsonl, DatasetFormat::causal_jsonl);

    PromptResources res;
    res.templates = load_templates(dir + "/templates.jsonl");
    res.sentiment_lexicon = load_sentiment_lexicon(dir + "/sentiment_lexicon.tsv");
    res.gazetteers = load_gazetteers(dir);
    res.phrase_lexicons = load_phrase_lexicons(dir);
    res.pmi_top_k = opts.value("top_k", 50u);
    res.qtype_word_cap = opts.value("qtype_word_cap", 3u);
    res.sentiment_word_count = opts.value("sentiment_word_count", 1u);
    res.phrase_extra_words = opts.value("phrase_extra_words", 2u);
    res.sentiment_tau = opts.value("tau", 0.05);
    if (opts.contains("sidecar"))
      res.sidecar = load_sidecar(opts["sidecar"].get<std::string>());

    // Refuse to generate from templates that break the shipped rules.
    WordSet blocklist;
    if (opts.contains("blocklist"))
      blocklist = load_word_set(opts["blocklist"].get<std::string>());
    for (const auto& [name, tmpl] : res.templates.by_name) {
      auto violations = validate_template(tmpl, blocklist);
      if (!violations.empty())
        throw ValidationError("template \"" + name + "\" violates rule " +
                                  to_string(violations.front().rule),
                              {name});
    }

    PmiTable pmi;
    if (opts.contains("pmi_path")) {
      pmi = read_pmi_jsonl(opts["pmi_path"].get<std::string>());
      res.pmi = &pmi;
    } else if (fam == TemplateFamily::question_type) {
      // No precomputed table: build one from the input itself.
      WordSet stopwords = load_word_set(dir + "/stopwords.txt");
      Vocab vocab = build_vocab(ds, 1, stopwords);
      std::map<std::string, std::string> qtypes;
      for (const auto& ex : ds.examples)
        qtypes[ex.id] = to_string(classify_question_type(ex.question));
      pmi = compute_pmi(ds, qtypes, 0, vocab);
      res.pmi = &pmi;
    }

    std::ofstream out(require(out_jsonl, "out_jsonl"));
    if (!out) throw std::runtime_error(std::string("cannot write ") + out_jsonl);
    out << "{\"_meta\": " << meta_for(opts) << "}\n";
    for (const auto& ex : ds.examples) {
      PromptedExample pe = generate_prompt(ex, fam, res);
      FlattenedRecord rec = apply_prompt(pe, budget, marker);
      json line{{"id", ex.id},
                {"domain", ex.domain},
                {"question", ex.question},
                {"context", ex.context},
                {"answer_text", ex.answer_text},
                {"answer_start", ex.answer_start},
                {"source", ex.source},
                {"prompt", pe.prompt},
                {"family", to_string(pe.family)},
                {"prompt_words", pe.prompt_words},
                {"fallback_used", pe.fallback_used},
                {"flattened_context", rec.flattened_context},
                {"truncated", rec.truncated}};
      out << line.dump() << "\n";
    }
  });
}

pqa_status pqa_overlap(const char* a_jsonl, const char* b_jsonl,
                       const char* stopwords_path, const char* out_json) {
  return guarded([&] {
    Dataset a = load_dataset(require(a_jsonl, "a_jsonl"), DatasetFormat::causal_jsonl);
    Dataset b = load_dataset(require(b_jsonl, "b_jsonl"), DatasetFormat::causal_jsonl);
    a.name = a_jsonl;
    b.name = b_jsonl;
    WordSet stopwords;
    if (stopwords_path && *stopwords_path)
      stopwords = load_word_set(stopwords_path);
    OverlapReport rep = word_overlap(a, b, stopwords);

    json effective{{"a", a_jsonl},
                   {"b", b_jsonl},
                   {"stopwords", stopwords_path ? stopwords_path : ""}};
    json doc{{"_meta", json::parse(meta_for(effective))},
             {"dataset_a", rep.dataset_a},
             {"dataset_b", rep.dataset_b},
             {"a_to_b_pct", rep.a_to_b_pct},
             {"b_to_a_pct", rep.b_to_a_pct},
             {"vocab_a", rep.vocab_a},
             {"vocab_b", rep.vocab_b}};
    std::ofstream out(require(out_json, "out_json"));
    if (!out) throw std::runtime_error(std::string("cannot write ") + out_json);
    out << doc.dump(2) << "\n";
  });
}

pqa_status pqa_eval(const char* predictions_json, const char* gold_jsonl,
                    const char* out_json, const char* out_csv,
                    const char* options_json) {
  return guarded([&] {
    json opts = parse_options(options_json);
    opts["predictions"] = require(predictions_json, "predictions_json");
    opts["gold"] = require(gold_jsonl, "gold_jsonl");
    auto predictions = load_predictions(predictions_json);
    Dataset gold = load_dataset(gold_jsonl, DatasetFormat::causal_jsonl);
    EvalResult result = evaluate(predictions, gold);
    write_eval_report(result, require(out_json, "out_json"),
                      out_csv ? out_csv : "", meta_for(opts));
  });
}

pqa_status pqa_simulate(const char* options_json, const char* runlog_jsonl,
                        const char* summary_json) {
  return guarded([&] {
    json opts = parse_options(options_json);
    lpft::SimulationConfig cfg;
    cfg.d = opts.value("d", cfg.d);
    cfg.m = opts.value("m", cfg.m);
    cfg.k = opts.value("k", cfg.k);
    cfg.n = opts.value("n", cfg.n);
    cfg.seed_begin = opts.value("seed_begin", cfg.seed_begin);
    cfg.seed_end = opts.value("seed_end", cfg.seed_end);
    cfg.train.learning_rate = opts.value("lr", cfg.train.learning_rate);
    cfg.train.steps = opts.value("steps", cfg.train.steps);
    cfg.prompt_mode = opts.value("prompt_mode", std::string("mixed")) == "orthogonal"
                          ? lpft::PromptMode::orthogonal
                          : lpft::PromptMode::mixed;
    cfg.sigma_override = opts.value("sigma", 0.0);
    cfg.apply_prompt_shift = opts.value("apply_prompt_shift", false);
    const int log_every = opts.value("log_every", 100);

    json effective{{"d", cfg.d},
                   {"m", cfg.m},
                   {"k", cfg.k},
                   {"n", cfg.n},
                   {"seed_begin", cfg.seed_begin},
                   {"seed_end", cfg.seed_end},
                   {"lr", cfg.train.learning_rate},
                   {"steps", cfg.train.steps},
                   {"prompt_mode",
                    cfg.prompt_mode == lpft::PromptMode::mixed ? "mixed" : "orthogonal"},
                   {"sigma_policy", cfg.sigma_override > 0.0
                                        ? std::to_string(cfg.sigma_override)
                                        : "smallest_nonzero_singular_value(B0)"},
                   {"apply_prompt_shift", cfg.apply_prompt_shift},
                   {"log_every", log_every}};

    lpft::SimulationSummary summary = lpft::simulate(cfg);

    if (runlog_jsonl && *runlog_jsonl) {
      std::ofstream log(runlog_jsonl);
      if (!log) throw std::runtime_error(std::string("cannot write ") + runlog_jsonl);
      log << "{\"_meta\": " << meta_for(effective) << "}\n";
      for (const auto& run : summary.runs) {
        auto dump_steps = [&](const lpft::Trajectory& traj, const char* which) {
          for (const auto& rec : traj.steps) {
            if (rec.step % log_every != 0 && rec.step != cfg.train.steps) continue;
            log << json{{"seed", run.seed},
                        {"run", which},
                        {"step", rec.step},
                        {"train_loss", rec.train_loss},
                        {"ood_mse", rec.ood_mse}}
                       .dump()
                << "\n";
          }
        };
        dump_steps(run.ft, "ft");
        dump_steps(run.lpft, "lpft");
      }
    }

    json seeds = json::array();
    for (const auto& run : summary.runs) {
      seeds.push_back({{"seed", run.seed},
                       {"ft_ood", run.ft_ood},
                       {"lpft_ood", run.lpft_ood},
                       {"ft_final_id", run.ft_final_id},
                       {"lpft_final_id", run.lpft_final_id},
                       {"lp_id", run.lp_id},
                       {"phi_random", run.phi_random},
                       {"phi_lp", run.phi_lp},
                       {"sigma", run.sigma},
                       {"bound_rhs", run.bound_rhs},
                       {"bound_satisfied_final", run.bound_satisfied_final},
                       {"bound_steps_checked", run.bound_steps_checked},
                       {"bound_steps_satisfied", run.bound_steps_satisfied}});
    }
    json doc{{"_meta", json::parse(meta_for(effective))},
             {"median_ft_ood", summary.median_ft_ood},
             {"median_lpft_ood", summary.median_lpft_ood},
             {"median_ft_final_id", summary.median_ft_final_id},
             {"median_lp_id", summary.median_lp_id},
             {"lpft_wins_fraction", summary.lpft_wins_fraction},
             {"bound_satisfaction_rate", summary.bound_satisfaction_rate},
             {"runs", seeds}};
    std::ofstream out(require(summary_json, "summary_json"));
    if (!out) throw std::runtime_error(std::string("cannot write ") + summary_json);
    out << doc.dump(2) << "\n";
  });
}

pqa_status pqa_report(const char* cells_json, const char* out_json) {
  return guarded([&] {
    json cells = json::parse(require(cells_json, "cells_json"));
    if (!cells.is_array())
      throw std::invalid_argument("cells_json must be a JSON array");
    json grid = json::object();
    for (const auto& cell : cells) {
      std::string train = cell.at("train").get<std::string>();
      std::string test = cell.at("test").get<std::string>();
      std::string path = cell.at("path").get<std::string>();
      std::ifstream in(path);
      if (!in) throw std::runtime_error("cannot open eval report: " + path);
      json report;
      in >> report;
      grid[train][test] = {{"f1", report.value("macro_f1", 0.0)},
                           {"em", report.value("em_rate", 0.0)},
                           {"n", report.value("n", 0u)}};
    }
    json doc{{"_meta", json::parse(meta_for(json{{"cells", cells}}))},
             {"grid", grid}};
    std::ofstream out(require(out_json, "out_json"));
    if (!out) throw std::runtime_error(std::string("cannot write ") + out_json);
    out << doc.dump(2) << "\n";
  });
}

pqa_status pqa_blocklist(const char* in_jsonl, const char* stopwords_path,
                         long top_n, const char* out_txt) {
  return guarded([&] {
    if (top_n <= 0) throw std::invalid_argument("top_n must be positive");
    Dataset ds = load_dataset(require(in_jsonl, "in_jsonl"),
                              DatasetFormat::causal_jsonl);
    WordSet stopwords;
    if (stopwords_path && *stopwords_path)
      stopwords = load_word_set(stopwords_path);
    auto words = domain_blocklist(ds, static_cast<std::size_t>(top_n), stopwords);
    std::ofstream out(require(out_txt, "out_txt"));
    if (!out) throw std::runtime_error(std::string("cannot write ") + out_txt);
    out << "# generated from " << in_jsonl << " (top " << top_n
        << " domain-exclusive words)\n";
    for (const auto& w : words) out << w << "\n";
  });
}

double pqa_token_f1(const char* pred, const char* gold) {
  if (pred == nullptr || gold == nullptr) return -1.0;
  try {
    return token_f1(pred, gold);
  } catch (...) {
    return -1.0;
  }
}

int pqa_exact_match(const char* pred, const char* gold) {
  if (pred == nullptr || gold == nullptr) return -1;
  try {
    return exact_match(pred, gold);
  } catch (...) {
    return -1;
  }
}

}  // extern "C"
