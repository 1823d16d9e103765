// promptqa-cli: scriptable front end over the promptqa shared library.
// Exit codes: 0 success, 1 pipeline/validation failure, 2 usage error.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "promptqa.h"

using nlohmann::json;

namespace {

int report_failure(pqa_status status) {
  json err{{"error", pqa_last_error()}, {"status", static_cast<int>(status)}};
  std::fprintf(stderr, "%s\n", err.dump().c_str());
  return status == PQA_ERR_INVALID_ARGUMENT ? 2 : 1;
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

bool parse_ratios(const std::string& spec, double out[3]) {
  double parts[3];
  char tail = '\0';
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &parts[0], &parts[1],
                  &parts[2], &tail) != 3)
    return false;
  double total = parts[0] + parts[1] + parts[2];
  if (total <= 0) return false;
  for (int i = 0; i < 3; ++i) out[i] = parts[i] / total;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QA dataset preparation, prompt augmentation, metrics, and a "
               "linear fine-tuning simulator"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key = value configuration file");
  app.set_version_flag("--version", pqa_version());

  std::string input, format = "causal_jsonl", out, report_path;
  auto* ingest = app.add_subcommand("ingest", "Parse, validate, and normalize a dataset");
  ingest->add_option("--input", input, "Source dataset file")->required();
  ingest->add_option("--format", format, "squad_json | newsqa | causal_jsonl");
  ingest->add_option("--out", out, "Normalized JSON-lines output")->required();
  ingest->add_option("--report", report_path,
                     "Rejection report (without it any rejection is fatal)");

  std::string ratios = "8:1:1";
  unsigned long long seed = 13;
  auto* split = app.add_subcommand("split", "Deterministic per-domain train/dev/test split");
  split->add_option("--input", input, "Normalized JSON-lines dataset")->required();
  split->add_option("--ratios", ratios, "train:dev:test (default 8:1:1)");
  split->add_option("--seed", seed, "Shuffle seed");
  split->add_option("--out", out, "Manifest JSON output")->required();

  unsigned window = 0, min_count = 1;
  std::string stopwords;
  bool raw_pmi = false;
  auto* pmi = app.add_subcommand("pmi", "Question-type / answer-window NPMI table");
  pmi->add_option("--input", input, "Normalized JSON-lines dataset")->required();
  pmi->add_option("--out", out, "Table JSON-lines output")->required();
  pmi->add_option("--window", window, "Tokens each side of the answer span (0 = its sentence)");
  pmi->add_option("--min-count", min_count, "Minimum vocabulary count");
  pmi->add_option("--stopwords", stopwords, "Stopword list (one word per line)");
  pmi->add_flag("--raw", raw_pmi, "Emit unnormalized PMI instead of NPMI");

  std::string family, data_dir = "data", pmi_path, sidecar, blocklist_path;
  unsigned budget = 512, top_k = 50;
  bool marker = false;
  auto* augment = app.add_subcommand("augment", "Attach answer-locating prompts to every example");
  augment->add_option("--input", input, "Normalized JSON-lines dataset")->required();
  augment->add_option("--family", family,
                      "question_type | sentiment | entity | phrase")->required();
  augment->add_option("--data-dir", data_dir, "Directory with templates and lexicons");
  augment->add_option("--out", out, "Augmented JSON-lines output")->required();
  augment->add_option("--budget", budget, "Whitespace-token budget for context + prompt");
  augment->add_flag("--marker", marker, "Insert a literal \"Prompt:\" separator");
  augment->add_option("--pmi", pmi_path, "Precomputed NPMI table (question_type family)");
  augment->add_option("--sidecar", sidecar, "Per-example annotation overrides (JSON-lines)");
  augment->add_option("--top-k", top_k, "NPMI candidate pool per question type");
  augment->add_option("--blocklist", blocklist_path, "Domain-leak terms for template validation");

  std::string b_input;
  auto* overlap = app.add_subcommand("overlap", "Directional content-word overlap between two datasets");
  overlap->add_option("--a", input, "First dataset (JSON-lines)")->required();
  overlap->add_option("--b", b_input, "Second dataset (JSON-lines)")->required();
  overlap->add_option("--stopwords", stopwords, "Stopword list");
  overlap->add_option("--out", out, "Report JSON output")->required();

  std::string gold, csv;
  auto* eval = app.add_subcommand("eval", "EM / token-F1 scoring against gold answers");
  eval->add_option("--predictions", input, "JSON object: id -> answer")->required();
  eval->add_option("--gold", gold, "Gold dataset (JSON-lines)")->required();
  eval->add_option("--out", out, "Report JSON output")->required();
  eval->add_option("--csv", csv, "Optional per-example CSV");

  int sim_d = 50, sim_m = 20, sim_k = 10, sim_n = 40, steps = 2000, log_every = 100;
  std::string seeds = "1..50", prompt_mode = "mixed", runlog, summary;
  double lr = 1e-2, sigma = 0.0;
  bool prompt_shift = false;
  auto* simulate = app.add_subcommand("simulate", "Paired FT vs LP-FT runs on synthetic linear tasks");
  simulate->add_option("--d", sim_d, "Ambient input dimension");
  simulate->add_option("--m", sim_m, "Training subspace dimension");
  simulate->add_option("--k", sim_k, "Feature dimension");
  simulate->add_option("--n", sim_n, "Training examples per task");
  simulate->add_option("--seeds", seeds, "Inclusive seed range, e.g. 1..50");
  simulate->add_option("--lr", lr, "Gradient descent learning rate");
  simulate->add_option("--steps", steps, "Gradient descent steps");
  simulate->add_option("--prompt-mode", prompt_mode, "orthogonal | mixed");
  simulate->add_option("--sigma", sigma,
                       "Bound sigma (0 = smallest nonzero singular value of B0)");
  simulate->add_flag("--prompt-shift", prompt_shift, "Shift inputs by the prompt vector");
  simulate->add_option("--log-every", log_every, "Run-log step stride");
  simulate->add_option("--runlog", runlog, "Per-step JSON-lines run log");
  simulate->add_option("--summary", summary, "Summary JSON output")->required();

  std::vector<std::string> cells;
  auto* report = app.add_subcommand("report", "Train-domain x test-domain grid from eval reports");
  report->add_option("--cell", cells, "train:test:path, repeatable")
      ->required()->expected(-1);
  report->add_option("--out", out, "Grid JSON output")->required();

  long top_n = 100;
  auto* blocklist = app.add_subcommand("blocklist", "Candidate domain-leak terms for template validation");
  blocklist->add_option("--input", input, "Normalized JSON-lines dataset")->required();
  blocklist->add_option("--stopwords", stopwords, "Stopword list");
  blocklist->add_option("--top-n", top_n, "Number of terms to emit");
  blocklist->add_option("--out", out, "Term list output (one per line)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  pqa_status status = PQA_OK;
  if (*ingest) {
    status = pqa_ingest(input.c_str(), format.c_str(), out.c_str(),
                        opt(report_path), nullptr);
  } else if (*split) {
    double r[3];
    if (!parse_ratios(ratios, r)) {
      std::fprintf(stderr, "{\"error\": \"--ratios must look like 8:1:1\"}\n");
      return 2;
    }
    status = pqa_split(input.c_str(), r[0], r[1], r[2], seed, out.c_str());
  } else if (*pmi) {
    json opts{{"window", window}, {"min_count", min_count},
              {"normalized", !raw_pmi}};
    if (!stopwords.empty()) opts["stopwords"] = stopwords;
    status = pqa_pmi(input.c_str(), out.c_str(), opts.dump().c_str());
  } else if (*augment) {
    json opts{{"budget", budget}, {"marker", marker}, {"top_k", top_k}};
    if (!pmi_path.empty()) opts["pmi_path"] = pmi_path;
    if (!sidecar.empty()) opts["sidecar"] = sidecar;
    if (!blocklist_path.empty()) opts["blocklist"] = blocklist_path;
    status = pqa_augment(input.c_str(), family.c_str(), data_dir.c_str(),
                         out.c_str(), opts.dump().c_str());
  } else if (*overlap) {
    status = pqa_overlap(input.c_str(), b_input.c_str(), opt(stopwords),
                         out.c_str());
  } else if (*eval) {
    status = pqa_eval(input.c_str(), gold.c_str(), out.c_str(), opt(csv),
                      nullptr);
  } else if (*simulate) {
    unsigned long long s0 = 0, s1 = 0;
    if (std::sscanf(seeds.c_str(), "%llu..%llu", &s0, &s1) != 2 || s0 > s1) {
      std::fprintf(stderr, "{\"error\": \"--seeds must look like 1..50\"}\n");
      return 2;
    }
    json opts{{"d", sim_d},       {"m", sim_m},
              {"k", sim_k},       {"n", sim_n},
              {"seed_begin", s0}, {"seed_end", s1},
              {"lr", lr},         {"steps", steps},
              {"prompt_mode", prompt_mode},
              {"sigma", sigma},   {"apply_prompt_shift", prompt_shift},
              {"log_every", log_every}};
    status = pqa_simulate(opts.dump().c_str(), opt(runlog), summary.c_str());
  } else if (*report) {
    json cell_list = json::array();
    for (const auto& spec : cells) {
      auto first = spec.find(':');
      auto second = first == std::string::npos ? std::string::npos
                                               : spec.find(':', first + 1);
      if (second == std::string::npos) {
        std::fprintf(stderr,
                     "{\"error\": \"--cell must look like train:test:path\"}\n");
        return 2;
      }
      cell_list.push_back({{"train", spec.substr(0, first)},
                           {"test", spec.substr(first + 1, second - first - 1)},
                           {"path", spec.substr(second + 1)}});
    }
    status = pqa_report(cell_list.dump().c_str(), out.c_str());
  } else if (*blocklist) {
    status = pqa_blocklist(input.c_str(), opt(stopwords), top_n, out.c_str());
  }

  return status == PQA_OK ? 0 : report_failure(status);
}
