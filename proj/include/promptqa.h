/*
 * promptqa C API: QA dataset preparation, answer-locating prompt generation,
 * QA metrics, and a linear LP/FT/LP-FT simulator, exposed as a shared library
 * with opaque handles and status codes.
 *
 * All functions returning pqa_status set a thread-local error message
 * retrievable via pqa_last_error() on failure. String arguments are UTF-8;
 * `options_json` arguments are flat JSON objects and may be NULL for
 * defaults. Effective options are embedded in every output artifact.
 */
#ifndef PROMPTQA_H
#define PROMPTQA_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  PQA_OK = 0,
  PQA_ERR_IO = 1,
  PQA_ERR_PARSE = 2,
  PQA_ERR_VALIDATION = 3,
  PQA_ERR_INVALID_ARGUMENT = 4,
  PQA_ERR_INTERNAL = 5
} pqa_status;

const char* pqa_version(void);
/* Message for the most recent failing call on this thread ("" if none). */
const char* pqa_last_error(void);

/* ---- datasets ---- */

typedef struct pqa_dataset pqa_dataset;

/* format: "squad_json" | "newsqa" | "causal_jsonl" */
pqa_status pqa_dataset_load(const char* path, const char* format,
                            pqa_dataset** out);
void pqa_dataset_free(pqa_dataset* ds);
long pqa_dataset_size(const pqa_dataset* ds);
/* Normalized JSON-lines export; meta_json may be NULL. */
pqa_status pqa_dataset_export(const pqa_dataset* ds, const char* out_path,
                              const char* meta_json);

/* ---- file-to-file pipeline operations ---- */

/* Parse + validate + normalize. Rejected records go to report_json (may be
 * NULL, in which case any rejection is an error). */
pqa_status pqa_ingest(const char* in_path, const char* format,
                      const char* out_jsonl, const char* report_json,
                      const char* options_json);

/* Per-domain shuffled train/dev/test split; manifest lists ids per domain. */
pqa_status pqa_split(const char* in_jsonl, double train_ratio, double dev_ratio,
                     double test_ratio, unsigned long long seed,
                     const char* out_manifest_json);

/* NPMI table between question types and answer-window words.
 * options: window (0 = answer sentence), min_count, top_k, stopwords,
 * normalized. */
pqa_status pqa_pmi(const char* in_jsonl, const char* out_jsonl,
                   const char* options_json);

/* Prompt-augmented dataset for one template family.
 * family: "question_type" | "sentiment" | "entity" | "phrase".
 * data_dir must hold the bundled resource files (templates.jsonl, lexicons,
 * gazetteers). options: budget, marker, pmi_path, sidecar, top_k, blocklist. */
pqa_status pqa_augment(const char* in_jsonl, const char* family,
                       const char* data_dir, const char* out_jsonl,
                       const char* options_json);

/* Directional content-word overlap percentages between two datasets. */
pqa_status pqa_overlap(const char* a_jsonl, const char* b_jsonl,
                       const char* stopwords_path, const char* out_json);

/* F1/EM scoring of an id->answer predictions object against gold JSON-lines.
 * out_csv may be NULL. */
pqa_status pqa_eval(const char* predictions_json, const char* gold_jsonl,
                    const char* out_json, const char* out_csv,
                    const char* options_json);

/* Paired FT vs LP-FT runs over seeded synthetic linear tasks.
 * options: d, m, k, n, seed_begin, seed_end, lr, steps, prompt_mode
 * ("orthogonal"|"mixed"), sigma (0 = smallest nonzero singular value of B0),
 * apply_prompt_shift, log_every. runlog_jsonl may be NULL. */
pqa_status pqa_simulate(const char* options_json, const char* runlog_jsonl,
                        const char* summary_json);

/* Assembles a train-domain x test-domain grid from eval report files.
 * cells_json: [{"train": ..., "test": ..., "path": ...}, ...] */
pqa_status pqa_report(const char* cells_json, const char* out_json);

/* Candidate domain-leak terms (one per line) for template validation. */
pqa_status pqa_blocklist(const char* in_jsonl, const char* stopwords_path,
                         long top_n, const char* out_txt);

/* ---- scalar metric helpers ---- */

/* Token-overlap F1 after SQuAD-style normalization; negative on error. */
double pqa_token_f1(const char* pred, const char* gold);
/* 1, 0, or negative on error. */
int pqa_exact_match(const char* pred, const char* gold);

#ifdef __cplusplus
}
#endif

#endif /* PROMPTQA_H */
