/* neurolm: train small decoder-only language models on structured sequence
 * corpora and score their representations against neural response data.
 *
 * C API over the shared library. All functions return NLM_OK on success;
 * on failure they return a status code and leave a thread-local message
 * retrievable via nlm_last_error(). Paths are UTF-8.
 *
 * File formats:
 *   token streams ".toks": magic "TOKS", u32 LE vocab_size, u64 LE count,
 *     then count u32 LE token ids.
 *   documents: JSON lines, one object per line with a "text" field.
 *   checkpoints: magic "NLMC", u32 LE version, u64 LE header length, JSON
 *     header (config + tensor manifest), then raw LE float32 tensor data.
 *   tokenizers, manifests, reports, ledgers: JSON.
 * All seeded randomness uses the splitmix64 generator.
 */
#ifndef NEUROLM_H
#define NEUROLM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NLM_API __declspec(dllexport)
#else
#define NLM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    NLM_OK = 0,
    NLM_ERR_CONFIG = 1,
    NLM_ERR_DOMAIN = 2,
    NLM_ERR_INPUT = 3,
    NLM_ERR_IO = 4,
    NLM_ERR_LEX = 5,
    NLM_ERR_TRAIN = 6,
    NLM_ERR_SCORE = 7,
    NLM_ERR_INTERNAL = 8
} nlm_status;

/* Message describing the most recent failure on this thread. */
NLM_API const char* nlm_last_error(void);

/* ---- corpus generation -------------------------------------------------- */

/* Nested-parenthesis stream (one shared token id per type for open and
 * close); written as a .toks file. */
NLM_API nlm_status nlm_gen_dyck(uint32_t vocab_size, double close_prob, uint64_t target_length,
                                uint64_t seed, const char* out_path);

/* Seeded permutation of the token positions of a .toks file. */
NLM_API nlm_status nlm_scramble(const char* in_path, uint64_t seed, const char* out_path);

/* Strips FASTA header lines (leading '>') and joins the sequence lines. */
NLM_API nlm_status nlm_clean_fasta(const char* in_path, const char* out_path);

/* Indentation-aware lexing of source text into the symbolic alphabet
 * (NAME, NUMBER, OPERATOR, NEWLINE, INDENT, DEDENT, COMMENT_MASK,
 * STRING_MASK). Writes a .toks file; names_out_path, when non-NULL,
 * additionally gets one symbolic token name per line. */
NLM_API nlm_status nlm_lex_code(const char* in_path, const char* out_path,
                                const char* names_out_path);

/* Block interleave of two document JSONL files at an exact ratio. */
NLM_API nlm_status nlm_mix(const char* a_jsonl, const char* b_jsonl, uint32_t ratio_a,
                           uint32_t ratio_b, const char* out_jsonl);

/* Joins .toks documents with eos separators and slices into consecutive
 * context_length windows (remainder discarded); output is the flat stream
 * of the emitted examples. n_examples may be NULL. */
NLM_API nlm_status nlm_pack(const char* const* toks_paths, size_t n_paths,
                            uint32_t context_length, uint32_t eos_id, const char* out_path,
                            size_t* n_examples);

/* First min(budget, length) tokens of a stream. */
NLM_API nlm_status nlm_truncate(const char* in_path, uint64_t budget, const char* out_path);

/* ---- tokenizers --------------------------------------------------------- */

typedef struct nlm_tokenizer nlm_tokenizer;

NLM_API nlm_status nlm_tokenizer_train_bpe(const char* corpus_path, uint32_t vocab_size,
                                           const char* model_out_path);
NLM_API nlm_status nlm_tokenizer_train_whitespace(const char* corpus_path,
                                                  const char* model_out_path);
NLM_API nlm_status nlm_tokenizer_open(const char* model_path, nlm_tokenizer** out);
NLM_API void nlm_tokenizer_close(nlm_tokenizer* tok);
NLM_API uint32_t nlm_tokenizer_vocab_size(const nlm_tokenizer* tok);
NLM_API uint32_t nlm_tokenizer_eos_id(const nlm_tokenizer* tok);
NLM_API nlm_status nlm_tokenizer_encode_file(const nlm_tokenizer* tok, const char* text_path,
                                             const char* toks_out_path);
NLM_API nlm_status nlm_tokenizer_decode_file(const nlm_tokenizer* tok, const char* toks_path,
                                             const char* text_out_path);

/* ---- models ------------------------------------------------------------- */

typedef struct nlm_model nlm_model;

NLM_API nlm_status nlm_model_open(const char* checkpoint_path, nlm_model** out);
NLM_API void nlm_model_close(nlm_model* model);
NLM_API uint32_t nlm_model_n_layers(const nlm_model* model);
NLM_API uint32_t nlm_model_d_model(const nlm_model* model);
NLM_API uint32_t nlm_model_vocab_size(const nlm_model* model);

/* ---- training ----------------------------------------------------------- */

typedef struct {
    double beta1;
    double beta2;
    double eps;
    double weight_decay;
    double base_lr;
    uint32_t batch_size;
    uint32_t max_epochs;
    uint32_t patience;
} nlm_hyper;

NLM_API void nlm_hyper_default(nlm_hyper* hyper);

/* Full training run driven by a JSON config naming model dims, hyper,
 * train/valid .toks paths, seed, and output checkpoint/history paths. */
NLM_API nlm_status nlm_train_config(const char* run_config_path);

/* Continued training with everything frozen except the embedding tensors.
 * hyper may be NULL for defaults. */
NLM_API nlm_status nlm_adapt(const char* checkpoint_path, const char* train_toks,
                             const char* valid_toks, const nlm_hyper* hyper, uint64_t seed,
                             const char* out_checkpoint, const char* out_history);

/* ---- scoring ------------------------------------------------------------ */

/* Layer-wise neural predictivity of a checkpoint against response data.
 * pooling: "last" | "mean"; split_mode: "shuffled" | "by-passage". */
NLM_API nlm_status nlm_score(const char* checkpoint_path, const char* stimuli_jsonl,
                             const char* responses_dir, const char* tokenizer_path,
                             const char* pooling, const char* split_mode, uint64_t split_seed,
                             double ridge, const char* report_out);

/* Exact rank-sum test plus Hodges-Lehmann shift between two score groups
 * (JSON files with "label" and "values"). Writes a TestResult JSON. */
NLM_API nlm_status nlm_compare(const char* a_scores_json, const char* b_scores_json,
                               const char* result_out);

/* ---- pipeline ----------------------------------------------------------- */

/* Executes a manifest end to end with hash-based resume. any_failed (may be
 * NULL) is set to 1 when some stage failed; details land in the ledger. */
NLM_API nlm_status nlm_pipeline_run(const char* manifest_path, unsigned workers,
                                    int* any_failed);

/* Synthetic fixture (corpus, stimuli, responses, tokenizer) from a spec. */
NLM_API nlm_status nlm_pipeline_fixture(const char* spec_json_path);

/* Result tables for a completed manifest. comparisons is a comma-separated
 * list of "condA:condB" pairs and may be NULL or empty. */
NLM_API nlm_status nlm_pipeline_report(const char* manifest_path, const char* comparisons,
                                       const char* csv_out, const char* json_out);

#ifdef __cplusplus
}
#endif

#endif /* NEUROLM_H */
