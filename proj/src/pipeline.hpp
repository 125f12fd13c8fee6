#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "encoding.hpp"
#include "trainer.hpp"

namespace nlm {

// One training condition of the experiment grid.
struct ConditionSpec {
    std::string name;
    std::string corpus_path;  // document JSONL; unused when train = false
    bool train = true;
    bool scramble = false;  // scramble tokens across the dataset before packing
    std::uint64_t scramble_seed = 0;
};

struct ExperimentManifest {
    std::string output_dir;
    std::vector<std::uint64_t> seeds;
    std::string tokenizer_path;
    ModelConfig model;  // vocab_size filled from the tokenizer
    OptimizerHyper hyper;
    double valid_fraction = 0.1;
    std::vector<ConditionSpec> conditions;
    std::optional<std::string> adaptation_corpus;  // embedding adaptation when set
    std::string stimuli_path;
    std::string responses_dir;
    ScoreConfig scoring;
    std::uint64_t token_budget = 0;  // 0 = no truncation
    std::vector<std::pair<std::string, std::string>> comparisons;
};

ExperimentManifest manifest_from_json_file(const std::string& path);

struct LedgerEntry {
    std::string condition;
    std::uint64_t seed = 0;
    std::string status;  // "complete" | "failed: ..."
    std::vector<std::string> artifacts;        // file paths
    std::vector<std::string> artifact_hashes;  // sha256, aligned with artifacts
    double wall_seconds = 0.0;
};

struct RunLedger {
    std::vector<LedgerEntry> entries;
    std::size_t stages_executed = 0;
    std::size_t stages_skipped = 0;
};

void save_ledger(const RunLedger& ledger, const std::string& path);
RunLedger load_ledger(const std::string& path);

// Executes corpus -> train -> adapt -> score for every condition x seed,
// skipping stages whose inputs and outputs already match the recorded
// hashes, then writes results.csv / results.json and ledger.json under
// output_dir. Throws on validation problems; per-stage failures are
// recorded in the ledger and reported via the return value.
RunLedger run_pipeline(const ExperimentManifest& manifest, unsigned workers = 1);

// Aggregates per-condition scores and pairwise tests into CSV + JSON.
// Pairs are (condition_a, condition_b) names; both must be complete.
void report_table(const ExperimentManifest& manifest, const RunLedger& ledger,
                  const std::vector<std::pair<std::string, std::string>>& comparisons,
                  const std::string& csv_path, const std::string& json_path);

// Per-seed best-layer scores for one condition and regime ("raw"|"adapted").
std::vector<double> condition_scores(const ExperimentManifest& manifest,
                                     const std::string& condition, const std::string& regime);

}  // namespace nlm
