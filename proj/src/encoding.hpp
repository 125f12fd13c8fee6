#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "model.hpp"
#include "tokenizer.hpp"

namespace nlm {

struct Stimulus {
    std::string stimulus_id;
    std::string sentence;
    std::string passage_id;
    std::string experiment;  // "exp2" | "exp3"
};

struct StimulusSet {
    std::vector<Stimulus> items;
};

// One response matrix per subject, stimuli on the rows in StimulusSet order.
struct NeuroResponseSet {
    std::vector<std::string> subject_ids;
    std::vector<Eigen::MatrixXd> responses;
};

enum class SplitMode { Shuffled, ByPassage };
enum class Pooling { LastToken, Mean };

struct SplitSpec {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;
    SplitMode mode = SplitMode::Shuffled;
};

struct BrainScoreReport {
    std::vector<double> raw;         // per layer, median-over-voxels averaged over subjects
    std::vector<double> normalized;  // raw / ceiling
    double ceiling = 0.0;
    std::size_t best_layer = 0;  // argmax of normalized
    double best_score = 0.0;
    std::uint64_t seed = 0;
    std::string pooling;
    std::string split_mode;
};

// Per-layer stimulus representations: n_layers+1 matrices of n_stimuli x
// d_model, pooled over sequence positions.
std::vector<Eigen::MatrixXd> represent(const Model& model, const StimulusSet& stimuli,
                                       const Tokenizer& tokenizer, Pooling pooling);

// |train| = round(0.8 n). ByPassage keeps whole passages on one side,
// filling the train side in seeded passage order until the target is met.
SplitSpec split_80_20(std::size_t n, std::uint64_t seed, SplitMode mode,
                      const std::vector<std::string>& passage_ids = {});

// Least squares with an unpenalized bias column. ridge = 0 gives the
// minimum-norm solution. Returns (d+1) x v weights, bias row last.
Eigen::MatrixXd fit_linear_map(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double ridge);

// Sample Pearson r; nullopt when either input has zero variance.
std::optional<double> pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Fit on train rows, predict test rows, per-voxel Pearson on the test set,
// median over defined voxels. Zero-test-variance voxels are dropped.
double raw_predictivity(const Eigen::MatrixXd& layer_repr, const Eigen::MatrixXd& responses,
                        const SplitSpec& split, double ridge);

// Leave-one-subject-out: predicts each subject from the mean response of
// the others with the same fit/predict/median pipeline; mean over subjects.
double estimate_ceiling(const NeuroResponseSet& responses, const SplitSpec& split, double ridge);

struct ScoreConfig {
    Pooling pooling = Pooling::LastToken;
    SplitMode split_mode = SplitMode::Shuffled;
    std::uint64_t split_seed = 0;
    double ridge = 0.0;
};

BrainScoreReport brain_score(const Model& model, const StimulusSet& stimuli,
                             const NeuroResponseSet& responses, const Tokenizer& tokenizer,
                             const ScoreConfig& config);

struct SeedAggregate {
    double mean = 0.0;
    double sd = 0.0;
    bool single_sample = false;
};

// Mean and sample sd of the per-seed best-layer scores.
SeedAggregate aggregate_seeds(const std::vector<BrainScoreReport>& reports);

// Interchange formats.
StimulusSet load_stimuli_jsonl(const std::string& path);
void save_stimuli_jsonl(const StimulusSet& stimuli, const std::string& path);
NeuroResponseSet load_responses(const std::string& dir);  // metadata.json + per-subject CSVs
void save_responses(const NeuroResponseSet& responses, const std::string& dir);
void save_report(const BrainScoreReport& report, const std::string& path,
                 const std::string& checkpoint_hash, const std::string& stimuli_hash);
BrainScoreReport load_report(const std::string& path);

}  // namespace nlm
