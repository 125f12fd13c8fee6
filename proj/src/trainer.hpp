#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "corpusgen.hpp"
#include "model.hpp"

namespace nlm {

struct OptimizerHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
    double base_lr = 5e-5;
    std::uint32_t batch_size = 16;
    std::uint32_t max_epochs = 40;
    std::uint32_t patience = 5;
};

void validate_hyper(const OptimizerHyper& h);

struct OptimizerState {
    ParamMap m;  // first moments
    ParamMap v;  // second moments
    std::uint64_t step = 0;
};

OptimizerState init_optimizer(const Model& model);

// Parameter names excluded from updates (and from optimizer state advance).
using FreezeMask = std::set<std::string>;

// Linear decay to zero, no warmup.
double lr_at(std::uint64_t step, std::uint64_t total_steps, double base_lr);

// Decoupled-weight-decay Adam with bias correction. Weight decay skips
// layer-norm and bias tensors. Throws TrainError on non-finite gradients.
void adamw_step(Model* model, const ParamMap& grads, OptimizerState* state,
                const OptimizerHyper& hyper, double lr, const FreezeMask& frozen = {});

struct EpochRecord {
    std::uint32_t epoch = 0;
    double train_loss = 0.0;
    double valid_loss = 0.0;
};

struct TrainResult {
    Model model;  // best-validation checkpoint
    std::vector<EpochRecord> history;
    std::uint32_t best_epoch = 0;
    double best_valid_loss = 0.0;
    double initial_valid_loss = 0.0;  // before any update (epoch 0 baseline)
    std::uint64_t steps_taken = 0;
};

// Epoch loop with seeded shuffling, per-epoch validation, and patience-based
// early stopping; returns the best-validation checkpoint.
TrainResult train(const Model& initial, const PackedDataset& dataset, const PackedDataset& valid,
                  const OptimizerHyper& hyper, std::uint64_t seed, const FreezeMask& frozen = {});

// Same loop with everything frozen except the embedding tensors (token and
// positional); with tied embeddings the output head adapts too.
TrainResult adapt_embeddings(const Model& initial, const PackedDataset& dataset,
                             const PackedDataset& valid, const OptimizerHyper& hyper,
                             std::uint64_t seed);

FreezeMask non_embedding_mask(const Model& model);

}  // namespace nlm
