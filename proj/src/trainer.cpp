#include "trainer.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "rng.hpp"

namespace nlm {

void validate_hyper(const OptimizerHyper& h) {
    if (h.beta1 < 0.0 || h.beta1 >= 1.0 || h.beta2 < 0.0 || h.beta2 >= 1.0)
        throw ConfigError("hyper: betas must be in [0, 1)");
    if (h.eps <= 0.0) throw ConfigError("hyper: eps must be > 0");
    if (h.base_lr <= 0.0) throw ConfigError("hyper: base_lr must be > 0");
    if (h.batch_size < 1) throw ConfigError("hyper: batch_size must be >= 1");
    if (h.max_epochs < 1) throw ConfigError("hyper: max_epochs must be >= 1");
}

OptimizerState init_optimizer(const Model& model) {
    OptimizerState s;
    for (const auto& [name, t] : model.params) {
        s.m[name] = Tensor::zeros(t.shape);
        s.v[name] = Tensor::zeros(t.shape);
    }
    return s;
}

double lr_at(std::uint64_t step, std::uint64_t total_steps, double base_lr) {
    if (total_steps < 1) throw DomainError("lr_at: total_steps must be >= 1");
    if (step > total_steps) throw DomainError("lr_at: step beyond total_steps");
    return base_lr * (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
}

namespace {

// Decay applies to matrices (weights, embeddings) only; layer-norm tensors
// and biases are 1-D and skipped.
bool decays(const Tensor& t) { return t.shape.size() >= 2; }

}  // namespace

void adamw_step(Model* model, const ParamMap& grads, OptimizerState* state,
                const OptimizerHyper& hyper, double lr, const FreezeMask& frozen) {
    const std::uint64_t step = ++state->step;
    const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(step));

    for (auto& [name, theta] : model->params) {
        if (frozen.contains(name)) continue;
        const auto git = grads.find(name);
        if (git == grads.end()) throw TrainError("missing gradient for " + name);
        const Tensor& g = git->second;
        Tensor& m = state->m[name];
        Tensor& v = state->v[name];
        const bool wd = decays(theta) && hyper.weight_decay > 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double gi = g.v[i];
            if (!std::isfinite(gi)) throw TrainError("non-finite gradient in tensor " + name);
            m.v[i] = hyper.beta1 * m.v[i] + (1.0 - hyper.beta1) * gi;
            v.v[i] = hyper.beta2 * v.v[i] + (1.0 - hyper.beta2) * gi * gi;
            const double mhat = m.v[i] / bc1;
            const double vhat = v.v[i] / bc2;
            theta.v[i] -= lr * mhat / (std::sqrt(vhat) + hyper.eps);
            if (wd) theta.v[i] -= lr * hyper.weight_decay * theta.v[i];
        }
    }
}

namespace {

double validation_loss(const Model& model, const PackedDataset& valid) {
    std::vector<std::vector<std::uint32_t>> all(valid.examples.begin(), valid.examples.end());
    return batch_loss(model, all);
}

}  // namespace

TrainResult train(const Model& initial, const PackedDataset& dataset, const PackedDataset& valid,
                  const OptimizerHyper& hyper, std::uint64_t seed, const FreezeMask& frozen) {
    validate_hyper(hyper);
    if (dataset.examples.empty() || valid.examples.empty())
        throw ConfigError("train: empty dataset");
    for (const std::string& name : frozen)
        if (!initial.params.contains(name)) throw ConfigError("train: unknown frozen tensor " + name);

    const std::size_t n = dataset.examples.size();
    const std::size_t batches_per_epoch = (n + hyper.batch_size - 1) / hyper.batch_size;
    const std::uint64_t total_steps =
        static_cast<std::uint64_t>(hyper.max_epochs) * batches_per_epoch;

    Model model = initial;
    OptimizerState state = init_optimizer(model);
    Rng shuffle_rng(seed);

    TrainResult result;
    result.initial_valid_loss = validation_loss(model, valid);
    result.best_valid_loss = result.initial_valid_loss;
    result.best_epoch = 0;
    result.model = model;  // epoch-0 checkpoint is a candidate

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    std::uint32_t epochs_since_best = 0;
    for (std::uint32_t epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(shuffle_rng.below(i + 1));
            std::swap(order[i], order[j]);
        }

        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            std::vector<std::vector<std::uint32_t>> batch;
            const std::size_t lo = b * hyper.batch_size;
            const std::size_t hi = std::min(n, lo + hyper.batch_size);
            for (std::size_t i = lo; i < hi; ++i) batch.push_back(dataset.examples[order[i]]);

            ParamMap grads;
            const double loss = loss_and_gradients(model, batch, &grads);
            epoch_loss += loss * static_cast<double>(hi - lo);
            const double lr = lr_at(state.step, total_steps, hyper.base_lr);
            adamw_step(&model, grads, &state, hyper, lr, frozen);
        }
        epoch_loss /= static_cast<double>(n);

        const double vloss = validation_loss(model, valid);
        result.history.push_back({epoch, epoch_loss, vloss});

        if (vloss < result.best_valid_loss) {
            result.best_valid_loss = vloss;
            result.best_epoch = epoch;
            result.model = model;
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
            if (epochs_since_best >= hyper.patience) break;
        }
    }
    result.steps_taken = state.step;
    return result;
}

FreezeMask non_embedding_mask(const Model& model) {
    FreezeMask mask;
    for (const auto& [name, t] : model.params)
        if (name != "tok_emb" && name != "pos_emb") mask.insert(name);
    return mask;
}

TrainResult adapt_embeddings(const Model& initial, const PackedDataset& dataset,
                             const PackedDataset& valid, const OptimizerHyper& hyper,
                             std::uint64_t seed) {
    return train(initial, dataset, valid, hyper, seed, non_embedding_mask(initial));
}

}  // namespace nlm
