#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace nlm {

struct ModelConfig {
    std::uint32_t vocab_size = 0;
    std::uint32_t context_length = 1024;
    std::uint32_t n_layers = 2;
    std::uint32_t n_heads = 2;
    std::uint32_t d_model = 32;
    std::uint32_t d_mlp = 128;
    bool tie_embeddings = true;
    std::uint64_t seed = 0;
};

struct Model {
    ModelConfig config;
    ParamMap params;
};

// Seeded Gaussian init (std 0.02) for weights and embeddings, zeros for
// biases, ones for layer-norm gains. Bit-identical for equal seeds.
Model init_model(const ModelConfig& config);

// Per-layer activations: entry 0 is the embedding output, entry i the
// output of block i. Each entry is seq_len x d_model row-major.
struct ActivationRecord {
    std::vector<std::vector<double>> layers;
    std::size_t seq_len = 0;
    std::size_t d_model = 0;
};

struct ForwardResult {
    std::vector<double> logits;  // seq_len x vocab_size row-major
    ActivationRecord activations;
};

// Pre-layer-norm decoder stack with causal self-attention and learned
// absolute positional embeddings.
ForwardResult forward(const Model& model, std::span<const std::uint32_t> tokens);

// Mean negative log softmax probability of targets[t] at position t.
// logits is seq_len x vocab_size; targets has seq_len entries.
double cross_entropy(std::span<const double> logits, std::span<const std::uint32_t> targets,
                     std::size_t vocab_size);

// Mean next-token loss over the batch and its exact reverse-mode gradients.
// Every sequence must have length >= 2; targets are the sequences shifted
// by one position. Tied embeddings accumulate both the input-embedding and
// head contributions into tok_emb.
double loss_and_gradients(const Model& model,
                          const std::vector<std::vector<std::uint32_t>>& batch, ParamMap* grads);

// Mean next-token loss only (no gradients).
double batch_loss(const Model& model, const std::vector<std::vector<std::uint32_t>>& batch);

// Checkpoint: magic "NLMC", u32 LE version, u64 LE header length, JSON
// header (config + tensor manifest with name/shape/byte offset), then a raw
// little-endian float32 blob in manifest order.
void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace nlm
