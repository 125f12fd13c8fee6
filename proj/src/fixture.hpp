#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "model.hpp"

namespace nlm {

// Self-contained synthetic fixture: a nested-parenthesis corpus rendered as
// whitespace-separated words, stimulus sentences from the same grammar, and
// per-subject responses built as a seeded linear readout of a reference
// model's chosen layer plus Gaussian noise.
struct FixtureSpec {
    std::uint32_t vocab_types = 16;  // parenthesis types; total vocab <= 512
    double close_prob = 0.51;
    std::uint64_t corpus_tokens = 20000;
    std::uint32_t doc_length = 128;      // corpus tokens per document
    std::uint32_t n_stimuli = 120;       // <= 200
    std::uint32_t stimulus_length = 16;  // tokens per stimulus sentence
    std::uint32_t passage_size = 4;      // stimuli per passage
    std::uint32_t n_subjects = 3;
    std::uint32_t voxels = 40;
    std::uint32_t planted_layer = 1;
    double snr = 4.0;  // signal std / noise std; <= 0 means noiseless
    std::uint64_t seed = 1;
    // Layer activations come from this checkpoint when set, otherwise from a
    // fresh seeded init with the given desk-scale config.
    std::optional<std::string> reference_checkpoint;
    ModelConfig reference_config;
    std::string out_dir;
};

FixtureSpec fixture_spec_from_json_file(const std::string& path);

// Writes corpus.jsonl, stimuli.jsonl, tokenizer.json and responses/ under
// spec.out_dir. Deterministic: same spec and seed give identical bytes.
void make_fixture(const FixtureSpec& spec);

}  // namespace nlm
