#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "rng.hpp"

using namespace nlm;

namespace {

ModelConfig tiny_config(std::uint64_t seed) {
    ModelConfig c;
    c.vocab_size = 7;
    c.context_length = 6;
    c.n_layers = 2;
    c.n_heads = 2;
    c.d_model = 4;
    c.d_mlp = 8;
    c.seed = seed;
    return c;
}

std::size_t total_params(const Model& m) {
    std::size_t n = 0;
    for (const auto& [name, t] : m.params) n += t.v.size();
    return n;
}

std::vector<std::uint32_t> random_tokens(Rng& rng, std::size_t len, std::uint32_t vocab) {
    std::vector<std::uint32_t> toks(len);
    for (auto& t : toks) t = static_cast<std::uint32_t>(rng.below(vocab));
    return toks;
}

}  // namespace

TEST_CASE("init is deterministic per seed and seeds differ") {
    const auto a = init_model(tiny_config(1));
    const auto b = init_model(tiny_config(1));
    const auto c = init_model(tiny_config(2));
    REQUIRE(a.params.size() == b.params.size());
    for (const auto& [name, t] : a.params) CHECK(t.v == b.params.at(name).v);
    bool any_diff = false;
    for (const auto& [name, t] : a.params)
        if (t.v != c.params.at(name).v) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("closed-form parameter count for the degenerate config") {
    // No blocks: token emb 3x2, pos emb 2x2, final LN gain+bias (2+2) = 14.
    ModelConfig c;
    c.vocab_size = 3;
    c.context_length = 2;
    c.n_layers = 0;
    c.n_heads = 1;
    c.d_model = 2;
    c.d_mlp = 4;
    const auto m = init_model(c);
    CHECK(total_params(m) == 14);
}

TEST_CASE("full parameter count matches a closed-form expression") {
    const auto cfg = tiny_config(0);
    const auto m = init_model(cfg);
    const std::size_t d = cfg.d_model, f = cfg.d_mlp, V = cfg.vocab_size,
                      T = cfg.context_length, L = cfg.n_layers;
    // Per block: 2 LN (2d each), qkv+out projections (4d^2 + 4d), MLP
    // (d*f + f + f*d + d).
    const std::size_t per_block = 4 * d + 4 * d * d + 4 * d + 2 * d * f + f + d;
    CHECK(total_params(m) == V * d + T * d + L * per_block + 2 * d);
}

TEST_CASE("init rejects invalid shape constraints") {
    auto c = tiny_config(0);
    c.d_model = 5;  // not divisible by n_heads=2
    CHECK_THROWS_AS(init_model(c), ConfigError);
    c = tiny_config(0);
    c.vocab_size = 0;
    CHECK_THROWS_AS(init_model(c), ConfigError);
}

TEST_CASE("forward shape contract and activation record size") {
    const auto m = init_model(tiny_config(3));
    Rng rng(10);
    const auto toks = random_tokens(rng, 3, m.config.vocab_size);
    const auto out = forward(m, toks);
    CHECK(out.logits.size() == 3 * m.config.vocab_size);
    CHECK(out.activations.layers.size() == m.config.n_layers + 1);
    for (const auto& layer : out.activations.layers)
        CHECK(layer.size() == 3 * m.config.d_model);
}

TEST_CASE("forward validates inputs") {
    const auto m = init_model(tiny_config(3));
    std::vector<std::uint32_t> overlong(m.config.context_length + 1, 0);
    CHECK_THROWS_AS(forward(m, overlong), InputError);
    std::vector<std::uint32_t> oob{m.config.vocab_size};
    CHECK_THROWS_AS(forward(m, oob), InputError);
}

TEST_CASE("causality: future tokens cannot affect earlier logits") {
    const auto m = init_model(tiny_config(4));
    Rng rng(20);
    for (int trial = 0; trial < 5; ++trial) {
        auto toks = random_tokens(rng, 5, m.config.vocab_size);
        const auto base = forward(m, toks);
        auto changed = toks;
        changed.back() = (changed.back() + 1) % m.config.vocab_size;
        const auto alt = forward(m, changed);
        // Logits at every position before the change are identical.
        const std::size_t V = m.config.vocab_size;
        for (std::size_t t = 0; t + 1 < toks.size(); ++t)
            for (std::size_t v = 0; v < V; ++v)
                CHECK(base.logits[t * V + v] == alt.logits[t * V + v]);
    }
}

TEST_CASE("zero weights give zero logits and uniform loss ln V") {
    auto m = init_model(tiny_config(5));
    for (auto& [name, t] : m.params) std::fill(t.v.begin(), t.v.end(), 0.0);
    // Layer norm of a zero row is zero, so gains being zero too keeps
    // everything at zero through the stack.
    const std::vector<std::uint32_t> toks{1, 2, 3};
    const auto out = forward(m, toks);
    for (double x : out.logits) CHECK(x == 0.0);

    const std::vector<std::uint32_t> targets{2, 3, 4};
    const double loss = cross_entropy(out.logits, targets, m.config.vocab_size);
    CHECK(loss == doctest::Approx(std::log(7.0)).epsilon(1e-12));
}

TEST_CASE("cross entropy hand-computed two-class example") {
    // logits [0, ln 3], target class 1: p = 3/4, loss = ln(4/3).
    const std::vector<double> logits{0.0, std::log(3.0)};
    const std::vector<std::uint32_t> targets{1};
    const double loss = cross_entropy(logits, targets, 2);
    CHECK(loss == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));
    CHECK(loss == doctest::Approx(0.287682).epsilon(1e-5));
}

TEST_CASE("cross entropy falls monotonically as the correct margin grows") {
    double prev = 1e9;
    for (double margin = 0.0; margin <= 20.0; margin += 2.0) {
        const std::vector<double> logits{0.0, margin};
        const std::vector<std::uint32_t> targets{1};
        const double loss = cross_entropy(logits, targets, 2);
        CHECK(loss < prev);
        prev = loss;
    }
    CHECK(prev < 1e-8);
}

TEST_CASE("gradients match central finite differences on 3 seeds") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        auto m = init_model(tiny_config(seed));
        Rng rng(seed * 7 + 1);
        std::vector<std::vector<std::uint32_t>> batch{
            random_tokens(rng, 4, m.config.vocab_size),
            random_tokens(rng, 4, m.config.vocab_size)};

        ParamMap grads;
        loss_and_gradients(m, batch, &grads);

        const double h = 1e-4;
        double max_rel = 0.0;
        for (auto& [name, tensor] : m.params) {
            auto& g = grads.at(name);
            // Probe a deterministic subset of entries per tensor to keep
            // runtime sane while touching every tensor.
            const std::size_t stride = std::max<std::size_t>(1, tensor.v.size() / 5);
            for (std::size_t i = 0; i < tensor.v.size(); i += stride) {
                const double orig = tensor.v[i];
                tensor.v[i] = orig + h;
                const double lp = batch_loss(m, batch);
                tensor.v[i] = orig - h;
                const double lm = batch_loss(m, batch);
                tensor.v[i] = orig;
                const double fd = (lp - lm) / (2 * h);
                const double denom = std::max({std::abs(fd), std::abs(g.v[i]), 1e-8});
                max_rel = std::max(max_rel, std::abs(fd - g.v[i]) / denom);
            }
        }
        CHECK(max_rel <= 1e-4);
    }
}

TEST_CASE("untying the head changes the token-embedding gradient by the head term") {
    auto cfg = tiny_config(21);
    auto tied = init_model(cfg);
    cfg.tie_embeddings = false;
    auto untied = init_model(cfg);
    // Same weights everywhere; free head copies the token embedding so both
    // models compute identical functions.
    for (auto& [name, t] : tied.params) untied.params.at(name).v = t.v;
    untied.params.at("head").v = tied.params.at("tok_emb").v;

    std::vector<std::vector<std::uint32_t>> batch{{1, 2, 3, 4}};
    ParamMap g_tied, g_untied;
    const double l1 = loss_and_gradients(tied, batch, &g_tied);
    const double l2 = loss_and_gradients(untied, batch, &g_untied);
    CHECK(l1 == doctest::Approx(l2).epsilon(1e-12));

    const auto& gt = g_tied.at("tok_emb").v;
    const auto& gu = g_untied.at("tok_emb").v;
    const auto& gh = g_untied.at("head").v;
    REQUIRE(gt.size() == gu.size());
    REQUIRE(gt.size() == gh.size());
    for (std::size_t i = 0; i < gt.size(); ++i)
        CHECK(gt[i] == doctest::Approx(gu[i] + gh[i]).epsilon(1e-10));
}

TEST_CASE("checkpoint roundtrip preserves config and float32 weights") {
    const auto m = init_model(tiny_config(30));
    const std::string path = "/tmp/nlm_test_model.bin";
    save_checkpoint(m, path);
    const auto r = load_checkpoint(path);
    CHECK(r.config.vocab_size == m.config.vocab_size);
    CHECK(r.config.n_layers == m.config.n_layers);
    CHECK(r.config.d_model == m.config.d_model);
    CHECK(r.config.tie_embeddings == m.config.tie_embeddings);
    REQUIRE(r.params.size() == m.params.size());
    for (const auto& [name, t] : m.params) {
        const auto& rt = r.params.at(name);
        REQUIRE(rt.v.size() == t.v.size());
        for (std::size_t i = 0; i < t.v.size(); ++i)
            CHECK(rt.v[i] == doctest::Approx(t.v[i]).epsilon(1e-6));
    }
    // Saving the loaded model again is byte-stable.
    const std::string path2 = "/tmp/nlm_test_model2.bin";
    save_checkpoint(r, path2);
    const auto r2 = load_checkpoint(path2);
    for (const auto& [name, t] : r.params) CHECK(r2.params.at(name).v == t.v);
    std::remove(path.c_str());
    std::remove(path2.c_str());
}
