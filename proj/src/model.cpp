#include "model.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "errors.hpp"
#include "rng.hpp"

namespace nlm {

namespace {

using json = nlohmann::json;

constexpr double kLnEps = 1e-12;

void validate_config(const ModelConfig& c) {
    if (c.vocab_size < 1 || c.context_length < 1 || c.d_model < 1 || c.n_heads < 1 || c.d_mlp < 1)
        throw ConfigError("model: all dimensions must be >= 1");
    if (c.d_model % c.n_heads != 0) throw ConfigError("model: d_model must be divisible by n_heads");
}

std::string layer_prefix(std::uint32_t i) { return "layer" + std::to_string(i) + "."; }

// y = x W + b; x is T x din, W is din x dout.
void linear(const std::vector<double>& x, std::size_t t_len, std::size_t din, const Tensor& w,
            const Tensor& b, std::vector<double>* y) {
    const std::size_t dout = w.shape[1];
    y->assign(t_len * dout, 0.0);
    for (std::size_t t = 0; t < t_len; ++t) {
        for (std::size_t i = 0; i < din; ++i) {
            const double xv = x[t * din + i];
            if (xv == 0.0) continue;
            const double* wrow = &w.v[i * dout];
            double* yrow = &(*y)[t * dout];
            for (std::size_t j = 0; j < dout; ++j) yrow[j] += xv * wrow[j];
        }
        for (std::size_t j = 0; j < dout; ++j) (*y)[t * dout + j] += b.v[j];
    }
}

// Backward of linear: accumulates dw, db; writes dx (overwrite).
void linear_backward(const std::vector<double>& x, const std::vector<double>& dy, std::size_t t_len,
                     std::size_t din, const Tensor& w, Tensor* dw, Tensor* db,
                     std::vector<double>* dx) {
    const std::size_t dout = w.shape[1];
    dx->assign(t_len * din, 0.0);
    for (std::size_t t = 0; t < t_len; ++t) {
        const double* dyrow = &dy[t * dout];
        for (std::size_t j = 0; j < dout; ++j) db->v[j] += dyrow[j];
        for (std::size_t i = 0; i < din; ++i) {
            const double xv = x[t * din + i];
            double* dwrow = &dw->v[i * dout];
            double acc = 0.0;
            const double* wrow = &w.v[i * dout];
            for (std::size_t j = 0; j < dout; ++j) {
                dwrow[j] += xv * dyrow[j];
                acc += wrow[j] * dyrow[j];
            }
            (*dx)[t * din + i] = acc;
        }
    }
}

struct LnCache {
    std::vector<double> xhat;  // T x d
    std::vector<double> rstd;  // T
    std::vector<double> out;   // T x d
};

void layer_norm(const std::vector<double>& x, std::size_t t_len, std::size_t d, const Tensor& gain,
                const Tensor& bias, LnCache* cache) {
    cache->xhat.resize(t_len * d);
    cache->rstd.resize(t_len);
    cache->out.resize(t_len * d);
    for (std::size_t t = 0; t < t_len; ++t) {
        const double* row = &x[t * d];
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) mean += row[j];
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double c = row[j] - mean;
            var += c * c;
        }
        var /= static_cast<double>(d);
        const double rstd = 1.0 / std::sqrt(var + kLnEps);
        cache->rstd[t] = rstd;
        for (std::size_t j = 0; j < d; ++j) {
            const double xh = (row[j] - mean) * rstd;
            cache->xhat[t * d + j] = xh;
            cache->out[t * d + j] = xh * gain.v[j] + bias.v[j];
        }
    }
}

void layer_norm_backward(const std::vector<double>& dout, const LnCache& cache, std::size_t t_len,
                         std::size_t d, const Tensor& gain, Tensor* dgain, Tensor* dbias,
                         std::vector<double>* dx) {
    dx->assign(t_len * d, 0.0);
    for (std::size_t t = 0; t < t_len; ++t) {
        const double* dorow = &dout[t * d];
        const double* xhrow = &cache.xhat[t * d];
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            dgain->v[j] += dorow[j] * xhrow[j];
            dbias->v[j] += dorow[j];
            const double dxh = dorow[j] * gain.v[j];
            m1 += dxh;
            m2 += dxh * xhrow[j];
        }
        m1 /= static_cast<double>(d);
        m2 /= static_cast<double>(d);
        const double rstd = cache.rstd[t];
        for (std::size_t j = 0; j < d; ++j) {
            const double dxh = dorow[j] * gain.v[j];
            (*dx)[t * d + j] = rstd * (dxh - m1 - xhrow[j] * m2);
        }
    }
}

double gelu(double u) { return 0.5 * u * (1.0 + std::erf(u / std::numbers::sqrt2)); }

double gelu_grad(double u) {
    const double cdf = 0.5 * (1.0 + std::erf(u / std::numbers::sqrt2));
    const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    return cdf + u * pdf;
}

struct LayerCache {
    std::vector<double> x_in;
    LnCache ln1;
    std::vector<double> q, k, v;     // T x d each
    std::vector<double> probs;       // H x T x T attention weights
    std::vector<double> att_concat;  // T x d, before the output projection
    std::vector<double> x_mid;       // after attention residual
    LnCache ln2;
    std::vector<double> mlp_pre;  // T x d_mlp
    std::vector<double> mlp_act;  // T x d_mlp
    std::vector<double> x_out;
};

struct SeqCache {
    std::vector<LayerCache> layers;
    LnCache final_ln;
    std::vector<double> logits;  // T x V
};

const Tensor& P(const Model& m, const std::string& name) {
    const auto it = m.params.find(name);
    if (it == m.params.end()) throw InputError("missing parameter: " + name);
    return it->second;
}

// Forward for one sequence; fills cache (for backward) and acts.
void forward_seq(const Model& model, std::span<const std::uint32_t> tokens, SeqCache* cache,
                 ActivationRecord* acts) {
    const auto& c = model.config;
    const std::size_t t_len = tokens.size();
    const std::size_t d = c.d_model;
    if (t_len == 0) throw InputError("forward: empty sequence");
    if (t_len > c.context_length) throw InputError("forward: sequence exceeds context_length");
    for (std::uint32_t id : tokens)
        if (id >= c.vocab_size) throw InputError("forward: token id out of range");

    const Tensor& tok_emb = P(model, "tok_emb");
    const Tensor& pos_emb = P(model, "pos_emb");

    std::vector<double> x(t_len * d);
    for (std::size_t t = 0; t < t_len; ++t)
        for (std::size_t j = 0; j < d; ++j)
            x[t * d + j] = tok_emb.v[tokens[t] * d + j] + pos_emb.v[t * d + j];

    acts->seq_len = t_len;
    acts->d_model = d;
    acts->layers.clear();
    acts->layers.push_back(x);

    cache->layers.resize(c.n_layers);
    const std::size_t n_heads = c.n_heads;
    const std::size_t dh = d / n_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    for (std::uint32_t li = 0; li < c.n_layers; ++li) {
        LayerCache& lc = cache->layers[li];
        const std::string pre = layer_prefix(li);
        lc.x_in = x;

        layer_norm(x, t_len, d, P(model, pre + "ln1.gain"), P(model, pre + "ln1.bias"), &lc.ln1);
        linear(lc.ln1.out, t_len, d, P(model, pre + "attn.wq"), P(model, pre + "attn.bq"), &lc.q);
        linear(lc.ln1.out, t_len, d, P(model, pre + "attn.wk"), P(model, pre + "attn.bk"), &lc.k);
        linear(lc.ln1.out, t_len, d, P(model, pre + "attn.wv"), P(model, pre + "attn.bv"), &lc.v);

        lc.probs.assign(n_heads * t_len * t_len, 0.0);
        lc.att_concat.assign(t_len * d, 0.0);
        for (std::size_t h = 0; h < n_heads; ++h) {
            const std::size_t off = h * dh;
            for (std::size_t i = 0; i < t_len; ++i) {
                double* prow = &lc.probs[(h * t_len + i) * t_len];
                double maxs = -std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j <= i; ++j) {
                    double s = 0.0;
                    for (std::size_t e = 0; e < dh; ++e)
                        s += lc.q[i * d + off + e] * lc.k[j * d + off + e];
                    s *= scale;
                    prow[j] = s;
                    if (s > maxs) maxs = s;
                }
                double denom = 0.0;
                for (std::size_t j = 0; j <= i; ++j) {
                    prow[j] = std::exp(prow[j] - maxs);
                    denom += prow[j];
                }
                for (std::size_t j = 0; j <= i; ++j) {
                    prow[j] /= denom;
                    for (std::size_t e = 0; e < dh; ++e)
                        lc.att_concat[i * d + off + e] += prow[j] * lc.v[j * d + off + e];
                }
            }
        }

        std::vector<double> att_out;
        linear(lc.att_concat, t_len, d, P(model, pre + "attn.wo"), P(model, pre + "attn.bo"),
               &att_out);
        lc.x_mid.resize(t_len * d);
        for (std::size_t i = 0; i < t_len * d; ++i) lc.x_mid[i] = x[i] + att_out[i];

        layer_norm(lc.x_mid, t_len, d, P(model, pre + "ln2.gain"), P(model, pre + "ln2.bias"),
                   &lc.ln2);
        linear(lc.ln2.out, t_len, d, P(model, pre + "mlp.w1"), P(model, pre + "mlp.b1"),
               &lc.mlp_pre);
        lc.mlp_act.resize(lc.mlp_pre.size());
        for (std::size_t i = 0; i < lc.mlp_pre.size(); ++i) lc.mlp_act[i] = gelu(lc.mlp_pre[i]);
        std::vector<double> mlp_out;
        linear(lc.mlp_act, t_len, c.d_mlp, P(model, pre + "mlp.w2"), P(model, pre + "mlp.b2"),
               &mlp_out);
        lc.x_out.resize(t_len * d);
        for (std::size_t i = 0; i < t_len * d; ++i) lc.x_out[i] = lc.x_mid[i] + mlp_out[i];

        x = lc.x_out;
        acts->layers.push_back(x);
    }

    layer_norm(x, t_len, d, P(model, "final_ln.gain"), P(model, "final_ln.bias"),
               &cache->final_ln);

    const Tensor& head = model.config.tie_embeddings ? tok_emb : P(model, "head");
    const std::size_t v_size = c.vocab_size;
    cache->logits.assign(t_len * v_size, 0.0);
    for (std::size_t t = 0; t < t_len; ++t)
        for (std::size_t w = 0; w < v_size; ++w) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j)
                s += cache->final_ln.out[t * d + j] * head.v[w * d + j];
            cache->logits[t * v_size + w] = s;
        }
}

// Backward for one sequence given dlogits; accumulates into grads.
void backward_seq(const Model& model, std::span<const std::uint32_t> tokens, const SeqCache& cache,
                  const std::vector<double>& dlogits, ParamMap* grads) {
    const auto& c = model.config;
    const std::size_t t_len = tokens.size();
    const std::size_t d = c.d_model;
    const std::size_t v_size = c.vocab_size;
    const std::size_t n_heads = c.n_heads;
    const std::size_t dh = d / n_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    const Tensor& tok_emb = P(model, "tok_emb");
    const Tensor& head = c.tie_embeddings ? tok_emb : P(model, "head");
    Tensor& dhead = c.tie_embeddings ? (*grads)["tok_emb"] : (*grads)["head"];

    // Head: logits = final_ln.out x head^T.
    std::vector<double> dfinal(t_len * d, 0.0);
    for (std::size_t t = 0; t < t_len; ++t) {
        const double* dlrow = &dlogits[t * v_size];
        const double* frow = &cache.final_ln.out[t * d];
        for (std::size_t w = 0; w < v_size; ++w) {
            const double g = dlrow[w];
            if (g == 0.0) continue;
            double* dhrow = &dhead.v[w * d];
            const double* hrow = &head.v[w * d];
            for (std::size_t j = 0; j < d; ++j) {
                dhrow[j] += g * frow[j];
                dfinal[t * d + j] += g * hrow[j];
            }
        }
    }

    std::vector<double> dx;
    layer_norm_backward(dfinal, cache.final_ln, t_len, d, P(model, "final_ln.gain"),
                        &(*grads)["final_ln.gain"], &(*grads)["final_ln.bias"], &dx);

    for (std::uint32_t li = c.n_layers; li-- > 0;) {
        const LayerCache& lc = cache.layers[li];
        const std::string pre = layer_prefix(li);

        // MLP path: x_out = x_mid + mlp(ln2(x_mid)).
        std::vector<double> dact;
        linear_backward(lc.mlp_act, dx, t_len, c.d_mlp, P(model, pre + "mlp.w2"),
                        &(*grads)[pre + "mlp.w2"], &(*grads)[pre + "mlp.b2"], &dact);
        std::vector<double> dpre(dact.size());
        for (std::size_t i = 0; i < dact.size(); ++i) dpre[i] = dact[i] * gelu_grad(lc.mlp_pre[i]);
        std::vector<double> dln2out;
        linear_backward(lc.ln2.out, dpre, t_len, d, P(model, pre + "mlp.w1"),
                        &(*grads)[pre + "mlp.w1"], &(*grads)[pre + "mlp.b1"], &dln2out);
        std::vector<double> dmid_ln;
        layer_norm_backward(dln2out, lc.ln2, t_len, d, P(model, pre + "ln2.gain"),
                            &(*grads)[pre + "ln2.gain"], &(*grads)[pre + "ln2.bias"], &dmid_ln);
        std::vector<double> dmid(t_len * d);
        for (std::size_t i = 0; i < t_len * d; ++i) dmid[i] = dx[i] + dmid_ln[i];

        // Attention path: x_mid = x_in + wo(att_concat).
        std::vector<double> datt_concat;
        linear_backward(lc.att_concat, dmid, t_len, d, P(model, pre + "attn.wo"),
                        &(*grads)[pre + "attn.wo"], &(*grads)[pre + "attn.bo"], &datt_concat);

        std::vector<double> dq(t_len * d, 0.0), dk(t_len * d, 0.0), dv(t_len * d, 0.0);
        for (std::size_t h = 0; h < n_heads; ++h) {
            const std::size_t off = h * dh;
            for (std::size_t i = 0; i < t_len; ++i) {
                const double* prow = &lc.probs[(h * t_len + i) * t_len];
                const double* dctx = &datt_concat[i * d + off];
                // dP and the softmax Jacobian, restricted to j <= i.
                double dot = 0.0;
                std::vector<double> dp(i + 1);
                for (std::size_t j = 0; j <= i; ++j) {
                    double s = 0.0;
                    for (std::size_t e = 0; e < dh; ++e) s += dctx[e] * lc.v[j * d + off + e];
                    dp[j] = s;
                    dot += s * prow[j];
                    for (std::size_t e = 0; e < dh; ++e)
                        dv[j * d + off + e] += prow[j] * dctx[e];
                }
                for (std::size_t j = 0; j <= i; ++j) {
                    const double ds = prow[j] * (dp[j] - dot) * scale;
                    for (std::size_t e = 0; e < dh; ++e) {
                        dq[i * d + off + e] += ds * lc.k[j * d + off + e];
                        dk[j * d + off + e] += ds * lc.q[i * d + off + e];
                    }
                }
            }
        }

        std::vector<double> dln1out(t_len * d, 0.0), tmp;
        linear_backward(lc.ln1.out, dq, t_len, d, P(model, pre + "attn.wq"),
                        &(*grads)[pre + "attn.wq"], &(*grads)[pre + "attn.bq"], &tmp);
        for (std::size_t i = 0; i < dln1out.size(); ++i) dln1out[i] += tmp[i];
        linear_backward(lc.ln1.out, dk, t_len, d, P(model, pre + "attn.wk"),
                        &(*grads)[pre + "attn.wk"], &(*grads)[pre + "attn.bk"], &tmp);
        for (std::size_t i = 0; i < dln1out.size(); ++i) dln1out[i] += tmp[i];
        linear_backward(lc.ln1.out, dv, t_len, d, P(model, pre + "attn.wv"),
                        &(*grads)[pre + "attn.wv"], &(*grads)[pre + "attn.bv"], &tmp);
        for (std::size_t i = 0; i < dln1out.size(); ++i) dln1out[i] += tmp[i];

        std::vector<double> din_ln;
        layer_norm_backward(dln1out, lc.ln1, t_len, d, P(model, pre + "ln1.gain"),
                            &(*grads)[pre + "ln1.gain"], &(*grads)[pre + "ln1.bias"], &din_ln);
        dx.resize(t_len * d);
        for (std::size_t i = 0; i < t_len * d; ++i) dx[i] = dmid[i] + din_ln[i];
    }

    Tensor& dtok = (*grads)["tok_emb"];
    Tensor& dpos = (*grads)["pos_emb"];
    for (std::size_t t = 0; t < t_len; ++t)
        for (std::size_t j = 0; j < d; ++j) {
            dtok.v[tokens[t] * d + j] += dx[t * d + j];
            dpos.v[t * d + j] += dx[t * d + j];
        }
}

ParamMap zero_like(const ParamMap& params) {
    ParamMap grads;
    for (const auto& [name, t] : params) grads[name] = Tensor::zeros(t.shape);
    return grads;
}

}  // namespace

Model init_model(const ModelConfig& config) {
    validate_config(config);
    Model m;
    m.config = config;
    Rng rng(config.seed);

    const std::size_t d = config.d_model;
    const std::size_t dm = config.d_mlp;

    // Creation order is fixed so a given seed always yields the same bytes.
    const auto gauss = [&](Tensor& t) {
        for (double& x : t.v) x = 0.02 * rng.gaussian();
    };
    const auto ones = [](Tensor& t) {
        for (double& x : t.v) x = 1.0;
    };

    auto& tok = m.params["tok_emb"] = Tensor::zeros({config.vocab_size, d});
    gauss(tok);
    auto& pos = m.params["pos_emb"] = Tensor::zeros({config.context_length, d});
    gauss(pos);
    for (std::uint32_t li = 0; li < config.n_layers; ++li) {
        const std::string pre = layer_prefix(li);
        ones(m.params[pre + "ln1.gain"] = Tensor::zeros({d}));
        m.params[pre + "ln1.bias"] = Tensor::zeros({d});
        gauss(m.params[pre + "attn.wq"] = Tensor::zeros({d, d}));
        m.params[pre + "attn.bq"] = Tensor::zeros({d});
        gauss(m.params[pre + "attn.wk"] = Tensor::zeros({d, d}));
        m.params[pre + "attn.bk"] = Tensor::zeros({d});
        gauss(m.params[pre + "attn.wv"] = Tensor::zeros({d, d}));
        m.params[pre + "attn.bv"] = Tensor::zeros({d});
        gauss(m.params[pre + "attn.wo"] = Tensor::zeros({d, d}));
        m.params[pre + "attn.bo"] = Tensor::zeros({d});
        ones(m.params[pre + "ln2.gain"] = Tensor::zeros({d}));
        m.params[pre + "ln2.bias"] = Tensor::zeros({d});
        gauss(m.params[pre + "mlp.w1"] = Tensor::zeros({d, dm}));
        m.params[pre + "mlp.b1"] = Tensor::zeros({dm});
        gauss(m.params[pre + "mlp.w2"] = Tensor::zeros({dm, d}));
        m.params[pre + "mlp.b2"] = Tensor::zeros({d});
    }
    ones(m.params["final_ln.gain"] = Tensor::zeros({d}));
    m.params["final_ln.bias"] = Tensor::zeros({d});
    if (!config.tie_embeddings) gauss(m.params["head"] = Tensor::zeros({config.vocab_size, d}));
    return m;
}

ForwardResult forward(const Model& model, std::span<const std::uint32_t> tokens) {
    SeqCache cache;
    ForwardResult res;
    forward_seq(model, tokens, &cache, &res.activations);
    res.logits = std::move(cache.logits);
    return res;
}

double cross_entropy(std::span<const double> logits, std::span<const std::uint32_t> targets,
                     std::size_t vocab_size) {
    if (targets.empty() || logits.size() != targets.size() * vocab_size)
        throw InputError("cross_entropy: shape mismatch");
    double total = 0.0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        if (targets[t] >= vocab_size) throw InputError("cross_entropy: target out of range");
        const double* row = &logits[t * vocab_size];
        double maxv = row[0];
        for (std::size_t w = 1; w < vocab_size; ++w) maxv = std::max(maxv, row[w]);
        double denom = 0.0;
        for (std::size_t w = 0; w < vocab_size; ++w) denom += std::exp(row[w] - maxv);
        total += std::log(denom) - (row[targets[t]] - maxv);
    }
    return total / static_cast<double>(targets.size());
}

double loss_and_gradients(const Model& model,
                          const std::vector<std::vector<std::uint32_t>>& batch, ParamMap* grads) {
    if (batch.empty()) throw InputError("loss_and_gradients: empty batch");
    *grads = zero_like(model.params);
    const std::size_t v_size = model.config.vocab_size;

    std::size_t total_positions = 0;
    for (const auto& seq : batch) {
        if (seq.size() < 2) throw InputError("loss_and_gradients: sequences must have length >= 2");
        total_positions += seq.size() - 1;
    }

    double total_loss = 0.0;
    for (const auto& seq : batch) {
        SeqCache cache;
        ActivationRecord acts;
        forward_seq(model, seq, &cache, &acts);
        const std::size_t t_len = seq.size();

        std::vector<double> dlogits(t_len * v_size, 0.0);
        for (std::size_t t = 0; t + 1 < t_len; ++t) {
            const double* row = &cache.logits[t * v_size];
            double maxv = row[0];
            for (std::size_t w = 1; w < v_size; ++w) maxv = std::max(maxv, row[w]);
            double denom = 0.0;
            for (std::size_t w = 0; w < v_size; ++w) denom += std::exp(row[w] - maxv);
            const std::uint32_t target = seq[t + 1];
            total_loss += std::log(denom) - (row[target] - maxv);
            const double inv = 1.0 / static_cast<double>(total_positions);
            double* drow = &dlogits[t * v_size];
            for (std::size_t w = 0; w < v_size; ++w)
                drow[w] = std::exp(row[w] - maxv) / denom * inv;
            drow[target] -= inv;
        }
        backward_seq(model, seq, cache, dlogits, grads);
    }
    return total_loss / static_cast<double>(total_positions);
}

double batch_loss(const Model& model, const std::vector<std::vector<std::uint32_t>>& batch) {
    if (batch.empty()) throw InputError("batch_loss: empty batch");
    const std::size_t v_size = model.config.vocab_size;
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& seq : batch) {
        if (seq.size() < 2) throw InputError("batch_loss: sequences must have length >= 2");
        const ForwardResult res = forward(model, seq);
        for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
            const double* row = &res.logits[t * v_size];
            double maxv = row[0];
            for (std::size_t w = 1; w < v_size; ++w) maxv = std::max(maxv, row[w]);
            double denom = 0.0;
            for (std::size_t w = 0; w < v_size; ++w) denom += std::exp(row[w] - maxv);
            total += std::log(denom) - (row[seq[t + 1]] - maxv);
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

namespace {

void put_u32le(std::ostream& os, std::uint32_t v) {
    std::array<unsigned char, 4> b{};
    for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b.data()), 4);
}

void put_u64le(std::ostream& os, std::uint64_t v) {
    std::array<unsigned char, 8> b{};
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b.data()), 8);
}

json config_to_json(const ModelConfig& c) {
    return json{{"vocab_size", c.vocab_size},       {"context_length", c.context_length},
                {"n_layers", c.n_layers},           {"n_heads", c.n_heads},
                {"d_model", c.d_model},             {"d_mlp", c.d_mlp},
                {"tie_embeddings", c.tie_embeddings}, {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    c.vocab_size = j.at("vocab_size").get<std::uint32_t>();
    c.context_length = j.at("context_length").get<std::uint32_t>();
    c.n_layers = j.at("n_layers").get<std::uint32_t>();
    c.n_heads = j.at("n_heads").get<std::uint32_t>();
    c.d_model = j.at("d_model").get<std::uint32_t>();
    c.d_mlp = j.at("d_mlp").get<std::uint32_t>();
    c.tie_embeddings = j.at("tie_embeddings").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& path) {
    json manifest = json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : model.params) {
        manifest.push_back({{"name", name}, {"shape", t.shape}, {"offset", offset}});
        offset += t.size() * 4;
    }
    const json header = {{"config", config_to_json(model.config)}, {"tensors", manifest}};
    const std::string hs = header.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write("NLMC", 4);
    put_u32le(os, 1);
    put_u64le(os, hs.size());
    os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& [name, t] : model.params) {
        for (double x : t.v) {
            const auto f = static_cast<float>(x);
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);
            put_u32le(os, bits);
        }
    }
    if (!os) throw IoError("write failed: " + path);
}

Model load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "NLMC", 4) != 0) throw IoError("bad checkpoint magic: " + path);
    std::array<unsigned char, 8> b{};
    is.read(reinterpret_cast<char*>(b.data()), 4);  // version
    is.read(reinterpret_cast<char*>(b.data()), 8);
    std::uint64_t hlen = 0;
    for (int i = 7; i >= 0; --i) hlen = (hlen << 8) | b[static_cast<std::size_t>(i)];
    std::string hs(hlen, '\0');
    is.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!is) throw IoError("truncated checkpoint header: " + path);
    const json header = json::parse(hs);

    Model m;
    m.config = config_from_json(header.at("config"));
    for (const auto& entry : header.at("tensors")) {
        const std::string name = entry.at("name").get<std::string>();
        const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
        Tensor t = Tensor::zeros(shape);
        for (double& x : t.v) {
            std::array<unsigned char, 4> fb{};
            is.read(reinterpret_cast<char*>(fb.data()), 4);
            std::uint32_t bits = 0;
            for (int i = 3; i >= 0; --i) bits = (bits << 8) | fb[static_cast<std::size_t>(i)];
            float f;
            std::memcpy(&f, &bits, 4);
            x = static_cast<double>(f);
        }
        m.params[name] = std::move(t);
    }
    if (!is) throw IoError("truncated checkpoint blob: " + path);
    return m;
}

}  // namespace nlm
