#include "neurolm.h"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "corpusgen.hpp"
#include "encoding.hpp"
#include "errors.hpp"
#include "fixture.hpp"
#include "model.hpp"
#include "pipeline.hpp"
#include "sha256.hpp"
#include "stats.hpp"
#include "tokenizer.hpp"
#include "trainer.hpp"

namespace {

using json = nlohmann::json;

thread_local std::string g_last_error;

template <typename F>
nlm_status guarded(F&& f) {
    try {
        f();
        return NLM_OK;
    } catch (const nlm::ConfigError& e) {
        g_last_error = e.what();
        return NLM_ERR_CONFIG;
    } catch (const nlm::DomainError& e) {
        g_last_error = e.what();
        return NLM_ERR_DOMAIN;
    } catch (const nlm::LexError& e) {
        g_last_error = e.what();
        return NLM_ERR_LEX;
    } catch (const nlm::InputError& e) {
        g_last_error = e.what();
        return NLM_ERR_INPUT;
    } catch (const nlm::IoError& e) {
        g_last_error = e.what();
        return NLM_ERR_IO;
    } catch (const nlm::TrainError& e) {
        g_last_error = e.what();
        return NLM_ERR_TRAIN;
    } catch (const nlm::ScoreError& e) {
        g_last_error = e.what();
        return NLM_ERR_SCORE;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return NLM_ERR_INTERNAL;
    }
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw nlm::IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw nlm::IoError("cannot open for writing: " + path);
    os << data;
}

nlm::OptimizerHyper to_cpp(const nlm_hyper& h) {
    nlm::OptimizerHyper out;
    out.beta1 = h.beta1;
    out.beta2 = h.beta2;
    out.eps = h.eps;
    out.weight_decay = h.weight_decay;
    out.base_lr = h.base_lr;
    out.batch_size = h.batch_size;
    out.max_epochs = h.max_epochs;
    out.patience = h.patience;
    return out;
}

void require_args(std::initializer_list<const char*> ps) {
    for (const char* p : ps)
        if (!p) throw nlm::InputError("null required argument");
}

}  // namespace

struct nlm_tokenizer {
    nlm::Tokenizer impl;
};

struct nlm_model {
    nlm::Model impl;
};

extern "C" {

const char* nlm_last_error(void) { return g_last_error.c_str(); }

nlm_status nlm_gen_dyck(uint32_t vocab_size, double close_prob, uint64_t target_length,
                        uint64_t seed, const char* out_path) {
    return guarded([&] {
        require_args({out_path});
        nlm::DyckConfig cfg{vocab_size, close_prob, target_length, seed};
        nlm::write_token_stream(out_path, nlm::generate_dyck(cfg));
    });
}

nlm_status nlm_scramble(const char* in_path, uint64_t seed, const char* out_path) {
    return guarded([&] {
        require_args({in_path, out_path});
        nlm::write_token_stream(out_path, nlm::scramble(nlm::read_token_stream(in_path), seed));
    });
}

nlm_status nlm_clean_fasta(const char* in_path, const char* out_path) {
    return guarded([&] { write_file(out_path, nlm::clean_fasta(read_file(in_path))); });
        require_args({in_path, out_path});
}

nlm_status nlm_lex_code(const char* in_path, const char* out_path, const char* names_out_path) {
    return guarded([&] {
        require_args({in_path, out_path});
        const auto tokens = nlm::preprocess_code(read_file(in_path));
        nlm::write_token_stream(out_path, nlm::code_tokens_to_stream(tokens));
        if (names_out_path) {
            std::string names;
            for (const auto t : tokens) {
                names += nlm::code_token_name(t);
                names += '\n';
            }
            write_file(names_out_path, names);
        }
    });
}

nlm_status nlm_mix(const char* a_jsonl, const char* b_jsonl, uint32_t ratio_a, uint32_t ratio_b,
                   const char* out_jsonl) {
    return guarded([&] {
        require_args({a_jsonl, b_jsonl, out_jsonl});
        const auto read_lines = [](const char* path) {
            std::ifstream is(path);
            if (!is) throw nlm::IoError(std::string("cannot open: ") + path);
            std::vector<std::string> lines;
            std::string line;
            while (std::getline(is, line))
                if (!line.empty()) lines.push_back(line);
            return lines;
        };
        const auto mixed =
            nlm::mix_corpora(read_lines(a_jsonl), read_lines(b_jsonl), ratio_a, ratio_b);
        std::string out;
        for (const auto& line : mixed) {
            json::parse(line);  // validate each document is an object line
            out += line;
            out += '\n';
        }
        write_file(out_jsonl, out);
    });
}

nlm_status nlm_pack(const char* const* toks_paths, size_t n_paths, uint32_t context_length,
                    uint32_t eos_id, const char* out_path, size_t* n_examples) {
    return guarded([&] {
        require_args({out_path});
        if (!toks_paths) throw nlm::InputError("null required argument");
        std::vector<nlm::TokenStream> docs;
        for (size_t i = 0; i < n_paths; ++i) {
            require_args({toks_paths[i]});
            docs.push_back(nlm::read_token_stream(toks_paths[i]));
        }
        const nlm::PackedDataset ds = nlm::pack(docs, context_length, eos_id);
        nlm::TokenStream flat;
        flat.vocab_size = ds.vocab_size;
        for (const auto& ex : ds.examples) flat.ids.insert(flat.ids.end(), ex.begin(), ex.end());
        nlm::write_token_stream(out_path, flat);
        if (n_examples) *n_examples = ds.examples.size();
    });
}

nlm_status nlm_truncate(const char* in_path, uint64_t budget, const char* out_path) {
    return guarded([&] {
        require_args({in_path, out_path});
        nlm::write_token_stream(out_path, nlm::truncate(nlm::read_token_stream(in_path), budget));
    });
}

nlm_status nlm_tokenizer_train_bpe(const char* corpus_path, uint32_t vocab_size,
                                   const char* model_out_path) {
    return guarded([&] {
        require_args({corpus_path, model_out_path});
        nlm::save_bpe(nlm::train_bpe(read_file(corpus_path), vocab_size), model_out_path);
    });
}

nlm_status nlm_tokenizer_train_whitespace(const char* corpus_path, const char* model_out_path) {
    return guarded([&] {
        require_args({corpus_path, model_out_path});
        nlm::save_whitespace(nlm::build_whitespace_vocab(read_file(corpus_path)), model_out_path);
    });
}

nlm_status nlm_tokenizer_open(const char* model_path, nlm_tokenizer** out) {
    return guarded([&] { *out = new nlm_tokenizer{nlm::load_tokenizer(model_path)}; });
        require_args({model_path});
}

void nlm_tokenizer_close(nlm_tokenizer* tok) { delete tok; }

uint32_t nlm_tokenizer_vocab_size(const nlm_tokenizer* tok) { return tok->impl.vocab_size(); }

uint32_t nlm_tokenizer_eos_id(const nlm_tokenizer* tok) { return tok->impl.eos_id(); }

nlm_status nlm_tokenizer_encode_file(const nlm_tokenizer* tok, const char* text_path,
                                     const char* toks_out_path) {
    return guarded([&] {
        require_args({text_path, toks_out_path});
        nlm::write_token_stream(toks_out_path, tok->impl.encode(read_file(text_path)));
    });
}

nlm_status nlm_tokenizer_decode_file(const nlm_tokenizer* tok, const char* toks_path,
                                     const char* text_out_path) {
    return guarded([&] {
        require_args({toks_path, text_out_path});
        write_file(text_out_path, tok->impl.decode(nlm::read_token_stream(toks_path)));
    });
}

nlm_status nlm_model_open(const char* checkpoint_path, nlm_model** out) {
    return guarded([&] { *out = new nlm_model{nlm::load_checkpoint(checkpoint_path)}; });
        require_args({checkpoint_path});
}

void nlm_model_close(nlm_model* model) { delete model; }

uint32_t nlm_model_n_layers(const nlm_model* model) { return model->impl.config.n_layers; }
uint32_t nlm_model_d_model(const nlm_model* model) { return model->impl.config.d_model; }
uint32_t nlm_model_vocab_size(const nlm_model* model) { return model->impl.config.vocab_size; }

void nlm_hyper_default(nlm_hyper* hyper) {
    const nlm::OptimizerHyper d;
    *hyper = {d.beta1, d.beta2, d.eps, d.weight_decay, d.base_lr,
              d.batch_size, d.max_epochs, d.patience};
}

nlm_status nlm_train_config(const char* run_config_path) {
    return guarded([&] {
        require_args({run_config_path});
        std::ifstream is(run_config_path);
        if (!is) throw nlm::IoError(std::string("cannot open: ") + run_config_path);
        json j;
        is >> j;

        const nlm::TokenStream train_flat = nlm::read_token_stream(j.at("train").get<std::string>());
        const nlm::TokenStream valid_flat = nlm::read_token_stream(j.at("valid").get<std::string>());

        nlm::ModelConfig mc;
        const auto& m = j.at("model");
        mc.vocab_size = train_flat.vocab_size;
        mc.context_length = m.value("context_length", 1024u);
        mc.n_layers = m.value("n_layers", 2u);
        mc.n_heads = m.value("n_heads", 2u);
        mc.d_model = m.value("d_model", 32u);
        mc.d_mlp = m.value("d_mlp", 4 * mc.d_model);
        mc.tie_embeddings = m.value("tie_embeddings", true);
        mc.seed = j.value("seed", std::uint64_t{0});

        nlm::OptimizerHyper hyper;
        if (j.contains("hyper")) {
            const auto& h = j.at("hyper");
            hyper.beta1 = h.value("beta1", hyper.beta1);
            hyper.beta2 = h.value("beta2", hyper.beta2);
            hyper.eps = h.value("eps", hyper.eps);
            hyper.weight_decay = h.value("weight_decay", hyper.weight_decay);
            hyper.base_lr = h.value("base_lr", hyper.base_lr);
            hyper.batch_size = h.value("batch_size", hyper.batch_size);
            hyper.max_epochs = h.value("max_epochs", hyper.max_epochs);
            hyper.patience = h.value("patience", hyper.patience);
        }

        const auto slice = [&](const nlm::TokenStream& flat) {
            nlm::PackedDataset ds;
            ds.context_length = mc.context_length;
            ds.vocab_size = flat.vocab_size;
            for (std::size_t off = 0; off + mc.context_length <= flat.ids.size();
                 off += mc.context_length)
                ds.examples.emplace_back(
                    flat.ids.begin() + static_cast<std::ptrdiff_t>(off),
                    flat.ids.begin() + static_cast<std::ptrdiff_t>(off + mc.context_length));
            return ds;
        };

        const nlm::Model initial = nlm::init_model(mc);
        const nlm::TrainResult tr =
            nlm::train(initial, slice(train_flat), slice(valid_flat), hyper, mc.seed);
        nlm::save_checkpoint(tr.model, j.at("out_checkpoint").get<std::string>());

        json epochs = json::array();
        for (const auto& e : tr.history)
            epochs.push_back(
                {{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"valid_loss", e.valid_loss}});
        const json history = {{"seed", mc.seed},
                              {"best_epoch", tr.best_epoch},
                              {"best_valid_loss", tr.best_valid_loss},
                              {"initial_valid_loss", tr.initial_valid_loss},
                              {"steps", tr.steps_taken},
                              {"epochs", epochs}};
        if (j.contains("out_history"))
            write_file(j.at("out_history").get<std::string>(), history.dump(1, '\t') + "\n");
    });
}

nlm_status nlm_adapt(const char* checkpoint_path, const char* train_toks, const char* valid_toks,
                     const nlm_hyper* hyper, uint64_t seed, const char* out_checkpoint,
                     const char* out_history) {
    return guarded([&] {
        require_args({checkpoint_path, train_toks, valid_toks, out_checkpoint});
        const nlm::Model base = nlm::load_checkpoint(checkpoint_path);
        nlm::OptimizerHyper h;
        if (hyper) h = to_cpp(*hyper);

        const auto slice = [&](const char* path) {
            const nlm::TokenStream flat = nlm::read_token_stream(path);
            nlm::PackedDataset ds;
            ds.context_length = base.config.context_length;
            ds.vocab_size = flat.vocab_size;
            for (std::size_t off = 0; off + ds.context_length <= flat.ids.size();
                 off += ds.context_length)
                ds.examples.emplace_back(
                    flat.ids.begin() + static_cast<std::ptrdiff_t>(off),
                    flat.ids.begin() + static_cast<std::ptrdiff_t>(off + ds.context_length));
            return ds;
        };

        const nlm::TrainResult tr =
            nlm::adapt_embeddings(base, slice(train_toks), slice(valid_toks), h, seed);
        nlm::save_checkpoint(tr.model, out_checkpoint);
        if (out_history) {
            json epochs = json::array();
            for (const auto& e : tr.history)
                epochs.push_back({{"epoch", e.epoch},
                                  {"train_loss", e.train_loss},
                                  {"valid_loss", e.valid_loss}});
            const json history = {{"seed", seed},
                                  {"best_epoch", tr.best_epoch},
                                  {"best_valid_loss", tr.best_valid_loss},
                                  {"initial_valid_loss", tr.initial_valid_loss},
                                  {"epochs", epochs}};
            write_file(out_history, history.dump(1, '\t') + "\n");
        }
    });
}

nlm_status nlm_score(const char* checkpoint_path, const char* stimuli_jsonl,
                     const char* responses_dir, const char* tokenizer_path, const char* pooling,
                     const char* split_mode, uint64_t split_seed, double ridge,
                     const char* report_out) {
    return guarded([&] {
        require_args({checkpoint_path, stimuli_jsonl, responses_dir, tokenizer_path, pooling, split_mode, report_out});
        const nlm::Model model = nlm::load_checkpoint(checkpoint_path);
        const nlm::Tokenizer tokenizer = nlm::load_tokenizer(tokenizer_path);
        const nlm::StimulusSet stimuli = nlm::load_stimuli_jsonl(stimuli_jsonl);
        const nlm::NeuroResponseSet responses = nlm::load_responses(responses_dir);

        nlm::ScoreConfig cfg;
        cfg.pooling = std::string(pooling) == "mean" ? nlm::Pooling::Mean : nlm::Pooling::LastToken;
        cfg.split_mode = std::string(split_mode) == "by-passage" ? nlm::SplitMode::ByPassage
                                                                 : nlm::SplitMode::Shuffled;
        cfg.split_seed = split_seed;
        cfg.ridge = ridge;

        const nlm::BrainScoreReport report =
            nlm::brain_score(model, stimuli, responses, tokenizer, cfg);
        nlm::save_report(report, report_out, nlm::sha256_file(checkpoint_path),
                         nlm::sha256_file(stimuli_jsonl));
    });
}

nlm_status nlm_compare(const char* a_scores_json, const char* b_scores_json,
                       const char* result_out) {
    return guarded([&] {
        require_args({a_scores_json, b_scores_json, result_out});
        const auto load_group = [](const char* path) {
            std::ifstream is(path);
            if (!is) throw nlm::IoError(std::string("cannot open: ") + path);
            json j;
            is >> j;
            return nlm::SampleGroup{j.value("label", std::string(path)),
                                    j.at("values").get<std::vector<double>>()};
        };
        const nlm::SampleGroup a = load_group(a_scores_json);
        const nlm::SampleGroup b = load_group(b_scores_json);
        const nlm::TestResult t = nlm::wilcoxon_rank_sum(a, b);
        const json j = {{"a", a.label},        {"b", b.label},
                        {"u", t.u},            {"p", t.p},
                        {"significant", t.significant}, {"hl_estimate", t.hl_estimate},
                        {"test", "wilcoxon-rank-sum-exact"}};
        write_file(result_out, j.dump(1, '\t') + "\n");
    });
}

nlm_status nlm_pipeline_run(const char* manifest_path, unsigned workers, int* any_failed) {
    return guarded([&] {
        require_args({manifest_path});
        const nlm::ExperimentManifest manifest = nlm::manifest_from_json_file(manifest_path);
        const nlm::RunLedger ledger = nlm::run_pipeline(manifest, workers == 0 ? 1 : workers);
        int failed = 0;
        for (const auto& e : ledger.entries)
            if (e.status != "complete") failed = 1;
        if (any_failed) *any_failed = failed;
    });
}

nlm_status nlm_pipeline_fixture(const char* spec_json_path) {
    return guarded([&] { nlm::make_fixture(nlm::fixture_spec_from_json_file(spec_json_path)); });
        require_args({spec_json_path});
}

nlm_status nlm_pipeline_report(const char* manifest_path, const char* comparisons,
                               const char* csv_out, const char* json_out) {
    return guarded([&] {
        require_args({manifest_path, csv_out, json_out});
        const nlm::ExperimentManifest manifest = nlm::manifest_from_json_file(manifest_path);
        const nlm::RunLedger ledger =
            nlm::load_ledger((std::filesystem::path(manifest.output_dir) / "ledger.json").string());

        std::vector<std::pair<std::string, std::string>> pairs;
        if (comparisons && *comparisons) {
            std::stringstream ss(comparisons);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto colon = item.find(':');
                if (colon == std::string::npos)
                    throw nlm::ConfigError("comparison pair must be a:b, got " + item);
                pairs.emplace_back(item.substr(0, colon), item.substr(colon + 1));
            }
        }
        nlm::report_table(manifest, ledger, pairs, csv_out, json_out);
    });
}

}  // extern "C"
