// Command-line front end over the neurolm shared library C API.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "neurolm.h"

namespace {

// 0 success, 1 validation, 2 stage failure, 3 reporting failure.
int exit_code_for(nlm_status status) {
    switch (status) {
        case NLM_OK: return 0;
        case NLM_ERR_CONFIG:
        case NLM_ERR_DOMAIN:
        case NLM_ERR_INPUT:
        case NLM_ERR_LEX: return 1;
        default: return 2;
    }
}

int finish(nlm_status status) {
    if (status != NLM_OK) std::fprintf(stderr, "error: %s\n", nlm_last_error());
    return exit_code_for(status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"neurolm: structured-sequence language model training and neural predictivity scoring"};
    app.require_subcommand(1);

    int rc = 0;

    // ---- gen -------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "corpus generation and preprocessing");
    gen->require_subcommand(1);

    {
        auto* c = gen->add_subcommand("dyck", "generate a nested-parenthesis token stream");
        auto vocab = std::make_shared<std::uint32_t>(49999);
        auto close_prob = std::make_shared<double>(0.51);
        auto length = std::make_shared<std::uint64_t>(1000);
        auto seed = std::make_shared<std::uint64_t>(0);
        auto out = std::make_shared<std::string>();
        c->add_option("--vocab-size", *vocab, "distinct parenthesis types");
        c->add_option("--close-prob", *close_prob, "probability of closing when possible");
        c->add_option("--length", *length, "tokens to generate")->required();
        c->add_option("--seed", *seed, "generator seed");
        c->add_option("--out", *out, "output .toks path")->required();
        c->callback([=, &rc] {
            rc = finish(nlm_gen_dyck(*vocab, *close_prob, *length, *seed, out->c_str()));
        });
    }
    {
        auto* c = gen->add_subcommand("scramble", "permute token positions across a stream");
        auto in = std::make_shared<std::string>();
        auto seed = std::make_shared<std::uint64_t>(0);
        auto out = std::make_shared<std::string>();
        c->add_option("--in", *in, "input .toks path")->required();
        c->add_option("--seed", *seed, "permutation seed");
        c->add_option("--out", *out, "output .toks path")->required();
        c->callback([=, &rc] { rc = finish(nlm_scramble(in->c_str(), *seed, out->c_str())); });
    }
    {
        auto* c = gen->add_subcommand("clean-fasta", "strip FASTA headers and join sequence lines");
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        c->add_option("--in", *in, "input text path")->required();
        c->add_option("--out", *out, "output text path")->required();
        c->callback([=, &rc] { rc = finish(nlm_clean_fasta(in->c_str(), out->c_str())); });
    }
    {
        auto* c = gen->add_subcommand("lex-code", "lex source into the symbolic token alphabet");
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto names = std::make_shared<std::string>();
        c->add_option("--in", *in, "source file")->required();
        c->add_option("--out", *out, "output .toks path")->required();
        c->add_option("--names-out", *names, "optional text dump, one token name per line");
        c->callback([=, &rc] {
            rc = finish(nlm_lex_code(in->c_str(), out->c_str(),
                                     names->empty() ? nullptr : names->c_str()));
        });
    }
    {
        auto* c = gen->add_subcommand("mix", "block-interleave two document JSONL files");
        auto a = std::make_shared<std::string>();
        auto b = std::make_shared<std::string>();
        auto ratio_a = std::make_shared<std::uint32_t>(3);
        auto ratio_b = std::make_shared<std::uint32_t>(1);
        auto out = std::make_shared<std::string>();
        c->add_option("--a", *a, "first corpus JSONL")->required();
        c->add_option("--b", *b, "second corpus JSONL")->required();
        c->add_option("--ratio-a", *ratio_a, "documents from a per block");
        c->add_option("--ratio-b", *ratio_b, "documents from b per block");
        c->add_option("--out", *out, "output JSONL")->required();
        c->callback([=, &rc] {
            rc = finish(nlm_mix(a->c_str(), b->c_str(), *ratio_a, *ratio_b, out->c_str()));
        });
    }
    {
        auto* c = gen->add_subcommand("pack", "join documents with eos and slice into windows");
        auto inputs = std::make_shared<std::vector<std::string>>();
        auto context = std::make_shared<std::uint32_t>(1024);
        auto eos = std::make_shared<std::uint32_t>(0);
        auto out = std::make_shared<std::string>();
        c->add_option("--in", *inputs, "input .toks documents")->required();
        c->add_option("--context-length", *context, "window size");
        c->add_option("--eos-id", *eos, "separator token id")->required();
        c->add_option("--out", *out, "output .toks path")->required();
        c->callback([=, &rc] {
            std::vector<const char*> paths;
            for (const auto& p : *inputs) paths.push_back(p.c_str());
            size_t n = 0;
            const nlm_status st =
                nlm_pack(paths.data(), paths.size(), *context, *eos, out->c_str(), &n);
            if (st == NLM_OK) std::printf("%zu examples\n", n);
            rc = finish(st);
        });
    }
    {
        auto* c = gen->add_subcommand("truncate", "keep the first N tokens of a stream");
        auto in = std::make_shared<std::string>();
        auto budget = std::make_shared<std::uint64_t>(0);
        auto out = std::make_shared<std::string>();
        c->add_option("--in", *in, "input .toks path")->required();
        c->add_option("--budget", *budget, "token budget")->required();
        c->add_option("--out", *out, "output .toks path")->required();
        c->callback([=, &rc] { rc = finish(nlm_truncate(in->c_str(), *budget, out->c_str())); });
    }

    // ---- tok -------------------------------------------------------------
    auto* tok = app.add_subcommand("tok", "tokenizer training and application");
    tok->require_subcommand(1);
    {
        auto* c = tok->add_subcommand("train", "train a tokenizer on a text corpus");
        auto corpus = std::make_shared<std::string>();
        auto vocab = std::make_shared<std::uint32_t>(49999);
        auto mode = std::make_shared<std::string>("bpe");
        auto out = std::make_shared<std::string>();
        c->add_option("--corpus", *corpus, "training text")->required();
        c->add_option("--vocab-size", *vocab, "target vocabulary size (bpe mode)");
        c->add_option("--mode", *mode, "bpe | whitespace");
        c->add_option("--out", *out, "output model JSON")->required();
        c->callback([=, &rc] {
            rc = finish(*mode == "whitespace"
                            ? nlm_tokenizer_train_whitespace(corpus->c_str(), out->c_str())
                            : nlm_tokenizer_train_bpe(corpus->c_str(), *vocab, out->c_str()));
        });
    }
    {
        auto* c = tok->add_subcommand("encode", "encode text to a token stream");
        auto model = std::make_shared<std::string>();
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        c->add_option("--model", *model, "tokenizer JSON")->required();
        c->add_option("--in", *in, "input text")->required();
        c->add_option("--out", *out, "output .toks path")->required();
        c->callback([=, &rc] {
            nlm_tokenizer* t = nullptr;
            nlm_status st = nlm_tokenizer_open(model->c_str(), &t);
            if (st == NLM_OK) {
                st = nlm_tokenizer_encode_file(t, in->c_str(), out->c_str());
                nlm_tokenizer_close(t);
            }
            rc = finish(st);
        });
    }
    {
        auto* c = tok->add_subcommand("decode", "decode a token stream to text");
        auto model = std::make_shared<std::string>();
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        c->add_option("--model", *model, "tokenizer JSON")->required();
        c->add_option("--in", *in, "input .toks path")->required();
        c->add_option("--out", *out, "output text")->required();
        c->callback([=, &rc] {
            nlm_tokenizer* t = nullptr;
            nlm_status st = nlm_tokenizer_open(model->c_str(), &t);
            if (st == NLM_OK) {
                st = nlm_tokenizer_decode_file(t, in->c_str(), out->c_str());
                nlm_tokenizer_close(t);
            }
            rc = finish(st);
        });
    }

    // ---- train / adapt ----------------------------------------------------
    {
        auto* c = app.add_subcommand("train", "train a model from a run config");
        auto config = std::make_shared<std::string>();
        c->add_option("--config", *config, "run config JSON")->required();
        c->callback([=, &rc] { rc = finish(nlm_train_config(config->c_str())); });
    }
    {
        auto* c = app.add_subcommand("adapt", "embedding-only continued training");
        auto checkpoint = std::make_shared<std::string>();
        auto corpus = std::make_shared<std::string>();
        auto valid = std::make_shared<std::string>();
        auto seed = std::make_shared<std::uint64_t>(0);
        auto out = std::make_shared<std::string>();
        auto history = std::make_shared<std::string>();
        auto epochs = std::make_shared<std::uint32_t>(0);
        c->add_option("--checkpoint", *checkpoint, "base checkpoint")->required();
        c->add_option("--corpus", *corpus, "adaptation train .toks")->required();
        c->add_option("--valid", *valid, "adaptation validation .toks")->required();
        c->add_option("--seed", *seed, "shuffle seed");
        c->add_option("--out", *out, "adapted checkpoint path")->required();
        c->add_option("--history", *history, "optional history JSON path");
        c->add_option("--epochs", *epochs, "override max epochs (0 = default)");
        c->add_flag("--freeze-embeddings",
                    "kept for symmetry; adaptation always freezes all non-embedding tensors");
        c->callback([=, &rc] {
            nlm_hyper hyper;
            nlm_hyper_default(&hyper);
            if (*epochs > 0) hyper.max_epochs = *epochs;
            rc = finish(nlm_adapt(checkpoint->c_str(), corpus->c_str(), valid->c_str(), &hyper,
                                  *seed, out->c_str(),
                                  history->empty() ? nullptr : history->c_str()));
        });
    }

    // ---- score / compare ---------------------------------------------------
    {
        auto* c = app.add_subcommand("score", "neural predictivity of a checkpoint");
        auto checkpoint = std::make_shared<std::string>();
        auto stimuli = std::make_shared<std::string>();
        auto responses = std::make_shared<std::string>();
        auto tokenizer = std::make_shared<std::string>();
        auto pooling = std::make_shared<std::string>("last");
        auto split = std::make_shared<std::string>("shuffled");
        auto seed = std::make_shared<std::uint64_t>(0);
        auto ridge = std::make_shared<double>(0.0);
        auto out = std::make_shared<std::string>();
        c->add_option("--checkpoint", *checkpoint)->required();
        c->add_option("--stimuli", *stimuli, "stimuli JSONL")->required();
        c->add_option("--responses", *responses, "responses directory")->required();
        c->add_option("--tokenizer", *tokenizer, "tokenizer JSON")->required();
        c->add_option("--pooling", *pooling, "last | mean");
        c->add_option("--split", *split, "shuffled | by-passage");
        c->add_option("--seed", *seed, "split seed");
        c->add_option("--ridge", *ridge, "ridge penalty (0 = least squares)");
        c->add_option("--out", *out, "report JSON path")->required();
        c->callback([=, &rc] {
            rc = finish(nlm_score(checkpoint->c_str(), stimuli->c_str(), responses->c_str(),
                                  tokenizer->c_str(), pooling->c_str(), split->c_str(), *seed,
                                  *ridge, out->c_str()));
        });
    }
    {
        auto* c = app.add_subcommand("compare", "exact rank statistics between two score groups");
        auto a = std::make_shared<std::string>();
        auto b = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        c->add_option("--a", *a, "first group JSON")->required();
        c->add_option("--b", *b, "second group JSON")->required();
        c->add_option("--out", *out, "result JSON path")->required();
        c->callback([=, &rc] { rc = finish(nlm_compare(a->c_str(), b->c_str(), out->c_str())); });
    }

    // ---- pipeline -----------------------------------------------------------
    auto* pipeline = app.add_subcommand("pipeline", "manifest-driven end-to-end runs");
    pipeline->require_subcommand(1);
    {
        auto* c = pipeline->add_subcommand("run", "execute a manifest with hash-based resume");
        auto manifest = std::make_shared<std::string>();
        auto workers = std::make_shared<unsigned>(1);
        c->add_option("manifest", *manifest, "experiment manifest JSON")->required();
        c->add_option("--workers", *workers, "parallel condition x seed cells");
        c->callback([=, &rc] {
            int any_failed = 0;
            const nlm_status st = nlm_pipeline_run(manifest->c_str(), *workers, &any_failed);
            if (st != NLM_OK) {
                rc = finish(st);
            } else if (any_failed) {
                std::fprintf(stderr, "error: one or more stages failed; see ledger.json\n");
                rc = 2;
            } else {
                rc = 0;
            }
        });
    }
    {
        auto* c = pipeline->add_subcommand("fixture", "generate a synthetic fixture");
        auto spec = std::make_shared<std::string>();
        c->add_option("--spec", *spec, "fixture spec JSON")->required();
        c->callback([=, &rc] { rc = finish(nlm_pipeline_fixture(spec->c_str())); });
    }
    {
        auto* c = pipeline->add_subcommand("report", "result tables for a completed manifest");
        auto manifest = std::make_shared<std::string>();
        auto compare = std::make_shared<std::string>();
        auto csv = std::make_shared<std::string>();
        auto json_out = std::make_shared<std::string>();
        c->add_option("manifest", *manifest, "experiment manifest JSON")->required();
        c->add_option("--compare", *compare, "comma-separated condA:condB pairs");
        c->add_option("--csv", *csv, "output CSV path")->required();
        c->add_option("--json", *json_out, "output JSON path")->required();
        c->callback([=, &rc] {
            const nlm_status st = nlm_pipeline_report(manifest->c_str(), compare->c_str(),
                                                      csv->c_str(), json_out->c_str());
            if (st != NLM_OK) {
                std::fprintf(stderr, "error: %s\n", nlm_last_error());
                rc = 3;
            }
        });
    }

    CLI11_PARSE(app, argc, argv);
    return rc;
}
