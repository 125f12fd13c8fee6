#include "pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <mutex>
#include <semaphore>

#include <json.hpp>

#include "corpusgen.hpp"
#include "errors.hpp"
#include "sha256.hpp"
#include "stats.hpp"
#include "tokenizer.hpp"

namespace nlm {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    json j;
    is >> j;
    return j;
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << j.dump(1, '\t') << '\n';
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// A stage is skippable when its record matches the input key and every
// recorded output still hashes the same.
bool stage_up_to_date(const fs::path& record_path, const std::string& key) {
    if (!fs::exists(record_path)) return false;
    json rec;
    try {
        rec = load_json_file(record_path.string());
    } catch (const std::exception&) {
        return false;
    }
    if (rec.value("key", "") != key) return false;
    for (const auto& [path, hash] : rec.at("outputs").items()) {
        if (!fs::exists(path)) return false;
        if (sha256_file(path) != hash.get<std::string>()) return false;
    }
    return true;
}

void write_stage_record(const fs::path& record_path, const std::string& key,
                        const std::vector<std::string>& outputs) {
    json out = json::object();
    for (const auto& p : outputs) out[p] = sha256_file(p);
    write_json_file({{"key", key}, {"outputs", out}}, record_path.string());
}

std::vector<std::string> stage_outputs(const fs::path& record_path) {
    std::vector<std::string> out;
    const json rec = load_json_file(record_path.string());
    for (const auto& [path, hash] : rec.at("outputs").items()) {
        (void)hash;
        out.push_back(path);
    }
    return out;
}

json hyper_to_json(const OptimizerHyper& h) {
    return {{"beta1", h.beta1},   {"beta2", h.beta2},
            {"eps", h.eps},       {"weight_decay", h.weight_decay},
            {"base_lr", h.base_lr}, {"batch_size", h.batch_size},
            {"max_epochs", h.max_epochs}, {"patience", h.patience}};
}

json model_to_json(const ModelConfig& c) {
    return {{"vocab_size", c.vocab_size},       {"context_length", c.context_length},
            {"n_layers", c.n_layers},           {"n_heads", c.n_heads},
            {"d_model", c.d_model},             {"d_mlp", c.d_mlp},
            {"tie_embeddings", c.tie_embeddings}};
}

PackedDataset slice_to_dataset(const TokenStream& flat, std::uint32_t context,
                               std::uint32_t eos_id) {
    PackedDataset ds;
    ds.context_length = context;
    ds.eos_id = eos_id;
    ds.vocab_size = flat.vocab_size;
    for (std::size_t off = 0; off + context <= flat.ids.size(); off += context)
        ds.examples.emplace_back(flat.ids.begin() + static_cast<std::ptrdiff_t>(off),
                                 flat.ids.begin() + static_cast<std::ptrdiff_t>(off + context));
    return ds;
}

TokenStream dataset_to_stream(const PackedDataset& ds) {
    TokenStream flat;
    flat.vocab_size = ds.vocab_size;
    for (const auto& ex : ds.examples) flat.ids.insert(flat.ids.end(), ex.begin(), ex.end());
    return flat;
}

// Encode the document corpus, optionally scramble across the dataset, pack,
// and split train/valid by example count.
void build_packed_corpus(const ExperimentManifest& manifest, const Tokenizer& tokenizer,
                         const std::string& corpus_path, bool scramble_flag,
                         std::uint64_t scramble_seed, const std::string& train_out,
                         const std::string& valid_out) {
    std::ifstream is(corpus_path);
    if (!is) throw IoError("cannot open: " + corpus_path);
    std::vector<TokenStream> docs;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        docs.push_back(tokenizer.encode(j.at("text").get<std::string>()));
    }
    if (docs.empty()) throw InputError("corpus has no documents: " + corpus_path);

    if (scramble_flag) {
        TokenStream flat;
        flat.vocab_size = docs[0].vocab_size;
        for (const auto& d : docs) flat.ids.insert(flat.ids.end(), d.ids.begin(), d.ids.end());
        docs.assign(1, scramble(flat, scramble_seed));
    }

    PackedDataset packed = pack(docs, manifest.model.context_length, tokenizer.eos_id());
    if (manifest.token_budget > 0) {
        const std::size_t max_examples = manifest.token_budget / manifest.model.context_length;
        if (packed.examples.size() > max_examples) packed.examples.resize(max_examples);
    }
    if (packed.examples.size() < 2)
        throw ConfigError("corpus too small to split into train and validation: " + corpus_path);

    std::size_t n_valid = static_cast<std::size_t>(
        std::llround(manifest.valid_fraction * static_cast<double>(packed.examples.size())));
    n_valid = std::max<std::size_t>(1, std::min(n_valid, packed.examples.size() - 1));

    PackedDataset train_ds = packed, valid_ds = packed;
    valid_ds.examples.assign(packed.examples.end() - static_cast<std::ptrdiff_t>(n_valid),
                             packed.examples.end());
    train_ds.examples.resize(packed.examples.size() - n_valid);

    write_token_stream(train_out, dataset_to_stream(train_ds));
    write_token_stream(valid_out, dataset_to_stream(valid_ds));
}

json history_to_json(const TrainResult& result, const ExperimentManifest& manifest,
                     std::uint64_t seed, const std::vector<std::string>& corpus_hashes) {
    json epochs = json::array();
    for (const auto& e : result.history)
        epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"valid_loss", e.valid_loss}});
    return {{"model", model_to_json(manifest.model)},
            {"hyper", hyper_to_json(manifest.hyper)},
            {"seed", seed},
            {"corpus_hashes", corpus_hashes},
            {"initial_valid_loss", result.initial_valid_loss},
            {"best_epoch", result.best_epoch},
            {"best_valid_loss", result.best_valid_loss},
            {"steps", result.steps_taken},
            {"epochs", epochs}};
}

struct CellResult {
    LedgerEntry entry;
    std::size_t executed = 0;
    std::size_t skipped = 0;
};

ScoreConfig scoring_for(const ExperimentManifest& manifest, std::uint64_t seed) {
    ScoreConfig sc = manifest.scoring;
    // One fixed split per seed: model seed offsets the manifest split seed.
    sc.split_seed = manifest.scoring.split_seed ^ seed;
    return sc;
}

// Full train -> adapt -> score chain for one (condition, seed) cell.
CellResult run_cell(const ExperimentManifest& manifest, const ConditionSpec& cond,
                    std::uint64_t seed, const Tokenizer& tokenizer, const std::string& cond_dir,
                    const std::string& manifest_key) {
    CellResult res;
    res.entry.condition = cond.name;
    res.entry.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();

    const fs::path dir = fs::path(cond_dir) / ("seed" + std::to_string(seed));
    fs::create_directories(dir);
    const std::string ckpt = (dir / "model.bin").string();
    const std::string history_path = (dir / "history.json").string();

    const std::string train_toks = (fs::path(cond_dir) / "train.toks").string();
    const std::string valid_toks = (fs::path(cond_dir) / "valid.toks").string();

    std::vector<std::string> corpus_hashes;
    if (cond.train) {
        corpus_hashes = {sha256_file(train_toks), sha256_file(valid_toks)};
    }

    // --- train stage ---
    {
        const std::string key = sha256_hex(manifest_key + "|train|" + cond.name + "|" +
                                           std::to_string(seed) + "|" +
                                           json(corpus_hashes).dump());
        const fs::path record = dir / "train.stage.json";
        if (stage_up_to_date(record, key)) {
            ++res.skipped;
        } else {
            ModelConfig mc = manifest.model;
            mc.seed = seed;
            Model model = init_model(mc);
            if (cond.train) {
                const PackedDataset train_ds = slice_to_dataset(
                    read_token_stream(train_toks), mc.context_length, tokenizer.eos_id());
                const PackedDataset valid_ds = slice_to_dataset(
                    read_token_stream(valid_toks), mc.context_length, tokenizer.eos_id());
                const TrainResult tr = train(model, train_ds, valid_ds, manifest.hyper, seed);
                model = tr.model;
                write_json_file(history_to_json(tr, manifest, seed, corpus_hashes), history_path);
            } else {
                write_json_file(json{{"model", model_to_json(mc)},
                                     {"seed", seed},
                                     {"untrained", true}},
                                history_path);
            }
            save_checkpoint(model, ckpt);
            write_stage_record(record, key, {ckpt, history_path});
            ++res.executed;
        }
        for (const auto& p : stage_outputs(record)) {
            res.entry.artifacts.push_back(p);
            res.entry.artifact_hashes.push_back(sha256_file(p));
        }
    }

    // --- adaptation stage ---
    std::string adapted_ckpt;
    if (manifest.adaptation_corpus) {
        adapted_ckpt = (dir / "adapted.bin").string();
        const std::string adapted_history = (dir / "adapted_history.json").string();
        const std::string atrain = (fs::path(manifest.output_dir) / "adaptation" / "train.toks").string();
        const std::string avalid = (fs::path(manifest.output_dir) / "adaptation" / "valid.toks").string();
        const std::string key =
            sha256_hex(manifest_key + "|adapt|" + cond.name + "|" + std::to_string(seed) + "|" +
                       sha256_file(ckpt) + "|" + sha256_file(atrain) + "|" + sha256_file(avalid));
        const fs::path record = dir / "adapt.stage.json";
        if (stage_up_to_date(record, key)) {
            ++res.skipped;
        } else {
            const Model base = load_checkpoint(ckpt);
            const PackedDataset train_ds = slice_to_dataset(
                read_token_stream(atrain), base.config.context_length, tokenizer.eos_id());
            const PackedDataset valid_ds = slice_to_dataset(
                read_token_stream(avalid), base.config.context_length, tokenizer.eos_id());
            const TrainResult tr = adapt_embeddings(base, train_ds, valid_ds, manifest.hyper, seed);
            save_checkpoint(tr.model, adapted_ckpt);
            write_json_file(history_to_json(tr, manifest, seed,
                                            {sha256_file(atrain), sha256_file(avalid)}),
                            adapted_history);
            write_stage_record(record, key, {adapted_ckpt, adapted_history});
            ++res.executed;
        }
        for (const auto& p : stage_outputs(record)) {
            res.entry.artifacts.push_back(p);
            res.entry.artifact_hashes.push_back(sha256_file(p));
        }
    }

    // --- scoring stages ---
    const StimulusSet stimuli = load_stimuli_jsonl(manifest.stimuli_path);
    const NeuroResponseSet responses = load_responses(manifest.responses_dir);
    const std::string stimuli_hash = sha256_file(manifest.stimuli_path);

    const auto score_stage = [&](const std::string& checkpoint, const std::string& regime) {
        const std::string report_path = (dir / ("report_" + regime + ".json")).string();
        const std::string key = sha256_hex(manifest_key + "|score|" + cond.name + "|" +
                                           std::to_string(seed) + "|" + regime + "|" +
                                           sha256_file(checkpoint) + "|" + stimuli_hash);
        const fs::path record = dir / ("score_" + regime + ".stage.json");
        if (stage_up_to_date(record, key)) {
            ++res.skipped;
        } else {
            const Model model = load_checkpoint(checkpoint);
            const BrainScoreReport report =
                brain_score(model, stimuli, responses, tokenizer, scoring_for(manifest, seed));
            save_report(report, report_path, sha256_file(checkpoint), stimuli_hash);
            write_stage_record(record, key, {report_path});
            ++res.executed;
        }
        for (const auto& p : stage_outputs(record)) {
            res.entry.artifacts.push_back(p);
            res.entry.artifact_hashes.push_back(sha256_file(p));
        }
    };
    score_stage(ckpt, "raw");
    if (!adapted_ckpt.empty()) score_stage(adapted_ckpt, "adapted");

    res.entry.status = "complete";
    res.entry.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace

ExperimentManifest manifest_from_json_file(const std::string& path) {
    const json j = load_json_file(path);
    ExperimentManifest m;

    std::string out = j.at("output_dir").get<std::string>();
    if (const char* root = std::getenv("NEUROLM_OUT"); root && *root && fs::path(out).is_relative())
        out = (fs::path(root) / out).string();
    m.output_dir = out;

    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (m.seeds.empty()) throw ConfigError("manifest: seed list must be non-empty");
    m.tokenizer_path = j.at("tokenizer").get<std::string>();

    const auto& mc = j.at("model");
    m.model.context_length = mc.value("context_length", 1024u);
    m.model.n_layers = mc.value("n_layers", 2u);
    m.model.n_heads = mc.value("n_heads", 2u);
    m.model.d_model = mc.value("d_model", 32u);
    m.model.d_mlp = mc.value("d_mlp", 4 * m.model.d_model);
    m.model.tie_embeddings = mc.value("tie_embeddings", true);

    if (j.contains("hyper")) {
        const auto& h = j.at("hyper");
        m.hyper.beta1 = h.value("beta1", m.hyper.beta1);
        m.hyper.beta2 = h.value("beta2", m.hyper.beta2);
        m.hyper.eps = h.value("eps", m.hyper.eps);
        m.hyper.weight_decay = h.value("weight_decay", m.hyper.weight_decay);
        m.hyper.base_lr = h.value("base_lr", m.hyper.base_lr);
        m.hyper.batch_size = h.value("batch_size", m.hyper.batch_size);
        m.hyper.max_epochs = h.value("max_epochs", m.hyper.max_epochs);
        m.hyper.patience = h.value("patience", m.hyper.patience);
    }
    m.valid_fraction = j.value("valid_fraction", 0.1);
    m.token_budget = j.value("token_budget", std::uint64_t{0});

    for (const auto& c : j.at("conditions")) {
        ConditionSpec cs;
        cs.name = c.at("name").get<std::string>();
        cs.train = c.value("train", true);
        cs.scramble = c.value("scramble", false);
        cs.scramble_seed = c.value("scramble_seed", std::uint64_t{0});
        if (cs.train) cs.corpus_path = c.at("corpus").get<std::string>();
        m.conditions.push_back(std::move(cs));
    }
    if (m.conditions.empty()) throw ConfigError("manifest: no conditions");

    if (j.contains("adaptation") && !j.at("adaptation").is_null())
        m.adaptation_corpus = j.at("adaptation").at("corpus").get<std::string>();

    const auto& sc = j.at("scoring");
    m.stimuli_path = sc.at("stimuli").get<std::string>();
    m.responses_dir = sc.at("responses").get<std::string>();
    m.scoring.pooling = sc.value("pooling", "last") == "mean" ? Pooling::Mean : Pooling::LastToken;
    m.scoring.split_mode =
        sc.value("split", "shuffled") == "by-passage" ? SplitMode::ByPassage : SplitMode::Shuffled;
    m.scoring.split_seed = sc.value("split_seed", std::uint64_t{0});
    m.scoring.ridge = sc.value("ridge", 0.0);

    if (j.contains("comparisons"))
        for (const auto& pair : j.at("comparisons"))
            m.comparisons.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
    return m;
}

void save_ledger(const RunLedger& ledger, const std::string& path) {
    json entries = json::array();
    for (const auto& e : ledger.entries) {
        entries.push_back({{"condition", e.condition},
                           {"seed", e.seed},
                           {"status", e.status},
                           {"artifacts", e.artifacts},
                           {"artifact_hashes", e.artifact_hashes},
                           {"wall_seconds", e.wall_seconds}});
    }
    write_json_file({{"entries", entries},
                     {"stages_executed", ledger.stages_executed},
                     {"stages_skipped", ledger.stages_skipped}},
                    path);
}

RunLedger load_ledger(const std::string& path) {
    const json j = load_json_file(path);
    RunLedger ledger;
    for (const auto& e : j.at("entries")) {
        LedgerEntry le;
        le.condition = e.at("condition").get<std::string>();
        le.seed = e.at("seed").get<std::uint64_t>();
        le.status = e.at("status").get<std::string>();
        le.artifacts = e.at("artifacts").get<std::vector<std::string>>();
        le.artifact_hashes = e.at("artifact_hashes").get<std::vector<std::string>>();
        le.wall_seconds = e.at("wall_seconds").get<double>();
        ledger.entries.push_back(std::move(le));
    }
    ledger.stages_executed = j.value("stages_executed", std::size_t{0});
    ledger.stages_skipped = j.value("stages_skipped", std::size_t{0});
    return ledger;
}

RunLedger run_pipeline(const ExperimentManifest& manifest, unsigned workers) {
    if (manifest.output_dir.empty()) throw ConfigError("manifest: output_dir required");
    fs::create_directories(manifest.output_dir);

    const Tokenizer tokenizer = load_tokenizer(manifest.tokenizer_path);
    ExperimentManifest m = manifest;
    m.model.vocab_size = tokenizer.vocab_size();

    // Identity of everything that feeds every stage downstream.
    const std::string manifest_key =
        sha256_hex(model_to_json(m.model).dump() + hyper_to_json(m.hyper).dump() +
                   sha256_file(m.tokenizer_path) + std::to_string(m.token_budget) +
                   fmt(m.valid_fraction));

    RunLedger ledger;

    // Corpus stages, one per trained condition, plus the adaptation corpus.
    const auto corpus_stage = [&](const std::string& name, const std::string& corpus_path,
                                  bool scramble_flag, std::uint64_t scramble_seed,
                                  const std::string& dir) {
        fs::create_directories(dir);
        const std::string train_out = (fs::path(dir) / "train.toks").string();
        const std::string valid_out = (fs::path(dir) / "valid.toks").string();
        const std::string key = sha256_hex(manifest_key + "|corpus|" + name + "|" +
                                           sha256_file(corpus_path) + "|" +
                                           (scramble_flag ? "s" + std::to_string(scramble_seed) : "-"));
        const fs::path record = fs::path(dir) / "corpus.stage.json";
        if (stage_up_to_date(record, key)) {
            ++ledger.stages_skipped;
        } else {
            build_packed_corpus(m, tokenizer, corpus_path, scramble_flag, scramble_seed, train_out,
                                valid_out);
            write_stage_record(record, key, {train_out, valid_out});
            ++ledger.stages_executed;
        }
    };

    for (const auto& cond : m.conditions) {
        if (!cond.train) continue;
        corpus_stage(cond.name, cond.corpus_path, cond.scramble, cond.scramble_seed,
                     (fs::path(m.output_dir) / cond.name).string());
    }
    if (m.adaptation_corpus)
        corpus_stage("adaptation", *m.adaptation_corpus, false, 0,
                     (fs::path(m.output_dir) / "adaptation").string());

    // (condition, seed) cells.
    struct Cell {
        const ConditionSpec* cond;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (const auto& cond : m.conditions)
        for (std::uint64_t seed : m.seeds) cells.push_back({&cond, seed});

    std::vector<CellResult> results(cells.size());
    std::counting_semaphore<> slots(workers == 0 ? 1 : workers);
    std::vector<std::future<void>> futures;
    std::mutex fail_mutex;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        futures.push_back(std::async(std::launch::async, [&, i] {
            slots.acquire();
            try {
                results[i] = run_cell(m, *cells[i].cond, cells[i].seed, tokenizer,
                                      (fs::path(m.output_dir) / cells[i].cond->name).string(),
                                      manifest_key);
            } catch (const std::exception& ex) {
                std::lock_guard<std::mutex> lock(fail_mutex);
                results[i].entry.condition = cells[i].cond->name;
                results[i].entry.seed = cells[i].seed;
                results[i].entry.status = std::string("failed: ") + ex.what();
            }
            slots.release();
        }));
    }
    for (auto& f : futures) f.get();

    bool any_failed = false;
    for (auto& r : results) {
        any_failed = any_failed || r.entry.status != "complete";
        ledger.entries.push_back(std::move(r.entry));
        ledger.stages_executed += r.executed;
        ledger.stages_skipped += r.skipped;
    }
    save_ledger(ledger, (fs::path(m.output_dir) / "ledger.json").string());

    if (!any_failed) {
        report_table(m, ledger, m.comparisons,
                     (fs::path(m.output_dir) / "results.csv").string(),
                     (fs::path(m.output_dir) / "results.json").string());
    }
    return ledger;
}

std::vector<double> condition_scores(const ExperimentManifest& manifest,
                                     const std::string& condition, const std::string& regime) {
    std::vector<double> scores;
    for (std::uint64_t seed : manifest.seeds) {
        const fs::path report = fs::path(manifest.output_dir) / condition /
                                ("seed" + std::to_string(seed)) / ("report_" + regime + ".json");
        if (!fs::exists(report))
            throw ScoreError("missing report for condition " + condition + " seed " +
                             std::to_string(seed) + " regime " + regime);
        scores.push_back(load_report(report.string()).best_score);
    }
    return scores;
}

void report_table(const ExperimentManifest& manifest, const RunLedger& ledger,
                  const std::vector<std::pair<std::string, std::string>>& comparisons,
                  const std::string& csv_path, const std::string& json_path) {
    for (const auto& e : ledger.entries)
        if (e.status != "complete")
            throw ScoreError("incomplete run: " + e.condition + " seed " +
                             std::to_string(e.seed) + " (" + e.status + ")");

    const bool adapted = manifest.adaptation_corpus.has_value();
    const auto agg = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double sd = 0.0;
        if (v.size() > 1) {
            double ss = 0.0;
            for (double x : v) ss += (x - mean) * (x - mean);
            sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
        }
        return std::make_pair(mean, sd);
    };

    json jconditions = json::array();
    std::string csv = "condition,raw_mean,raw_sd,adapted_mean,adapted_sd,delta_pct_raw_to_adapted\n";
    for (const auto& cond : manifest.conditions) {
        const auto raw = agg(condition_scores(manifest, cond.name, "raw"));
        csv += cond.name + "," + fmt(raw.first) + "," + fmt(raw.second) + ",";
        json row = {{"condition", cond.name}, {"raw_mean", raw.first}, {"raw_sd", raw.second}};
        if (adapted) {
            const auto ad = agg(condition_scores(manifest, cond.name, "adapted"));
            const double delta = raw.first != 0.0
                                     ? 100.0 * (ad.first - raw.first) / raw.first
                                     : 0.0;
            csv += fmt(ad.first) + "," + fmt(ad.second) + "," + fmt(delta);
            row["adapted_mean"] = ad.first;
            row["adapted_sd"] = ad.second;
            row["delta_pct_raw_to_adapted"] = delta;
        } else {
            csv += ",,";
        }
        csv += "\n";
        jconditions.push_back(std::move(row));
    }

    json jcomparisons = json::array();
    if (!comparisons.empty()) {
        csv += "\ncondition_a,condition_b,regime,u,p,significant,hl_estimate\n";
        std::vector<std::string> regimes{"raw"};
        if (adapted) regimes.push_back("adapted");
        for (const auto& [a, b] : comparisons) {
            for (const auto& regime : regimes) {
                const SampleGroup ga{a, condition_scores(manifest, a, regime)};
                const SampleGroup gb{b, condition_scores(manifest, b, regime)};
                const TestResult t = wilcoxon_rank_sum(ga, gb);
                csv += a + "," + b + "," + regime + "," + fmt(t.u) + "," + fmt(t.p) + "," +
                       (t.significant ? "true" : "false") + "," + fmt(t.hl_estimate) + "\n";
                jcomparisons.push_back({{"a", a},
                                        {"b", b},
                                        {"regime", regime},
                                        {"u", t.u},
                                        {"p", t.p},
                                        {"significant", t.significant},
                                        {"hl_estimate", t.hl_estimate}});
            }
        }
    }

    std::ofstream os(csv_path);
    if (!os) throw IoError("cannot open for writing: " + csv_path);
    os << csv;
    write_json_file({{"conditions", jconditions}, {"comparisons", jcomparisons}}, json_path);
}

}  // namespace nlm
