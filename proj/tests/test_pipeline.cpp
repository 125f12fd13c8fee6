#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "encoding.hpp"
#include "errors.hpp"
#include "fixture.hpp"
#include "pipeline.hpp"
#include "sha256.hpp"
#include "tokenizer.hpp"

using namespace nlm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

FixtureSpec small_spec(const fs::path& dir, std::uint64_t seed) {
    FixtureSpec spec;
    spec.vocab_types = 8;
    spec.corpus_tokens = 3000;
    spec.doc_length = 60;
    spec.n_stimuli = 40;
    spec.stimulus_length = 8;
    spec.passage_size = 4;
    spec.n_subjects = 2;
    spec.voxels = 12;
    spec.planted_layer = 1;
    spec.snr = 4.0;
    spec.seed = seed;
    spec.reference_config.vocab_size = 0;  // filled from tokenizer internally
    spec.reference_config.context_length = 12;
    spec.reference_config.n_layers = 2;
    spec.reference_config.n_heads = 2;
    spec.reference_config.d_model = 8;
    spec.reference_config.d_mlp = 16;
    spec.out_dir = dir.string();
    return spec;
}

ExperimentManifest small_manifest(const fs::path& fx, const fs::path& out) {
    ExperimentManifest m;
    m.output_dir = out.string();
    m.seeds = {1, 2};
    m.tokenizer_path = (fx / "tokenizer.json").string();
    m.model.context_length = 12;
    m.model.n_layers = 2;
    m.model.n_heads = 2;
    m.model.d_model = 8;
    m.model.d_mlp = 16;
    m.hyper.max_epochs = 2;
    m.hyper.batch_size = 8;
    m.hyper.base_lr = 1e-3;
    m.valid_fraction = 0.2;
    m.conditions.push_back({"trained", (fx / "corpus.jsonl").string(), true, false, 0});
    m.conditions.push_back({"untrained", "", false, false, 0});
    m.adaptation_corpus = (fx / "corpus.jsonl").string();
    m.stimuli_path = (fx / "stimuli.jsonl").string();
    m.responses_dir = (fx / "responses").string();
    m.scoring.split_seed = 3;
    m.comparisons = {{"trained", "untrained"}};
    return m;
}

}  // namespace

TEST_CASE("fixture generation is deterministic and well-formed") {
    const auto base = fs::temp_directory_path() / "nlm_fx_det";
    fs::remove_all(base);
    make_fixture(small_spec(base / "a", 9));
    make_fixture(small_spec(base / "b", 9));

    for (const char* name : {"corpus.jsonl", "stimuli.jsonl", "tokenizer.json"})
        CHECK(slurp(base / "a" / name) == slurp(base / "b" / name));
    for (const auto& e : fs::directory_iterator(base / "a" / "responses")) {
        const auto rel = e.path().filename();
        CHECK(slurp(e.path()) == slurp(base / "b" / "responses" / rel));
    }

    const auto stimuli = load_stimuli_jsonl((base / "a" / "stimuli.jsonl").string());
    CHECK(stimuli.items.size() == 40);
    const auto responses = load_responses((base / "a" / "responses").string());
    CHECK(responses.subject_ids.size() == 2);
    CHECK(responses.responses[0].rows() == 40);
    CHECK(responses.responses[0].cols() == 12);

    // Corpus is encodable by the emitted tokenizer.
    const auto tok = load_tokenizer((base / "a" / "tokenizer.json").string());
    std::ifstream in(base / "a" / "corpus.jsonl");
    std::string line;
    std::getline(in, line);
    CHECK(!line.empty());
    fs::remove_all(base);
}

TEST_CASE("fixture spec validation") {
    auto spec = small_spec(fs::temp_directory_path() / "nlm_fx_bad", 1);
    spec.n_stimuli = 4;  // below the split minimum
    CHECK_THROWS_AS(make_fixture(spec), ConfigError);
    spec = small_spec(fs::temp_directory_path() / "nlm_fx_bad", 1);
    spec.voxels = 100000;
    CHECK_THROWS_AS(make_fixture(spec), ConfigError);
}

TEST_CASE("pipeline runs, resumes, and redoes only invalidated stages") {
    const auto base = fs::temp_directory_path() / "nlm_pipe";
    fs::remove_all(base);
    const auto fx = base / "fixture";
    make_fixture(small_spec(fx, 5));

    auto manifest = small_manifest(fx, base / "out");

    // First run executes everything: one entry per condition x seed.
    const auto first = run_pipeline(manifest, 2);
    REQUIRE(first.entries.size() == 4);
    for (const auto& e : first.entries) CHECK(e.status == "complete");
    CHECK(first.stages_executed > 0);
    CHECK(fs::exists(base / "out" / "results.csv"));
    CHECK(fs::exists(base / "out" / "ledger.json"));

    // Ledger hashes match files on disk.
    for (const auto& e : first.entries) {
        REQUIRE(e.artifacts.size() == e.artifact_hashes.size());
        for (std::size_t i = 0; i < e.artifacts.size(); ++i)
            CHECK(sha256_file(e.artifacts[i]) == e.artifact_hashes[i]);
    }

    const auto csv1 = slurp(base / "out" / "results.csv");
    const auto json1 = slurp(base / "out" / "results.json");

    // Unmodified rerun: zero stages re-executed, identical tables.
    const auto second = run_pipeline(manifest, 2);
    CHECK(second.stages_executed == 0);
    CHECK(second.stages_skipped > 0);
    CHECK(slurp(base / "out" / "results.csv") == csv1);
    CHECK(slurp(base / "out" / "results.json") == json1);

    // Delete one checkpoint: only that cell's train + downstream rerun.
    fs::remove(base / "out" / "trained" / "seed1" / "model.bin");
    const auto third = run_pipeline(manifest, 1);
    CHECK(third.stages_executed > 0);
    CHECK(third.stages_executed < first.stages_executed);
    CHECK(slurp(base / "out" / "results.csv") == csv1);
    CHECK(slurp(base / "out" / "results.json") == json1);

    // Scores are available per condition and regime.
    const auto raw = condition_scores(manifest, "trained", "raw");
    const auto adapted = condition_scores(manifest, "trained", "adapted");
    CHECK(raw.size() == 2);
    CHECK(adapted.size() == 2);

    fs::remove_all(base);
}

TEST_CASE("report_table formats the documented schema") {
    const auto base = fs::temp_directory_path() / "nlm_pipe_report";
    fs::remove_all(base);
    const auto fx = base / "fixture";
    make_fixture(small_spec(fx, 6));
    auto manifest = small_manifest(fx, base / "out");
    const auto ledger = run_pipeline(manifest, 2);

    // Self-comparison: Wilcoxon p = 1.0 in the table.
    report_table(manifest, ledger, {{"trained", "trained"}},
                 (base / "self.csv").string(), (base / "self.json").string());
    const auto csv = slurp(base / "self.csv");
    CHECK(csv.find("condition,raw_mean,raw_sd,adapted_mean,adapted_sd,"
                   "delta_pct_raw_to_adapted") != std::string::npos);
    CHECK(csv.find("condition_a,condition_b,regime,u,p,significant,hl_estimate") !=
          std::string::npos);
    CHECK(csv.find("1.000000") != std::string::npos);  // p = 1 for self-comparison

    // Percentage definition: before 0.5, after 0.6 -> +20%.
    CHECK(100.0 * (0.6 - 0.5) / 0.5 == doctest::Approx(20.0));

    // Incomplete condition: reporting error naming the missing runs.
    CHECK_THROWS_AS(report_table(manifest, ledger, {{"trained", "missing_cond"}},
                                 (base / "bad.csv").string(), (base / "bad.json").string()),
                    ScoreError);
    fs::remove_all(base);
}

TEST_CASE("manifest parsing honours the output root environment variable") {
    const auto base = fs::temp_directory_path() / "nlm_manifest";
    fs::remove_all(base);
    fs::create_directories(base);
    const auto path = base / "manifest.json";
    std::ofstream out(path);
    out << R"({
      "output_dir": "runs/exp",
      "seeds": [1],
      "tokenizer": "tok.json",
      "model": {"context_length": 12, "n_layers": 1, "n_heads": 1, "d_model": 4},
      "hyper": {"max_epochs": 3, "batch_size": 4},
      "conditions": [{"name": "c1", "corpus": "c.jsonl"}],
      "scoring": {"stimuli": "s.jsonl", "responses": "resp", "split_seed": 7,
                  "pooling": "mean", "split": "by-passage"},
      "comparisons": [["c1", "c1"]]
    })";
    out.close();

    setenv("NEUROLM_OUT", (base / "rooted").c_str(), 1);
    const auto m = manifest_from_json_file(path.string());
    unsetenv("NEUROLM_OUT");
    CHECK(m.output_dir == (base / "rooted" / "runs" / "exp").string());
    CHECK(m.seeds == std::vector<std::uint64_t>{1});
    CHECK(m.model.n_layers == 1);
    CHECK(m.hyper.max_epochs == 3);
    CHECK(m.scoring.pooling == Pooling::Mean);
    CHECK(m.scoring.split_mode == SplitMode::ByPassage);
    CHECK(m.scoring.split_seed == 7);
    CHECK(m.comparisons.size() == 1);
    fs::remove_all(base);
}

TEST_CASE("ledger save/load roundtrip") {
    RunLedger ledger;
    ledger.entries.push_back({"c1", 3, "complete", {"/tmp/a"}, {"deadbeef"}, 1.25});
    ledger.stages_executed = 4;
    ledger.stages_skipped = 2;
    const auto path = fs::temp_directory_path() / "nlm_ledger.json";
    save_ledger(ledger, path.string());
    const auto r = load_ledger(path.string());
    REQUIRE(r.entries.size() == 1);
    CHECK(r.entries[0].condition == "c1");
    CHECK(r.entries[0].seed == 3);
    CHECK(r.entries[0].status == "complete");
    CHECK(r.entries[0].artifacts == std::vector<std::string>{"/tmp/a"});
    CHECK(r.entries[0].wall_seconds == doctest::Approx(1.25));
    CHECK(r.stages_executed == 4);
    CHECK(r.stages_skipped == 2);
    fs::remove(path);
}
