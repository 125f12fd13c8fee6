#include "fixture.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "corpusgen.hpp"
#include "encoding.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "tokenizer.hpp"

namespace nlm {

namespace {

using json = nlohmann::json;

void validate_spec(const FixtureSpec& spec) {
    if (spec.vocab_types < 1 || spec.vocab_types > 512)
        throw ConfigError("fixture: vocab_types must be in [1, 512]");
    if (spec.n_stimuli < 5 || spec.n_stimuli > 200)
        throw ConfigError("fixture: n_stimuli must be in [5, 200]");
    if (spec.stimulus_length < 1) throw ConfigError("fixture: stimulus_length must be >= 1");
    if (spec.passage_size < 1) throw ConfigError("fixture: passage_size must be >= 1");
    if (spec.n_subjects < 1 || spec.n_subjects > 16)
        throw ConfigError("fixture: n_subjects must be in [1, 16]");
    if (spec.voxels < 1 || spec.voxels > 2048) throw ConfigError("fixture: voxels must be in [1, 2048]");
    if (spec.corpus_tokens < spec.doc_length)
        throw ConfigError("fixture: corpus_tokens must cover at least one document");
    if (spec.out_dir.empty()) throw ConfigError("fixture: out_dir required");
}

std::string render_tokens(const std::uint32_t* ids, std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += 't' + std::to_string(ids[i]);
    }
    return s;
}

}  // namespace

FixtureSpec fixture_spec_from_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    json j;
    is >> j;

    FixtureSpec spec;
    spec.vocab_types = j.value("vocab_types", spec.vocab_types);
    spec.close_prob = j.value("close_prob", spec.close_prob);
    spec.corpus_tokens = j.value("corpus_tokens", spec.corpus_tokens);
    spec.doc_length = j.value("doc_length", spec.doc_length);
    spec.n_stimuli = j.value("n_stimuli", spec.n_stimuli);
    spec.stimulus_length = j.value("stimulus_length", spec.stimulus_length);
    spec.passage_size = j.value("passage_size", spec.passage_size);
    spec.n_subjects = j.value("n_subjects", spec.n_subjects);
    spec.voxels = j.value("voxels", spec.voxels);
    spec.planted_layer = j.value("planted_layer", spec.planted_layer);
    spec.snr = j.value("snr", spec.snr);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("reference_checkpoint"))
        spec.reference_checkpoint = j.at("reference_checkpoint").get<std::string>();
    if (j.contains("reference_config")) {
        const auto& rc = j.at("reference_config");
        spec.reference_config.vocab_size = rc.value("vocab_size", 0u);
        spec.reference_config.context_length = rc.value("context_length", 64u);
        spec.reference_config.n_layers = rc.value("n_layers", 2u);
        spec.reference_config.n_heads = rc.value("n_heads", 2u);
        spec.reference_config.d_model = rc.value("d_model", 32u);
        spec.reference_config.d_mlp = rc.value("d_mlp", 64u);
        spec.reference_config.seed = rc.value("seed", std::uint64_t{0});
    }
    spec.out_dir = j.value("out_dir", "");
    return spec;
}

void make_fixture(const FixtureSpec& spec) {
    validate_spec(spec);
    std::filesystem::create_directories(spec.out_dir);
    const std::filesystem::path root(spec.out_dir);

    // Whitespace vocabulary over the full alphabet, so stimuli never hit
    // out-of-vocabulary tokens even if the corpus misses a rare type.
    std::vector<std::uint32_t> alphabet(spec.vocab_types);
    for (std::uint32_t i = 0; i < spec.vocab_types; ++i) alphabet[i] = i;
    const WhitespaceVocab vocab =
        build_whitespace_vocab(render_tokens(alphabet.data(), alphabet.size()));
    save_whitespace(vocab, (root / "tokenizer.json").string());

    // Training corpus: one long generated stream cut into documents.
    DyckConfig dyck;
    dyck.vocab_size = spec.vocab_types;
    dyck.close_prob = spec.close_prob;
    dyck.target_length = spec.corpus_tokens;
    dyck.seed = spec.seed;
    const TokenStream corpus = generate_dyck(dyck);
    {
        std::ofstream os(root / "corpus.jsonl");
        if (!os) throw IoError("cannot open for writing: " + (root / "corpus.jsonl").string());
        for (std::size_t off = 0; off + spec.doc_length <= corpus.ids.size();
             off += spec.doc_length) {
            const json j = {{"text", render_tokens(&corpus.ids[off], spec.doc_length)}};
            os << j.dump() << '\n';
        }
    }

    // Stimuli: fresh sentences from the same grammar, grouped into passages.
    StimulusSet stimuli;
    for (std::uint32_t s = 0; s < spec.n_stimuli; ++s) {
        DyckConfig sc = dyck;
        sc.target_length = spec.stimulus_length;
        sc.seed = spec.seed * 1000003ULL + 17ULL + s;
        const TokenStream toks = generate_dyck(sc);
        stimuli.items.push_back({
            "stim" + std::to_string(s),
            render_tokens(toks.ids.data(), toks.ids.size()),
            "passage" + std::to_string(s / spec.passage_size),
            "exp2",
        });
    }
    save_stimuli_jsonl(stimuli, (root / "stimuli.jsonl").string());

    // Responses: seeded linear readout of the reference model's planted
    // layer, shared across subjects, plus per-subject Gaussian noise.
    Model reference;
    if (spec.reference_checkpoint) {
        reference = load_checkpoint(*spec.reference_checkpoint);
    } else {
        ModelConfig rc = spec.reference_config;
        if (rc.vocab_size == 0) rc.vocab_size = vocab.vocab_size;
        reference = init_model(rc);
    }
    if (spec.planted_layer > reference.config.n_layers)
        throw ConfigError("fixture: planted_layer beyond reference model depth");

    Tokenizer tok;
    tok.kind = Tokenizer::Kind::Whitespace;
    tok.ws = vocab;
    const std::vector<Eigen::MatrixXd> reprs =
        represent(reference, stimuli, tok, Pooling::LastToken);
    const Eigen::MatrixXd& planted = reprs[spec.planted_layer];

    // Whiten the planted representation so every direction of the layer
    // contributes equally to the readout; otherwise the dominant principal
    // components (shared by any model of this family) swamp the directions
    // that actually distinguish the reference model.
    Eigen::MatrixXd centered = planted;
    centered.rowwise() -= planted.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-9 * sv(0)) ++rank;
    const Eigen::MatrixXd white =
        svd.matrixU().leftCols(rank) * std::sqrt(static_cast<double>(planted.rows() - 1));

    Rng rng(spec.seed ^ 0x5eedf1c7u);
    Eigen::MatrixXd readout(rank, spec.voxels);
    for (Eigen::Index i = 0; i < readout.rows(); ++i)
        for (Eigen::Index c = 0; c < readout.cols(); ++c) readout(i, c) = rng.gaussian();
    Eigen::MatrixXd signal = white * readout;

    // Unit-variance columns so snr is meaningful per voxel.
    for (Eigen::Index c = 0; c < signal.cols(); ++c) {
        const double mean = signal.col(c).mean();
        const double sd = std::sqrt((signal.col(c).array() - mean).square().sum() /
                                    static_cast<double>(signal.rows() - 1));
        if (sd > 0.0) signal.col(c) = (signal.col(c).array() - mean) / sd;
    }

    NeuroResponseSet responses;
    const double noise_sd = spec.snr > 0.0 ? 1.0 / spec.snr : 0.0;
    for (std::uint32_t s = 0; s < spec.n_subjects; ++s) {
        Eigen::MatrixXd m = signal;
        if (noise_sd > 0.0)
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) += noise_sd * rng.gaussian();
        responses.subject_ids.push_back("subject" + std::to_string(s));
        responses.responses.push_back(std::move(m));
    }
    save_responses(responses, (root / "responses").string());
}

}  // namespace nlm
