#include "encoding.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"
#include "rng.hpp"

namespace nlm {

namespace {

using json = nlohmann::json;

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<Eigen::MatrixXd> represent(const Model& model, const StimulusSet& stimuli,
                                       const Tokenizer& tokenizer, Pooling pooling) {
    const std::size_t n_layers = model.config.n_layers + 1;
    const std::size_t d = model.config.d_model;
    std::vector<Eigen::MatrixXd> out(n_layers);
    for (auto& m : out) m.resize(static_cast<Eigen::Index>(stimuli.items.size()), static_cast<Eigen::Index>(d));

    for (std::size_t s = 0; s < stimuli.items.size(); ++s) {
        const TokenStream toks = tokenizer.encode(stimuli.items[s].sentence);
        if (toks.ids.empty())
            throw ScoreError("stimulus tokenizes to nothing: " + stimuli.items[s].stimulus_id);
        const ForwardResult res = forward(model, toks.ids);
        const std::size_t t_len = res.activations.seq_len;
        for (std::size_t layer = 0; layer < n_layers; ++layer) {
            const auto& act = res.activations.layers[layer];
            for (std::size_t j = 0; j < d; ++j) {
                double v;
                if (pooling == Pooling::LastToken) {
                    v = act[(t_len - 1) * d + j];
                } else {
                    v = 0.0;
                    for (std::size_t t = 0; t < t_len; ++t) v += act[t * d + j];
                    v /= static_cast<double>(t_len);
                }
                out[layer](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = v;
            }
        }
    }
    return out;
}

SplitSpec split_80_20(std::size_t n, std::uint64_t seed, SplitMode mode,
                      const std::vector<std::string>& passage_ids) {
    if (n < 5) throw DomainError("split_80_20: need at least 5 stimuli");
    const auto target = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));

    SplitSpec spec;
    spec.seed = seed;
    spec.mode = mode;
    Rng rng(seed);

    if (mode == SplitMode::Shuffled) {
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
            std::swap(perm[i], perm[j]);
        }
        spec.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(target));
        spec.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(target), perm.end());
    } else {
        if (passage_ids.size() != n)
            throw DomainError("split_80_20: by-passage mode needs passage ids for all stimuli");
        std::vector<std::string> passages;
        for (const auto& p : passage_ids)
            if (std::find(passages.begin(), passages.end(), p) == passages.end())
                passages.push_back(p);
        for (std::size_t i = passages.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
            std::swap(passages[i], passages[j]);
        }
        std::size_t assigned = 0;
        for (const auto& p : passages) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < n; ++i)
                if (passage_ids[i] == p) members.push_back(i);
            const bool to_train = assigned < target;
            for (std::size_t i : members)
                (to_train ? spec.train : spec.test).push_back(i);
            if (to_train) assigned += members.size();
        }
        std::sort(spec.train.begin(), spec.train.end());
        std::sort(spec.test.begin(), spec.test.end());
        if (spec.test.empty()) throw DomainError("split_80_20: passages too coarse for a test side");
    }
    return spec;
}

Eigen::MatrixXd fit_linear_map(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double ridge) {
    if (x.rows() != y.rows() || x.rows() < 2) throw InputError("fit_linear_map: bad shapes");
    if (!x.allFinite() || !y.allFinite()) throw InputError("fit_linear_map: non-finite input");
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();

    Eigen::MatrixXd xa(n, d + 1);
    xa.leftCols(d) = x;
    xa.col(d).setOnes();

    if (ridge == 0.0) {
        return xa.completeOrthogonalDecomposition().solve(y);
    }
    Eigen::MatrixXd gram = xa.transpose() * xa;
    for (Eigen::Index i = 0; i < d; ++i) gram(i, i) += ridge;  // bias unpenalized
    return gram.ldlt().solve(xa.transpose() * y);
}

std::optional<double> pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size() || x.size() < 2) throw InputError("pearson: need equal length >= 2");
    const double mx = x.mean();
    const double my = y.mean();
    const Eigen::VectorXd cx = x.array() - mx;
    const Eigen::VectorXd cy = y.array() - my;
    const double sx = cx.squaredNorm();
    const double sy = cy.squaredNorm();
    if (sx == 0.0 || sy == 0.0) return std::nullopt;
    return cx.dot(cy) / std::sqrt(sx * sy);
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

double predictivity(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                    const SplitSpec& split, double ridge) {
    const Eigen::MatrixXd x_train = take_rows(features, split.train);
    const Eigen::MatrixXd y_train = take_rows(targets, split.train);
    const Eigen::MatrixXd x_test = take_rows(features, split.test);
    const Eigen::MatrixXd y_test = take_rows(targets, split.test);

    const Eigen::MatrixXd w = fit_linear_map(x_train, y_train, ridge);
    Eigen::MatrixXd xa(x_test.rows(), x_test.cols() + 1);
    xa.leftCols(x_test.cols()) = x_test;
    xa.col(x_test.cols()).setOnes();
    const Eigen::MatrixXd pred = xa * w;

    std::vector<double> voxel_r;
    for (Eigen::Index vx = 0; vx < y_test.cols(); ++vx) {
        const auto r = pearson(pred.col(vx), y_test.col(vx));
        if (r) voxel_r.push_back(*r);
    }
    if (voxel_r.empty()) throw ScoreError("all voxels have undefined correlations");
    return median(std::move(voxel_r));
}

}  // namespace

double raw_predictivity(const Eigen::MatrixXd& layer_repr, const Eigen::MatrixXd& responses,
                        const SplitSpec& split, double ridge) {
    return predictivity(layer_repr, responses, split, ridge);
}

double estimate_ceiling(const NeuroResponseSet& responses, const SplitSpec& split, double ridge) {
    const std::size_t n_subjects = responses.responses.size();
    if (n_subjects < 2) throw ConfigError("estimate_ceiling: need at least 2 subjects");
    const Eigen::Index voxels = responses.responses[0].cols();
    for (const auto& m : responses.responses)
        if (m.cols() != voxels)
            throw ConfigError("estimate_ceiling: subjects must share voxel count");

    double total = 0.0;
    for (std::size_t s = 0; s < n_subjects; ++s) {
        Eigen::MatrixXd others = Eigen::MatrixXd::Zero(responses.responses[0].rows(), voxels);
        for (std::size_t o = 0; o < n_subjects; ++o)
            if (o != s) others += responses.responses[o];
        others /= static_cast<double>(n_subjects - 1);
        total += predictivity(others, responses.responses[s], split, ridge);
    }
    return total / static_cast<double>(n_subjects);
}

BrainScoreReport brain_score(const Model& model, const StimulusSet& stimuli,
                             const NeuroResponseSet& responses, const Tokenizer& tokenizer,
                             const ScoreConfig& config) {
    const std::size_t n = stimuli.items.size();
    for (const auto& m : responses.responses)
        if (static_cast<std::size_t>(m.rows()) != n)
            throw InputError("brain_score: responses disagree with stimulus count");

    std::vector<std::string> passages;
    passages.reserve(n);
    for (const auto& st : stimuli.items) passages.push_back(st.passage_id);
    const SplitSpec split = split_80_20(n, config.split_seed, config.split_mode, passages);

    const std::vector<Eigen::MatrixXd> reprs =
        represent(model, stimuli, tokenizer, config.pooling);

    BrainScoreReport report;
    report.seed = config.split_seed;
    report.pooling = config.pooling == Pooling::LastToken ? "last_token" : "mean";
    report.split_mode = config.split_mode == SplitMode::Shuffled ? "shuffled" : "by-passage";
    report.ceiling = estimate_ceiling(responses, split, config.ridge);

    for (const auto& layer_repr : reprs) {
        double raw = 0.0;
        for (const auto& subject : responses.responses)
            raw += raw_predictivity(layer_repr, subject, split, config.ridge);
        raw /= static_cast<double>(responses.responses.size());
        report.raw.push_back(raw);
        report.normalized.push_back(report.ceiling > 0.0 ? raw / report.ceiling : 0.0);
    }

    report.best_layer = 0;
    for (std::size_t i = 1; i < report.normalized.size(); ++i)
        if (report.normalized[i] > report.normalized[report.best_layer]) report.best_layer = i;
    report.best_score = report.normalized[report.best_layer];
    return report;
}

SeedAggregate aggregate_seeds(const std::vector<BrainScoreReport>& reports) {
    if (reports.empty()) throw DomainError("aggregate_seeds: no reports");
    SeedAggregate agg;
    for (const auto& r : reports) agg.mean += r.best_score;
    agg.mean /= static_cast<double>(reports.size());
    if (reports.size() == 1) {
        agg.single_sample = true;
        agg.sd = 0.0;
        return agg;
    }
    double ss = 0.0;
    for (const auto& r : reports) {
        const double d = r.best_score - agg.mean;
        ss += d * d;
    }
    agg.sd = std::sqrt(ss / static_cast<double>(reports.size() - 1));
    return agg;
}

StimulusSet load_stimuli_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    StimulusSet set;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        set.items.push_back({j.at("stimulus_id").get<std::string>(),
                             j.at("sentence").get<std::string>(),
                             j.at("passage_id").get<std::string>(),
                             j.at("experiment").get<std::string>()});
    }
    return set;
}

void save_stimuli_jsonl(const StimulusSet& stimuli, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    for (const auto& s : stimuli.items) {
        const json j = {{"stimulus_id", s.stimulus_id},
                        {"sentence", s.sentence},
                        {"passage_id", s.passage_id},
                        {"experiment", s.experiment}};
        os << j.dump() << '\n';
    }
}

NeuroResponseSet load_responses(const std::string& dir) {
    const std::filesystem::path root(dir);
    std::ifstream ms(root / "metadata.json");
    if (!ms) throw IoError("cannot open: " + (root / "metadata.json").string());
    json meta;
    ms >> meta;

    NeuroResponseSet set;
    for (const auto& subj : meta.at("subjects")) {
        const std::string id = subj.at("id").get<std::string>();
        const std::string file = subj.at("file").get<std::string>();
        const auto voxels = subj.at("voxels").get<Eigen::Index>();

        std::ifstream cs(root / file);
        if (!cs) throw IoError("cannot open: " + (root / file).string());
        std::vector<std::vector<double>> rows;
        std::string line;
        while (std::getline(cs, line)) {
            if (line.empty()) continue;
            std::vector<double> row;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
            if (static_cast<Eigen::Index>(row.size()) != voxels)
                throw IoError("voxel count mismatch in " + file);
            rows.push_back(std::move(row));
        }
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), voxels);
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (Eigen::Index c = 0; c < voxels; ++c)
                m(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
        if (!m.allFinite()) throw IoError("non-finite responses in " + file);
        set.subject_ids.push_back(id);
        set.responses.push_back(std::move(m));
    }
    return set;
}

void save_responses(const NeuroResponseSet& responses, const std::string& dir) {
    const std::filesystem::path root(dir);
    std::filesystem::create_directories(root);
    json subjects = json::array();
    for (std::size_t s = 0; s < responses.responses.size(); ++s) {
        const std::string file = responses.subject_ids[s] + ".csv";
        subjects.push_back({{"id", responses.subject_ids[s]},
                            {"file", file},
                            {"voxels", responses.responses[s].cols()}});
        std::ofstream os(root / file);
        if (!os) throw IoError("cannot open for writing: " + (root / file).string());
        os.precision(17);
        const auto& m = responses.responses[s];
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                if (c) os << ',';
                os << m(r, c);
            }
            os << '\n';
        }
    }
    std::ofstream ms(root / "metadata.json");
    ms << json{{"subjects", subjects}}.dump(1, '\t') << '\n';
}

void save_report(const BrainScoreReport& report, const std::string& path,
                 const std::string& checkpoint_hash, const std::string& stimuli_hash) {
    const json j = {
        {"raw", report.raw},
        {"normalized", report.normalized},
        {"ceiling", report.ceiling},
        {"best_layer", report.best_layer},
        {"best_score", report.best_score},
        {"seed", report.seed},
        {"pooling", report.pooling},
        {"split_mode", report.split_mode},
        {"checkpoint_hash", checkpoint_hash},
        {"stimuli_hash", stimuli_hash},
    };
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << j.dump(1, '\t') << '\n';
}

BrainScoreReport load_report(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    json j;
    is >> j;
    BrainScoreReport r;
    r.raw = j.at("raw").get<std::vector<double>>();
    r.normalized = j.at("normalized").get<std::vector<double>>();
    r.ceiling = j.at("ceiling").get<double>();
    r.best_layer = j.at("best_layer").get<std::size_t>();
    r.best_score = j.at("best_score").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.pooling = j.at("pooling").get<std::string>();
    r.split_mode = j.at("split_mode").get<std::string>();
    return r;
}

}  // namespace nlm
