#include "tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include <json.hpp>

#include "errors.hpp"

namespace nlm {

namespace {

using json = nlohmann::json;

json bytes_to_json(const std::string& s) {
    json arr = json::array();
    for (unsigned char c : s) arr.push_back(static_cast<int>(c));
    return arr;
}

std::string json_to_bytes(const json& arr) {
    std::string s;
    for (const auto& v : arr) s.push_back(static_cast<char>(v.get<int>()));
    return s;
}

json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    json j;
    is >> j;
    return j;
}

}  // namespace

BpeModel train_bpe(const std::string& corpus, std::uint32_t vocab_size) {
    constexpr std::uint32_t kReserved = 1;  // eos
    if (vocab_size <= 256 + kReserved)
        throw ConfigError("train_bpe: vocab_size must exceed 256 + " + std::to_string(kReserved));

    BpeModel model;
    model.symbol_bytes.resize(256);
    for (int b = 0; b < 256; ++b) model.symbol_bytes[static_cast<std::size_t>(b)] = std::string(1, static_cast<char>(b));

    std::vector<std::uint32_t> seq;
    seq.reserve(corpus.size());
    for (unsigned char c : corpus) seq.push_back(c);

    const std::uint32_t max_merges = vocab_size - 256 - kReserved;
    for (std::uint32_t m = 0; m < max_merges; ++m) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> counts;
        for (std::size_t i = 0; i + 1 < seq.size(); ++i) ++counts[{seq[i], seq[i + 1]}];

        std::pair<std::uint32_t, std::uint32_t> best{};
        std::size_t best_count = 0;
        for (const auto& [pair, count] : counts) {
            if (count < 2) continue;
            if (count > best_count) {
                best = pair;
                best_count = count;
            } else if (count == best_count) {
                const auto key = [&](const std::pair<std::uint32_t, std::uint32_t>& p) {
                    return std::make_pair(model.symbol_bytes[p.first], model.symbol_bytes[p.second]);
                };
                if (key(pair) < key(best)) best = pair;
            }
        }
        if (best_count < 2) break;

        const auto new_id = static_cast<std::uint32_t>(model.symbol_bytes.size());
        model.merges.push_back(best);
        model.symbol_bytes.push_back(model.symbol_bytes[best.first] + model.symbol_bytes[best.second]);

        std::vector<std::uint32_t> merged;
        merged.reserve(seq.size());
        for (std::size_t i = 0; i < seq.size();) {
            if (i + 1 < seq.size() && seq[i] == best.first && seq[i + 1] == best.second) {
                merged.push_back(new_id);
                i += 2;
            } else {
                merged.push_back(seq[i]);
                ++i;
            }
        }
        seq.swap(merged);
    }

    model.eos_id = static_cast<std::uint32_t>(model.symbol_bytes.size());
    model.symbol_bytes.emplace_back();  // eos has no surface form
    model.vocab_size = model.eos_id + 1;
    return model;
}

TokenStream bpe_encode(const BpeModel& model, const std::string& text) {
    std::vector<std::uint32_t> seq;
    seq.reserve(text.size());
    for (unsigned char c : text) seq.push_back(c);

    for (std::size_t m = 0; m < model.merges.size(); ++m) {
        const auto [left, right] = model.merges[m];
        const auto new_id = static_cast<std::uint32_t>(256 + m);
        std::vector<std::uint32_t> merged;
        merged.reserve(seq.size());
        for (std::size_t i = 0; i < seq.size();) {
            if (i + 1 < seq.size() && seq[i] == left && seq[i + 1] == right) {
                merged.push_back(new_id);
                i += 2;
            } else {
                merged.push_back(seq[i]);
                ++i;
            }
        }
        seq.swap(merged);
    }

    TokenStream out;
    out.ids = std::move(seq);
    out.vocab_size = model.vocab_size;
    return out;
}

std::string bpe_decode(const BpeModel& model, const TokenStream& ids) {
    std::string out;
    for (std::uint32_t id : ids.ids) {
        if (id >= model.symbol_bytes.size())
            throw InputError("bpe_decode: unknown id " + std::to_string(id));
        out += model.symbol_bytes[id];
    }
    return out;
}

void save_bpe(const BpeModel& model, const std::string& path) {
    json merges = json::array();
    for (const auto& [l, r] : model.merges)
        merges.push_back(json::array({bytes_to_json(model.symbol_bytes[l]), bytes_to_json(model.symbol_bytes[r])}));
    json j = {
        {"type", "bpe"},
        {"vocab_size", model.vocab_size},
        {"specials", {{"eos", model.eos_id}}},
        {"merges", merges},
    };
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << j.dump(1, '\t') << '\n';
}

BpeModel load_bpe(const std::string& path) {
    const json j = load_json_file(path);
    if (j.value("type", "") != "bpe") throw IoError("not a bpe model file: " + path);

    BpeModel model;
    model.symbol_bytes.resize(256);
    for (int b = 0; b < 256; ++b) model.symbol_bytes[static_cast<std::size_t>(b)] = std::string(1, static_cast<char>(b));
    std::map<std::string, std::uint32_t> by_bytes;
    for (std::uint32_t b = 0; b < 256; ++b) by_bytes[model.symbol_bytes[b]] = b;

    for (const auto& m : j.at("merges")) {
        const std::string lb = json_to_bytes(m.at(0));
        const std::string rb = json_to_bytes(m.at(1));
        const auto li = by_bytes.find(lb);
        const auto ri = by_bytes.find(rb);
        if (li == by_bytes.end() || ri == by_bytes.end())
            throw IoError("merge references unknown symbol in " + path);
        const auto new_id = static_cast<std::uint32_t>(model.symbol_bytes.size());
        model.merges.emplace_back(li->second, ri->second);
        model.symbol_bytes.push_back(lb + rb);
        by_bytes[lb + rb] = new_id;
    }
    model.eos_id = j.at("specials").at("eos").get<std::uint32_t>();
    model.symbol_bytes.emplace_back();
    model.vocab_size = j.at("vocab_size").get<std::uint32_t>();
    if (model.vocab_size != model.symbol_bytes.size() || model.eos_id + 1 != model.vocab_size)
        throw IoError("inconsistent bpe model file: " + path);
    return model;
}

namespace {

std::vector<std::string> whitespace_split(const std::string& text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) tokens.push_back(text.substr(start, i - start));
    }
    return tokens;
}

}  // namespace

WhitespaceVocab build_whitespace_vocab(const std::string& corpus) {
    WhitespaceVocab vocab;
    for (const auto& tok : whitespace_split(corpus)) vocab.token_to_id[tok] = 0;
    std::uint32_t next = 0;
    for (auto& [tok, id] : vocab.token_to_id) {
        id = next++;
        vocab.id_to_token.push_back(tok);
    }
    vocab.eos_id = next;
    vocab.id_to_token.emplace_back();
    vocab.vocab_size = next + 1;
    return vocab;
}

TokenStream whitespace_encode(const WhitespaceVocab& vocab, const std::string& text) {
    TokenStream out;
    out.vocab_size = vocab.vocab_size;
    for (const auto& tok : whitespace_split(text)) {
        const auto it = vocab.token_to_id.find(tok);
        if (it == vocab.token_to_id.end())
            throw InputError("whitespace_encode: token not in vocabulary: \"" + tok + "\"");
        out.ids.push_back(it->second);
    }
    return out;
}

std::string whitespace_decode(const WhitespaceVocab& vocab, const TokenStream& ids) {
    std::string out;
    for (std::uint32_t id : ids.ids) {
        if (id >= vocab.id_to_token.size())
            throw InputError("whitespace_decode: unknown id " + std::to_string(id));
        if (id == vocab.eos_id) continue;
        if (!out.empty()) out += ' ';
        out += vocab.id_to_token[id];
    }
    return out;
}

void save_whitespace(const WhitespaceVocab& vocab, const std::string& path) {
    json tokens = json::array();
    for (std::uint32_t id = 0; id < vocab.eos_id; ++id) tokens.push_back(vocab.id_to_token[id]);
    json j = {
        {"type", "whitespace"},
        {"vocab_size", vocab.vocab_size},
        {"specials", {{"eos", vocab.eos_id}}},
        {"tokens", tokens},
    };
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << j.dump(1, '\t') << '\n';
}

WhitespaceVocab load_whitespace(const std::string& path) {
    const json j = load_json_file(path);
    if (j.value("type", "") != "whitespace") throw IoError("not a whitespace vocab file: " + path);
    WhitespaceVocab vocab;
    std::uint32_t next = 0;
    for (const auto& t : j.at("tokens")) {
        const std::string tok = t.get<std::string>();
        vocab.token_to_id[tok] = next++;
        vocab.id_to_token.push_back(tok);
    }
    vocab.eos_id = j.at("specials").at("eos").get<std::uint32_t>();
    vocab.id_to_token.emplace_back();
    vocab.vocab_size = j.at("vocab_size").get<std::uint32_t>();
    if (vocab.eos_id != next || vocab.vocab_size != next + 1)
        throw IoError("inconsistent whitespace vocab file: " + path);
    return vocab;
}

TokenStream Tokenizer::encode(const std::string& text) const {
    return kind == Kind::Bpe ? bpe_encode(bpe, text) : whitespace_encode(ws, text);
}

std::string Tokenizer::decode(const TokenStream& ids) const {
    return kind == Kind::Bpe ? bpe_decode(bpe, ids) : whitespace_decode(ws, ids);
}

Tokenizer load_tokenizer(const std::string& path) {
    const json j = load_json_file(path);
    Tokenizer t{};
    const std::string type = j.value("type", "");
    if (type == "bpe") {
        t.kind = Tokenizer::Kind::Bpe;
        t.bpe = load_bpe(path);
    } else if (type == "whitespace") {
        t.kind = Tokenizer::Kind::Whitespace;
        t.ws = load_whitespace(path);
    } else {
        throw IoError("unknown tokenizer type in " + path);
    }
    return t;
}

}  // namespace nlm
