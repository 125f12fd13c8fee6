#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <map>
#include <string>

#include "errors.hpp"
#include "rng.hpp"
#include "tokenizer.hpp"

using namespace nlm;

namespace {

// Exhaustive adjacent-pair counter over the byte sequence, used as an
// oracle for the first merge choice.
std::map<std::pair<char, char>, int> pair_counts(const std::string& s) {
    std::map<std::pair<char, char>, int> counts;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) ++counts[{s[i], s[i + 1]}];
    return counts;
}

std::string tmp_path(const char* name) {
    return std::string("/tmp/nlm_tok_") + name;
}

}  // namespace

TEST_CASE("bpe first merge is the most frequent pair") {
    // "aaab": pair counts are (a,a):2, (a,b):1, so the single merge budget
    // goes to (a,a).
    const auto counts = pair_counts("aaab");
    CHECK(counts.at({'a', 'a'}) == 2);
    CHECK(counts.at({'a', 'b'}) == 1);

    const auto model = train_bpe("aaab", 256 + 1 + 1);  // one merge + eos
    REQUIRE(model.merges.size() == 1);
    CHECK(model.merges[0].first == static_cast<std::uint32_t>('a'));
    CHECK(model.merges[0].second == static_cast<std::uint32_t>('a'));
    CHECK(model.symbol_bytes[256] == "aa");
    CHECK(model.vocab_size == 258);
    CHECK(model.eos_id == 257);
}

TEST_CASE("bpe stops when no pair repeats and on empty corpus") {
    const auto empty = train_bpe("", 1000);
    CHECK(empty.merges.empty());
    // All pairs distinct: no pair occurs twice, so no merges are learned
    // even with budget remaining.
    const auto flat = train_bpe("abcdef", 1000);
    CHECK(flat.merges.empty());
}

TEST_CASE("bpe rejects too-small vocab budget") {
    CHECK_THROWS_AS(train_bpe("abc", 257), ConfigError);
    CHECK_THROWS_AS(train_bpe("abc", 100), ConfigError);
    CHECK_NOTHROW(train_bpe("abc", 258));
}

TEST_CASE("bpe roundtrip on training corpus and utf-8") {
    const std::string corpus = "the cat sat on the mat, the cat sat";
    const auto model = train_bpe(corpus, 280);
    CHECK(bpe_decode(model, bpe_encode(model, corpus)) == corpus);
    CHECK(bpe_decode(model, bpe_encode(model, "héllo")) == "héllo");
    CHECK(bpe_decode(model, bpe_encode(model, "")).empty());
}

TEST_CASE("bpe roundtrip on random 1 KiB bytes") {
    Rng rng(7);
    std::string blob;
    for (int i = 0; i < 1024; ++i) blob += static_cast<char>(rng.below(256));
    const auto model = train_bpe("abab ababab", 280);
    const auto ids = bpe_encode(model, blob);
    CHECK(bpe_decode(model, ids) == blob);
}

TEST_CASE("bpe training is deterministic and compression is monotone") {
    const std::string corpus = "banana bandana banana bandana cabana";
    const auto m1 = train_bpe(corpus, 300);
    const auto m2 = train_bpe(corpus, 300);
    CHECK(m1.merges == m2.merges);

    // Token count never exceeds byte count, and adding merges never
    // lengthens the encoding of the training corpus.
    std::size_t prev = corpus.size() + 1;
    for (std::uint32_t extra = 1; extra <= 8; ++extra) {
        const auto m = train_bpe(corpus, 256 + extra + 1);
        const auto n = bpe_encode(m, corpus).ids.size();
        CHECK(n <= corpus.size());
        CHECK(n <= prev);
        prev = n;
    }
}

TEST_CASE("bpe save/load preserves behaviour") {
    const std::string corpus = "mississippi mississippi";
    const auto model = train_bpe(corpus, 270);
    const auto path = tmp_path("bpe.json");
    save_bpe(model, path);
    const auto loaded = load_bpe(path);
    CHECK(loaded.merges == model.merges);
    CHECK(loaded.vocab_size == model.vocab_size);
    CHECK(loaded.eos_id == model.eos_id);
    CHECK(bpe_encode(loaded, corpus).ids == bpe_encode(model, corpus).ids);
    std::remove(path.c_str());
}

TEST_CASE("whitespace vocab maps tokens in sorted order with eos last") {
    const auto v = build_whitespace_vocab("b a c a");
    CHECK(v.vocab_size == 4);  // a b c + eos
    CHECK(v.token_to_id.at("a") == 0);
    CHECK(v.token_to_id.at("b") == 1);
    CHECK(v.token_to_id.at("c") == 2);
    CHECK(v.eos_id == 3);

    const auto ids = whitespace_encode(v, "a b a");
    CHECK(ids.ids == std::vector<std::uint32_t>{0, 1, 0});
    CHECK(whitespace_decode(v, ids) == "a b a");
}

TEST_CASE("whitespace encode rejects out-of-vocabulary tokens by name") {
    const auto v = build_whitespace_vocab("a");
    try {
        whitespace_encode(v, "a c");
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("c") != std::string::npos);
    }
}

TEST_CASE("whitespace save/load and unified loader") {
    const auto v = build_whitespace_vocab("t0 t1 t2");
    const auto wpath = tmp_path("ws.json");
    save_whitespace(v, wpath);
    const auto tok = load_tokenizer(wpath);
    CHECK(tok.kind == Tokenizer::Kind::Whitespace);
    CHECK(tok.vocab_size() == v.vocab_size);
    CHECK(tok.encode("t2 t0").ids == std::vector<std::uint32_t>{2, 0});

    const auto model = train_bpe("aaab aaab", 260);
    const auto bpath = tmp_path("bpe2.json");
    save_bpe(model, bpath);
    const auto btok = load_tokenizer(bpath);
    CHECK(btok.kind == Tokenizer::Kind::Bpe);
    CHECK(btok.decode(btok.encode("aaab")) == "aaab");
    std::remove(wpath.c_str());
    std::remove(bpath.c_str());
}
