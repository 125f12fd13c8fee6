#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "corpusgen.hpp"
#include "errors.hpp"
#include "rng.hpp"

using namespace nlm;

namespace {

// Independent stack simulation: replays a stream against the generator's
// own rule set and reports whether every close matched the stack top.
// Close/open attribution is re-derived from a fresh run of the generator
// logic, so instead we validate the weaker machine-checkable property:
// simulate with an oracle that treats a token as a close iff it equals the
// current stack top and a close was possible. To make this exact we rerun
// the generator with the same seed and record its own open/close decisions
// via depth reconstruction.
struct DyckTrace {
    std::vector<std::uint32_t> ids;
    std::vector<bool> is_close;
};

DyckTrace replay_dyck(const DyckConfig& cfg) {
    // Re-implementation of the documented generation rule, kept separate
    // from the library code on purpose.
    DyckTrace t;
    Rng rng(cfg.seed);
    std::vector<std::uint32_t> stack;
    for (std::uint64_t i = 0; i < cfg.target_length; ++i) {
        const bool can_close = !stack.empty();
        const bool close = can_close && rng.uniform() < cfg.close_prob;
        if (close) {
            t.ids.push_back(stack.back());
            t.is_close.push_back(true);
            stack.pop_back();
        } else {
            const auto type = static_cast<std::uint32_t>(rng.below(cfg.vocab_size));
            t.ids.push_back(type);
            t.is_close.push_back(false);
            stack.push_back(type);
        }
    }
    return t;
}

}  // namespace

TEST_CASE("dyck first token is always an open") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        DyckConfig cfg{5, 0.99, 2, seed};
        const auto trace = replay_dyck(cfg);
        CHECK_FALSE(trace.is_close[0]);
        const auto s = generate_dyck(cfg);
        CHECK(s.ids == trace.ids);
    }
}

TEST_CASE("dyck vocab 1 close_prob 1 alternates depth 1,0,1,0") {
    DyckConfig cfg{1, 1.0, 4, 7};
    const auto s = generate_dyck(cfg);
    REQUIRE(s.ids.size() == 4);
    // Depth trace: every token is id 0; forced open then forced close.
    const auto trace = replay_dyck(cfg);
    std::vector<int> depth;
    int d = 0;
    for (std::size_t i = 0; i < trace.ids.size(); ++i) {
        d += trace.is_close[i] ? -1 : 1;
        depth.push_back(d);
    }
    CHECK(depth == std::vector<int>{1, 0, 1, 0});
    CHECK(s.ids == trace.ids);
}

TEST_CASE("dyck stream passes independent stack-simulation validation") {
    DyckConfig cfg{5, 0.51, 10000, 42};
    const auto s = generate_dyck(cfg);
    REQUIRE(s.ids.size() == 10000);
    CHECK(s.vocab_size == 5);
    const auto trace = replay_dyck(cfg);
    REQUIRE(s.ids == trace.ids);
    // Simulate: never pop empty, every close matches the stack top.
    std::vector<std::uint32_t> stack;
    for (std::size_t i = 0; i < trace.ids.size(); ++i) {
        if (trace.is_close[i]) {
            REQUIRE_FALSE(stack.empty());
            REQUIRE(stack.back() == trace.ids[i]);
            stack.pop_back();
        } else {
            stack.push_back(trace.ids[i]);
        }
    }
}

TEST_CASE("dyck empirical close rate within 0.01 of close_prob") {
    DyckConfig cfg{17, 0.51, 200000, 3};
    const auto trace = replay_dyck(cfg);
    // Count closes only over steps where closing was possible.
    std::uint64_t possible = 0, closed = 0;
    std::size_t depth = 0;
    for (std::size_t i = 0; i < trace.ids.size(); ++i) {
        if (depth > 0) {
            ++possible;
            if (trace.is_close[i]) ++closed;
        }
        depth += trace.is_close[i] ? -1 : 1;
    }
    REQUIRE(possible >= 100000);
    const double rate = double(closed) / double(possible);
    CHECK(std::abs(rate - 0.51) <= 0.01);
}

TEST_CASE("dyck is deterministic and validates config") {
    DyckConfig cfg{9, 0.4, 500, 11};
    CHECK(generate_dyck(cfg).ids == generate_dyck(cfg).ids);
    CHECK_THROWS_AS(generate_dyck(DyckConfig{0, 0.5, 10, 0}), ConfigError);
    CHECK_THROWS_AS(generate_dyck(DyckConfig{5, 1.5, 10, 0}), ConfigError);
    CHECK_THROWS_AS(generate_dyck(DyckConfig{5, 0.5, 0, 0}), ConfigError);
}

TEST_CASE("scramble singleton and multiset preservation") {
    TokenStream one{{7}, 8};
    CHECK(scramble(one, 123).ids == std::vector<std::uint32_t>{7});

    DyckConfig cfg{5, 0.51, 10000, 1};
    const auto s = generate_dyck(cfg);
    const auto p = scramble(s, 1);
    REQUIRE(p.ids.size() == s.ids.size());
    std::map<std::uint32_t, int> ha, hb;
    for (auto id : s.ids) ++ha[id];
    for (auto id : p.ids) ++hb[id];
    CHECK(ha == hb);

    CHECK(scramble(s, 1).ids == p.ids);           // determinism on re-execution
    CHECK(scramble(s, 2).ids != p.ids);           // different seed moves tokens
    CHECK_THROWS_AS(scramble(TokenStream{{}, 4}, 0), DomainError);
}

TEST_CASE("clean_fasta strips headers and joins lines") {
    CHECK(clean_fasta(">chr1\nACGT\n") == "ACGT");
    CHECK(clean_fasta("ACGT\nTTAA\n") == "ACGTTTAA");
    CHECK(clean_fasta("") == "");

    // Three interleaved headers, compared against a line-filter oracle.
    const std::string text =
        ">h1\nAC\nGT\n>h2\nTT\n>h3\nAA\nCC\n";
    std::string oracle;
    std::string line;
    for (char c : text) {
        if (c == '\n') {
            if (!line.empty() && line[0] != '>') oracle += line;
            line.clear();
        } else {
            line += c;
        }
    }
    CHECK(clean_fasta(text) == oracle);
    CHECK(oracle == "ACGTTTAACC");
}

TEST_CASE("code lexer basic statements") {
    using T = CodeToken;
    CHECK(preprocess_code("x = 1 # note") ==
          std::vector<T>{T::Name, T::Operator, T::Number, T::CommentMask, T::Newline});
    CHECK(preprocess_code("s = 'hello'") ==
          std::vector<T>{T::Name, T::Operator, T::StringMask, T::Newline});

    const auto toks = preprocess_code("if a:\n  b\n");
    const auto indents = std::count(toks.begin(), toks.end(), T::Indent);
    const auto dedents = std::count(toks.begin(), toks.end(), T::Dedent);
    CHECK(indents == 1);
    CHECK(dedents == 1);
    CHECK(std::find(toks.begin(), toks.end(), T::Indent) <
          std::find(toks.begin(), toks.end(), T::Dedent));
}

TEST_CASE("code lexer masks every string and comment to one token") {
    using T = CodeToken;
    const auto toks = preprocess_code("msg = \"the quick brown fox\" # trailing words\n");
    CHECK(std::count(toks.begin(), toks.end(), T::StringMask) == 1);
    CHECK(std::count(toks.begin(), toks.end(), T::CommentMask) == 1);
    // No literal content survives: total token count is bounded.
    CHECK(toks.size() == 5);  // NAME OPERATOR STRING COMMENT NEWLINE
}

TEST_CASE("code lexer balances indents over nested input and flushes at EOF") {
    using T = CodeToken;
    const std::string src =
        "def f(x):\n"
        "    if x:\n"
        "        return 1\n"
        "    return 0\n";
    const auto toks = preprocess_code(src);
    CHECK(std::count(toks.begin(), toks.end(), T::Indent) ==
          std::count(toks.begin(), toks.end(), T::Dedent));

    // Missing trailing newline still flushes dedents.
    const auto toks2 = preprocess_code("if a:\n  b");
    CHECK(std::count(toks2.begin(), toks2.end(), T::Indent) ==
          std::count(toks2.begin(), toks2.end(), T::Dedent));
}

TEST_CASE("code lexer rejects dedent to an unopened column") {
    const std::string bad = "if a:\n    b\n  c\n";
    CHECK_THROWS_AS(preprocess_code(bad), LexError);
    try {
        preprocess_code(bad);
    } catch (const LexError& e) {
        CHECK(e.line_number == 3);
    }
}

TEST_CASE("mix_corpora block arithmetic") {
    std::vector<int> a, b;
    for (int i = 0; i < 9; ++i) a.push_back(i);          // a-docs: 0..8
    for (int i = 0; i < 3; ++i) b.push_back(100 + i);    // b-docs: 100..102
    const auto mixed = mix_corpora(a, b, 3, 1);
    REQUIRE(mixed.size() == 12);
    CHECK(mixed == std::vector<int>{0, 1, 2, 100, 3, 4, 5, 101, 6, 7, 8, 102});

    // One extra a-doc is dropped at the block boundary.
    a.push_back(9);
    CHECK(mix_corpora(a, b, 3, 1).size() == 12);

    // 1:1 alternation.
    std::vector<int> c{1, 2, 3}, d{4, 5, 6};
    const auto alt = mix_corpora(c, d, 1, 1);
    CHECK(alt == std::vector<int>{1, 4, 2, 5, 3, 6});

    CHECK_THROWS_AS(mix_corpora(std::vector<int>{}, d, 1, 1), DomainError);
    CHECK_THROWS_AS(mix_corpora(c, d, 0, 1), DomainError);
}

TEST_CASE("pack slices separator-joined docs into fixed windows") {
    TokenStream d1{{1, 2, 3, 4, 5}, 10};
    TokenStream d2{{6, 7, 8, 9}, 10};
    const auto ds = pack({d1, d2}, 4, 0);
    REQUIRE(ds.examples.size() == 2);  // 5+1+4+1 = 11 tokens, floor(11/4) = 2
    for (const auto& ex : ds.examples) CHECK(ex.size() == 4);
    CHECK_FALSE(ds.underfull);

    // Prefix-equality oracle: join(examples) equals a prefix of join(docs, eos).
    std::vector<std::uint32_t> joined;
    for (auto id : d1.ids) joined.push_back(id);
    joined.push_back(0);
    for (auto id : d2.ids) joined.push_back(id);
    joined.push_back(0);
    std::vector<std::uint32_t> flat;
    for (const auto& ex : ds.examples) flat.insert(flat.end(), ex.begin(), ex.end());
    REQUIRE(flat.size() <= joined.size());
    CHECK(std::equal(flat.begin(), flat.end(), joined.begin()));
}

TEST_CASE("pack with context 1 and underfull input") {
    TokenStream d1{{1, 2}, 5};
    const auto ds = pack({d1}, 1, 0);
    CHECK(ds.examples.size() == 3);  // 2 tokens + 1 separator

    const auto small = pack({d1}, 64, 0);
    CHECK(small.examples.empty());
    CHECK(small.underfull);
}

TEST_CASE("pack prefix oracle on a random fixture") {
    Rng rng(99);
    std::vector<TokenStream> docs;
    std::vector<std::uint32_t> joined;
    for (int d = 0; d < 7; ++d) {
        TokenStream s;
        s.vocab_size = 50;
        const auto len = 1 + rng.below(40);
        for (std::uint64_t i = 0; i < len; ++i)
            s.ids.push_back(1 + static_cast<std::uint32_t>(rng.below(49)));
        docs.push_back(s);
        joined.insert(joined.end(), s.ids.begin(), s.ids.end());
        joined.push_back(0);
    }
    const auto ds = pack(docs, 16, 0);
    CHECK(ds.examples.size() == joined.size() / 16);
    std::vector<std::uint32_t> flat;
    for (const auto& ex : ds.examples) flat.insert(flat.end(), ex.begin(), ex.end());
    CHECK(std::equal(flat.begin(), flat.end(), joined.begin()));
}

TEST_CASE("truncate keeps the first min(budget, length) tokens") {
    TokenStream s;
    s.vocab_size = 100;
    for (std::uint32_t i = 0; i < 10; ++i) s.ids.push_back(i);
    CHECK(truncate(s, 100).ids == s.ids);
    CHECK(truncate(s, 0).ids.empty());
    const auto t = truncate(s, 7);
    CHECK(t.ids == std::vector<std::uint32_t>(s.ids.begin(), s.ids.begin() + 7));
}
