#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "token_stream.hpp"

namespace nlm {

struct DyckConfig {
    std::uint32_t vocab_size = 49999;  // distinct parenthesis types
    double close_prob = 0.51;
    std::uint64_t target_length = 1;
    std::uint64_t seed = 0;
};

// Nested-parenthesis stream. Each type shares one token id for open and
// close; whether a token closes is decided by the generator stack. The
// stream may end with unmatched opens (valid prefix semantics).
TokenStream generate_dyck(const DyckConfig& config);

// Seeded Fisher-Yates permutation of token positions.
TokenStream scramble(const TokenStream& stream, std::uint64_t seed);

// Drops every line starting with '>' and joins the remaining lines.
std::string clean_fasta(const std::string& text);

// Simplified indentation-aware lexer output alphabet.
enum class CodeToken : std::uint32_t {
    Name = 0,
    Number = 1,
    Operator = 2,
    Newline = 3,
    Indent = 4,
    Dedent = 5,
    CommentMask = 6,
    StringMask = 7,
};
constexpr std::uint32_t kCodeVocabSize = 8;
const char* code_token_name(CodeToken t);

// Lexes source with significant leading whitespace. Comments collapse to
// one CommentMask, string literals to one StringMask. INDENT/DEDENT are
// balanced; pending dedents flush at EOF. Throws LexError on a dedent to
// a column that was never opened.
std::vector<CodeToken> preprocess_code(const std::string& source);
TokenStream code_tokens_to_stream(const std::vector<CodeToken>& tokens);

// Block interleave: ratio_a docs from a, ratio_b from b, repeated; stops at
// the last complete block so the output ratio is exact.
template <typename Doc>
std::vector<Doc> mix_corpora(const std::vector<Doc>& a, const std::vector<Doc>& b,
                             std::size_t ratio_a, std::size_t ratio_b);

struct PackedDataset {
    std::vector<std::vector<std::uint32_t>> examples;  // each exactly context_length long
    std::uint32_t context_length = 0;
    std::uint32_t eos_id = 0;
    std::uint32_t vocab_size = 0;
    bool underfull = false;  // total tokens < context_length
};

// Concatenates docs with eos_id separators and slices into consecutive
// context_length windows; the trailing remainder is discarded.
PackedDataset pack(const std::vector<TokenStream>& docs, std::uint32_t context_length,
                   std::uint32_t eos_id);

TokenStream truncate(const TokenStream& stream, std::uint64_t budget);

// --- template definition ---

template <typename Doc>
std::vector<Doc> mix_corpora(const std::vector<Doc>& a, const std::vector<Doc>& b,
                             std::size_t ratio_a, std::size_t ratio_b) {
    if (a.empty() || b.empty()) throw DomainError("mix_corpora: empty source list");
    if (ratio_a == 0 || ratio_b == 0) throw DomainError("mix_corpora: ratio components must be positive");
    std::vector<Doc> out;
    std::size_t ia = 0, ib = 0;
    while (ia + ratio_a <= a.size() && ib + ratio_b <= b.size()) {
        for (std::size_t k = 0; k < ratio_a; ++k) out.push_back(a[ia++]);
        for (std::size_t k = 0; k < ratio_b; ++k) out.push_back(b[ib++]);
    }
    return out;
}

}  // namespace nlm
