#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nlm {

// A finite sequence of token ids below vocab_size.
struct TokenStream {
    std::vector<std::uint32_t> ids;
    std::uint32_t vocab_size = 0;
};

// Binary interchange: magic "TOKS", u32 LE vocab_size, u64 LE count,
// then count u32 LE ids.
void write_token_stream(const std::string& path, const TokenStream& s);
TokenStream read_token_stream(const std::string& path);

void validate_token_stream(const TokenStream& s);

}  // namespace nlm
