#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "token_stream.hpp"

namespace nlm {

// Byte-level BPE. Symbol ids: 0..255 are the byte alphabet, merged symbols
// follow in merge order, and the end-of-sequence special is the last id, so
// vocab_size = 256 + merges + 1.
struct BpeModel {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> merges;  // (left, right) symbol ids
    std::vector<std::string> symbol_bytes;                        // id -> byte string (eos maps to "")
    std::uint32_t vocab_size = 0;
    std::uint32_t eos_id = 0;
};

// Greedy highest-frequency pair merging until the vocab budget is reached
// or no pair occurs at least twice. Ties break toward the lexicographically
// smaller (left_bytes, right_bytes) pair.
BpeModel train_bpe(const std::string& corpus, std::uint32_t vocab_size);

TokenStream bpe_encode(const BpeModel& model, const std::string& text);
std::string bpe_decode(const BpeModel& model, const TokenStream& ids);

void save_bpe(const BpeModel& model, const std::string& path);
BpeModel load_bpe(const std::string& path);

// Closed vocabulary over whitespace-delimited tokens. The eos special is
// the last id and has no surface form.
struct WhitespaceVocab {
    std::map<std::string, std::uint32_t> token_to_id;
    std::vector<std::string> id_to_token;
    std::uint32_t vocab_size = 0;
    std::uint32_t eos_id = 0;
};

// Vocabulary from the distinct tokens of the corpus, ids in sorted order.
WhitespaceVocab build_whitespace_vocab(const std::string& corpus);
TokenStream whitespace_encode(const WhitespaceVocab& vocab, const std::string& text);
std::string whitespace_decode(const WhitespaceVocab& vocab, const TokenStream& ids);

void save_whitespace(const WhitespaceVocab& vocab, const std::string& path);
WhitespaceVocab load_whitespace(const std::string& path);

// Unified loader keyed on the file's "type" field.
struct Tokenizer {
    enum class Kind { Bpe, Whitespace } kind;
    BpeModel bpe;
    WhitespaceVocab ws;

    TokenStream encode(const std::string& text) const;
    std::string decode(const TokenStream& ids) const;
    std::uint32_t vocab_size() const { return kind == Kind::Bpe ? bpe.vocab_size : ws.vocab_size; }
    std::uint32_t eos_id() const { return kind == Kind::Bpe ? bpe.eos_id : ws.eos_id; }
};

Tokenizer load_tokenizer(const std::string& path);

}  // namespace nlm
