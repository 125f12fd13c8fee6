#include "corpusgen.hpp"

#include <algorithm>
#include <cctype>

#include "rng.hpp"

namespace nlm {

TokenStream generate_dyck(const DyckConfig& config) {
    if (config.vocab_size < 1) throw ConfigError("dyck: vocab_size must be >= 1");
    if (config.close_prob < 0.0 || config.close_prob > 1.0)
        throw ConfigError("dyck: close_prob must be in [0, 1]");
    if (config.target_length < 1) throw ConfigError("dyck: target_length must be >= 1");

    Rng rng(config.seed);
    TokenStream out;
    out.vocab_size = config.vocab_size;
    out.ids.reserve(config.target_length);
    std::vector<std::uint32_t> stack;
    for (std::uint64_t step = 0; step < config.target_length; ++step) {
        const bool must_open = stack.empty();
        if (!must_open && rng.uniform() < config.close_prob) {
            out.ids.push_back(stack.back());
            stack.pop_back();
        } else {
            const auto type = static_cast<std::uint32_t>(rng.below(config.vocab_size));
            stack.push_back(type);
            out.ids.push_back(type);
        }
    }
    return out;
}

TokenStream scramble(const TokenStream& stream, std::uint64_t seed) {
    if (stream.ids.empty()) throw DomainError("scramble: empty stream");
    TokenStream out = stream;
    Rng rng(seed);
    for (std::size_t i = out.ids.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(out.ids[i], out.ids[j]);
    }
    return out;
}

std::string clean_fasta(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::size_t end = eol;
        if (end > pos && text[end - 1] == '\r') --end;
        if (pos == end || text[pos] != '>') out.append(text, pos, end - pos);
        pos = eol + 1;
    }
    return out;
}

const char* code_token_name(CodeToken t) {
    switch (t) {
        case CodeToken::Name: return "NAME";
        case CodeToken::Number: return "NUMBER";
        case CodeToken::Operator: return "OPERATOR";
        case CodeToken::Newline: return "NEWLINE";
        case CodeToken::Indent: return "INDENT";
        case CodeToken::Dedent: return "DEDENT";
        case CodeToken::CommentMask: return "COMMENT_MASK";
        case CodeToken::StringMask: return "STRING_MASK";
    }
    return "?";
}

namespace {

bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
bool is_number_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_';
}

// Indent width: space = 1, tab advances to the next multiple of 8.
std::size_t indent_width(const std::string& line, std::size_t* first_nonspace) {
    std::size_t col = 0, i = 0;
    for (; i < line.size(); ++i) {
        if (line[i] == ' ')
            ++col;
        else if (line[i] == '\t')
            col = (col / 8 + 1) * 8;
        else
            break;
    }
    *first_nonspace = i;
    return col;
}

}  // namespace

std::vector<CodeToken> preprocess_code(const std::string& source) {
    std::vector<CodeToken> out;
    std::vector<std::size_t> indents{0};
    std::size_t line_no = 0;

    std::size_t pos = 0;
    while (pos <= source.size()) {
        if (pos == source.size() && pos != 0) break;
        std::size_t eol = source.find('\n', pos);
        if (eol == std::string::npos) eol = source.size();
        std::string line = source.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = eol + 1;
        ++line_no;

        std::size_t i = 0;
        const std::size_t col = indent_width(line, &i);
        if (i >= line.size()) continue;  // blank line
        if (line[i] == '#') {
            // comment-only line: no indent bookkeeping, like a blank line
            out.push_back(CodeToken::CommentMask);
            out.push_back(CodeToken::Newline);
            continue;
        }

        if (col > indents.back()) {
            indents.push_back(col);
            out.push_back(CodeToken::Indent);
        } else {
            while (col < indents.back()) {
                indents.pop_back();
                out.push_back(CodeToken::Dedent);
            }
            if (col != indents.back())
                throw LexError("dedent to unopened indentation column " + std::to_string(col) +
                                   " at line " + std::to_string(line_no),
                               line_no);
        }

        while (i < line.size()) {
            const char c = line[i];
            if (c == ' ' || c == '\t') {
                ++i;
            } else if (c == '#') {
                out.push_back(CodeToken::CommentMask);
                i = line.size();
            } else if (c == '\'' || c == '"') {
                const char quote = c;
                ++i;
                while (i < line.size() && line[i] != quote) {
                    if (line[i] == '\\' && i + 1 < line.size()) ++i;
                    ++i;
                }
                if (i < line.size()) ++i;  // closing quote
                out.push_back(CodeToken::StringMask);
            } else if (is_name_start(c)) {
                while (i < line.size() && is_name_char(line[i])) ++i;
                out.push_back(CodeToken::Name);
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                while (i < line.size() && is_number_char(line[i])) ++i;
                out.push_back(CodeToken::Number);
            } else {
                ++i;
                out.push_back(CodeToken::Operator);
            }
        }
        out.push_back(CodeToken::Newline);
    }

    while (indents.size() > 1) {
        indents.pop_back();
        out.push_back(CodeToken::Dedent);
    }
    return out;
}

TokenStream code_tokens_to_stream(const std::vector<CodeToken>& tokens) {
    TokenStream s;
    s.vocab_size = kCodeVocabSize;
    s.ids.reserve(tokens.size());
    for (CodeToken t : tokens) s.ids.push_back(static_cast<std::uint32_t>(t));
    return s;
}

PackedDataset pack(const std::vector<TokenStream>& docs, std::uint32_t context_length,
                   std::uint32_t eos_id) {
    if (context_length < 1) throw ConfigError("pack: context_length must be >= 1");
    PackedDataset ds;
    ds.context_length = context_length;
    ds.eos_id = eos_id;
    std::uint32_t vocab = 0;
    for (const auto& d : docs) {
        if (vocab == 0)
            vocab = d.vocab_size;
        else if (d.vocab_size != vocab)
            throw InputError("pack: documents disagree on vocab_size");
    }
    if (vocab == 0) vocab = eos_id + 1;
    if (eos_id >= vocab) throw ConfigError("pack: eos_id must be < vocab_size");
    ds.vocab_size = vocab;

    std::vector<std::uint32_t> joined;
    for (const auto& d : docs) {
        joined.insert(joined.end(), d.ids.begin(), d.ids.end());
        joined.push_back(eos_id);
    }
    if (joined.size() < context_length) {
        ds.underfull = true;
        return ds;
    }
    const std::size_t n_examples = joined.size() / context_length;
    ds.examples.reserve(n_examples);
    for (std::size_t e = 0; e < n_examples; ++e) {
        const auto begin = joined.begin() + static_cast<std::ptrdiff_t>(e * context_length);
        ds.examples.emplace_back(begin, begin + context_length);
    }
    return ds;
}

TokenStream truncate(const TokenStream& stream, std::uint64_t budget) {
    TokenStream out;
    out.vocab_size = stream.vocab_size;
    const std::uint64_t n = std::min<std::uint64_t>(budget, stream.ids.size());
    out.ids.assign(stream.ids.begin(), stream.ids.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

}  // namespace nlm
