#include "token_stream.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "errors.hpp"

namespace nlm {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    std::array<unsigned char, 4> b{};
    for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b.data()), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    std::array<unsigned char, 8> b{};
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b.data()), 8);
}

std::uint32_t get_u32(std::istream& is) {
    std::array<unsigned char, 4> b{};
    is.read(reinterpret_cast<char*>(b.data()), 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
}

std::uint64_t get_u64(std::istream& is) {
    std::array<unsigned char, 8> b{};
    is.read(reinterpret_cast<char*>(b.data()), 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
}

}  // namespace

void validate_token_stream(const TokenStream& s) {
    for (std::uint32_t id : s.ids) {
        if (id >= s.vocab_size)
            throw InputError("token id " + std::to_string(id) + " >= vocab_size " +
                             std::to_string(s.vocab_size));
    }
}

void write_token_stream(const std::string& path, const TokenStream& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write("TOKS", 4);
    put_u32(os, s.vocab_size);
    put_u64(os, s.ids.size());
    for (std::uint32_t id : s.ids) put_u32(os, id);
    if (!os) throw IoError("write failed: " + path);
}

TokenStream read_token_stream(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "TOKS", 4) != 0) throw IoError("bad magic in " + path);
    TokenStream s;
    s.vocab_size = get_u32(is);
    const std::uint64_t count = get_u64(is);
    s.ids.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) s.ids[i] = get_u32(is);
    if (!is) throw IoError("truncated token stream: " + path);
    validate_token_stream(s);
    return s;
}

}  // namespace nlm
