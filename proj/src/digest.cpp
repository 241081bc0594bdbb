#include "abom/digest.hpp"

#include <array>
#include <cerrno>
#include <cstring>
#include <fstream>

#include "abom/error.hpp"
#include "abom/shake128.hpp"

namespace abom {
namespace {

Digest36 digest_from_xof(Shake128& xof) noexcept {
    std::array<std::uint8_t, 5> prefix{};
    xof.squeeze(prefix);
    const std::uint64_t value = (std::uint64_t{prefix[0]} << 28) |
                                (std::uint64_t{prefix[1]} << 20) |
                                (std::uint64_t{prefix[2]} << 12) |
                                (std::uint64_t{prefix[3]} << 4) |
                                (std::uint64_t{prefix[4]} >> 4);
    return Digest36(value);
}

int hex_value(char c) noexcept {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

Digest36 hash_bytes(std::span<const std::uint8_t> data) noexcept {
    Shake128 xof;
    xof.update(data);
    return digest_from_xof(xof);
}

Digest36 hash_bytes(std::string_view data) noexcept {
    return hash_bytes(std::span(reinterpret_cast<const std::uint8_t*>(data.data()),
                                data.size()));
}

Digest36 hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io,
                    "cannot open " + path.string() + ": " + std::strerror(errno));
    }
    Shake128 xof;
    std::array<char, 64 * 1024> block;
    while (in) {
        in.read(block.data(), block.size());
        const auto got = static_cast<std::size_t>(in.gcount());
        xof.update(std::span(reinterpret_cast<const std::uint8_t*>(block.data()), got));
    }
    if (in.bad()) {
        throw Error(ErrorKind::Io, "read failed on " + path.string());
    }
    return digest_from_xof(xof);
}

std::string to_hex(Digest36 digest) {
    static constexpr char digits[] = "0123456789abcdef";
    const std::uint64_t shifted = digest.value() << 4;
    std::string out(10, '0');
    for (int i = 9; i >= 0; --i) {
        out[static_cast<std::size_t>(9 - i)] = digits[(shifted >> (4 * i)) & 0xF];
    }
    return out;
}

Digest36 from_hex(std::string_view text) {
    if (text.size() != 10) {
        throw Error(ErrorKind::Parse, "digest must be exactly 10 hex characters, got " +
                                          std::to_string(text.size()));
    }
    std::uint64_t shifted = 0;
    for (char c : text) {
        const int v = hex_value(c);
        if (v < 0) {
            throw Error(ErrorKind::Parse,
                        std::string("digest contains non-hex character '") + c + "'");
        }
        shifted = (shifted << 4) | static_cast<std::uint64_t>(v);
    }
    if ((shifted & 0xF) != 0) {
        throw Error(ErrorKind::Parse, "digest trailing nibble must be zero (36-bit value)");
    }
    return Digest36(shifted >> 4);
}

}  // namespace abom
