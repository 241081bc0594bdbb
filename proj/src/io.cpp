#include "abom/io.hpp"

#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <string>

#include "abom/error.hpp"

namespace abom {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io,
                    "cannot open " + path.string() + ": " + std::strerror(errno));
    }
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>()};
    if (in.bad()) {
        throw Error(ErrorKind::Io, "read failed on " + path.string());
    }
    return bytes;
}

void replace_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    namespace fs = std::filesystem;
    static std::atomic<unsigned> counter{0};

    fs::path temp = path;
    temp += ".abom-" + std::to_string(getpid()) + "-" + std::to_string(counter++) + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorKind::Io,
                        "cannot create " + temp.string() + ": " + std::strerror(errno));
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            std::error_code ignored;
            fs::remove(temp, ignored);
            throw Error(ErrorKind::Io, "write failed on " + temp.string());
        }
    }

    std::error_code ec;
    const auto status = fs::status(path, ec);
    if (!ec && fs::exists(status)) {
        fs::permissions(temp, status.permissions(), ec);
    }
    fs::rename(temp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(temp, ignored);
        throw Error(ErrorKind::Io, "cannot replace " + path.string() + ": " + ec.message());
    }
}

}  // namespace abom
