// Single binary behind abom, abom-hash, abom-check, abom-inspect and
// abom-params. The command is chosen by the name it is invoked under, or by
// a subcommand word after "abom" ("abom check foo 7f9c2ba4e0").

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "abom/builder.hpp"
#include "abom/digest.hpp"
#include "abom/error.hpp"
#include "abom/format.hpp"
#include "abom/io.hpp"
#include "abom/objfile.hpp"
#include "abom/params.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int exit_positive = 0;
constexpr int exit_negative = 1;
constexpr int exit_usage = 2;

constexpr const char* wrapper_usage =
    "usage: abom <compiler> [compiler arguments...]\n"
    "       abom hash <file>...\n"
    "       abom check <binary> <digest>\n"
    "       abom inspect <binary>\n"
    "       abom params [options]\n";

/// Runs a CLI11 parse and maps its outcome onto the exit-code contract.
std::optional<int> parse_args(CLI::App& app, std::vector<std::string> args) {
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return exit_positive;
    } catch (const CLI::ParseError& e) {
        std::cerr << app.get_name() << ": " << e.what() << '\n';
        return exit_usage;
    }
    return std::nullopt;
}

/// The ABOM section bytes of a file: an ELF image's ".abom" section, or the
/// file itself when it is a raw ABOM (e.g. an archive sidecar).
struct SectionLookup {
    std::optional<std::vector<std::uint8_t>> section;
    std::string problem;
};

SectionLookup find_section(const fs::path& path) {
    std::vector<std::uint8_t> bytes;
    try {
        bytes = abom::read_file(path);
    } catch (const abom::Error& e) {
        return {std::nullopt, e.what()};
    }
    if (abom::has_abom_magic(bytes)) {
        return {std::move(bytes), {}};
    }
    const abom::BinaryKind kind = abom::detect(bytes);
    if (kind != abom::BinaryKind::Elf64) {
        return {std::nullopt, "unsupported binary format (" +
                                  std::string(abom::to_string(kind)) + "): no ABOM found"};
    }
    try {
        auto section = abom::extract_abom(bytes);
        if (!section) {
            return {std::nullopt, "no ABOM found"};
        }
        return {std::move(section), {}};
    } catch (const abom::Error& e) {
        return {std::nullopt, e.what()};
    }
}

int cmd_hash(const std::vector<std::string>& args) {
    CLI::App app{"Print the SHAKE128(36) digest of source files", "abom-hash"};
    std::vector<std::string> files;
    app.add_option("files", files, "Files to hash")->required();
    if (auto code = parse_args(app, args)) {
        return *code;
    }

    int status = exit_positive;
    for (const std::string& file : files) {
        try {
            const std::string hex = abom::to_hex(abom::hash_file(file));
            if (files.size() == 1) {
                std::cout << hex << '\n';
            } else {
                std::cout << hex << "  " << file << '\n';
            }
        } catch (const abom::Error& e) {
            std::cerr << "abom-hash: " << e.what() << '\n';
            status = exit_negative;
        }
    }
    return status;
}

int cmd_check(const std::vector<std::string>& args) {
    CLI::App app{"Check whether a binary's ABOM contains a source digest", "abom-check"};
    std::string binary;
    std::string hex;
    app.add_option("binary", binary, "Binary, object, archive or raw ABOM file")->required();
    app.add_option("digest", hex, "10-character hex digest from abom-hash")->required();
    if (auto code = parse_args(app, args)) {
        return *code;
    }

    abom::Digest36 digest;
    try {
        digest = abom::from_hex(hex);
    } catch (const abom::Error& e) {
        std::cerr << "abom-check: invalid digest: " << e.what() << '\n';
        return exit_usage;
    }

    std::optional<abom::FilterChain> chain;
    std::vector<std::uint8_t> head;
    try {
        head = abom::read_file(binary);
    } catch (const abom::Error& e) {
        std::cerr << "abom-check: " << e.what() << '\n';
        return exit_usage;
    }
    if (abom::detect(head) == abom::BinaryKind::ArArchive) {
        std::vector<abom::AbomWarning> ignored;
        chain = abom::read_upstream(binary, ignored);
        if (!chain) {
            std::cerr << "abom-check: " << binary << ": no ABOM found\n";
            return exit_usage;
        }
    } else {
        const SectionLookup lookup = find_section(binary);
        if (!lookup.section) {
            std::cerr << "abom-check: " << binary << ": " << lookup.problem << '\n';
            return exit_usage;
        }
        try {
            chain = abom::parse_section(*lookup.section);
        } catch (const abom::Error& e) {
            std::cerr << "abom-check: " << binary << ": malformed ABOM: " << e.what() << '\n';
            return exit_usage;
        }
    }

    if (chain->contains(digest)) {
        std::cout << "Dependency Present\n";
        return exit_positive;
    }
    std::cout << "Dependency Absent\n";
    return exit_negative;
}

int cmd_inspect(const std::vector<std::string>& args) {
    CLI::App app{"Describe the ABOM embedded in a binary", "abom-inspect"};
    std::string binary;
    app.add_option("binary", binary, "Binary, object or raw ABOM file")->required();
    if (auto code = parse_args(app, args)) {
        return *code;
    }

    const SectionLookup lookup = find_section(binary);
    if (!lookup.section) {
        std::cerr << "abom-inspect: " << binary << ": " << lookup.problem << '\n';
        return exit_usage;
    }
    const std::span<const std::uint8_t> section(*lookup.section);

    // Walk documents first so nothing is printed for a malformed section.
    struct Row {
        abom::AbomDocument doc;
        std::uint32_t p1_q;
        std::size_t payload;
    };
    std::vector<Row> rows;
    try {
        std::size_t pos = 0;
        do {
            const auto rest = section.subspan(pos);
            if (rest.size() < abom::wire::header_size) {
                throw abom::Error(abom::ErrorKind::Truncated, "ABOM header truncated");
            }
            auto le = [&](std::size_t at, int width) {
                std::uint64_t v = 0;
                for (int i = width - 1; i >= 0; --i) {
                    v = (v << 8) | rest[at + static_cast<std::size_t>(i)];
                }
                return v;
            };
            const std::size_t payload = le(abom::wire::length_offset, 4);
            if (payload > rest.size() - abom::wire::header_size) {
                throw abom::Error(abom::ErrorKind::Truncated, "ABOM payload extends past the section");
            }
            const std::size_t total = abom::wire::header_size + payload;
            rows.push_back({abom::parse(rest.first(total)),
                            static_cast<std::uint32_t>(le(abom::wire::model_offset, 4)), payload});
            pos += total;
        } while (pos < section.size());
    } catch (const abom::Error& e) {
        std::cerr << "abom-inspect: " << binary << ": malformed ABOM: " << e.what() << '\n';
        return exit_usage;
    }

    std::printf("section bytes: %zu\n", section.size());
    if (rows.size() > 1) {
        std::printf("documents: %zu\n", rows.size());
    }
    for (const Row& row : rows) {
        const auto filters = row.doc.chain.filters();
        std::printf("version: %u\n", static_cast<unsigned>(row.doc.version));
        std::printf("filters: %zu\n", filters.size());
        std::printf("model p(1): %.9f (quantized %" PRIu32 ")\n",
                    static_cast<double>(row.p1_q) / 4294967295.0, row.p1_q);
        std::printf("payload bytes: %zu\n", row.payload);
        std::printf("%-8s %-8s %s\n", "filter", "ones", "estimate_n");
        for (std::size_t i = 0; i < filters.size(); ++i) {
            std::printf("%-8zu %-8" PRIu32 " %.3f\n", i, filters[i].ones(),
                        filters[i].estimate_n());
        }
    }
    return exit_positive;
}

int cmd_params(const std::vector<std::string>& args) {
    CLI::App app{"Sweep Bloom filter parameters and rank them by modeled compressed size",
                 "abom-params"};
    abom::params::SweepBounds bounds;
    std::optional<std::size_t> top;
    app.add_option("--max-log2-m", bounds.max_log2_m, "Largest filter size as log2(bits)")
        ->check(CLI::Range(1u, 48u))
        ->capture_default_str();
    app.add_option("--max-k", bounds.max_k, "Largest hash count")
        ->check(CLI::Range(1u, 64u))
        ->capture_default_str();
    app.add_option("--min-n", bounds.min_n, "Smallest acceptable capacity")->capture_default_str();
    app.add_option("--max-f-log2", bounds.max_f_log2,
                   "False-positive bound as a negative power of two")
        ->check(CLI::Range(-62, -1))
        ->capture_default_str();
    app.add_option("--top", top, "Print only the first N rows");
    if (auto code = parse_args(app, args)) {
        return *code;
    }

    const auto points = abom::params::sweep(bounds);
    std::cerr << "abom-params: " << points.size() << " parameter points satisfy the bounds\n";
    std::printf("m_log2,k,n_max,f,z_bytes,bytes_per_item\n");
    const std::size_t limit = top ? std::min(*top, points.size()) : points.size();
    for (std::size_t i = 0; i < limit; ++i) {
        const auto& p = points[i];
        std::printf("%d,%u,%" PRIu64 ",%.6e,%" PRIu64 ",%.3f\n", std::countr_zero(p.m), p.k,
                    p.n_max, p.f, p.z_bytes, p.bytes_per_item);
    }
    return exit_positive;
}

int cmd_abom(const std::vector<std::string>& args) {
    if (args.empty() || args.front() == "--help" || args.front() == "-h") {
        std::cerr << wrapper_usage;
        return args.empty() ? exit_usage : exit_positive;
    }
    try {
        return abom::wrap(args, abom::BuildOptions::from_environment(), std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "abom: error: " << e.what() << '\n';
        return abom::exit_embed_failure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    const std::string invoked = fs::path(argc > 0 ? argv[0] : "abom").filename().string();

    if (invoked == "abom-hash") return cmd_hash(args);
    if (invoked == "abom-check") return cmd_check(args);
    if (invoked == "abom-inspect") return cmd_inspect(args);
    if (invoked == "abom-params") return cmd_params(args);

    if (!args.empty()) {
        const std::string sub = args.front();
        const std::vector<std::string> rest(args.begin() + 1, args.end());
        if (sub == "hash") return cmd_hash(rest);
        if (sub == "check") return cmd_check(rest);
        if (sub == "inspect") return cmd_inspect(rest);
        if (sub == "params") return cmd_params(rest);
    }
    return cmd_abom(args);
}
