#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "abom/filter.hpp"
#include "abom/format.hpp"

namespace abom {

enum class Mode { Compile, Link, CompileAndLink, Archive, Passthrough };

std::string_view to_string(Mode mode) noexcept;

/// What a compiler (or archiver) command line will consume and produce.
struct InvocationPlan {
    /// The command exactly as given; this is what gets executed.
    std::vector<std::string> compiler_argv;
    Mode mode = Mode::Passthrough;

    /// For Compile mode outputs[i] is built from source_inputs[i]; otherwise
    /// there is a single output.
    std::vector<std::filesystem::path> outputs;
    std::vector<std::filesystem::path> source_inputs;
    /// Language forced with -x for each source ("" when inferred).
    std::vector<std::string> source_languages;

    /// Objects, archives and shared libraries named by path.
    std::vector<std::filesystem::path> link_inputs;
    /// -l names, in order, and the -L directories used to resolve them.
    std::vector<std::string> libraries;
    std::vector<std::filesystem::path> library_dirs;
    bool static_link = false;

    /// Flags forwarded to the dependency scan (include paths, defines, ...).
    std::vector<std::string> preprocessor_args;
};

/// Classifies a command line. Anything not understood becomes Passthrough so
/// the underlying build is never blocked. @file response files are expanded
/// for classification only.
InvocationPlan plan(const std::vector<std::string>& argv);

enum class WarningReason { MissingAbom, InvalidAbom, UnresolvedLibrary, DepScanFailed };

std::string_view to_string(WarningReason reason) noexcept;

struct AbomWarning {
    std::string path;
    WarningReason reason = WarningReason::MissingAbom;

    friend bool operator==(const AbomWarning&, const AbomWarning&) = default;
};

/// "abom: warning: <path>: <reason>"
std::string format_warning(const AbomWarning& warning);

struct BuildOptions {
    /// Flags that make the compiler print make-style dependencies to stdout.
    std::vector<std::string> dep_flags{"-M"};
    /// Directories searched for -l libraries after the -L ones.
    std::vector<std::filesystem::path> system_library_dirs{
        "/usr/local/lib", "/usr/lib/x86_64-linux-gnu", "/lib/x86_64-linux-gnu",
        "/usr/lib64",     "/lib64",                    "/usr/lib",
        "/lib"};
    bool print_warnings = true;

    /// Reads ABOM_DEPFLAGS (whitespace-separated) and ABOM_QUIET.
    static BuildOptions from_environment();
};

struct SourceScan {
    std::vector<std::filesystem::path> paths;
    std::vector<AbomWarning> warnings;
};

/// Every source plus each header its dependency scan reports, canonicalized
/// and deduplicated. A failed scan falls back to the source alone.
SourceScan enumerate_sources(const InvocationPlan& plan, const BuildOptions& options);

struct UpstreamScan {
    std::vector<FilterChain> chains;
    std::vector<AbomWarning> warnings;
};

UpstreamScan collect_upstream(const InvocationPlan& plan, const BuildOptions& options);

/// ABOM content of one link input by path: ELF section, archive sidecar or
/// archive members. Missing content is reported through `warnings`.
std::optional<FilterChain> read_upstream(const std::filesystem::path& path,
                                         std::vector<AbomWarning>& warnings);

/// Every document found in an ABOM section. A linker that concatenates the
/// sections of its inputs leaves several back to back; their chains are
/// merged in order.
FilterChain parse_section(std::span<const std::uint8_t> bytes);

/// Hashes every source (in sorted order) into a fresh chain, then unions
/// each upstream chain in order. Throws Error(Io) if a source is unreadable.
AbomDocument build_abom(std::vector<std::filesystem::path> sources,
                        const std::vector<FilterChain>& upstream);

/// Rewrites the file at `path` in place with the document embedded.
void embed_into_file(const std::filesystem::path& path, const AbomDocument& doc);

/// Regenerates "<archive>.abom" from the member ABOMs; removes a stale one
/// when no member carries an ABOM.
std::vector<AbomWarning> write_sidecar(const std::filesystem::path& archive);

inline constexpr int exit_embed_failure = 3;

/// Runs the command unmodified, then embeds ABOMs into what it produced.
/// Returns the command's status on failure, 0 on success, or
/// exit_embed_failure when the ABOM could not be produced.
int wrap(const std::vector<std::string>& argv, const BuildOptions& options,
         std::ostream& diagnostics);

}  // namespace abom
