#include "abom/builder.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iterator>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "abom/depfile.hpp"
#include "abom/digest.hpp"
#include "abom/error.hpp"
#include "abom/io.hpp"
#include "abom/objfile.hpp"
#include "abom/process.hpp"

namespace fs = std::filesystem;

namespace abom {
namespace {

const std::unordered_set<std::string> source_extensions = {
    ".c",  ".cc", ".cpp", ".cxx", ".c++", ".C",  ".cp", ".CPP", ".m",
    ".mm", ".i",  ".ii",  ".s",   ".S",   ".sx", ".asm"};

const std::unordered_set<std::string> header_extensions = {".h",  ".hh",  ".hpp",
                                                           ".hxx", ".h++", ".H"};

// Compiler options whose value is the next token.
const std::unordered_set<std::string> preprocessor_options_with_value = {
    "-I",         "-D",          "-U",       "-include",           "-imacros",
    "-isystem",   "-iquote",     "-idirafter", "-iprefix",         "-iwithprefix",
    "-iwithprefixbefore", "-isysroot", "--sysroot", "-imultilib",  "-target",
    "-arch",      "-Xpreprocessor", "-Xclang", "--param",          "-aux-info",
    "-Xassembler", "-B"};

const std::unordered_set<std::string> link_options_with_value = {"-Xlinker", "-T", "-u", "-z",
                                                                 "-e"};

const std::unordered_set<std::string> link_only_flags = {
    "-shared", "-pie", "-no-pie", "-rdynamic", "-s", "-nostdlib", "-nostartfiles",
    "-nodefaultlibs", "-static-libgcc", "-static-libstdc++"};

const std::unordered_set<std::string> passthrough_flags = {
    "-S", "-E", "-M", "-MM", "-###", "--version", "-dumpversion", "-dumpmachine",
    "-dumpspecs", "--help", "-fsyntax-only", "-"};

bool is_archiver(const std::string& program) {
    const std::string name = fs::path(program).filename().string();
    return name == "ar" || name.ends_with("-ar") || name == "llvm-ar";
}

std::optional<std::vector<std::string>> expand_response_files(
    const std::vector<std::string>& tokens, int depth = 0) {
    if (depth > 8) {
        return std::nullopt;
    }
    std::vector<std::string> out;
    for (const std::string& token : tokens) {
        if (token.size() < 2 || token[0] != '@') {
            out.push_back(token);
            continue;
        }
        std::ifstream in(token.substr(1));
        if (!in) {
            return std::nullopt;
        }
        std::vector<std::string> inner;
        std::string word;
        bool in_word = false;
        char quote = 0;
        char c;
        while (in.get(c)) {
            if (quote) {
                if (c == quote) {
                    quote = 0;
                } else if (c == '\\' && in.peek() != EOF) {
                    in.get(c);
                    word += c;
                } else {
                    word += c;
                }
            } else if (c == '\'' || c == '"') {
                quote = c;
                in_word = true;
            } else if (c == '\\' && in.peek() != EOF) {
                in.get(c);
                word += c;
                in_word = true;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                if (in_word) {
                    inner.push_back(word);
                    word.clear();
                    in_word = false;
                }
            } else {
                word += c;
                in_word = true;
            }
        }
        if (in_word) {
            inner.push_back(word);
        }
        auto expanded = expand_response_files(inner, depth + 1);
        if (!expanded) {
            return std::nullopt;
        }
        out.insert(out.end(), expanded->begin(), expanded->end());
    }
    return out;
}

InvocationPlan plan_archive(InvocationPlan p, const std::vector<std::string>& tokens) {
    std::size_t i = 0;
    while (i < tokens.size() && tokens[i].starts_with("--")) {
        i += tokens[i] == "--plugin" || tokens[i] == "--target" ? 2 : 1;
    }
    if (i >= tokens.size()) {
        return p;
    }
    std::string op = tokens[i++];
    if (op.starts_with("-")) {
        op.erase(0, 1);
    }
    if (op.find_first_of("abi") != std::string::npos) {
        ++i;  // relpos member name
    }
    if (op.find('N') != std::string::npos) {
        ++i;  // instance count
    }
    if (i >= tokens.size()) {
        return p;
    }
    if (op.find_first_of("dmqrs") == std::string::npos) {
        return p;
    }
    p.mode = Mode::Archive;
    p.outputs = {tokens[i]};
    return p;
}

void add_canonical(std::set<fs::path>& out, const fs::path& path) {
    std::error_code ec;
    fs::path canonical = fs::weakly_canonical(path, ec);
    out.insert(ec ? fs::absolute(path).lexically_normal() : canonical);
}

void scan_one(const InvocationPlan& plan, std::size_t index, const BuildOptions& options,
              std::set<fs::path>& paths, std::vector<AbomWarning>& warnings) {
    const fs::path& source = plan.source_inputs[index];
    add_canonical(paths, source);

    std::vector<std::string> cmd{plan.compiler_argv.front()};
    cmd.insert(cmd.end(), plan.preprocessor_args.begin(), plan.preprocessor_args.end());
    if (index < plan.source_languages.size() && !plan.source_languages[index].empty()) {
        cmd.push_back("-x");
        cmd.push_back(plan.source_languages[index]);
    }
    cmd.insert(cmd.end(), options.dep_flags.begin(), options.dep_flags.end());
    cmd.push_back(source.string());

    const CapturedOutput result = run_capture(cmd, /*quiet_stderr=*/true);
    if (result.exit_code != 0) {
        warnings.push_back({source.string(), WarningReason::DepScanFailed});
        return;
    }
    for (const std::string& dep : parse_make_deps(result.out)) {
        add_canonical(paths, dep);
    }
}

std::optional<fs::path> resolve_library(const std::string& name, const InvocationPlan& plan,
                                        const BuildOptions& options) {
    std::vector<std::string> candidates;
    if (name.starts_with(":")) {
        candidates.push_back(name.substr(1));
    } else {
        if (!plan.static_link) {
            candidates.push_back("lib" + name + ".so");
        }
        candidates.push_back("lib" + name + ".a");
    }
    std::vector<fs::path> dirs = plan.library_dirs;
    dirs.insert(dirs.end(), options.system_library_dirs.begin(), options.system_library_dirs.end());
    for (const fs::path& dir : dirs) {
        for (const std::string& candidate : candidates) {
            std::error_code ec;
            const fs::path full = dir / candidate;
            if (fs::is_regular_file(full, ec)) {
                return full;
            }
        }
    }
    return std::nullopt;
}

std::optional<FilterChain> chain_from_elf(std::span<const std::uint8_t> bytes) {
    const auto section = extract_abom(bytes);
    if (!section) {
        return std::nullopt;
    }
    return parse_section(*section);
}

}  // namespace

std::string_view to_string(Mode mode) noexcept {
    switch (mode) {
        case Mode::Compile: return "compile";
        case Mode::Link: return "link";
        case Mode::CompileAndLink: return "compile-and-link";
        case Mode::Archive: return "archive";
        case Mode::Passthrough: return "passthrough";
    }
    return "passthrough";
}

std::string_view to_string(WarningReason reason) noexcept {
    switch (reason) {
        case WarningReason::MissingAbom: return "missing-abom";
        case WarningReason::InvalidAbom: return "invalid-abom";
        case WarningReason::UnresolvedLibrary: return "unresolved-library";
        case WarningReason::DepScanFailed: return "dep-scan-failed";
    }
    return "missing-abom";
}

std::string format_warning(const AbomWarning& warning) {
    return "abom: warning: " + warning.path + ": " + std::string(to_string(warning.reason));
}

BuildOptions BuildOptions::from_environment() {
    BuildOptions options;
    if (const char* flags = std::getenv("ABOM_DEPFLAGS"); flags && *flags) {
        std::istringstream in(flags);
        options.dep_flags.assign(std::istream_iterator<std::string>(in),
                                 std::istream_iterator<std::string>());
    }
    if (const char* quiet = std::getenv("ABOM_QUIET"); quiet && *quiet && std::string(quiet) != "0") {
        options.print_warnings = false;
    }
    return options;
}

InvocationPlan plan(const std::vector<std::string>& argv) {
    InvocationPlan p;
    p.compiler_argv = argv;
    if (argv.empty()) {
        return p;
    }
    const auto expanded =
        expand_response_files(std::vector<std::string>(argv.begin() + 1, argv.end()));
    if (!expanded) {
        return p;
    }
    const std::vector<std::string>& tokens = *expanded;
    if (is_archiver(argv.front())) {
        return plan_archive(std::move(p), tokens);
    }

    bool compile_only = false;
    bool passthrough = false;
    bool header_input = false;
    std::optional<std::string> output;
    std::string language;

    auto value_of = [&](std::size_t& i) -> std::optional<std::string> {
        if (i + 1 >= tokens.size()) {
            return std::nullopt;
        }
        return tokens[++i];
    };

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string& t = tokens[i];
        if (passthrough_flags.contains(t) || t.starts_with("-print-")) {
            passthrough = true;
            continue;
        }
        if (t.size() < 2 || t[0] != '-') {
            const fs::path path(t);
            const std::string ext = path.extension().string();
            const bool forced = !language.empty() && language != "none";
            if (forced ? language.ends_with("-header") : header_extensions.contains(ext)) {
                header_input = true;
            } else if (forced || source_extensions.contains(ext)) {
                p.source_inputs.push_back(path);
                p.source_languages.push_back(forced ? language : std::string());
            } else {
                p.link_inputs.push_back(path);
            }
            continue;
        }
        if (t == "-c") {
            compile_only = true;
        } else if (t == "-o") {
            output = value_of(i);
            if (!output) return p;
        } else if (t.starts_with("-o")) {
            output = t.substr(2);
        } else if (t == "-x") {
            auto lang = value_of(i);
            if (!lang) return p;
            language = *lang;
        } else if (t.starts_with("-x")) {
            language = t.substr(2);
        } else if (t == "-L") {
            auto dir = value_of(i);
            if (!dir) return p;
            p.library_dirs.emplace_back(*dir);
        } else if (t.starts_with("-L")) {
            p.library_dirs.emplace_back(t.substr(2));
        } else if (t == "-l") {
            auto lib = value_of(i);
            if (!lib) return p;
            p.libraries.push_back(*lib);
        } else if (t.starts_with("-l")) {
            p.libraries.push_back(t.substr(2));
        } else if (t == "-static") {
            p.static_link = true;
        } else if (t == "-MD" || t == "-MMD" || t == "-MP" || t == "-MG") {
            // dependency-file side outputs are irrelevant to the scan
        } else if (t == "-MF" || t == "-MT" || t == "-MQ") {
            if (!value_of(i)) return p;
        } else if (t.starts_with("-MF") || t.starts_with("-MT") || t.starts_with("-MQ")) {
        } else if (t.starts_with("-Wl,") || link_only_flags.contains(t)) {
        } else if (link_options_with_value.contains(t)) {
            if (!value_of(i)) return p;
        } else if (preprocessor_options_with_value.contains(t)) {
            auto value = value_of(i);
            if (!value) return p;
            p.preprocessor_args.push_back(t);
            p.preprocessor_args.push_back(*value);
        } else {
            p.preprocessor_args.push_back(t);
        }
    }

    if (passthrough || header_input) {
        return p;
    }
    for (const fs::path& source : p.source_inputs) {
        std::error_code ec;
        if (!fs::is_regular_file(source, ec)) {
            return p;
        }
    }

    if (compile_only) {
        if (p.source_inputs.empty()) {
            return p;
        }
        if (output) {
            if (p.source_inputs.size() != 1) {
                return p;
            }
            p.outputs = {*output};
        } else {
            for (const fs::path& source : p.source_inputs) {
                p.outputs.push_back(source.filename().replace_extension(".o"));
            }
        }
        p.mode = Mode::Compile;
        return p;
    }

    if (!p.source_inputs.empty()) {
        p.mode = Mode::CompileAndLink;
    } else if (!p.link_inputs.empty() || !p.libraries.empty()) {
        p.mode = Mode::Link;
    } else {
        return p;
    }
    p.outputs = {output.value_or("a.out")};
    return p;
}

SourceScan enumerate_sources(const InvocationPlan& plan, const BuildOptions& options) {
    std::set<fs::path> paths;
    SourceScan scan;
    for (std::size_t i = 0; i < plan.source_inputs.size(); ++i) {
        scan_one(plan, i, options, paths, scan.warnings);
    }
    scan.paths.assign(paths.begin(), paths.end());
    return scan;
}

FilterChain parse_section(std::span<const std::uint8_t> bytes) {
    std::optional<FilterChain> merged;
    std::size_t pos = 0;
    do {
        const auto rest = bytes.subspan(pos);
        if (!has_abom_magic(rest)) {
            throw Error(ErrorKind::NotAnAbom, "not an ABOM: magic word missing at offset " +
                                                  std::to_string(pos));
        }
        if (rest.size() < wire::header_size) {
            throw Error(ErrorKind::Truncated, "ABOM header truncated");
        }
        std::uint64_t length = 0;
        for (int i = 3; i >= 0; --i) {
            length = (length << 8) | rest[wire::length_offset + static_cast<std::size_t>(i)];
        }
        if (length > rest.size() - wire::header_size) {
            throw Error(ErrorKind::Truncated, "ABOM payload extends past the section");
        }
        const std::size_t total = wire::header_size + static_cast<std::size_t>(length);
        AbomDocument doc = parse(rest.first(total));
        if (merged) {
            merged->merge(doc.chain);
        } else {
            merged = std::move(doc.chain);
        }
        pos += total;
    } while (pos < bytes.size());
    return std::move(*merged);
}

std::optional<FilterChain> read_upstream(const fs::path& path, std::vector<AbomWarning>& warnings) {
    std::vector<std::uint8_t> bytes;
    try {
        bytes = read_file(path);
    } catch (const Error&) {
        warnings.push_back({path.string(), WarningReason::MissingAbom});
        return std::nullopt;
    }

    switch (detect(bytes)) {
        case BinaryKind::Elf64:
            try {
                auto chain = chain_from_elf(bytes);
                if (!chain) {
                    warnings.push_back({path.string(), WarningReason::MissingAbom});
                }
                return chain;
            } catch (const Error&) {
                warnings.push_back({path.string(), WarningReason::InvalidAbom});
                return std::nullopt;
            }

        case BinaryKind::ArArchive: {
            const fs::path sidecar = sidecar_path(path);
            std::error_code ec;
            if (fs::exists(sidecar, ec) &&
                fs::last_write_time(sidecar, ec) >= fs::last_write_time(path, ec) && !ec) {
                try {
                    return parse_section(read_file(sidecar));
                } catch (const Error&) {
                    // unusable cache: fall back to the members
                }
            }
            std::optional<FilterChain> merged;
            bool lacking = false;
            try {
                for (const ArchiveMember& member : read_archive(bytes)) {
                    std::optional<FilterChain> chain;
                    if (detect(member.data) == BinaryKind::Elf64) {
                        try {
                            chain = chain_from_elf(member.data);
                        } catch (const Error&) {
                        }
                    }
                    if (!chain) {
                        lacking = true;
                    } else if (merged) {
                        merged->merge(*chain);
                    } else {
                        merged = std::move(chain);
                    }
                }
            } catch (const Error&) {
                lacking = true;
            }
            if (lacking) {
                warnings.push_back({path.string(), WarningReason::MissingAbom});
            }
            return merged;
        }

        default:
            warnings.push_back({path.string(), WarningReason::MissingAbom});
            return std::nullopt;
    }
}

UpstreamScan collect_upstream(const InvocationPlan& plan, const BuildOptions& options) {
    UpstreamScan scan;
    for (const fs::path& input : plan.link_inputs) {
        if (auto chain = read_upstream(input, scan.warnings)) {
            scan.chains.push_back(std::move(*chain));
        }
    }
    for (const std::string& name : plan.libraries) {
        const auto resolved = resolve_library(name, plan, options);
        if (!resolved) {
            scan.warnings.push_back({"-l" + name, WarningReason::UnresolvedLibrary});
            continue;
        }
        if (auto chain = read_upstream(*resolved, scan.warnings)) {
            scan.chains.push_back(std::move(*chain));
        }
    }
    return scan;
}

AbomDocument build_abom(std::vector<fs::path> sources, const std::vector<FilterChain>& upstream) {
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());

    std::vector<Digest36> digests(sources.size());
    const std::size_t workers =
        std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
    if (sources.size() < 16 || workers == 1) {
        for (std::size_t i = 0; i < sources.size(); ++i) {
            digests[i] = hash_file(sources[i]);
        }
    } else {
        std::vector<std::future<void>> tasks;
        for (std::size_t w = 0; w < workers; ++w) {
            tasks.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < sources.size(); i += workers) {
                    digests[i] = hash_file(sources[i]);
                }
            }));
        }
        for (auto& task : tasks) {
            task.get();
        }
    }

    AbomDocument doc;
    for (Digest36 d : digests) {
        doc.chain.insert(d);
    }
    for (const FilterChain& chain : upstream) {
        doc.chain.merge(chain);
    }
    return doc;
}

void embed_into_file(const fs::path& path, const AbomDocument& doc) {
    const std::vector<std::uint8_t> image = read_file(path);
    const std::vector<std::uint8_t> rewritten = embed_abom(image, serialize(doc));
    replace_file(path, rewritten);
}

std::vector<AbomWarning> write_sidecar(const fs::path& archive) {
    std::vector<AbomWarning> warnings;
    const std::vector<std::uint8_t> bytes = read_file(archive);
    std::optional<FilterChain> merged;
    bool lacking = false;
    for (const ArchiveMember& member : read_archive(bytes)) {
        std::optional<FilterChain> chain;
        if (detect(member.data) == BinaryKind::Elf64) {
            try {
                chain = chain_from_elf(member.data);
            } catch (const Error&) {
            }
        }
        if (!chain) {
            lacking = true;
        } else if (merged) {
            merged->merge(*chain);
        } else {
            merged = std::move(chain);
        }
    }
    if (lacking) {
        warnings.push_back({archive.string(), WarningReason::MissingAbom});
    }

    const fs::path sidecar = sidecar_path(archive);
    if (!merged) {
        std::error_code ignored;
        fs::remove(sidecar, ignored);
        return warnings;
    }
    replace_file(sidecar, serialize(AbomDocument{wire::version, std::move(*merged)}));
    return warnings;
}

int wrap(const std::vector<std::string>& argv, const BuildOptions& options,
         std::ostream& diagnostics) {
    const InvocationPlan p = plan(argv);
    const int status = run_process(argv);
    if (status != 0 || p.mode == Mode::Passthrough) {
        return status;
    }

    std::vector<AbomWarning> warnings;
    auto flush_warnings = [&] {
        if (options.print_warnings) {
            for (const AbomWarning& w : warnings) {
                diagnostics << format_warning(w) << '\n';
            }
        }
        warnings.clear();
    };

    try {
        switch (p.mode) {
            case Mode::Compile:
                for (std::size_t i = 0; i < p.source_inputs.size(); ++i) {
                    InvocationPlan single = p;
                    single.source_inputs = {p.source_inputs[i]};
                    single.source_languages = {p.source_languages[i]};
                    SourceScan scan = enumerate_sources(single, options);
                    warnings.insert(warnings.end(), scan.warnings.begin(), scan.warnings.end());
                    embed_into_file(p.outputs[i], build_abom(std::move(scan.paths), {}));
                }
                break;
            case Mode::Link:
            case Mode::CompileAndLink: {
                SourceScan sources;
                if (p.mode == Mode::CompileAndLink) {
                    sources = enumerate_sources(p, options);
                }
                UpstreamScan upstream = collect_upstream(p, options);
                warnings.insert(warnings.end(), sources.warnings.begin(), sources.warnings.end());
                warnings.insert(warnings.end(), upstream.warnings.begin(), upstream.warnings.end());
                embed_into_file(p.outputs.front(),
                                build_abom(std::move(sources.paths), upstream.chains));
                break;
            }
            case Mode::Archive:
                warnings = write_sidecar(p.outputs.front());
                break;
            case Mode::Passthrough:
                break;
        }
    } catch (const std::exception& e) {
        flush_warnings();
        diagnostics << "abom: error: " << e.what() << '\n';
        return exit_embed_failure;
    }
    flush_warnings();
    return 0;
}

}  // namespace abom
