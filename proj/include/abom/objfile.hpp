#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace abom {

enum class BinaryKind { Elf64, MachO, Pe, ArArchive, Unknown };

std::string_view to_string(BinaryKind kind) noexcept;

/// Section names used to carry an ABOM. Only the ELF one is produced.
struct SectionSpec {
    static constexpr std::string_view elf_name = ".abom";
    static constexpr std::string_view macho_segment_section = "__ABOM,__abom";
};

/// Classifies by leading magic bytes only; short input is Unknown.
BinaryKind detect(std::span<const std::uint8_t> data) noexcept;

namespace elf {

struct SectionInfo {
    std::string name;
    std::uint32_t type = 0;
    std::uint64_t flags = 0;
    std::uint64_t offset = 0;
    std::uint64_t size = 0;
    std::uint64_t alignment = 0;
};

/// Validated section table of a little-endian ELF64 image. Throws
/// Error(UnsupportedFormat) for other formats, Error(Structural) when header
/// claims fall outside the file.
std::vector<SectionInfo> list_sections(std::span<const std::uint8_t> image);

}  // namespace elf

/// Bytes of the ".abom" section, or nullopt when the image has none.
std::optional<std::vector<std::uint8_t>> extract_abom(std::span<const std::uint8_t> image);

/// Returns a copy of the image carrying `abom` as its ".abom" section. The
/// rewrite is append-only: existing bytes keep their offsets, and only the
/// ELF header fields that locate the section table are patched.
///
/// First embed appends the section data, a copy of the section-name table
/// extended with ".abom", and a new section header table (one extra entry;
/// the string-table entry is redirected to the copy). Re-embedding appends
/// the new data and repoints the existing ".abom" entry in place.
std::vector<std::uint8_t> embed_abom(std::span<const std::uint8_t> image,
                                     std::span<const std::uint8_t> abom);

/// "<archive>.abom", the pre-merged ABOM kept next to a static archive.
std::filesystem::path sidecar_path(const std::filesystem::path& archive);

struct ArchiveMember {
    std::string name;
    std::span<const std::uint8_t> data;
};

/// Members of a System V / GNU / BSD "ar" archive, skipping symbol tables
/// and the long-name table. Spans point into `archive`.
std::vector<ArchiveMember> read_archive(std::span<const std::uint8_t> archive);

}  // namespace abom
