#include "abom/objfile.hpp"

#include <elf.h>

#include <algorithm>
#include <charconv>
#include <cstring>

#include "abom/error.hpp"

namespace abom {
namespace {

constexpr std::size_t ehdr_size = sizeof(Elf64_Ehdr);
constexpr std::size_t shdr_size = sizeof(Elf64_Shdr);

// Offsets into Elf64_Ehdr / Elf64_Shdr, read explicitly as little-endian so
// the code does not depend on host byte order.
constexpr std::size_t e_shoff_at = offsetof(Elf64_Ehdr, e_shoff);
constexpr std::size_t e_shentsize_at = offsetof(Elf64_Ehdr, e_shentsize);
constexpr std::size_t e_shnum_at = offsetof(Elf64_Ehdr, e_shnum);
constexpr std::size_t e_shstrndx_at = offsetof(Elf64_Ehdr, e_shstrndx);

std::uint64_t load_le(std::span<const std::uint8_t> data, std::size_t at, int width) {
    std::uint64_t v = 0;
    for (int i = width - 1; i >= 0; --i) {
        v = (v << 8) | data[at + static_cast<std::size_t>(i)];
    }
    return v;
}

void store_le(std::span<std::uint8_t> data, std::size_t at, std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) {
        data[at + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * i));
    }
}

[[noreturn]] void structural(const std::string& what) {
    throw Error(ErrorKind::Structural, "malformed ELF: " + what);
}

bool fits(std::uint64_t offset, std::uint64_t size, std::uint64_t total) {
    return offset <= total && size <= total - offset;
}

struct RawSection {
    std::uint32_t name = 0;
    std::uint32_t type = 0;
    std::uint64_t flags = 0;
    std::uint64_t addr = 0;
    std::uint64_t offset = 0;
    std::uint64_t size = 0;
    std::uint32_t link = 0;
    std::uint32_t info = 0;
    std::uint64_t addralign = 0;
    std::uint64_t entsize = 0;

    static RawSection load(std::span<const std::uint8_t> d, std::size_t at) {
        RawSection s;
        s.name = static_cast<std::uint32_t>(load_le(d, at + offsetof(Elf64_Shdr, sh_name), 4));
        s.type = static_cast<std::uint32_t>(load_le(d, at + offsetof(Elf64_Shdr, sh_type), 4));
        s.flags = load_le(d, at + offsetof(Elf64_Shdr, sh_flags), 8);
        s.addr = load_le(d, at + offsetof(Elf64_Shdr, sh_addr), 8);
        s.offset = load_le(d, at + offsetof(Elf64_Shdr, sh_offset), 8);
        s.size = load_le(d, at + offsetof(Elf64_Shdr, sh_size), 8);
        s.link = static_cast<std::uint32_t>(load_le(d, at + offsetof(Elf64_Shdr, sh_link), 4));
        s.info = static_cast<std::uint32_t>(load_le(d, at + offsetof(Elf64_Shdr, sh_info), 4));
        s.addralign = load_le(d, at + offsetof(Elf64_Shdr, sh_addralign), 8);
        s.entsize = load_le(d, at + offsetof(Elf64_Shdr, sh_entsize), 8);
        return s;
    }

    void store(std::vector<std::uint8_t>& out) const {
        const std::size_t at = out.size();
        out.resize(at + shdr_size, 0);
        std::span<std::uint8_t> d(out);
        store_le(d, at + offsetof(Elf64_Shdr, sh_name), name, 4);
        store_le(d, at + offsetof(Elf64_Shdr, sh_type), type, 4);
        store_le(d, at + offsetof(Elf64_Shdr, sh_flags), flags, 8);
        store_le(d, at + offsetof(Elf64_Shdr, sh_addr), addr, 8);
        store_le(d, at + offsetof(Elf64_Shdr, sh_offset), offset, 8);
        store_le(d, at + offsetof(Elf64_Shdr, sh_size), size, 8);
        store_le(d, at + offsetof(Elf64_Shdr, sh_link), link, 4);
        store_le(d, at + offsetof(Elf64_Shdr, sh_info), info, 4);
        store_le(d, at + offsetof(Elf64_Shdr, sh_addralign), addralign, 8);
        store_le(d, at + offsetof(Elf64_Shdr, sh_entsize), entsize, 8);
    }
};

/// Parsed and bounds-checked view of an ELF64 little-endian image.
struct ElfImage {
    std::span<const std::uint8_t> bytes;
    std::uint64_t shoff = 0;
    std::uint16_t shstrndx = SHN_UNDEF;
    std::vector<RawSection> sections;

    std::span<const std::uint8_t> contents(const RawSection& s) const {
        if (s.type == SHT_NOBITS) {
            return {};
        }
        return bytes.subspan(s.offset, s.size);
    }

    bool has_names() const { return shstrndx != SHN_UNDEF; }

    std::string name_of(const RawSection& s) const {
        if (!has_names()) {
            return {};
        }
        const auto table = contents(sections[shstrndx]);
        if (s.name >= table.size()) {
            structural("section name offset outside the string table");
        }
        const auto rest = table.subspan(s.name);
        const auto end = std::find(rest.begin(), rest.end(), std::uint8_t{0});
        if (end == rest.end()) {
            structural("unterminated section name");
        }
        return std::string(rest.begin(), end);
    }

    std::optional<std::size_t> find(std::string_view name) const {
        for (std::size_t i = 1; i < sections.size(); ++i) {
            if (name_of(sections[i]) == name) {
                return i;
            }
        }
        return std::nullopt;
    }
};

ElfImage load_elf(std::span<const std::uint8_t> data) {
    const BinaryKind kind = detect(data);
    if (kind != BinaryKind::Elf64) {
        const bool elf32 = data.size() > EI_CLASS && data[EI_CLASS] == ELFCLASS32 &&
                           std::memcmp(data.data(), ELFMAG, SELFMAG) == 0;
        throw Error(ErrorKind::UnsupportedFormat,
                    std::string("unsupported binary format: ") +
                        (elf32 ? "ELF32" : std::string(to_string(kind))));
    }
    if (data.size() < ehdr_size) {
        structural("file shorter than the ELF header");
    }
    if (data[EI_DATA] != ELFDATA2LSB) {
        throw Error(ErrorKind::UnsupportedFormat, "unsupported binary format: big-endian ELF");
    }

    ElfImage img;
    img.bytes = data;
    img.shoff = load_le(data, e_shoff_at, 8);
    const auto shentsize = load_le(data, e_shentsize_at, 2);
    const auto shnum = load_le(data, e_shnum_at, 2);
    img.shstrndx = static_cast<std::uint16_t>(load_le(data, e_shstrndx_at, 2));

    if (shnum == 0) {
        if (img.shoff != 0) {
            structural("extended section numbering is not supported");
        }
        img.shstrndx = SHN_UNDEF;
        return img;
    }
    if (shentsize != shdr_size) {
        structural("unexpected section header entry size " + std::to_string(shentsize));
    }
    if (!fits(img.shoff, shnum * shdr_size, data.size())) {
        structural("section header table lies outside the file");
    }
    if (img.shoff < ehdr_size) {
        structural("section header table overlaps the ELF header");
    }
    if (img.shstrndx >= shnum) {
        structural("section name table index out of range");
    }

    img.sections.reserve(shnum);
    for (std::uint64_t i = 0; i < shnum; ++i) {
        RawSection s = RawSection::load(data, img.shoff + i * shdr_size);
        if (s.type != SHT_NOBITS && s.type != SHT_NULL && !fits(s.offset, s.size, data.size())) {
            structural("section " + std::to_string(i) + " data lies outside the file");
        }
        img.sections.push_back(s);
    }
    if (img.has_names() && img.sections[img.shstrndx].type != SHT_STRTAB) {
        structural("section name table is not a string table");
    }
    return img;
}

void pad_to(std::vector<std::uint8_t>& out, std::size_t alignment) {
    while (out.size() % alignment != 0) {
        out.push_back(0);
    }
}

void append_bytes(std::vector<std::uint8_t>& out, std::string_view text) {
    out.insert(out.end(), text.begin(), text.end());
    out.push_back(0);
}

}  // namespace

std::string_view to_string(BinaryKind kind) noexcept {
    switch (kind) {
        case BinaryKind::Elf64: return "ELF64";
        case BinaryKind::MachO: return "Mach-O";
        case BinaryKind::Pe: return "PE";
        case BinaryKind::ArArchive: return "ar archive";
        case BinaryKind::Unknown: return "unknown";
    }
    return "unknown";
}

BinaryKind detect(std::span<const std::uint8_t> data) noexcept {
    if (data.size() >= 5 && std::memcmp(data.data(), ELFMAG, SELFMAG) == 0) {
        return data[EI_CLASS] == ELFCLASS64 ? BinaryKind::Elf64 : BinaryKind::Unknown;
    }
    if (data.size() >= 8 && std::memcmp(data.data(), "!<arch>\n", 8) == 0) {
        return BinaryKind::ArArchive;
    }
    if (data.size() >= 4) {
        const std::uint32_t be = (std::uint32_t{data[0]} << 24) | (std::uint32_t{data[1]} << 16) |
                                 (std::uint32_t{data[2]} << 8) | std::uint32_t{data[3]};
        switch (be) {
            case 0xFEEDFACFu:
            case 0xCFFAEDFEu:
            case 0xFEEDFACEu:
            case 0xCEFAEDFEu:
            case 0xCAFEBABEu:
                return BinaryKind::MachO;
            default:
                break;
        }
    }
    if (data.size() >= 2 && data[0] == 'M' && data[1] == 'Z') {
        return BinaryKind::Pe;
    }
    return BinaryKind::Unknown;
}

namespace elf {

std::vector<SectionInfo> list_sections(std::span<const std::uint8_t> image) {
    const ElfImage img = load_elf(image);
    std::vector<SectionInfo> out;
    out.reserve(img.sections.size());
    for (const RawSection& s : img.sections) {
        out.push_back({img.name_of(s), s.type, s.flags, s.offset, s.size, s.addralign});
    }
    return out;
}

}  // namespace elf

std::optional<std::vector<std::uint8_t>> extract_abom(std::span<const std::uint8_t> image) {
    const ElfImage img = load_elf(image);
    const auto index = img.find(SectionSpec::elf_name);
    if (!index) {
        return std::nullopt;
    }
    const auto bytes = img.contents(img.sections[*index]);
    return std::vector<std::uint8_t>(bytes.begin(), bytes.end());
}

std::vector<std::uint8_t> embed_abom(std::span<const std::uint8_t> image,
                                     std::span<const std::uint8_t> abom) {
    const ElfImage img = load_elf(image);
    std::vector<std::uint8_t> out(image.begin(), image.end());
    const std::uint64_t data_offset = out.size();
    out.insert(out.end(), abom.begin(), abom.end());

    if (const auto existing = img.find(SectionSpec::elf_name)) {
        const std::size_t at = img.shoff + *existing * shdr_size;
        std::span<std::uint8_t> view(out);
        store_le(view, at + offsetof(Elf64_Shdr, sh_offset), data_offset, 8);
        store_le(view, at + offsetof(Elf64_Shdr, sh_size), abom.size(), 8);
        return out;
    }

    std::vector<RawSection> sections = img.sections;
    if (sections.empty()) {
        sections.emplace_back();  // mandatory SHN_UNDEF entry
    }

    std::vector<std::uint8_t> names;
    std::size_t names_index = img.shstrndx;
    if (img.has_names()) {
        const auto old = img.contents(sections[names_index]);
        names.assign(old.begin(), old.end());
        if (names.empty() || names.back() != 0) {
            names.push_back(0);
        }
    } else {
        names.push_back(0);
        RawSection table;
        table.name = static_cast<std::uint32_t>(names.size());
        append_bytes(names, ".shstrtab");
        table.type = SHT_STRTAB;
        table.addralign = 1;
        names_index = sections.size();
        sections.push_back(table);
    }

    RawSection abom_section;
    abom_section.name = static_cast<std::uint32_t>(names.size());
    append_bytes(names, SectionSpec::elf_name);
    abom_section.type = SHT_PROGBITS;
    abom_section.flags = 0;
    abom_section.offset = data_offset;
    abom_section.size = abom.size();
    abom_section.addralign = 1;
    sections.push_back(abom_section);

    if (sections.size() >= SHN_LORESERVE) {
        throw Error(ErrorKind::Capacity, "too many ELF sections to add .abom");
    }

    sections[names_index].offset = out.size();
    sections[names_index].size = names.size();
    out.insert(out.end(), names.begin(), names.end());

    pad_to(out, 8);
    const std::uint64_t shoff = out.size();
    for (const RawSection& s : sections) {
        s.store(out);
    }

    std::span<std::uint8_t> view(out);
    store_le(view, e_shoff_at, shoff, 8);
    store_le(view, e_shentsize_at, shdr_size, 2);
    store_le(view, e_shnum_at, sections.size(), 2);
    store_le(view, e_shstrndx_at, names_index, 2);
    return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& archive) {
    std::filesystem::path result = archive;
    result += ".abom";
    return result;
}

std::vector<ArchiveMember> read_archive(std::span<const std::uint8_t> archive) {
    constexpr std::size_t magic_size = 8;
    constexpr std::size_t header_size = 60;
    if (detect(archive) != BinaryKind::ArArchive) {
        throw Error(ErrorKind::UnsupportedFormat, "not an ar archive");
    }

    auto field = [](std::span<const std::uint8_t> h, std::size_t at, std::size_t len) {
        std::string s(h.begin() + static_cast<std::ptrdiff_t>(at),
                      h.begin() + static_cast<std::ptrdiff_t>(at + len));
        s.erase(s.find_last_not_of(' ') + 1);
        return s;
    };
    auto number = [](const std::string& text) {
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
            throw Error(ErrorKind::Structural, "malformed ar member size '" + text + "'");
        }
        return v;
    };

    std::vector<ArchiveMember> members;
    std::span<const std::uint8_t> long_names;
    std::size_t pos = magic_size;
    while (pos < archive.size()) {
        if (archive.size() - pos < header_size) {
            throw Error(ErrorKind::Structural, "truncated ar member header");
        }
        const auto header = archive.subspan(pos, header_size);
        if (header[58] != '`' || header[59] != '\n') {
            throw Error(ErrorKind::Structural, "bad ar member header terminator");
        }
        std::string name = field(header, 0, 16);
        const std::uint64_t size = number(field(header, 48, 10));
        pos += header_size;
        if (size > archive.size() - pos) {
            throw Error(ErrorKind::Structural, "ar member extends past end of archive");
        }
        auto data = archive.subspan(pos, size);
        pos += size + (size % 2);

        if (name == "/" || name == "/SYM64/" || name == "__.SYMDEF" ||
            name == "__.SYMDEF SORTED") {
            continue;
        }
        if (name == "//") {
            long_names = data;
            continue;
        }
        if (name.starts_with("#1/")) {
            const std::uint64_t len = number(name.substr(3));
            if (len > data.size()) {
                throw Error(ErrorKind::Structural, "BSD ar name longer than member");
            }
            name.assign(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(len));
            name.erase(std::find(name.begin(), name.end(), '\0'), name.end());
            data = data.subspan(len);
        } else if (name.size() > 1 && name[0] == '/') {
            const std::uint64_t at = number(name.substr(1));
            if (at >= long_names.size()) {
                throw Error(ErrorKind::Structural, "ar long name offset out of range");
            }
            const auto rest = long_names.subspan(at);
            auto end = std::find(rest.begin(), rest.end(), std::uint8_t{'\n'});
            name.assign(rest.begin(), end);
            if (!name.empty() && name.back() == '/') {
                name.pop_back();
            }
        } else if (!name.empty() && name.back() == '/') {
            name.pop_back();
        }
        members.push_back({std::move(name), data});
    }
    return members;
}

}  // namespace abom
