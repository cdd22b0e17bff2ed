#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "codelink/binary.hpp"
#include "codelink/util.hpp"

namespace codelink {
namespace {

constexpr std::uint32_t SHT_PROGBITS = 1;
constexpr std::uint32_t SHT_SYMTAB = 2;
constexpr std::uint32_t SHT_DYNSYM = 11;
constexpr unsigned STT_FUNC = 2;

/// Bounds-checked big/little-endian reader; any out-of-range access is a
/// MalformedElf, so the parser can never touch memory past the buffer.
class ByteReader {
 public:
  ByteReader(std::string_view bytes, bool big_endian)
      : data_(bytes), be_(big_endian) {}

  std::size_t size() const { return data_.size(); }

  bool in_bounds(std::uint64_t off, std::uint64_t len) const {
    return off <= data_.size() && len <= data_.size() - off;
  }

  std::uint8_t u8(std::uint64_t off) const {
    check(off, 1);
    return static_cast<std::uint8_t>(data_[off]);
  }
  std::uint16_t u16(std::uint64_t off) const {
    check(off, 2);
    return be_ ? static_cast<std::uint16_t>(byte(off) << 8 | byte(off + 1))
               : static_cast<std::uint16_t>(byte(off + 1) << 8 | byte(off));
  }
  std::uint32_t u32(std::uint64_t off) const {
    check(off, 4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
      v = (v << 8) | byte(off + (be_ ? k : 3 - k));
    }
    return v;
  }
  std::uint64_t u64(std::uint64_t off) const {
    check(off, 8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) {
      v = (v << 8) | byte(off + (be_ ? k : 7 - k));
    }
    return v;
  }

  std::string_view slice(std::uint64_t off, std::uint64_t len) const {
    check(off, len);
    return data_.substr(off, len);
  }

 private:
  std::uint8_t byte(std::uint64_t off) const {
    return static_cast<std::uint8_t>(data_[off]);
  }
  void check(std::uint64_t off, std::uint64_t len) const {
    if (!in_bounds(off, len)) {
      throw Error(errc::malformed_elf,
                  "read of " + std::to_string(len) + " bytes at offset " +
                      std::to_string(off) + " exceeds file size " +
                      std::to_string(data_.size()));
    }
  }

  std::string_view data_;
  bool be_;
};

struct SectionHeader {
  std::uint32_t type = 0;
  std::uint64_t addr = 0;
  std::uint64_t offset = 0;
  std::uint64_t size = 0;
  std::uint32_t link = 0;
  std::uint64_t entsize = 0;
};

std::string machine_to_arch(std::uint16_t machine) {
  switch (machine) {
    case 3: return "x86";
    case 40: return "ARM";
    case 62: return "x86_64";
    case 183: return "ARM64";
    default: return "unknown(" + std::to_string(machine) + ")";
  }
}

// NUL-terminated string confined to the string table; nullopt when the
// offset is out of range or unterminated.
std::optional<std::string> read_strtab(const ByteReader& r, const SectionHeader& strtab,
                                       std::uint64_t name_off) {
  if (name_off >= strtab.size) return std::nullopt;
  if (!r.in_bounds(strtab.offset, strtab.size)) return std::nullopt;
  const std::string_view table = r.slice(strtab.offset, strtab.size);
  const auto nul = table.find('\0', name_off);
  if (nul == std::string_view::npos) return std::nullopt;
  return std::string(table.substr(name_off, nul - name_off));
}

}  // namespace

std::vector<DecompiledFunction> read_elf_functions(std::string_view binary_bytes,
                                                   const std::string& bin_rel) {
  if (binary_bytes.size() < 4 || binary_bytes.substr(0, 4) != "\x7f""ELF") {
    throw Error(errc::not_an_elf, bin_rel + ": bad magic");
  }
  if (binary_bytes.size() < 52) {
    throw Error(errc::malformed_elf, bin_rel + ": truncated ELF header");
  }

  const unsigned ei_class = static_cast<unsigned char>(binary_bytes[4]);
  const unsigned ei_data = static_cast<unsigned char>(binary_bytes[5]);
  if (ei_class != 1 && ei_class != 2) {
    throw Error(errc::malformed_elf, bin_rel + ": bad EI_CLASS");
  }
  if (ei_data != 1 && ei_data != 2) {
    throw Error(errc::malformed_elf, bin_rel + ": bad EI_DATA");
  }
  const bool is64 = ei_class == 2;
  ByteReader r(binary_bytes, ei_data == 2);

  const std::uint16_t machine = r.u16(18);
  const std::string architecture = machine_to_arch(machine);

  const std::uint64_t shoff = is64 ? r.u64(0x28) : r.u32(0x20);
  const std::uint16_t shentsize = is64 ? r.u16(0x3a) : r.u16(0x2e);
  const std::uint16_t shnum = is64 ? r.u16(0x3c) : r.u16(0x30);

  const std::uint16_t min_shentsize = is64 ? 64 : 40;
  if (shnum == 0 || shoff == 0) {
    throw Error(errc::no_symbols, bin_rel + ": no section headers");
  }
  if (shentsize < min_shentsize) {
    throw Error(errc::malformed_elf, bin_rel + ": section header entry too small");
  }
  if (!r.in_bounds(shoff, static_cast<std::uint64_t>(shentsize) * shnum)) {
    throw Error(errc::malformed_elf, bin_rel + ": section header table out of bounds");
  }

  std::vector<SectionHeader> sections(shnum);
  for (std::uint16_t s = 0; s < shnum; ++s) {
    const std::uint64_t off = shoff + static_cast<std::uint64_t>(s) * shentsize;
    SectionHeader& sh = sections[s];
    sh.type = r.u32(off + 4);
    if (is64) {
      sh.addr = r.u64(off + 0x10);
      sh.offset = r.u64(off + 0x18);
      sh.size = r.u64(off + 0x20);
      sh.link = r.u32(off + 0x28);
      sh.entsize = r.u64(off + 0x38);
    } else {
      sh.addr = r.u32(off + 0x0c);
      sh.offset = r.u32(off + 0x10);
      sh.size = r.u32(off + 0x14);
      sh.link = r.u32(off + 0x18);
      sh.entsize = r.u32(off + 0x24);
    }
  }

  auto parse_symbols =
      [&](const SectionHeader& symtab) -> std::vector<DecompiledFunction> {
    const std::uint64_t want_entsize = is64 ? 24 : 16;
    const std::uint64_t entsize = symtab.entsize ? symtab.entsize : want_entsize;
    if (entsize < want_entsize) {
      throw Error(errc::malformed_elf, bin_rel + ": symbol entry size too small");
    }
    if (!r.in_bounds(symtab.offset, symtab.size)) {
      throw Error(errc::malformed_elf, bin_rel + ": symbol table out of bounds");
    }
    if (symtab.link >= sections.size()) {
      throw Error(errc::malformed_elf, bin_rel + ": symbol string table link out of range");
    }
    const SectionHeader& strtab = sections[symtab.link];

    std::vector<DecompiledFunction> out;
    std::unordered_set<std::string> seen;  // guards UID uniqueness
    // Overlapping symbols could each claim a whole section; cap the total
    // dumped bytes so output stays a small multiple of the input size.
    std::uint64_t dump_budget = 4 * static_cast<std::uint64_t>(r.size()) + 4096;
    const std::uint64_t count = symtab.size / entsize;
    for (std::uint64_t idx = 0; idx < count; ++idx) {
      const std::uint64_t off = symtab.offset + idx * entsize;
      std::uint32_t st_name;
      std::uint64_t st_value, st_size;
      unsigned st_info, st_shndx;
      if (is64) {
        st_name = r.u32(off);
        st_info = r.u8(off + 4);
        st_shndx = r.u16(off + 6);
        st_value = r.u64(off + 8);
        st_size = r.u64(off + 16);
      } else {
        st_name = r.u32(off);
        st_value = r.u32(off + 4);
        st_size = r.u32(off + 8);
        st_info = r.u8(off + 12);
        st_shndx = r.u16(off + 14);
      }
      if ((st_info & 0xf) != STT_FUNC) continue;
      if (st_size == 0 || st_value == 0) continue;

      const auto name = read_strtab(r, strtab, st_name);
      if (!name || name->empty()) continue;

      // The symbol's bytes must lie inside its containing section, both in
      // the address space and in the file image.
      if (st_shndx == 0 || st_shndx >= sections.size()) continue;
      const SectionHeader& sec = sections[st_shndx];
      // Functions live in progbits sections; anything else (NOBITS and
      // friends) has no file image worth dumping.
      if (sec.type != SHT_PROGBITS) continue;
      if (st_value < sec.addr || st_size > sec.size ||
          st_value - sec.addr > sec.size - st_size) {
        continue;
      }
      const std::uint64_t file_pos = sec.offset + (st_value - sec.addr);
      if (!r.in_bounds(file_pos, st_size)) continue;

      DecompiledFunction fn;
      fn.name = ensure_utf8(*name);  // hostile images can hold arbitrary bytes
      fn.address = st_value;
      fn.architecture = architecture;
      fn.bin = bin_rel;
      if (st_size <= dump_budget) {
        fn.assembly = hex_dump(r.slice(file_pos, st_size));
        dump_budget -= st_size;
      } else {
        fn.assembly = "";
      }
      fn.decompiled_definition = "";
      const std::string key = std::to_string(st_value) + ":" + fn.name;
      if (!seen.insert(key).second) continue;  // duplicate table entry
      out.push_back(std::move(fn));
    }
    return out;
  };

  // Prefer the full symbol table; fall back to the dynamic one.
  for (std::uint32_t want : {SHT_SYMTAB, SHT_DYNSYM}) {
    for (const auto& sh : sections) {
      if (sh.type != want) continue;
      auto result = parse_symbols(sh);
      if (!result.empty()) return result;
    }
  }
  throw Error(errc::no_symbols, bin_rel + ": no function symbols in symtab/dynsym");
}

}  // namespace codelink
