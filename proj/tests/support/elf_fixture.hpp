#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace testsupport {

/// Byte-by-byte ELF image builder for reader tests: one .text section plus
/// .symtab/.strtab/.shstrtab. Supports both classes and both endiannesses.
class ElfBuilder {
 public:
  struct Sym {
    std::string name;
    std::uint64_t value = 0;
    std::uint64_t size = 0;
    unsigned type = 2;    // STT_FUNC
    unsigned shndx = 1;   // .text
  };

  bool is64 = true;
  bool little_endian = true;
  std::uint16_t machine = 62;  // EM_X86_64
  std::uint64_t text_addr = 0x401000;
  std::string text;
  std::vector<Sym> syms;
  bool emit_symtab = true;
  std::uint32_t symtab_type = 2;  // SHT_SYMTAB; use 11 for a dynsym-only image

  std::string build() const {
    std::string out;
    auto u8 = [&out](std::uint8_t v) { out.push_back(static_cast<char>(v)); };
    auto put = [&](std::uint64_t v, int bytes) {
      for (int i = 0; i < bytes; ++i) {
        const int shift = little_endian ? i : bytes - 1 - i;
        u8(static_cast<std::uint8_t>(v >> (8 * shift)));
      }
    };
    auto u16 = [&](std::uint64_t v) { put(v, 2); };
    auto u32 = [&](std::uint64_t v) { put(v, 4); };
    auto u64or32 = [&](std::uint64_t v) { put(v, is64 ? 8 : 4); };

    const std::uint64_t ehsize = is64 ? 64 : 52;
    const std::uint64_t shentsize = is64 ? 64 : 40;
    const std::uint64_t symentsize = is64 ? 24 : 16;
    const std::uint16_t shnum = 5;

    std::string strtab_data{'\0'};
    std::vector<std::uint32_t> name_offsets;
    for (const auto& sym : syms) {
      name_offsets.push_back(static_cast<std::uint32_t>(strtab_data.size()));
      strtab_data += sym.name;
      strtab_data.push_back('\0');
    }
    const std::string shstrtab_data =
        std::string("\0.text\0.symtab\0.strtab\0.shstrtab\0", 34);

    const std::uint64_t text_off = ehsize;
    const std::uint64_t symtab_off = text_off + text.size();
    const std::uint64_t symtab_size = emit_symtab ? (1 + syms.size()) * symentsize : 0;
    const std::uint64_t strtab_off = symtab_off + symtab_size;
    const std::uint64_t shstrtab_off = strtab_off + strtab_data.size();
    std::uint64_t shoff = shstrtab_off + shstrtab_data.size();
    const std::uint64_t align = is64 ? 8 : 4;
    const std::uint64_t pad = (align - shoff % align) % align;
    shoff += pad;

    // ELF header.
    out += "\x7f";
    out += "ELF";
    u8(is64 ? 2 : 1);
    u8(little_endian ? 1 : 2);
    u8(1);  // EI_VERSION
    while (out.size() < 16) u8(0);
    u16(2);        // e_type = ET_EXEC
    u16(machine);  // e_machine
    u32(1);        // e_version
    u64or32(text_addr);  // e_entry
    u64or32(0);          // e_phoff
    u64or32(shoff);      // e_shoff
    u32(0);              // e_flags
    u16(ehsize);
    u16(0);  // e_phentsize
    u16(0);  // e_phnum
    u16(shentsize);
    u16(shnum);
    u16(4);  // e_shstrndx

    out += text;

    // Symbol table (entry 0 is the null symbol).
    if (emit_symtab) {
      auto emit_sym = [&](std::uint32_t name, std::uint64_t value, std::uint64_t size,
                          unsigned info, unsigned shndx) {
        if (is64) {
          u32(name);
          u8(static_cast<std::uint8_t>(info));
          u8(0);
          u16(shndx);
          put(value, 8);
          put(size, 8);
        } else {
          u32(name);
          put(value, 4);
          put(size, 4);
          u8(static_cast<std::uint8_t>(info));
          u8(0);
          u16(shndx);
        }
      };
      emit_sym(0, 0, 0, 0, 0);
      for (std::size_t i = 0; i < syms.size(); ++i) {
        // STB_GLOBAL binding (1) << 4 | type
        emit_sym(name_offsets[i], syms[i].value, syms[i].size,
                 (1u << 4) | (syms[i].type & 0xf), syms[i].shndx);
      }
    }

    out += strtab_data;
    out += shstrtab_data;
    out.append(pad, '\0');

    auto emit_shdr = [&](std::uint32_t name, std::uint32_t type, std::uint64_t addr,
                         std::uint64_t off, std::uint64_t size, std::uint32_t link,
                         std::uint64_t entsize) {
      u32(name);
      u32(type);
      u64or32(type == 1 ? 6 : 0);  // flags: ALLOC|EXEC for .text
      u64or32(addr);
      u64or32(off);
      u64or32(size);
      u32(link);
      u32(0);  // info
      u64or32(align);
      u64or32(entsize);
    };

    emit_shdr(0, 0, 0, 0, 0, 0, 0);                                       // null
    emit_shdr(1, 1, text_addr, text_off, text.size(), 0, 0);              // .text
    emit_shdr(7, symtab_type, 0, symtab_off, symtab_size, 3, symentsize); // .symtab/.dynsym
    emit_shdr(15, 3, 0, strtab_off, strtab_data.size(), 0, 0);            // .strtab
    emit_shdr(23, 3, 0, shstrtab_off, shstrtab_data.size(), 0, 0);        // .shstrtab
    return out;
  }
};

/// The canonical single-function fixture: "add", 8 bytes at 0x401000.
inline ElfBuilder basic_elf64() {
  ElfBuilder b;
  b.text = std::string("\x55\x48\x89\xE5\xB8\x2A\x00\x00", 8);
  b.syms.push_back({"add", 0x401000, 8, 2, 1});
  return b;
}

}  // namespace testsupport
