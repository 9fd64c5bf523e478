// Copyright 2026 The limsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "limsim/assembler.hpp"

namespace limsim
{

  namespace elf
  {
    inline constexpr std::uint8_t classElf32 = 1;
    inline constexpr std::uint8_t dataLsb = 1;
    inline constexpr std::uint16_t typeExec = 2;
    inline constexpr std::uint16_t machineRiscv = 243;
    inline constexpr std::uint32_t ptLoad = 1;
    inline constexpr std::uint32_t pfX = 1, pfW = 2, pfR = 4;
    inline constexpr std::uint32_t ehdrSize = 52;
    inline constexpr std::uint32_t phdrSize = 32;
    inline constexpr std::uint32_t pageAlign = 0x1000;
  }

  enum class LoadErrorKind : std::uint8_t
  {
    BadMagic,
    Not32Bit,
    NotLittleEndian,
    NotRiscv,
    NotExecutable,
    Truncated,
    SegmentOutOfBounds,
    OutOfBounds,
    EntryOutsideText,
  };

  constexpr std::string_view
  loadErrorKindName(LoadErrorKind k)
  {
    switch (k)
      {
      case LoadErrorKind::BadMagic:           return "BadMagic";
      case LoadErrorKind::Not32Bit:           return "Not32Bit";
      case LoadErrorKind::NotLittleEndian:    return "NotLittleEndian";
      case LoadErrorKind::NotRiscv:           return "NotRiscv";
      case LoadErrorKind::NotExecutable:      return "NotExecutable";
      case LoadErrorKind::Truncated:          return "Truncated";
      case LoadErrorKind::SegmentOutOfBounds: return "SegmentOutOfBounds";
      case LoadErrorKind::OutOfBounds:        return "OutOfBounds";
      case LoadErrorKind::EntryOutsideText:   return "EntryOutsideText";
      }
    return "?";
  }

  class LoadError : public std::runtime_error
  {
  public:
    LoadError(LoadErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(loadErrorKindName(kind)) + ": " + detail), kind_(kind)
    { }

    LoadErrorKind kind() const { return kind_; }

  private:
    LoadErrorKind kind_;
  };

  /// One PT_LOAD entry as read from a file.
  struct ElfSegment
  {
    std::uint32_t vaddr = 0;
    std::uint32_t memsz = 0;
    std::uint32_t flags = 0;
    std::vector<std::uint8_t> bytes;   // filesz bytes

    bool operator==(const ElfSegment&) const = default;
  };

  struct ElfExecutable
  {
    std::uint32_t entry = 0;
    std::vector<ElfSegment> segments;
  };

  namespace detail
  {
    inline void put16(std::vector<std::uint8_t>& v, std::size_t off, std::uint16_t x)
    {
      v[off] = static_cast<std::uint8_t>(x);
      v[off + 1] = static_cast<std::uint8_t>(x >> 8);
    }

    inline void put32(std::vector<std::uint8_t>& v, std::size_t off, std::uint32_t x)
    {
      for (int i = 0; i < 4; ++i)
        v[off + i] = static_cast<std::uint8_t>(x >> (8 * i));
    }

    inline std::uint16_t get16(std::span<const std::uint8_t> v, std::size_t off)
    {
      return static_cast<std::uint16_t>(v[off] | (v[off + 1] << 8));
    }

    inline std::uint32_t get32(std::span<const std::uint8_t> v, std::size_t off)
    {
      return std::uint32_t(v[off]) | (std::uint32_t(v[off + 1]) << 8) |
             (std::uint32_t(v[off + 2]) << 16) | (std::uint32_t(v[off + 3]) << 24);
    }
  }

  /// Minimal little-endian ELF32 executable: header, one PT_LOAD per
  /// non-empty segment, no section headers. Segment data sits at a file
  /// offset congruent to its vaddr modulo the page size.
  inline std::vector<std::uint8_t>
  writeElf(const ProgramImage& image)
  {
    using namespace elf;
    std::vector<const Segment*> segs;
    for (const auto& s : image.segments)
      if (not s.bytes.empty())
        segs.push_back(&s);

    const auto phnum = static_cast<std::uint32_t>(segs.size());
    std::vector<std::uint8_t> out(ehdrSize + phnum * phdrSize, 0);

    const std::uint8_t ident[] = {0x7f, 'E', 'L', 'F', classElf32, dataLsb, 1 /* EV_CURRENT */, 0 /* SYSV */};
    std::copy(std::begin(ident), std::end(ident), out.begin());
    detail::put16(out, 16, typeExec);
    detail::put16(out, 18, machineRiscv);
    detail::put32(out, 20, 1);
    detail::put32(out, 24, image.entry);
    detail::put32(out, 28, phnum ? ehdrSize : 0);   // e_phoff
    detail::put32(out, 32, 0);                      // e_shoff
    detail::put32(out, 36, 0);                      // e_flags
    detail::put16(out, 40, ehdrSize);
    detail::put16(out, 42, phdrSize);
    detail::put16(out, 44, static_cast<std::uint16_t>(phnum));
    detail::put16(out, 46, 0);
    detail::put16(out, 48, 0);
    detail::put16(out, 50, 0);

    for (std::uint32_t i = 0; i < phnum; ++i)
      {
        const Segment& s = *segs[i];
        std::size_t off = out.size();
        off += (s.base % pageAlign + pageAlign - off % pageAlign) % pageAlign;
        out.resize(off, 0);
        out.insert(out.end(), s.bytes.begin(), s.bytes.end());

        std::size_t ph = ehdrSize + i * phdrSize;
        auto size = static_cast<std::uint32_t>(s.bytes.size());
        detail::put32(out, ph + 0, ptLoad);
        detail::put32(out, ph + 4, static_cast<std::uint32_t>(off));
        detail::put32(out, ph + 8, s.base);
        detail::put32(out, ph + 12, s.base);
        detail::put32(out, ph + 16, size);
        detail::put32(out, ph + 20, size);
        detail::put32(out, ph + 24, s.flags == SegmentFlags::Rx ? (pfR | pfX) : (pfR | pfW));
        detail::put32(out, ph + 28, pageAlign);
      }
    return out;
  }

  /// Parse and validate an ELF32 RISC-V executable. Throws LoadError.
  inline ElfExecutable
  readElf(std::span<const std::uint8_t> bytes)
  {
    using namespace elf;
    if (bytes.size() < 16 or bytes[0] != 0x7f or bytes[1] != 'E' or bytes[2] != 'L' or bytes[3] != 'F')
      throw LoadError(LoadErrorKind::BadMagic, "not an ELF file");
    if (bytes[4] != classElf32)
      throw LoadError(LoadErrorKind::Not32Bit, "ELF class is not ELFCLASS32");
    if (bytes[5] != dataLsb)
      throw LoadError(LoadErrorKind::NotLittleEndian, "ELF data encoding is not little-endian");
    if (bytes.size() < ehdrSize)
      throw LoadError(LoadErrorKind::Truncated, "ELF header is truncated");
    if (detail::get16(bytes, 18) != machineRiscv)
      throw LoadError(LoadErrorKind::NotRiscv, "e_machine is not EM_RISCV");
    if (detail::get16(bytes, 16) != typeExec)
      throw LoadError(LoadErrorKind::NotExecutable, "only ET_EXEC files are supported");

    ElfExecutable exe;
    exe.entry = detail::get32(bytes, 24);
    std::uint32_t phoff = detail::get32(bytes, 28);
    std::uint16_t phentsize = detail::get16(bytes, 42);
    std::uint16_t phnum = detail::get16(bytes, 44);
    if (phnum != 0 and phentsize < phdrSize)
      throw LoadError(LoadErrorKind::Truncated, "program header entries are too small");
    if (std::uint64_t(phoff) + std::uint64_t(phnum) * phentsize > bytes.size())
      throw LoadError(LoadErrorKind::Truncated, "program header table past end of file");

    for (std::uint16_t i = 0; i < phnum; ++i)
      {
        std::size_t ph = phoff + std::size_t(i) * phentsize;
        if (detail::get32(bytes, ph) != ptLoad)
          continue;
        std::uint32_t offset = detail::get32(bytes, ph + 4);
        ElfSegment seg;
        seg.vaddr = detail::get32(bytes, ph + 8);
        std::uint32_t filesz = detail::get32(bytes, ph + 16);
        seg.memsz = detail::get32(bytes, ph + 20);
        seg.flags = detail::get32(bytes, ph + 24);
        if (std::uint64_t(offset) + filesz > bytes.size())
          throw LoadError(LoadErrorKind::Truncated, "segment data past end of file");
        if (seg.memsz < filesz)
          throw LoadError(LoadErrorKind::Truncated, "segment memsz smaller than filesz");
        seg.bytes.assign(bytes.begin() + offset, bytes.begin() + offset + filesz);
        exe.segments.push_back(std::move(seg));
      }
    return exe;
  }

} // namespace limsim
