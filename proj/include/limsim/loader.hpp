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
#include <optional>
#include <span>
#include <vector>

#include "limsim/cpu.hpp"
#include "limsim/elf.hpp"
#include "limsim/memory.hpp"

namespace limsim
{

  struct LoadedSegment
  {
    std::uint32_t addr;
    std::uint32_t size;
    bool executable;

    bool operator==(const LoadedSegment&) const = default;
  };

  struct LoadedProgram
  {
    std::uint32_t entry = 0;
    std::vector<LoadedSegment> segments;
    std::uint32_t initialSp = 0;
  };

  namespace detail
  {
    /// Stack starts 16 bytes below the top of memory, 16-byte aligned.
    inline std::uint32_t initialStack(const LimMemory& mem)
    {
      return static_cast<std::uint32_t>((mem.size() - 16) & ~std::uint64_t(15));
    }

    inline void checkEntry(const LoadedProgram& prog)
    {
      for (const auto& s : prog.segments)
        if (s.executable and prog.entry >= s.addr and std::uint64_t(prog.entry) < std::uint64_t(s.addr) + s.size)
          return;
      throw LoadError(LoadErrorKind::EntryOutsideText,
                      "entry " + hex8(prog.entry) + " is not inside an executable segment");
    }
  }

  /// Copy every PT_LOAD of an ELF32 RISC-V executable into memory and zero
  /// its BSS tail. Loader writes bypass the access counters.
  inline LoadedProgram
  loadElf(std::span<const std::uint8_t> bytes, LimMemory& memory)
  {
    ElfExecutable exe = readElf(bytes);
    LoadedProgram prog;
    prog.entry = exe.entry;
    for (const auto& seg : exe.segments)
      {
        if (not memory.inBounds(seg.vaddr, seg.memsz))
          throw LoadError(LoadErrorKind::SegmentOutOfBounds,
                          "segment at " + detail::hex8(seg.vaddr) + " does not fit in memory");
        memory.install(seg.vaddr, seg.bytes);
        memory.installZeros(static_cast<std::uint32_t>(seg.vaddr + seg.bytes.size()), seg.memsz - seg.bytes.size());
        if (seg.memsz)
          prog.segments.push_back({seg.vaddr, seg.memsz, (seg.flags & elf::pfX) != 0});
      }
    detail::checkEntry(prog);
    prog.initialSp = detail::initialStack(memory);
    return prog;
  }

  /// Copy a raw binary to base. Entry defaults to base.
  inline LoadedProgram
  loadFlat(std::span<const std::uint8_t> bytes, std::uint32_t base, std::optional<std::uint32_t> entry,
           LimMemory& memory)
  {
    if (not memory.inBounds(base, bytes.size()))
      throw LoadError(LoadErrorKind::OutOfBounds,
                      "flat image at " + detail::hex8(base) + " does not fit in memory");
    memory.install(base, bytes);
    LoadedProgram prog;
    prog.entry = entry.value_or(base);
    prog.segments.push_back({base, static_cast<std::uint32_t>(bytes.size()), true});
    prog.initialSp = detail::initialStack(memory);
    return prog;
  }

  /// Install an assembled image directly, as if loaded from its ELF.
  inline LoadedProgram
  loadImage(const ProgramImage& image, LimMemory& memory)
  {
    LoadedProgram prog;
    prog.entry = image.entry;
    for (const auto& s : image.segments)
      {
        if (not memory.inBounds(s.base, s.bytes.size()))
          throw LoadError(LoadErrorKind::SegmentOutOfBounds,
                          "segment at " + detail::hex8(s.base) + " does not fit in memory");
        memory.install(s.base, s.bytes);
        prog.segments.push_back({s.base, static_cast<std::uint32_t>(s.bytes.size()), s.flags == SegmentFlags::Rx});
      }
    detail::checkEntry(prog);
    prog.initialSp = detail::initialStack(memory);
    return prog;
  }

  /// Point the CPU at a freshly loaded program.
  inline void
  reset(Cpu& cpu, const LoadedProgram& prog)
  {
    cpu.state() = CpuState{};
    cpu.state().pc = prog.entry;
    cpu.state().setReg(reg::sp, prog.initialSp);
  }

} // namespace limsim
