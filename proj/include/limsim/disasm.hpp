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
#include <cstdio>
#include <string>

#include "limsim/isa.hpp"

namespace limsim
{

  namespace detail
  {
    inline std::string hex8(std::uint32_t value, bool prefix = true)
    {
      char buf[16];
      std::snprintf(buf, sizeof(buf), prefix ? "0x%08x" : "%08x", value);
      return buf;
    }

    inline std::string regName(Reg r)
    {
      return "x" + std::to_string(r.index());
    }

    inline std::string fenceSet(unsigned bits)
    {
      if (bits == 0)
        return "0";
      std::string s;
      if (bits & 8) s += 'i';
      if (bits & 4) s += 'o';
      if (bits & 2) s += 'r';
      if (bits & 1) s += 'w';
      return s;
    }
  }

  /// Render an instruction in the assembler's own dialect: lower-case
  /// mnemonic, x<N> register names, ", " separators. Branch and jump
  /// targets are printed as pc-relative byte offsets so the text
  /// re-assembles to the same word anywhere. Illegal words print as .word.
  inline std::string
  disassemble(const Instruction& inst)
  {
    using detail::regName;
    const OpInfo& info = opInfo(inst.op);
    std::string m(info.mnemonic);
    const std::string rd = regName(inst.rd), rs1 = regName(inst.rs1), rs2 = regName(inst.rs2);
    const std::string imm = std::to_string(inst.imm);

    switch (info.format)
      {
      case Format::None:
        return ".word " + detail::hex8(inst.raw);
      case Format::U:
        {
          char buf[16];
          std::snprintf(buf, sizeof(buf), "0x%x", static_cast<std::uint32_t>(inst.imm) >> 12);
          return m + " " + rd + ", " + buf;
        }
      case Format::J:
        return m + " " + rd + ", " + imm;
      case Format::Jalr:
      case Format::Load:
        return m + " " + rd + ", " + imm + "(" + rs1 + ")";
      case Format::Store:
        return m + " " + rs2 + ", " + imm + "(" + rs1 + ")";
      case Format::B:
        return m + " " + rs1 + ", " + rs2 + ", " + imm;
      case Format::IArith:
      case Format::IShift:
        return m + " " + rd + ", " + rs1 + ", " + imm;
      case Format::R:
        return m + " " + rd + ", " + rs1 + ", " + rs2;
      case Format::Fence:
        return m + " " + detail::fenceSet((inst.imm >> 4) & 0xf) + ", " + detail::fenceSet(inst.imm & 0xf);
      case Format::System:
        return m;
      case Format::Counter:
        return m + " " + rd;
      case Format::LimActive:
        return m + " " + rs1 + ", " + rs2 + ", " + std::string(memOpName(inst.memOp));
      case Format::LimLoadMask:
        return m + " " + rd + ", " + rs1 + ", " + rs2 + ", " + std::string(memOpName(inst.memOp));
      }
    return ".word " + detail::hex8(inst.raw);
  }

  inline std::string
  disassemble(std::uint32_t word)
  {
    return disassemble(decode(word));
  }

} // namespace limsim
