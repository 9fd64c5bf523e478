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

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "limsim/mem_op.hpp"

namespace limsim
{

  /// Integer register index, always in [0, 31].
  class Reg
  {
  public:
    constexpr Reg() = default;

    constexpr explicit Reg(unsigned index)
      : index_(static_cast<std::uint8_t>(index))
    {
      if (index > 31)
        throw std::out_of_range("register index out of range");
    }

    constexpr unsigned index() const { return index_; }

    constexpr auto operator<=>(const Reg&) const = default;

  private:
    std::uint8_t index_ = 0;
  };

  namespace reg
  {
    inline constexpr Reg zero{0}, ra{1}, sp{2}, gp{3}, tp{4};
    inline constexpr Reg t0{5}, t1{6}, t2{7}, s0{8}, s1{9};
    inline constexpr Reg a0{10}, a1{11}, a2{12}, a3{13}, a4{14}, a5{15};
    inline constexpr Reg a6{16}, a7{17};
  }

  /// Every instruction the simulator understands, RV32IM plus the two LiM
  /// instructions. Illegal carries the raw word in Instruction::raw.
  enum class Opcode : std::uint8_t
  {
    Illegal,
    Lui, Auipc, Jal, Jalr,
    Beq, Bne, Blt, Bge, Bltu, Bgeu,
    Lb, Lh, Lw, Lbu, Lhu,
    Sb, Sh, Sw,
    Addi, Slti, Sltiu, Xori, Ori, Andi,
    Slli, Srli, Srai,
    Add, Sub, Sll, Slt, Sltu, Xor, Srl, Sra, Or, And,
    Mul, Mulh, Mulhsu, Mulhu, Div, Divu, Rem, Remu,
    Fence, Ecall, Ebreak,
    Rdcycle, Rdcycleh, Rdinstret, Rdinstreth,
    LimActive, LimLoadMask,
  };

  /// Operand layout of an instruction, shared by the encoder, the
  /// disassembler and the assembler.
  enum class Format : std::uint8_t
  {
    None,       // illegal
    U,          // rd, imm20
    J,          // rd, offset
    Jalr,       // rd, imm(rs1)
    B,          // rs1, rs2, offset
    Load,       // rd, imm(rs1)
    Store,      // rs2, imm(rs1)
    IArith,     // rd, rs1, imm
    IShift,     // rd, rs1, shamt
    R,          // rd, rs1, rs2
    Fence,      // pred, succ
    System,     // no operands
    Counter,    // rd
    LimActive,  // rs1, rs2, memop
    LimLoadMask // rd, rs1, rs2, memop
  };

  struct OpInfo
  {
    Opcode op;
    std::string_view mnemonic;
    Format format;
    std::uint32_t opcode;   // bits [6:0]
    std::uint32_t funct3;
    std::uint32_t funct7;   // also holds imm[11:0] for System and the CSR number for Counter
  };

  inline constexpr std::uint32_t opcodeCustom0 = 0b0001011;
  inline constexpr std::uint32_t opcodeCustom1 = 0b0101011;

  inline constexpr std::array<OpInfo, 55> opTable = {{
    {Opcode::Illegal,    "",             Format::None,        0,    0, 0},
    {Opcode::Lui,        "lui",          Format::U,           0x37, 0, 0},
    {Opcode::Auipc,      "auipc",        Format::U,           0x17, 0, 0},
    {Opcode::Jal,        "jal",          Format::J,           0x6f, 0, 0},
    {Opcode::Jalr,       "jalr",         Format::Jalr,        0x67, 0, 0},
    {Opcode::Beq,        "beq",          Format::B,           0x63, 0, 0},
    {Opcode::Bne,        "bne",          Format::B,           0x63, 1, 0},
    {Opcode::Blt,        "blt",          Format::B,           0x63, 4, 0},
    {Opcode::Bge,        "bge",          Format::B,           0x63, 5, 0},
    {Opcode::Bltu,       "bltu",         Format::B,           0x63, 6, 0},
    {Opcode::Bgeu,       "bgeu",         Format::B,           0x63, 7, 0},
    {Opcode::Lb,         "lb",           Format::Load,        0x03, 0, 0},
    {Opcode::Lh,         "lh",           Format::Load,        0x03, 1, 0},
    {Opcode::Lw,         "lw",           Format::Load,        0x03, 2, 0},
    {Opcode::Lbu,        "lbu",          Format::Load,        0x03, 4, 0},
    {Opcode::Lhu,        "lhu",          Format::Load,        0x03, 5, 0},
    {Opcode::Sb,         "sb",           Format::Store,       0x23, 0, 0},
    {Opcode::Sh,         "sh",           Format::Store,       0x23, 1, 0},
    {Opcode::Sw,         "sw",           Format::Store,       0x23, 2, 0},
    {Opcode::Addi,       "addi",         Format::IArith,      0x13, 0, 0},
    {Opcode::Slti,       "slti",         Format::IArith,      0x13, 2, 0},
    {Opcode::Sltiu,      "sltiu",        Format::IArith,      0x13, 3, 0},
    {Opcode::Xori,       "xori",         Format::IArith,      0x13, 4, 0},
    {Opcode::Ori,        "ori",          Format::IArith,      0x13, 6, 0},
    {Opcode::Andi,       "andi",         Format::IArith,      0x13, 7, 0},
    {Opcode::Slli,       "slli",         Format::IShift,      0x13, 1, 0x00},
    {Opcode::Srli,       "srli",         Format::IShift,      0x13, 5, 0x00},
    {Opcode::Srai,       "srai",         Format::IShift,      0x13, 5, 0x20},
    {Opcode::Add,        "add",          Format::R,           0x33, 0, 0x00},
    {Opcode::Sub,        "sub",          Format::R,           0x33, 0, 0x20},
    {Opcode::Sll,        "sll",          Format::R,           0x33, 1, 0x00},
    {Opcode::Slt,        "slt",          Format::R,           0x33, 2, 0x00},
    {Opcode::Sltu,       "sltu",         Format::R,           0x33, 3, 0x00},
    {Opcode::Xor,        "xor",          Format::R,           0x33, 4, 0x00},
    {Opcode::Srl,        "srl",          Format::R,           0x33, 5, 0x00},
    {Opcode::Sra,        "sra",          Format::R,           0x33, 5, 0x20},
    {Opcode::Or,         "or",           Format::R,           0x33, 6, 0x00},
    {Opcode::And,        "and",          Format::R,           0x33, 7, 0x00},
    {Opcode::Mul,        "mul",          Format::R,           0x33, 0, 0x01},
    {Opcode::Mulh,       "mulh",         Format::R,           0x33, 1, 0x01},
    {Opcode::Mulhsu,     "mulhsu",       Format::R,           0x33, 2, 0x01},
    {Opcode::Mulhu,      "mulhu",        Format::R,           0x33, 3, 0x01},
    {Opcode::Div,        "div",          Format::R,           0x33, 4, 0x01},
    {Opcode::Divu,       "divu",         Format::R,           0x33, 5, 0x01},
    {Opcode::Rem,        "rem",          Format::R,           0x33, 6, 0x01},
    {Opcode::Remu,       "remu",         Format::R,           0x33, 7, 0x01},
    {Opcode::Fence,      "fence",        Format::Fence,       0x0f, 0, 0},
    {Opcode::Ecall,      "ecall",        Format::System,      0x73, 0, 0x000},
    {Opcode::Ebreak,     "ebreak",       Format::System,      0x73, 0, 0x001},
    {Opcode::Rdcycle,    "rdcycle",      Format::Counter,     0x73, 2, 0xc00},
    {Opcode::Rdcycleh,   "rdcycleh",     Format::Counter,     0x73, 2, 0xc80},
    {Opcode::Rdinstret,  "rdinstret",    Format::Counter,     0x73, 2, 0xc02},
    {Opcode::Rdinstreth, "rdinstreth",   Format::Counter,     0x73, 2, 0xc82},
    {Opcode::LimActive,  "lim.active",   Format::LimActive,   opcodeCustom0, 0, 0},
    {Opcode::LimLoadMask,"lim.loadmask", Format::LimLoadMask, opcodeCustom1, 0, 0},
  }};

  constexpr const OpInfo&
  opInfo(Opcode op)
  {
    return opTable.at(static_cast<std::size_t>(op));
  }

  constexpr std::optional<Opcode>
  opcodeForMnemonic(std::string_view mnemonic)
  {
    for (const auto& info : opTable)
      if (info.op != Opcode::Illegal and info.mnemonic == mnemonic)
        return info.op;
    return std::nullopt;
  }

  /// A decoded instruction. Fields not used by the instruction's format are
  /// zero so that decoded values compare equal field by field. The
  /// immediate is stored sign-extended exactly as the base ISA defines it
  /// for the format (U-type keeps its low 12 bits clear). Fence keeps
  /// pred << 4 | succ in imm.
  struct Instruction
  {
    Opcode op = Opcode::Illegal;
    Reg rd{}, rs1{}, rs2{};
    std::int32_t imm = 0;
    MemOpCode memOp = MemOpCode::None;
    std::uint32_t raw = 0;   // only meaningful for Illegal

    bool operator==(const Instruction&) const = default;

    bool isLegal() const { return op != Opcode::Illegal; }
    Format format() const { return opInfo(op).format; }
  };

  namespace detail
  {
    constexpr std::int32_t
    signExtend(std::uint32_t value, unsigned bits)
    {
      std::uint32_t m = 1u << (bits - 1);
      value &= (bits == 32) ? ~0u : ((1u << bits) - 1);
      return static_cast<std::int32_t>((value ^ m) - m);
    }

    constexpr std::uint32_t bits(std::uint32_t w, unsigned hi, unsigned lo)
    {
      return (w >> lo) & ((1u << (hi - lo + 1)) - 1);
    }
  }

  /// Immediate range helpers used by both the encoder and the assembler.
  constexpr bool fitsSigned(std::int64_t v, unsigned bits)
  {
    std::int64_t lo = -(std::int64_t(1) << (bits - 1));
    std::int64_t hi = (std::int64_t(1) << (bits - 1)) - 1;
    return v >= lo and v <= hi;
  }

  /// Encode a decoded instruction into its 32-bit word. Immediates that do
  /// not fit the format throw std::out_of_range; Illegal encodes to its raw
  /// word.
  constexpr std::uint32_t
  encode(const Instruction& inst)
  {
    const OpInfo& info = opInfo(inst.op);
    std::uint32_t rd = inst.rd.index(), rs1 = inst.rs1.index(), rs2 = inst.rs2.index();
    std::uint32_t imm = static_cast<std::uint32_t>(inst.imm);
    std::uint32_t f3 = info.funct3, opc = info.opcode;

    auto checkSigned = [&](unsigned nbits) {
      if (not fitsSigned(inst.imm, nbits))
        throw std::out_of_range("immediate out of range");
    };

    switch (info.format)
      {
      case Format::None:
        return inst.raw;
      case Format::U:
        if (imm & 0xfff)
          throw std::out_of_range("U-type immediate has low bits set");
        return imm | (rd << 7) | opc;
      case Format::J:
        checkSigned(21);
        if (imm & 1)
          throw std::out_of_range("jump offset is odd");
        return (detail::bits(imm, 20, 20) << 31) | (detail::bits(imm, 10, 1) << 21) |
               (detail::bits(imm, 11, 11) << 20) | (detail::bits(imm, 19, 12) << 12) |
               (rd << 7) | opc;
      case Format::B:
        checkSigned(13);
        if (imm & 1)
          throw std::out_of_range("branch offset is odd");
        return (detail::bits(imm, 12, 12) << 31) | (detail::bits(imm, 10, 5) << 25) |
               (rs2 << 20) | (rs1 << 15) | (f3 << 12) |
               (detail::bits(imm, 4, 1) << 8) | (detail::bits(imm, 11, 11) << 7) | opc;
      case Format::Jalr:
      case Format::Load:
      case Format::IArith:
        checkSigned(12);
        return ((imm & 0xfff) << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | opc;
      case Format::IShift:
        if (inst.imm < 0 or inst.imm > 31)
          throw std::out_of_range("shift amount out of range");
        return (info.funct7 << 25) | (imm << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | opc;
      case Format::Store:
        checkSigned(12);
        return (detail::bits(imm, 11, 5) << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) |
               (detail::bits(imm, 4, 0) << 7) | opc;
      case Format::R:
        return (info.funct7 << 25) | (rs2 << 20) | (rs1 << 15) | (f3 << 12) | (rd << 7) | opc;
      case Format::Fence:
        if (inst.imm < 0 or inst.imm > 0xff)
          throw std::out_of_range("fence predecessor/successor out of range");
        return (imm << 20) | opc;
      case Format::System:
        return (info.funct7 << 20) | opc;
      case Format::Counter:
        return (info.funct7 << 20) | (f3 << 12) | (rd << 7) | opc;
      case Format::LimActive:
        return (rs2 << 20) | (rs1 << 15) | (encodeMemOp(inst.memOp) << 12) | opc;
      case Format::LimLoadMask:
        return (rs2 << 20) | (rs1 << 15) | (encodeMemOp(inst.memOp) << 12) | (rd << 7) | opc;
      }
    return inst.raw;
  }

  /// STORE_ACTIVE_LOGIC: custom-0, S-type field layout, immediate bits zero.
  constexpr std::uint32_t
  encodeStoreActiveLogic(Reg base, Reg range, MemOpCode op)
  {
    Instruction inst;
    inst.op = Opcode::LimActive;
    inst.rs1 = base;
    inst.rs2 = range;
    inst.memOp = op;
    return encode(inst);
  }

  /// LOAD_MASK: custom-1, R-type field layout, funct7 zero.
  constexpr std::uint32_t
  encodeLoadMask(Reg dest, Reg base, Reg source, MemOpCode op)
  {
    Instruction inst;
    inst.op = Opcode::LimLoadMask;
    inst.rd = dest;
    inst.rs1 = base;
    inst.rs2 = source;
    inst.memOp = op;
    return encode(inst);
  }

  /// Decode a 32-bit word. Matches opcode first, then funct3, then funct7.
  /// Anything outside the supported set comes back as Opcode::Illegal with
  /// the word in raw.
  constexpr Instruction
  decode(std::uint32_t word)
  {
    using detail::bits;
    using detail::signExtend;

    Instruction illegal;
    illegal.raw = word;

    const std::uint32_t opc = bits(word, 6, 0);
    const std::uint32_t rd = bits(word, 11, 7);
    const std::uint32_t f3 = bits(word, 14, 12);
    const std::uint32_t rs1 = bits(word, 19, 15);
    const std::uint32_t rs2 = bits(word, 24, 20);
    const std::uint32_t f7 = bits(word, 31, 25);
    const std::int32_t immI = signExtend(bits(word, 31, 20), 12);
    const std::int32_t immS = signExtend((f7 << 5) | rd, 12);

    Instruction inst;
    auto make = [&](Opcode op, unsigned d, unsigned s1, unsigned s2, std::int32_t imm) {
      inst.op = op;
      inst.rd = Reg(d);
      inst.rs1 = Reg(s1);
      inst.rs2 = Reg(s2);
      inst.imm = imm;
      return inst;
    };

    switch (opc)
      {
      case 0x37:
        return make(Opcode::Lui, rd, 0, 0, static_cast<std::int32_t>(word & 0xfffff000));
      case 0x17:
        return make(Opcode::Auipc, rd, 0, 0, static_cast<std::int32_t>(word & 0xfffff000));
      case 0x6f:
        {
          std::uint32_t imm = (bits(word, 31, 31) << 20) | (bits(word, 19, 12) << 12) |
                              (bits(word, 20, 20) << 11) | (bits(word, 30, 21) << 1);
          return make(Opcode::Jal, rd, 0, 0, signExtend(imm, 21));
        }
      case 0x67:
        if (f3 != 0)
          return illegal;
        return make(Opcode::Jalr, rd, rs1, 0, immI);
      case 0x63:
        {
          constexpr std::array<Opcode, 8> ops = {
            Opcode::Beq, Opcode::Bne, Opcode::Illegal, Opcode::Illegal,
            Opcode::Blt, Opcode::Bge, Opcode::Bltu, Opcode::Bgeu };
          if (ops[f3] == Opcode::Illegal)
            return illegal;
          std::uint32_t imm = (bits(word, 31, 31) << 12) | (bits(word, 7, 7) << 11) |
                              (bits(word, 30, 25) << 5) | (bits(word, 11, 8) << 1);
          return make(ops[f3], 0, rs1, rs2, signExtend(imm, 13));
        }
      case 0x03:
        {
          constexpr std::array<Opcode, 8> ops = {
            Opcode::Lb, Opcode::Lh, Opcode::Lw, Opcode::Illegal,
            Opcode::Lbu, Opcode::Lhu, Opcode::Illegal, Opcode::Illegal };
          if (ops[f3] == Opcode::Illegal)
            return illegal;
          return make(ops[f3], rd, rs1, 0, immI);
        }
      case 0x23:
        {
          constexpr std::array<Opcode, 3> ops = { Opcode::Sb, Opcode::Sh, Opcode::Sw };
          if (f3 > 2)
            return illegal;
          return make(ops[f3], 0, rs1, rs2, immS);
        }
      case 0x13:
        switch (f3)
          {
          case 0: return make(Opcode::Addi, rd, rs1, 0, immI);
          case 2: return make(Opcode::Slti, rd, rs1, 0, immI);
          case 3: return make(Opcode::Sltiu, rd, rs1, 0, immI);
          case 4: return make(Opcode::Xori, rd, rs1, 0, immI);
          case 6: return make(Opcode::Ori, rd, rs1, 0, immI);
          case 7: return make(Opcode::Andi, rd, rs1, 0, immI);
          case 1:
            if (f7 != 0)
              return illegal;
            return make(Opcode::Slli, rd, rs1, 0, static_cast<std::int32_t>(rs2));
          case 5:
            if (f7 == 0x00)
              return make(Opcode::Srli, rd, rs1, 0, static_cast<std::int32_t>(rs2));
            if (f7 == 0x20)
              return make(Opcode::Srai, rd, rs1, 0, static_cast<std::int32_t>(rs2));
            return illegal;
          }
        return illegal;
      case 0x33:
        {
          constexpr std::array<Opcode, 8> base = {
            Opcode::Add, Opcode::Sll, Opcode::Slt, Opcode::Sltu,
            Opcode::Xor, Opcode::Srl, Opcode::Or, Opcode::And };
          constexpr std::array<Opcode, 8> muldiv = {
            Opcode::Mul, Opcode::Mulh, Opcode::Mulhsu, Opcode::Mulhu,
            Opcode::Div, Opcode::Divu, Opcode::Rem, Opcode::Remu };
          if (f7 == 0x00)
            return make(base[f3], rd, rs1, rs2, 0);
          if (f7 == 0x01)
            return make(muldiv[f3], rd, rs1, rs2, 0);
          if (f7 == 0x20 and f3 == 0)
            return make(Opcode::Sub, rd, rs1, rs2, 0);
          if (f7 == 0x20 and f3 == 5)
            return make(Opcode::Sra, rd, rs1, rs2, 0);
          return illegal;
        }
      case 0x0f:
        // Plain FENCE only: fm, rs1 and rd must be zero.
        if (f3 != 0 or rd != 0 or rs1 != 0 or bits(word, 31, 28) != 0)
          return illegal;
        return make(Opcode::Fence, 0, 0, 0, static_cast<std::int32_t>(bits(word, 27, 20)));
      case 0x73:
        if (word == 0x00000073)
          return make(Opcode::Ecall, 0, 0, 0, 0);
        if (word == 0x00100073)
          return make(Opcode::Ebreak, 0, 0, 0, 0);
        // Only csrrs rd, <counter>, x0 is supported.
        if (f3 == 2 and rs1 == 0)
          {
            switch (bits(word, 31, 20))
              {
              case 0xc00: return make(Opcode::Rdcycle, rd, 0, 0, 0);
              case 0xc80: return make(Opcode::Rdcycleh, rd, 0, 0, 0);
              case 0xc02: return make(Opcode::Rdinstret, rd, 0, 0, 0);
              case 0xc82: return make(Opcode::Rdinstreth, rd, 0, 0, 0);
              default: break;
              }
          }
        return illegal;
      case opcodeCustom0:
        {
          // S-type layout with every immediate bit reserved as zero.
          auto op = decodeMemOp(f3);
          if (not op or rd != 0 or f7 != 0)
            return illegal;
          make(Opcode::LimActive, 0, rs1, rs2, 0);
          inst.memOp = *op;
          return inst;
        }
      case opcodeCustom1:
        {
          auto op = decodeMemOp(f3);
          if (not op or f7 != 0)
            return illegal;
          make(Opcode::LimLoadMask, rd, rs1, rs2, 0);
          inst.memOp = *op;
          return inst;
        }
      default:
        return illegal;
      }
  }

  /// Instruction-class predicates used by the timing model.
  constexpr bool isLoad(Opcode op) { return op >= Opcode::Lb and op <= Opcode::Lhu; }
  constexpr bool isStore(Opcode op) { return op >= Opcode::Sb and op <= Opcode::Sw; }
  constexpr bool isBranch(Opcode op) { return op >= Opcode::Beq and op <= Opcode::Bgeu; }
  constexpr bool isMul(Opcode op) { return op >= Opcode::Mul and op <= Opcode::Mulhu; }
  constexpr bool isDiv(Opcode op) { return op >= Opcode::Div and op <= Opcode::Remu; }

  /// True if the instruction writes rd.
  constexpr bool writesRd(Format f)
  {
    switch (f)
      {
      case Format::U: case Format::J: case Format::Jalr: case Format::Load:
      case Format::IArith: case Format::IShift: case Format::R:
      case Format::Counter: case Format::LimLoadMask:
        return true;
      default:
        return false;
      }
  }

} // namespace limsim
