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

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "limsim/disasm.hpp"
#include "limsim/isa.hpp"

using namespace limsim;

TEST(Isa, DecodesAddi)
{
  Instruction i = decode(0x00100093);
  EXPECT_EQ(i.op, Opcode::Addi);
  EXPECT_EQ(i.rd, reg::ra);
  EXPECT_EQ(i.rs1, reg::zero);
  EXPECT_EQ(i.imm, 1);
  EXPECT_EQ(disassemble(0x00100093), "addi x1, x0, 1");
}

TEST(Isa, CanonicalNop)
{
  Instruction i = decode(0x00000013);
  EXPECT_EQ(i.op, Opcode::Addi);
  EXPECT_EQ(i.rd, reg::zero);
  EXPECT_EQ(i.imm, 0);
}

TEST(Isa, ZeroWordIsIllegal)
{
  EXPECT_FALSE(decode(0).isLegal());
  EXPECT_FALSE(decode(0xFFFFFFFF).isLegal());
}

TEST(Isa, LimEncodersMatchHandComputedWords)
{
  // opcode | funct3 << 12 | rs1 << 15 | rs2 << 20, remaining fields zero
  EXPECT_EQ(encodeStoreActiveLogic(Reg(10), Reg(11), MemOpCode::Or), 0x00b5200bu);
  EXPECT_EQ(encodeStoreActiveLogic(Reg(0), Reg(0), MemOpCode::None), 0x0000000bu);
  // opcode | rd << 7 | funct3 << 12 | rs1 << 15 | rs2 << 20
  EXPECT_EQ(encodeLoadMask(Reg(5), Reg(6), Reg(7), MemOpCode::And), 0x007312abu);
  EXPECT_EQ(disassemble(0x00b5200b), "lim.active x10, x11, or");
  EXPECT_EQ(disassemble(0x007312ab), "lim.loadmask x5, x6, x7, and");
}

TEST(Isa, LimFieldsRoundTripExhaustively)
{
  for (unsigned a = 0; a < 32; ++a)
    for (unsigned b = 0; b < 32; ++b)
      for (auto op : allMemOps)
        {
          Instruction act = decode(encodeStoreActiveLogic(Reg(a), Reg(b), op));
          ASSERT_EQ(act.op, Opcode::LimActive);
          ASSERT_EQ(act.rs1, Reg(a));
          ASSERT_EQ(act.rs2, Reg(b));
          ASSERT_EQ(act.memOp, op);
          for (unsigned d : {0u, 1u, 17u, 31u})
            {
              Instruction lm = decode(encodeLoadMask(Reg(d), Reg(a), Reg(b), op));
              ASSERT_EQ(lm.op, Opcode::LimLoadMask);
              ASSERT_EQ(lm.rd, Reg(d));
              ASSERT_EQ(lm.rs1, Reg(a));
              ASSERT_EQ(lm.rs2, Reg(b));
              ASSERT_EQ(lm.memOp, op);
            }
        }
}

TEST(Isa, MalformedCustomWordsAreIllegal)
{
  std::uint32_t act = encodeStoreActiveLogic(Reg(1), Reg(2), MemOpCode::Xor);
  EXPECT_FALSE(decode(act | (1u << 7)).isLegal());          // imm[4:0]
  EXPECT_FALSE(decode(act | (1u << 25)).isLegal());         // imm[11:5]
  EXPECT_FALSE(decode((act & ~0x7000u) | 0x7000u).isLegal()); // reserved op 7
  std::uint32_t lm = encodeLoadMask(Reg(1), Reg(2), Reg(3), MemOpCode::Xor);
  EXPECT_FALSE(decode(lm | (1u << 31)).isLegal());
  EXPECT_FALSE(decode((lm & ~0x7000u) | 0x7000u).isLegal());
}

TEST(Isa, CustomOpcodesAreDisjointFromBaseIsa)
{
  std::set<std::uint32_t> base;
  for (const auto& info : opTable)
    {
      if (info.op == Opcode::Illegal)
        continue;
      if (info.op == Opcode::LimActive)
        EXPECT_EQ(info.opcode, opcodeCustom0);
      else if (info.op == Opcode::LimLoadMask)
        EXPECT_EQ(info.opcode, opcodeCustom1);
      else
        base.insert(info.opcode);
    }
  EXPECT_FALSE(base.count(opcodeCustom0));
  EXPECT_FALSE(base.count(opcodeCustom1));

  std::mt19937 rng(11);
  for (int i = 0; i < 100000; ++i)
    {
      std::uint32_t w = rng();
      Instruction d = decode(w);
      bool custom = (w & 0x7f) == opcodeCustom0 or (w & 0x7f) == opcodeCustom1;
      bool lim = d.op == Opcode::LimActive or d.op == Opcode::LimLoadMask;
      if (d.isLegal())
        {
          EXPECT_EQ(custom, lim) << std::hex << w;
        }
    }
}

TEST(Isa, EncodeRejectsOutOfRangeImmediates)
{
  Instruction i{Opcode::Addi, Reg(1), Reg(2), Reg(0), 2048, MemOpCode::None, 0};
  EXPECT_THROW(encode(i), std::out_of_range);
  i.imm = -2049;
  EXPECT_THROW(encode(i), std::out_of_range);
  Instruction b{Opcode::Beq, Reg(0), Reg(1), Reg(2), 3, MemOpCode::None, 0};
  EXPECT_THROW(encode(b), std::out_of_range);
  b.imm = 4096;
  EXPECT_THROW(encode(b), std::out_of_range);
  Instruction s{Opcode::Slli, Reg(1), Reg(1), Reg(0), 32, MemOpCode::None, 0};
  EXPECT_THROW(encode(s), std::out_of_range);
}

TEST(Isa, RandomLegalWordsRoundTrip)
{
  std::mt19937 rng(3);
  int legal = 0;
  for (int i = 0; i < 200000; ++i)
    {
      std::uint32_t w = rng();
      Instruction d = decode(w);
      if (not d.isLegal())
        continue;
      ++legal;
      ASSERT_EQ(encode(d), w) << std::hex << w << " " << disassemble(d);
      ASSERT_EQ(decode(encode(d)), d);
    }
  EXPECT_GT(legal, 1000);
}
