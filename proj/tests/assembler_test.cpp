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

#include <gtest/gtest.h>

#include "support.hpp"

using namespace limsim;

TEST(Assembler, GoldenCorpusMatchesReferenceAssembler)
{
  auto forms = test::goldenForms();
  ASSERT_GE(forms.size(), 60u);
  for (const auto& g : forms)
    EXPECT_EQ(test::assembleWords(g.source), g.words) << g.source;
}

TEST(Assembler, LimMnemonicsMatchEncoders)
{
  for (auto op : allMemOps)
    {
      std::string name(memOpName(op));
      EXPECT_EQ(test::assembleWords("lim.active a0, a1, " + name).at(0),
                encodeStoreActiveLogic(reg::a0, reg::a1, op));
      EXPECT_EQ(test::assembleWords("lim.loadmask t0, s0, x31, " + name).at(0),
                encodeLoadMask(reg::t0, reg::s0, Reg(31), op));
    }
}

TEST(Assembler, LoadImmediateExecutes)
{
  std::mt19937 rng(29);
  for (int i = 0; i < 10000; ++i)
    {
      std::uint32_t v = rng();
      if (i % 4 == 0)
        v = static_cast<std::uint32_t>(static_cast<std::int32_t>(rng() % 8192) - 4096);
      if (i % 4 == 1)
        v = (v & 0xFFFFF000u) | (rng() % 2 ? 0x800 : 0x7FF);
      test::Machine m(test::withExit("    li a0, " + std::to_string(static_cast<std::int32_t>(v)) + "\n    mv s0, a0"), 1u << 16);
      m.run();
      ASSERT_EQ(m.reg(8), v) << std::hex << v;
    }
}

TEST(Assembler, LabelsDataAndRelocations)
{
  auto image = assemble(R"(
    .equ COUNT, 3
    .text
    .globl _start
_start:
    lui a0, %hi(table)
    addi a0, a0, %lo(table)
    call helper
    tail helper
helper:
    ret
    .data
table: .word 1, 2, COUNT
half:  .half 0xbeef
byte:  .byte 7, 8
    .align 2
str:   .asciz "ok"
gap:   .space 5
end:
)");
  EXPECT_EQ(image.entry, 0x1000u);
  EXPECT_EQ(image.symbols.at("table"), 0x100000u);
  EXPECT_EQ(image.symbols.at("half"), 0x10000cu);
  EXPECT_EQ(image.symbols.at("byte"), 0x10000eu);
  EXPECT_EQ(image.symbols.at("str"), 0x100010u);
  EXPECT_EQ(image.symbols.at("gap"), 0x100013u);
  EXPECT_EQ(image.symbols.at("end"), 0x100018u);
  EXPECT_EQ(image.symbols.at("helper"), 0x1018u);
  ASSERT_EQ(image.segments.size(), 2u);
  EXPECT_EQ(image.segments[0].flags, SegmentFlags::Rx);
  EXPECT_EQ(image.segments[1].flags, SegmentFlags::Rw);
  EXPECT_EQ(image.segments[1].bytes[8], 3);
  EXPECT_EQ(image.segments[1].bytes[12], 0xef);
  EXPECT_EQ(image.segments[1].bytes[13], 0xbe);
  EXPECT_EQ(image.segments[1].bytes[0x12], 0);
  EXPECT_NE(image.symbolMap().find("00001000 _start\n00001018 helper\n"), std::string::npos);
}

TEST(Assembler, EntryDefaultsToTextBase)
{
  AsmOptions opts;
  opts.textBase = 0x4000;
  auto image = assemble("    .text\nfoo: nop\n", opts);
  EXPECT_EQ(image.entry, 0x4000u);
}

TEST(Assembler, ForwardAndBackwardBranches)
{
  test::Machine m(test::withExit(R"(
    li a0, 0
    li t0, 5
back:
    addi a0, a0, 2
    addi t0, t0, -1
    bgtz t0, back
    j fwd
    li a0, 99
fwd:
    nop)"));
  EXPECT_EQ(m.run().halt.exitCode, 10);
}

namespace
{
  AsmErrorKind errorKind(const std::string& src)
  {
    try
      {
        assemble(src);
      }
    catch (const AsmError& e)
      {
        return e.kind();
      }
    ADD_FAILURE() << "no error for: " << src;
    return AsmErrorKind::BadOperand;
  }
}

TEST(Assembler, Errors)
{
  EXPECT_EQ(errorKind("  j missing\n"), AsmErrorKind::UndefinedLabel);
  EXPECT_EQ(errorKind("a: nop\na: nop\n"), AsmErrorKind::DuplicateLabel);
  EXPECT_EQ(errorKind("  beq x0, x0, far\n  .space 8192\nfar: nop\n"), AsmErrorKind::BranchOutOfRange);
  EXPECT_EQ(errorKind("  addi x1, x2, 5000\n"), AsmErrorKind::BadOperand);
  EXPECT_EQ(errorKind("  addi x1, x99, 1\n"), AsmErrorKind::BadOperand);
  EXPECT_EQ(errorKind("  lim.active a0, a1, max\n"), AsmErrorKind::BadOperand);
  EXPECT_EQ(errorKind("  frobnicate x1\n"), AsmErrorKind::UnknownMnemonic);
  EXPECT_EQ(errorKind("  .bogus 1\n"), AsmErrorKind::BadDirective);
  EXPECT_EQ(errorKind("  .org 0x1000\n  nop\n  .org 0x1000\n  nop\n"), AsmErrorKind::SegmentOverlap);
}

TEST(Assembler, ErrorMessageNamesLineAndLabel)
{
  try
    {
      assemble("  nop\n  nop\n  jal ra, nowhere\n");
      FAIL();
    }
  catch (const AsmError& e)
    {
      EXPECT_EQ(e.line(), 3);
      EXPECT_NE(std::string(e.what()).find("nowhere"), std::string::npos);
      EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(Assembler, LintFlagsNonzeroOffsetStoreThroughActivatedBase)
{
  auto w = lintLimPairing("  lim.active a0, a1, or\n  sw t0, 4(a0)\n  sw t0, 0(a0)\n  lim.active a0, a1, none\n  sw t0, 8(a0)\n");
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].line, 2);
}

TEST(Assembler, LintFlagsLoadMaskWithoutActivation)
{
  auto w = lintLimPairing("  lim.loadmask a0, a1, a2, and\n  lim.active a1, a2, and\n  lim.loadmask a0, a1, a2, and\n");
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].line, 1);
}

TEST(Assembler, CommentsAndCase)
{
  EXPECT_EQ(test::assembleWords("ADDI a0, a0, 1  # increment"), test::assembleWords("addi a0, a0, 1"));
}
