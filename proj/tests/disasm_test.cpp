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

#include "limsim/disasm.hpp"
#include "support.hpp"

using namespace limsim;

TEST(Disasm, Samples)
{
  EXPECT_EQ(disassemble(0x12345537), "lui x10, 0x12345");
  EXPECT_EQ(disassemble(0xffc32283), "lw x5, -4(x6)");
  EXPECT_EQ(disassemble(0x00000073), "ecall");
  EXPECT_EQ(disassemble(0x00000000), ".word 0x00000000");
}

// Disassembly text fed back through the assembler reproduces the word.
TEST(Disasm, FixpointThroughAssembler)
{
  std::mt19937 rng(5);
  int checked = 0;
  while (checked < 3000)
    {
      std::uint32_t w = rng();
      if (not decode(w).isLegal() and checked % 10 != 0)
        continue;
      ++checked;
      std::string text = disassemble(w);
      auto words = test::assembleWords(text);
      ASSERT_EQ(words.size(), 1u) << text;
      ASSERT_EQ(words[0], w) << text;
    }
}

TEST(Disasm, GoldenFormsFixpoint)
{
  for (const auto& g : test::goldenForms())
    for (auto w : g.words)
      EXPECT_EQ(test::assembleWords(disassemble(w)).at(0), w) << g.source;
}
