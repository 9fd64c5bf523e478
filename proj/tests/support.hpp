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
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "limsim/assembler.hpp"
#include "limsim/cpu.hpp"
#include "limsim/loader.hpp"
#include "limsim/memory.hpp"

namespace limsim::test
{

  /// An assembled program loaded into its own memory and CPU.
  struct Machine
  {
    LimMemory mem;
    std::ostringstream out;
    Cpu cpu;
    ProgramImage image;
    std::vector<std::string> trace;

    Machine(std::string_view source, std::uint64_t memBytes = 1u << 21, bool strict = false,
            TimingModel timing = {})
      : mem(memBytes, strict), cpu(mem, timing, &out, &out)
    {
      image = assemble(source);
      reset(cpu, loadImage(image, mem));
      cpu.setTraceSink([this](const TraceRecord& r) { trace.push_back(formatTrace(r)); });
    }

    RunResult run(std::uint64_t maxInstructions = 1'000'000) { return cpu.run(maxInstructions); }

    std::uint32_t reg(unsigned i) const { return cpu.state().reg(Reg(i)); }
    std::uint32_t word(const std::string& symbol) const { return mem.peekWord(image.symbols.at(symbol)); }
  };

  /// Source that runs body then exits with a0.
  inline std::string
  withExit(std::string_view body)
  {
    return "    .text\n_start:\n" + std::string(body) + "\n    li a7, 93\n    ecall\n";
  }

  inline std::vector<std::string>
  readLines(const std::string& path)
  {
    std::ifstream f(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(f, line))
      if (not line.empty() and line[0] != '#')
        lines.push_back(line);
    return lines;
  }

  struct GoldenForm
  {
    std::vector<std::uint32_t> words;
    std::string source;
  };

  inline std::vector<GoldenForm>
  goldenForms()
  {
    std::vector<GoldenForm> out;
    for (const auto& line : readLines(LIMSIM_GOLDEN_DIR "/rv32im_forms.txt"))
      {
        auto tab = line.find('\t');
        GoldenForm g;
        std::stringstream hex(line.substr(0, tab));
        std::string w;
        while (std::getline(hex, w, ','))
          g.words.push_back(static_cast<std::uint32_t>(std::stoul(w, nullptr, 16)));
        g.source = line.substr(tab + 1);
        out.push_back(std::move(g));
      }
    return out;
  }

  /// Words emitted for a single source line at the default text base.
  inline std::vector<std::uint32_t>
  assembleWords(const std::string& line)
  {
    auto image = assemble("    .text\n    " + line + "\n");
    std::vector<std::uint32_t> words;
    const auto& bytes = image.segments.at(0).bytes;
    for (std::size_t i = 0; i + 4 <= bytes.size(); i += 4)
      words.push_back(std::uint32_t(bytes[i]) | std::uint32_t(bytes[i + 1]) << 8 |
                      std::uint32_t(bytes[i + 2]) << 16 | std::uint32_t(bytes[i + 3]) << 24);
    return words;
  }

  struct SemanticCase
  {
    std::string mnemonic;
    std::uint32_t a, b, expected;
  };

  inline std::vector<SemanticCase>
  semanticCases()
  {
    std::vector<SemanticCase> out;
    for (const auto& line : readLines(LIMSIM_GOLDEN_DIR "/rv32im_semantics.txt"))
      {
        std::istringstream in(line);
        SemanticCase c;
        in >> c.mnemonic >> std::hex >> c.a >> c.b >> c.expected;
        out.push_back(c);
      }
    return out;
  }

  /// Execute one semantic case on a fresh CPU: x7 = x5 op x6 (or shamt), or
  /// for branches, 1 when the branch is taken.
  inline std::uint32_t
  executeSemanticCase(const SemanticCase& c)
  {
    auto op = opcodeForMnemonic(c.mnemonic);
    Instruction inst;
    inst.op = *op;
    inst.rd = Reg(7);
    inst.rs1 = Reg(5);
    if (inst.format() == Format::IShift)
      inst.imm = static_cast<std::int32_t>(c.b);
    else
      inst.rs2 = Reg(6);
    if (inst.format() == Format::B)
      {
        inst.rd = Reg(0);
        inst.imm = 8;
      }
    std::uint32_t w = encode(inst);
    LimMemory mem(1u << 16);
    std::uint8_t bytes[4] = {std::uint8_t(w), std::uint8_t(w >> 8), std::uint8_t(w >> 16), std::uint8_t(w >> 24)};
    mem.install(0x1000, bytes);
    Cpu cpu(mem);
    cpu.state().pc = 0x1000;
    cpu.state().setReg(Reg(5), c.a);
    cpu.state().setReg(Reg(6), c.b);
    cpu.step();
    if (inst.format() == Format::B)
      return cpu.state().pc == 0x1008 ? 1 : 0;
    return cpu.state().reg(Reg(7));
  }

} // namespace limsim::test
