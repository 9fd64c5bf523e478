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

// limsim: assemble, disassemble, run and benchmark LiM-extended RV32IM code.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "limsim/assembler.hpp"
#include "limsim/bench.hpp"
#include "limsim/cpu.hpp"
#include "limsim/disasm.hpp"
#include "limsim/elf.hpp"
#include "limsim/loader.hpp"
#include "limsim/report.hpp"

using namespace limsim;

namespace
{
  std::vector<std::uint8_t>
  readBinary(const std::string& path)
  {
    std::ifstream f(path, std::ios::binary);
    if (not f)
      throw std::runtime_error("cannot open " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  }

  void
  writeBinary(const std::string& path, const std::vector<std::uint8_t>& bytes)
  {
    std::ofstream f(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (not f)
      throw std::runtime_error("cannot write " + path);
  }

  void
  writeText(const std::string& path, const std::string& text)
  {
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (not f)
      throw std::runtime_error("cannot write " + path);
  }

  bool
  looksLikeElf(const std::vector<std::uint8_t>& b)
  {
    return b.size() >= 4 and b[0] == 0x7f and b[1] == 'E' and b[2] == 'L' and b[3] == 'F';
  }

  struct AsmArgs
  {
    std::string input;
    std::string output;
    std::string format = "elf";
    std::uint32_t textBase = 0x1000;
    std::uint32_t dataBase = 0x100000;
  };

  int
  cmdAsm(const AsmArgs& a)
  {
    std::string source = bench::readTextFile(a.input);
    AsmOptions opts{a.textBase, a.dataBase};
    try
      {
        ProgramImage image = assemble(source, opts);
        for (const auto& w : lintLimPairing(source, opts))
          std::cerr << a.input << ":" << w.line << ": warning: " << w.message << "\n";
        if (a.format == "flat")
          {
            writeBinary(a.output, image.flatten());
            writeText(a.output + ".sym", image.symbolMap());
          }
        else
          writeBinary(a.output, writeElf(image));
      }
    catch (const AsmError& e)
      {
        std::cerr << a.input << ": " << e.what() << "\n";
        return 1;
      }
    return 0;
  }

  struct DisasmArgs
  {
    std::string input;
    std::uint32_t base = 0x1000;
  };

  int
  cmdDisasm(const DisasmArgs& a)
  {
    auto bytes = readBinary(a.input);
    auto listRange = [](std::uint32_t addr, const std::uint8_t* p, std::size_t n) {
      for (std::size_t off = 0; off + 4 <= n; off += 4)
        {
          std::uint32_t w = std::uint32_t(p[off]) | std::uint32_t(p[off + 1]) << 8 |
                            std::uint32_t(p[off + 2]) << 16 | std::uint32_t(p[off + 3]) << 24;
          std::cout << limsim::detail::hex8(addr + static_cast<std::uint32_t>(off), false) << ": "
                    << limsim::detail::hex8(w, false) << "  " << disassemble(w) << "\n";
        }
    };
    if (looksLikeElf(bytes))
      {
        ElfExecutable exe = readElf(bytes);
        for (const auto& seg : exe.segments)
          if (seg.flags & elf::pfX)
            listRange(seg.vaddr, seg.bytes.data(), seg.bytes.size());
      }
    else
      listRange(a.base, bytes.data(), bytes.size());
    return 0;
  }

  struct RunArgs
  {
    std::string program;
    std::uint64_t memSize = LimMemory::defaultSize;
    std::string trace;
    std::string stats;
    std::uint64_t maxInstructions = 100'000'000;
    bool strictLim = false;
    std::vector<std::string> timing;
    std::string timingFile;
    std::uint32_t base = 0x1000;
    std::optional<std::uint32_t> entry;
  };

  TimingModel
  buildTiming(const RunArgs& a)
  {
    TimingModel t;
    auto apply = [&](const std::string& key, std::int64_t v) {
      if (v < 0 or v > 0xFFFFFFFF)
        throw std::runtime_error("timing value out of range for " + key);
      if (not t.set(key, static_cast<std::uint32_t>(v)))
        throw std::runtime_error("unknown timing key '" + key + "'");
    };
    if (not a.timingFile.empty())
      {
        auto j = nlohmann::json::parse(bench::readTextFile(a.timingFile));
        if (not j.is_object())
          throw std::runtime_error("timing file must hold a JSON object");
        for (const auto& [k, v] : j.items())
          apply(k, v.get<std::int64_t>());
      }
    for (const auto& kv : a.timing)
      {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
          throw std::runtime_error("--timing expects key=value, got '" + kv + "'");
        auto v = limsim::detail::parseNumber(kv.substr(eq + 1));
        if (not v)
          throw std::runtime_error("bad timing value in '" + kv + "'");
        apply(kv.substr(0, eq), *v);
      }
    return t;
  }

  int
  cmdRun(const RunArgs& a)
  {
    if (a.memSize < 64 * 1024 or (a.memSize & (a.memSize - 1)) != 0)
      {
        std::cerr << "memory size must be a power of two of at least 64 KiB\n";
        return 2;
      }
    if (a.maxInstructions == 0)
      {
        std::cerr << "--max-instructions must be positive\n";
        return 2;
      }
    TimingModel timing = buildTiming(a);
    LimMemory mem(a.memSize, a.strictLim);

    auto bytes = readBinary(a.program);
    LoadedProgram prog;
    try
      {
        prog = looksLikeElf(bytes) ? loadElf(bytes, mem) : loadFlat(bytes, a.base, a.entry, mem);
      }
    catch (const LoadError& e)
      {
        std::cerr << a.program << ": " << e.what() << "\n";
        return 1;
      }

    Cpu cpu(mem, timing, &std::cout, &std::cerr);
    reset(cpu, prog);

    std::ofstream traceFile;
    if (not a.trace.empty())
      {
        traceFile.open(a.trace, std::ios::binary);
        if (not traceFile)
          throw std::runtime_error("cannot write " + a.trace);
        cpu.setTraceSink([&](const TraceRecord& r) { traceFile << formatTrace(r) << '\n'; });
      }

    RunResult result = cpu.run(a.maxInstructions);
    std::cout.flush();

    if (result.halt.kind != HaltReason::Kind::Exit)
      std::cerr << "halted: " << describe(result.halt) << "\n";

    if (a.stats.empty())
      std::cout << statsText(result);
    else
      writeText(a.stats, statsText(result));
    return processStatus(result.halt);
  }

  struct BenchArgs
  {
    std::string suite;
    std::string out;
    unsigned jobs = 0;
  };

  int
  cmdBench(const BenchArgs& a)
  {
    auto cases = bench::loadManifest(a.suite);
    unsigned jobs = a.jobs ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
    auto results = bench::runSuite(cases, jobs);
    std::string table = bench::formatTable(results);
    if (a.out.empty())
      std::cout << table;
    else
      writeText(a.out, table);
    bool ok = true;
    for (const auto& r : results)
      if (not r.passed)
        {
          ok = false;
          for (const auto& f : r.failures)
            std::cerr << r.benchmark << "/" << bench::variantName(r.variant) << ": " << f << "\n";
        }
    return ok ? 0 : 1;
  }

  std::uint64_t
  defaultMemSize()
  {
    if (const char* env = std::getenv("LIMSIM_MEM_BYTES"))
      if (auto v = limsim::detail::parseNumber(env); v and *v > 0)
        return static_cast<std::uint64_t>(*v);
    return LimMemory::defaultSize;
  }
}

int
main(int argc, char** argv)
{
  CLI::App app{"Assembler, disassembler and simulator for RV32IM with logic-in-memory instructions"};
  app.require_subcommand(1);

  AsmArgs asmArgs;
  auto* asmCmd = app.add_subcommand("asm", "Assemble a source file");
  asmCmd->add_option("input", asmArgs.input, "Assembly source")->required();
  asmCmd->add_option("-o,--output", asmArgs.output, "Output file")->required();
  asmCmd->add_option("--format", asmArgs.format, "elf or flat")->check(CLI::IsMember({"elf", "flat"}));
  asmCmd->add_option("--text-base", asmArgs.textBase, "Text section base address");
  asmCmd->add_option("--data-base", asmArgs.dataBase, "Data section base address");

  DisasmArgs disArgs;
  auto* disCmd = app.add_subcommand("disasm", "Disassemble an ELF or flat binary");
  disCmd->add_option("program", disArgs.input, "Program file")->required();
  disCmd->add_option("--base", disArgs.base, "Load address of a flat binary");

  RunArgs runArgs;
  runArgs.memSize = defaultMemSize();
  auto* runCmd = app.add_subcommand("run", "Run a program");
  runCmd->add_option("program", runArgs.program, "ELF or flat binary")->required();
  runCmd->add_option("--mem-size", runArgs.memSize, "Memory size in bytes");
  runCmd->add_option("--trace", runArgs.trace, "Write an instruction trace here");
  runCmd->add_option("--stats", runArgs.stats, "Write JSON stats here (default: stdout)");
  runCmd->add_option("--max-instructions", runArgs.maxInstructions, "Instruction budget");
  runCmd->add_flag("--strict-lim", runArgs.strictLim, "Fault when lim.loadmask's op differs from the cell state");
  runCmd->add_option("--timing", runArgs.timing, "Timing override key=value (repeatable)");
  runCmd->add_option("--timing-file", runArgs.timingFile, "JSON object of timing overrides");
  runCmd->add_option("--base", runArgs.base, "Load address of a flat binary");
  auto* entryOpt = runCmd->add_option("--entry", "Entry point of a flat binary");

  BenchArgs benchArgs;
  auto* benchCmd = app.add_subcommand("bench", "Run the benchmark suite");
  benchCmd->add_option("--suite", benchArgs.suite, "Manifest file")->required();
  benchCmd->add_option("--out", benchArgs.out, "Write the report table here");
  benchCmd->add_option("--jobs", benchArgs.jobs, "Worker threads (default: all cores)");

  CLI11_PARSE(app, argc, argv);

  try
    {
      if (*asmCmd)
        return cmdAsm(asmArgs);
      if (*disCmd)
        return cmdDisasm(disArgs);
      if (*runCmd)
        {
          if (entryOpt->count())
            runArgs.entry = entryOpt->as<std::uint32_t>();
          return cmdRun(runArgs);
        }
      if (*benchCmd)
        return cmdBench(benchArgs);
    }
  catch (const std::exception& e)
    {
      std::cerr << "limsim: " << e.what() << "\n";
      return 1;
    }
  return 0;
}
