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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "limsim/bench.hpp"

namespace fs = std::filesystem;

namespace
{
  class Cli : public ::testing::Test
  {
  protected:
    void SetUp() override
    {
      dir_ = fs::temp_directory_path() /
             ("limsim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
      fs::remove_all(dir_);
      fs::create_directories(dir_);
    }

    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void write(const std::string& name, const std::string& text) const
    {
      std::ofstream(path(name), std::ios::binary) << text;
    }

    std::string read(const std::string& name) const { return limsim::bench::readTextFile(path(name)); }

    /// Run the tool; stdout and stderr land in out.txt and err.txt.
    int run(const std::string& args, const std::string& env = "") const
    {
      std::string cmd = env + " '" LIMSIM_CLI_PATH "' " + args + " >'" + path("out.txt") + "' 2>'" + path("err.txt") + "'";
      int rc = std::system(cmd.c_str());
      return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    }

    fs::path dir_;
  };

  const char* exit42 = "    .text\n_start:\n    li a0, 42\n    li a7, 93\n    ecall\n";
}

TEST_F(Cli, AssembleAndRun)
{
  write("p.s", exit42);
  ASSERT_EQ(run("asm " + path("p.s") + " -o " + path("p.elf")), 0);
  EXPECT_EQ(run("run " + path("p.elf") + " --stats " + path("s.json")), 42);
  auto j = nlohmann::json::parse(read("s.json"));
  EXPECT_EQ(j["exit_code"], 42);
  EXPECT_EQ(j["instret"], 3);
  EXPECT_EQ(j["halt_reason"], "exit");
  for (const char* key : {"cycles", "plain_reads", "plain_writes", "logic_stores", "load_masks", "activations",
                          "activated_cells_current", "activated_cells_peak", "fetches", "data_accesses",
                          "nonzero_imm_logic_store", "wall_seconds", "halt_detail"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST_F(Cli, TraceHasOneLinePerRetiredInstruction)
{
  write("p.s", exit42);
  ASSERT_EQ(run("asm " + path("p.s") + " -o " + path("p.elf")), 0);
  EXPECT_EQ(run("run " + path("p.elf") + " --trace " + path("t.txt") + " --stats " + path("s.json")), 42);
  EXPECT_EQ(read("t.txt"),
            "cycle=0 pc=00001000 insn=02a00513 addi x10, x0, 42 rd=x10:0000002a\n"
            "cycle=1 pc=00001004 insn=05d00893 addi x17, x0, 93 rd=x17:0000005d\n"
            "cycle=2 pc=00001008 insn=00000073 ecall\n");
}

TEST_F(Cli, RunsAreDeterministicApartFromWallClock)
{
  write("p.s", limsim::bench::readTextFile(LIMSIM_BENCH_DIR "/max_min_base.s") +
                 limsim::bench::maxMinWorkload({5, 3, 9}).dataAsm);
  ASSERT_EQ(run("asm " + path("p.s") + " -o " + path("p.elf")), 0);
  EXPECT_EQ(run("run " + path("p.elf") + " --trace " + path("t1") + " --stats " + path("s1")), 0);
  EXPECT_EQ(run("run " + path("p.elf") + " --trace " + path("t2") + " --stats " + path("s2")), 0);
  EXPECT_EQ(read("t1"), read("t2"));
  auto a = nlohmann::json::parse(read("s1")), b = nlohmann::json::parse(read("s2"));
  a.erase("wall_seconds");
  b.erase("wall_seconds");
  EXPECT_EQ(a, b);
}

TEST_F(Cli, FlatOutputWithSymbols)
{
  write("p.s", exit42);
  ASSERT_EQ(run("asm " + path("p.s") + " -o " + path("p.bin") + " --format flat"), 0);
  EXPECT_EQ(fs::file_size(path("p.bin")), 12u);
  EXPECT_EQ(read("p.bin.sym"), "00001000 _start\n");
  EXPECT_EQ(run("run " + path("p.bin") + " --base 0x1000"), 42);
  EXPECT_NE(read("out.txt").find("\"exit_code\": 42"), std::string::npos);
}

TEST_F(Cli, UndefinedLabelIsReported)
{
  write("bad.s", "    nop\n    j nowhere\n");
  EXPECT_EQ(run("asm " + path("bad.s") + " -o " + path("bad.elf")), 1);
  std::string err = read("err.txt");
  EXPECT_NE(err.find("nowhere"), std::string::npos);
  EXPECT_NE(err.find("line 2"), std::string::npos);
}

TEST_F(Cli, LintWarningsGoToStandardError)
{
  write("w.s", "    .text\n    lim.active a0, a1, or\n    sw t0, 4(a0)\n    li a7, 93\n    ecall\n");
  EXPECT_EQ(run("asm " + path("w.s") + " -o " + path("w.elf")), 0);
  EXPECT_NE(read("err.txt").find(":3: warning"), std::string::npos);
}

TEST_F(Cli, FaultsExitWith70)
{
  write("f.s", "    .text\n    li t0, 0x7ffffffc\n    lw t1, 0(t0)\n");
  ASSERT_EQ(run("asm " + path("f.s") + " -o " + path("f.elf")), 0);
  EXPECT_EQ(run("run " + path("f.elf") + " --stats " + path("s.json")), 70);
  auto j = nlohmann::json::parse(read("s.json"));
  EXPECT_EQ(j["halt_reason"], "fault");
  EXPECT_NE(read("err.txt").find("OutOfBounds"), std::string::npos);
}

TEST_F(Cli, InstructionLimitExitsWith70)
{
  write("l.s", "    .text\nl: j l\n");
  ASSERT_EQ(run("asm " + path("l.s") + " -o " + path("l.elf")), 0);
  EXPECT_EQ(run("run " + path("l.elf") + " --max-instructions 50 --stats " + path("s.json")), 70);
  EXPECT_EQ(nlohmann::json::parse(read("s.json"))["instret"], 50);
}

TEST_F(Cli, MemorySizeValidation)
{
  write("p.s", exit42);
  ASSERT_EQ(run("asm " + path("p.s") + " -o " + path("p.elf")), 0);
  EXPECT_NE(run("run " + path("p.elf") + " --mem-size 100000"), 42);
  EXPECT_NE(run("run " + path("p.elf") + " --mem-size 32768"), 42);
  EXPECT_EQ(run("run " + path("p.elf") + " --mem-size 65536"), 42);
  EXPECT_NE(run("run " + path("p.elf"), "LIMSIM_MEM_BYTES=12345"), 42);
  EXPECT_EQ(run("run " + path("p.elf") + " --stats " + path("s.json"), "LIMSIM_MEM_BYTES=131072"), 42);
}

TEST_F(Cli, TimingOverrides)
{
  write("p.s", "    .text\n    lw t0, 0(sp)\n    li a7, 93\n    ecall\n");
  write("t.json", "{\"load\": 10}");
  ASSERT_EQ(run("asm " + path("p.s") + " -o " + path("p.elf")), 0);
  EXPECT_EQ(run("run " + path("p.elf") + " --timing load=4 --stats " + path("s.json")), 0);
  EXPECT_EQ(nlohmann::json::parse(read("s.json"))["cycles"], 3 + 4);
  EXPECT_EQ(run("run " + path("p.elf") + " --timing-file " + path("t.json") + " --stats " + path("s.json")), 0);
  EXPECT_EQ(nlohmann::json::parse(read("s.json"))["cycles"], 3 + 10);
  EXPECT_NE(run("run " + path("p.elf") + " --timing bogus=1"), 0);
}

TEST_F(Cli, DisassembleZerosAndLim)
{
  write("z.bin", std::string(8, '\0'));
  EXPECT_EQ(run("disasm " + path("z.bin")), 0);
  EXPECT_EQ(read("out.txt"), "00001000: 00000000  .word 0x00000000\n00001004: 00000000  .word 0x00000000\n");

  write("l.s", "    .text\n    lim.active a0, a1, xnor\n    lim.loadmask t0, a0, t1, nand\n");
  ASSERT_EQ(run("asm " + path("l.s") + " -o " + path("l.elf")), 0);
  EXPECT_EQ(run("disasm " + path("l.elf")), 0);
  std::string out = read("out.txt");
  EXPECT_NE(out.find("lim.active x10, x11, xnor"), std::string::npos);
  EXPECT_NE(out.find("lim.loadmask x5, x10, x6, nand"), std::string::npos);
}

TEST_F(Cli, DisassemblyReassemblesToSameBytes)
{
  std::string src = limsim::bench::readTextFile(LIMSIM_BENCH_DIR "/bitwise_lim.s");
  write("p.s", src + "n_words: .word 0\nsrc_b: .word 0\nwork: .word 0\nexpected: .word 0\n");
  ASSERT_EQ(run("asm " + path("p.s") + " -o " + path("p.bin") + " --format flat"), 0);
  // the flat image starts with the text bytes
  ASSERT_EQ(run("asm " + path("p.s") + " -o " + path("p.elf")), 0);
  ASSERT_EQ(run("disasm " + path("p.elf")), 0);
  std::istringstream listing(read("out.txt"));
  std::string line, re = "    .text\n";
  while (std::getline(listing, line))
    re += "    " + line.substr(line.find("  ") + 2) + "\n";
  write("re.s", re);
  ASSERT_EQ(run("asm " + path("re.s") + " -o " + path("re.bin") + " --format flat"), 0);
  std::string original = read("p.bin");
  std::string again = read("re.bin");
  EXPECT_EQ(original.substr(0, again.size()), again);
}

TEST_F(Cli, BenchSuitePasses)
{
  EXPECT_EQ(run("bench --suite " LIMSIM_BENCH_DIR "/suite.manifest --out " + path("table.txt")), 0);
  std::string table = read("table.txt");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 10);
  EXPECT_EQ(table.find("fail"), std::string::npos);
}

TEST_F(Cli, BenchReportsBrokenBenchmark)
{
  std::string src = limsim::bench::readTextFile(LIMSIM_BENCH_DIR "/bitwise_base.s");
  src.replace(src.find("xor  t6, t4, t5"), 15, "and  t6, t4, t5");
  write("broken.s", src);
  write("suite.manifest", "name=bitwise oracle=bitwise base=broken.s n=8 seed=1\n");
  EXPECT_EQ(run("bench --suite " + path("suite.manifest")), 1);
  EXPECT_NE(read("out.txt").find("fail"), std::string::npos);
}
