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

// Benchmark workloads: input generation, host reference results, the exact
// memory-access counts each assembly variant must produce, and a harness
// that assembles, runs and verifies the variants listed in a manifest.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "limsim/assembler.hpp"
#include "limsim/cpu.hpp"
#include "limsim/loader.hpp"
#include "limsim/memory.hpp"

namespace limsim::bench
{

  // ---------------------------------------------------------------------
  // Host reference implementations.

  using Block = std::array<std::uint8_t, 16>;

  inline std::vector<std::uint32_t>
  bitwiseReference(MemOpCode op, const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b)
  {
    std::vector<std::uint32_t> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      {
        std::uint32_t x = a[i], y = b[i];
        switch (op)
          {
          case MemOpCode::And:  out[i] = x & y; break;
          case MemOpCode::Or:   out[i] = x | y; break;
          case MemOpCode::Xor:  out[i] = x ^ y; break;
          case MemOpCode::Nand: out[i] = ~(x & y); break;
          case MemOpCode::Nor:  out[i] = ~(x | y); break;
          case MemOpCode::Xnor: out[i] = ~(x ^ y); break;
          case MemOpCode::None: out[i] = x; break;
          }
      }
    return out;
  }

  /// AES AddRoundKey on a byte-oriented 4x4 state.
  inline Block
  addRoundKey(const Block& state, const Block& key)
  {
    Block out{};
    for (std::size_t i = 0; i < 16; ++i)
      out[i] = state[i] ^ key[i];
    return out;
  }

  /// Little-endian packing of a 16-byte state into four words.
  inline std::array<std::uint32_t, 4>
  packBlock(const Block& b)
  {
    std::array<std::uint32_t, 4> w{};
    for (std::size_t i = 0; i < 16; ++i)
      w[i / 4] |= std::uint32_t(b[i]) << (8 * (i % 4));
    return w;
  }

  /// Indices i with (bitmap[i] & mask) == mask. A zero mask matches every word.
  inline std::vector<std::uint32_t>
  bitmapSearchReference(const std::vector<std::uint32_t>& bitmap, std::uint32_t mask)
  {
    std::vector<std::uint32_t> idx;
    for (std::size_t i = 0; i < bitmap.size(); ++i)
      if ((bitmap[i] & mask) == mask)
        idx.push_back(static_cast<std::uint32_t>(i));
    return idx;
  }

  inline std::pair<std::int32_t, std::int32_t>
  maxMinReference(const std::vector<std::uint32_t>& values)
  {
    if (values.empty())
      throw std::invalid_argument("max_min needs at least one value");
    auto hi = static_cast<std::int32_t>(values[0]), lo = hi;
    for (auto v : values)
      {
        auto s = static_cast<std::int32_t>(v);
        hi = std::max(hi, s);
        lo = std::min(lo, s);
      }
    return {hi, lo};
  }

  struct XnorResult
  {
    std::vector<std::uint32_t> xnorWords;
    std::int32_t similarity;   // agreeing bits minus disagreeing bits
  };

  inline XnorResult
  xnorNetReference(const std::vector<std::uint32_t>& weights, const std::vector<std::uint32_t>& acts)
  {
    XnorResult r{{}, 0};
    std::int64_t agree = 0;
    for (std::size_t i = 0; i < weights.size(); ++i)
      {
        std::uint32_t x = ~(weights[i] ^ acts[i]);
        r.xnorWords.push_back(x);
        agree += std::popcount(x);
      }
    r.similarity = static_cast<std::int32_t>(2 * agree - 32 * std::int64_t(weights.size()));
    return r;
  }

  /// FIPS-197 Appendix B input block and cipher key.
  inline constexpr Block fipsPlaintext = {0x32, 0x43, 0xf6, 0xa8, 0x88, 0x5a, 0x30, 0x8d,
                                          0x31, 0x31, 0x98, 0xa2, 0xe0, 0x37, 0x07, 0x34};
  inline constexpr Block fipsKey = {0x2b, 0x7e, 0x15, 0x16, 0x28, 0xae, 0xd2, 0xa6,
                                    0xab, 0xf7, 0x15, 0x88, 0x09, 0xcf, 0x4f, 0x3c};

  // ---------------------------------------------------------------------
  // Workloads.

  enum class Variant : std::uint8_t { Base, Lim };

  constexpr std::string_view variantName(Variant v) { return v == Variant::Lim ? "lim" : "base"; }

  /// Memory traffic a variant must generate, field by field.
  struct AccessCounts
  {
    std::uint64_t plainReads = 0;
    std::uint64_t plainWrites = 0;
    std::uint64_t logicStores = 0;
    std::uint64_t loadMasks = 0;
    std::uint64_t activations = 0;

    std::uint64_t dataAccesses() const { return plainReads + plainWrites + logicStores + loadMasks; }

    static AccessCounts of(const MemStats& s)
    {
      return {s.plainReads, s.plainWrites, s.logicStores, s.loadMasks, s.activations};
    }

    bool operator==(const AccessCounts&) const = default;
  };

  inline std::string
  describe(const AccessCounts& c)
  {
    return "reads=" + std::to_string(c.plainReads) + " writes=" + std::to_string(c.plainWrites) +
           " logic_stores=" + std::to_string(c.logicStores) + " load_masks=" + std::to_string(c.loadMasks) +
           " activations=" + std::to_string(c.activations);
  }

  /// Words a labelled region must hold once the program has finished.
  struct RegionCheck
  {
    std::string symbol;
    std::vector<std::uint32_t> expected;
  };

  /// Generated inputs and expectations for one benchmark instance. The data
  /// assembly is appended to either variant's source.
  struct Workload
  {
    std::string dataAsm;
    std::vector<RegionCheck> checks;
    AccessCounts baseCounts;
    std::optional<AccessCounts> limCounts;

    const AccessCounts& counts(Variant v) const
    {
      if (v == Variant::Lim)
        {
          if (not limCounts)
            throw std::logic_error("workload has no LiM variant");
          return *limCounts;
        }
      return baseCounts;
    }
  };

  namespace detail
  {
    class DataWriter
    {
    public:
      DataWriter() { out_ << "\n    .data\n    .align 2\n"; }

      void words(const std::string& label, const std::vector<std::uint32_t>& values)
      {
        out_ << label << ":\n";
        for (std::size_t i = 0; i < values.size(); i += 8)
          {
            out_ << "    .word ";
            for (std::size_t j = i; j < std::min(values.size(), i + 8); ++j)
              out_ << (j > i ? ", " : "") << limsim::detail::hex8(values[j]);
            out_ << "\n";
          }
      }

      void word(const std::string& label, std::uint32_t v) { words(label, {v}); }

      void space(const std::string& label, std::size_t bytes)
      {
        out_ << label << ":\n    .space " << bytes << "\n";
      }

      std::string str() const { return out_.str(); }

    private:
      std::ostringstream out_;
    };

    inline std::vector<std::uint32_t> randomWords(std::mt19937& rng, std::size_t n)
    {
      std::vector<std::uint32_t> v(n);
      for (auto& w : v)
        w = static_cast<std::uint32_t>(rng());
      return v;
    }
  }

  inline Workload
  bitwiseWorkload(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b)
  {
    if (a.size() != b.size())
      throw std::invalid_argument("bitwise operands differ in length");
    const std::uint64_t n = a.size();
    std::vector<std::uint32_t> work, expected;
    for (auto op : logicMemOps)
      {
        work.insert(work.end(), a.begin(), a.end());
        auto r = bitwiseReference(op, a, b);
        expected.insert(expected.end(), r.begin(), r.end());
      }

    detail::DataWriter d;
    d.word("n_words", static_cast<std::uint32_t>(n));
    d.words("src_a", a);
    d.words("src_b", b);
    d.words("work", work);
    d.words("expected", expected);

    Workload w;
    w.dataAsm = d.str();
    w.checks.push_back({"work", expected});
    // per op: base reads a and b and writes c; LiM reads b and logic-stores it.
    // Both then compare 6n result words against 6n expected words.
    w.baseCounts = {24 * n + 1, 6 * n, 0, 0, 0};
    w.limCounts = AccessCounts{18 * n + 1, 0, 6 * n, 0, 12};
    return w;
  }

  inline Workload
  aesWorkload(const std::vector<Block>& states, const Block& key)
  {
    const std::uint64_t n = states.size();
    std::vector<std::uint32_t> in, expected;
    for (const auto& s : states)
      {
        auto p = packBlock(s);
        auto e = packBlock(addRoundKey(s, key));
        in.insert(in.end(), p.begin(), p.end());
        expected.insert(expected.end(), e.begin(), e.end());
      }
    auto k = packBlock(key);

    detail::DataWriter d;
    d.word("n_blocks", static_cast<std::uint32_t>(n));
    d.words("round_key", {k.begin(), k.end()});
    d.words("states", in);
    d.words("expected", expected);

    Workload w;
    w.dataAsm = d.str();
    w.checks.push_back({"states", expected});
    w.baseCounts = {12 * n + 5, 4 * n, 0, 0, 0};
    w.limCounts = AccessCounts{8 * n + 5, 0, 4 * n, 0, 2};
    return w;
  }

  inline Workload
  bitmapSearchWorkload(const std::vector<std::uint32_t>& bitmap, std::uint32_t mask)
  {
    const std::uint64_t n = bitmap.size();
    auto idx = bitmapSearchReference(bitmap, mask);
    const std::uint64_t m = idx.size();

    detail::DataWriter d;
    d.word("n_words", static_cast<std::uint32_t>(n));
    d.word("query_mask", mask);
    d.words("bitmap", bitmap);
    d.word("match_count", 0);
    d.space("match_idx", 4 * n);
    d.word("expected_count", static_cast<std::uint32_t>(m));
    if (idx.empty())
      d.space("expected_idx", 0);
    else
      d.words("expected_idx", idx);

    Workload w;
    w.dataAsm = d.str();
    w.checks.push_back({"match_count", {static_cast<std::uint32_t>(m)}});
    w.checks.push_back({"match_idx", idx});
    w.baseCounts = {n + 2 * m + 4, m + 1, 0, 0, 0};
    w.limCounts = AccessCounts{2 * m + 4, m + 1, 0, n, 2};
    return w;
  }

  inline Workload
  maxMinWorkload(const std::vector<std::uint32_t>& values)
  {
    const std::uint64_t n = values.size();
    auto [hi, lo] = maxMinReference(values);

    detail::DataWriter d;
    d.word("n_words", static_cast<std::uint32_t>(n));
    d.words("values", values);
    d.word("result_max", 0);
    d.word("result_min", 0);
    d.word("expected_max", static_cast<std::uint32_t>(hi));
    d.word("expected_min", static_cast<std::uint32_t>(lo));

    Workload w;
    w.dataAsm = d.str();
    w.checks.push_back({"result_max", {static_cast<std::uint32_t>(hi)}});
    w.checks.push_back({"result_min", {static_cast<std::uint32_t>(lo)}});
    w.baseCounts = {n + 5, 2, 0, 0, 0};
    return w;
  }

  inline Workload
  xnorNetWorkload(const std::vector<std::uint32_t>& weights, const std::vector<std::uint32_t>& acts)
  {
    if (weights.size() != acts.size())
      throw std::invalid_argument("xnor_net vectors differ in length");
    const std::uint64_t n = weights.size();
    auto ref = xnorNetReference(weights, acts);

    detail::DataWriter d;
    d.word("n_words", static_cast<std::uint32_t>(n));
    d.words("weights", weights);
    d.words("acts", acts);
    d.words("work", weights);
    d.word("result_sim", 0);
    d.word("expected_sim", static_cast<std::uint32_t>(ref.similarity));

    Workload w;
    w.dataAsm = d.str();
    w.checks.push_back({"work", ref.xnorWords});
    w.checks.push_back({"result_sim", {static_cast<std::uint32_t>(ref.similarity)}});
    w.baseCounts = {3 * n + 3, n + 1, 0, 0, 0};
    w.limCounts = AccessCounts{2 * n + 3, 1, n, 0, 2};
    return w;
  }

  // ---------------------------------------------------------------------
  // Manifest.

  struct BenchmarkCase
  {
    std::string name;
    std::string oracle;
    std::optional<std::filesystem::path> limSource;
    std::optional<std::filesystem::path> baseSource;
    std::map<std::string, std::string> params;

    std::vector<Variant> variants() const
    {
      std::vector<Variant> v;
      if (baseSource) v.push_back(Variant::Base);
      if (limSource) v.push_back(Variant::Lim);
      return v;
    }

    std::uint64_t param(const std::string& key, std::uint64_t fallback) const
    {
      auto it = params.find(key);
      if (it == params.end())
        return fallback;
      auto v = limsim::detail::parseNumber(it->second);
      if (not v or *v < 0)
        throw std::invalid_argument(name + ": bad value for " + key + ": " + it->second);
      return static_cast<std::uint64_t>(*v);
    }
  };

  /// Parse manifest text: one benchmark per line of key=value pairs, '#'
  /// comments. Source paths are resolved against baseDir.
  inline std::vector<BenchmarkCase>
  parseManifest(std::string_view text, const std::filesystem::path& baseDir)
  {
    std::vector<BenchmarkCase> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line))
      {
        ++lineNo;
        if (auto c = line.find('#'); c != std::string::npos)
          line.erase(c);
        std::istringstream fields(line);
        std::string tok;
        BenchmarkCase bc;
        bool any = false;
        while (fields >> tok)
          {
            any = true;
            auto eq = tok.find('=');
            if (eq == std::string::npos or eq == 0)
              throw std::invalid_argument("manifest line " + std::to_string(lineNo) + ": expected key=value, got '" + tok + "'");
            std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
            if (key == "name") bc.name = value;
            else if (key == "oracle") bc.oracle = value;
            else if (key == "lim") bc.limSource = baseDir / value;
            else if (key == "base") bc.baseSource = baseDir / value;
            else bc.params[key] = value;
          }
        if (not any)
          continue;
        if (bc.name.empty() or bc.oracle.empty())
          throw std::invalid_argument("manifest line " + std::to_string(lineNo) + ": name and oracle are required");
        if (not bc.limSource and not bc.baseSource)
          throw std::invalid_argument("manifest line " + std::to_string(lineNo) + ": no variant sources");
        out.push_back(std::move(bc));
      }
    return out;
  }

  inline std::string
  readTextFile(const std::filesystem::path& path)
  {
    std::ifstream f(path, std::ios::binary);
    if (not f)
      throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  inline std::vector<BenchmarkCase>
  loadManifest(const std::filesystem::path& path)
  {
    return parseManifest(readTextFile(path), path.parent_path());
  }

  /// Build the seeded workload a manifest entry describes.
  inline Workload
  makeWorkload(const BenchmarkCase& bc)
  {
    std::mt19937 rng(static_cast<std::uint32_t>(bc.param("seed", 1)));
    const std::string& o = bc.oracle;
    if (o == "bitwise")
      {
        auto n = bc.param("n", 256);
        auto a = detail::randomWords(rng, n);
        auto b = detail::randomWords(rng, n);
        return bitwiseWorkload(a, b);
      }
    if (o == "aes128_arkey")
      {
        auto n = bc.param("n", 64);
        std::vector<Block> states;
        for (std::uint64_t i = 0; i < n; ++i)
          {
            if (i == 0)
              {
                states.push_back(fipsPlaintext);
                continue;
              }
            Block b{};
            for (auto& byte : b)
              byte = static_cast<std::uint8_t>(rng());
            states.push_back(b);
          }
        return aesWorkload(states, fipsKey);
      }
    if (o == "bitmap_search")
      {
        auto n = bc.param("n", 128);
        auto bitmap = detail::randomWords(rng, n);
        std::uint32_t mask;
        if (bc.params.count("mask"))
          mask = static_cast<std::uint32_t>(bc.param("mask", 0));
        else
          {
            unsigned b0 = rng() % 32, b1 = rng() % 32;
            mask = (1u << b0) | (1u << b1);
          }
        return bitmapSearchWorkload(bitmap, mask);
      }
    if (o == "max_min")
      {
        auto n = bc.param("n", 256);
        return maxMinWorkload(detail::randomWords(rng, n));
      }
    if (o == "xnor_net")
      {
        auto n = bc.param("n", 64);
        auto wts = detail::randomWords(rng, n);
        auto acts = detail::randomWords(rng, n);
        return xnorNetWorkload(wts, acts);
      }
    throw std::invalid_argument(bc.name + ": unknown oracle '" + o + "'");
  }

  // ---------------------------------------------------------------------
  // Harness.

  struct RunOptions
  {
    std::uint64_t maxInstructions = 100'000'000;
    std::uint64_t memBytes = LimMemory::defaultSize;
    bool strictLim = false;
    TimingModel timing{};
    Cpu::TraceSink trace;
  };

  struct CaseResult
  {
    std::string benchmark;
    Variant variant = Variant::Base;
    bool passed = false;
    std::vector<std::string> failures;
    RunResult run;
    std::string output;
    AccessCounts expected;
    AccessCounts measured;
  };

  /// Assemble one variant with the workload's data, run it, and verify the
  /// exit status, the printed verdict, every checked region and the exact
  /// access counts.
  inline CaseResult
  runProgram(const std::string& name, Variant variant, const std::string& source,
             const Workload& work, const RunOptions& opts = {})
  {
    CaseResult res;
    res.benchmark = name;
    res.variant = variant;
    res.expected = work.counts(variant);

    ProgramImage image;
    try
      {
        image = assemble(source + "\n" + work.dataAsm);
      }
    catch (const AsmError& e)
      {
        res.failures.push_back(std::string("assembly failed: ") + e.what());
        return res;
      }

    LimMemory mem(opts.memBytes, opts.strictLim);
    std::ostringstream out;
    Cpu cpu(mem, opts.timing, &out, &out);
    reset(cpu, loadImage(image, mem));
    if (opts.trace)
      cpu.setTraceSink(opts.trace);
    res.run = cpu.run(opts.maxInstructions);
    res.output = out.str();
    res.measured = AccessCounts::of(res.run.stats.mem);

    if (res.run.halt.kind != HaltReason::Kind::Exit or res.run.halt.exitCode != 0)
      res.failures.push_back("did not exit cleanly: " + limsim::describe(res.run.halt));
    if (res.output != "PASS\n")
      res.failures.push_back("self-check printed '" + res.output + "'");
    for (const auto& check : work.checks)
      {
        auto it = image.symbols.find(check.symbol);
        if (it == image.symbols.end())
          {
            res.failures.push_back("no symbol " + check.symbol);
            continue;
          }
        auto view = mem.snapshot(it->second, it->second + 4 * static_cast<std::uint32_t>(check.expected.size()));
        for (std::size_t i = 0; i < view.size(); ++i)
          if (view[i].word != check.expected[i])
            {
              res.failures.push_back(check.symbol + "[" + std::to_string(i) + "] = " +
                                     limsim::detail::hex8(view[i].word) + ", reference says " +
                                     limsim::detail::hex8(check.expected[i]));
              break;
            }
      }
    if (res.measured != res.expected)
      res.failures.push_back("access counts " + describe(res.measured) + " differ from derived " +
                             describe(res.expected));
    res.passed = res.failures.empty();
    return res;
  }

  inline CaseResult
  runCase(const BenchmarkCase& bc, Variant variant, const RunOptions& opts = {})
  {
    const auto& path = variant == Variant::Lim ? bc.limSource : bc.baseSource;
    if (not path)
      throw std::invalid_argument(bc.name + " has no " + std::string(variantName(variant)) + " variant");
    return runProgram(bc.name, variant, readTextFile(*path), makeWorkload(bc), opts);
  }

  /// Run every variant of every case on up to jobs worker threads. Results
  /// are ordered by benchmark name, then variant.
  inline std::vector<CaseResult>
  runSuite(const std::vector<BenchmarkCase>& cases, unsigned jobs = 1, const RunOptions& opts = {})
  {
    struct Task { const BenchmarkCase* bc; Variant v; };
    std::vector<Task> tasks;
    for (const auto& bc : cases)
      for (auto v : bc.variants())
        tasks.push_back({&bc, v});

    auto runTask = [&](const Task& t) {
      try
        {
          return runCase(*t.bc, t.v, opts);
        }
      catch (const std::exception& e)
        {
          CaseResult r;
          r.benchmark = t.bc->name;
          r.variant = t.v;
          r.failures.push_back(e.what());
          return r;
        }
    };

    std::vector<CaseResult> results(tasks.size());
    jobs = std::max(1u, jobs);
    for (std::size_t start = 0; start < tasks.size(); start += jobs)
      {
        std::vector<std::future<CaseResult>> batch;
        for (std::size_t i = start; i < std::min(tasks.size(), start + jobs); ++i)
          batch.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async, runTask, tasks[i]));
        for (std::size_t i = 0; i < batch.size(); ++i)
          results[start + i] = batch[i].get();
      }

    std::stable_sort(results.begin(), results.end(), [](const CaseResult& a, const CaseResult& b) {
      if (a.benchmark != b.benchmark)
        return a.benchmark < b.benchmark;
      return a.variant < b.variant;
    });
    return results;
  }

  /// Fixed-width report table, one row per variant.
  inline std::string
  formatTable(const std::vector<CaseResult>& results)
  {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-16s %-7s %12s %12s %14s %12s %s\n",
                  "benchmark", "variant", "instret", "cycles", "data_accesses", "wall_s", "result");
    out += buf;
    for (const auto& r : results)
      {
        std::snprintf(buf, sizeof(buf), "%-16s %-7s %12llu %12llu %14llu %12.6f %s\n",
                      r.benchmark.c_str(), std::string(variantName(r.variant)).c_str(),
                      static_cast<unsigned long long>(r.run.stats.instret),
                      static_cast<unsigned long long>(r.run.stats.cycles),
                      static_cast<unsigned long long>(r.measured.dataAccesses()),
                      r.run.stats.wallSeconds, r.passed ? "pass" : "fail");
        out += buf;
      }
    return out;
  }

} // namespace limsim::bench
