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
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "limsim/disasm.hpp"
#include "limsim/isa.hpp"
#include "limsim/memory.hpp"

namespace limsim
{

  /// Per-instruction cycle costs. Each instruction costs base plus the
  /// extra for its class. The defaults are uncalibrated placeholders.
  struct TimingModel
  {
    std::uint32_t base = 1;
    std::uint32_t load = 1;
    std::uint32_t store = 1;
    std::uint32_t limActivate = 1;
    std::uint32_t limLoadMask = 1;
    std::uint32_t mul = 3;
    std::uint32_t div = 32;

    std::uint64_t cost(Opcode op) const
    {
      std::uint64_t c = base;
      if (isLoad(op))
        c += load;
      else if (isStore(op))
        c += store;
      else if (op == Opcode::LimActive)
        c += limActivate;
      else if (op == Opcode::LimLoadMask)
        c += limLoadMask;
      else if (isMul(op))
        c += mul;
      else if (isDiv(op))
        c += div;
      return c;
    }

    /// Set a field by its config-file name. Returns false for unknown keys.
    bool set(std::string_view key, std::uint32_t value)
    {
      if (key == "base") base = value;
      else if (key == "load") load = value;
      else if (key == "store") store = value;
      else if (key == "lim_activate") limActivate = value;
      else if (key == "lim_loadmask") limLoadMask = value;
      else if (key == "mul") mul = value;
      else if (key == "div") div = value;
      else return false;
      return true;
    }
  };

  struct CpuState
  {
    std::array<std::uint32_t, 32> regs{};
    std::uint32_t pc = 0;
    std::uint64_t cycles = 0;
    std::uint64_t instret = 0;

    std::uint32_t reg(Reg r) const { return regs[r.index()]; }
    void setReg(Reg r, std::uint32_t v) { if (r.index() != 0) regs[r.index()] = v; }
  };

  enum class MemEffectKind : std::uint8_t { Read, Write, LogicWrite, LoadMask, Activate };

  constexpr std::string_view
  memEffectTag(MemEffectKind k)
  {
    switch (k)
      {
      case MemEffectKind::Read:       return "R";
      case MemEffectKind::Write:      return "W";
      case MemEffectKind::LogicWrite: return "LW";
      case MemEffectKind::LoadMask:   return "LM";
      case MemEffectKind::Activate:   return "ACT";
      }
    return "?";
  }

  /// One line of the instruction log.
  struct TraceRecord
  {
    struct RegWrite { unsigned index; std::uint32_t value; };
    /// data is the loaded value for reads and load-masks, the store data
    /// for writes, and the range in words for activations.
    struct MemEffect { MemEffectKind kind; std::uint32_t addr; std::uint32_t data; };

    std::uint64_t cycle = 0;
    std::uint32_t pc = 0;
    std::uint32_t raw = 0;
    std::string text;
    std::optional<RegWrite> rd;
    std::optional<MemEffect> mem;
  };

  /// cycle=<u64> pc=<hex8> insn=<hex8> <disassembly> [rd=x<N>:<hex8>] [mem=<kind>:<hex8>:<hex8>]
  inline std::string
  formatTrace(const TraceRecord& rec)
  {
    std::string line = "cycle=" + std::to_string(rec.cycle) + " pc=" + detail::hex8(rec.pc, false) +
                       " insn=" + detail::hex8(rec.raw, false) + " " + rec.text;
    if (rec.rd)
      line += " rd=x" + std::to_string(rec.rd->index) + ":" + detail::hex8(rec.rd->value, false);
    if (rec.mem)
      line += " mem=" + std::string(memEffectTag(rec.mem->kind)) + ":" +
              detail::hex8(rec.mem->addr, false) + ":" + detail::hex8(rec.mem->data, false);
    return line;
  }

  struct HaltReason
  {
    enum class Kind : std::uint8_t { Exit, Fault, InstructionLimit, IllegalInstruction };

    Kind kind = Kind::Exit;
    std::int32_t exitCode = 0;
    std::optional<Fault> fault;
    std::uint32_t pc = 0;
    std::uint32_t word = 0;

    static HaltReason exit(std::int32_t code) { return {Kind::Exit, code, std::nullopt, 0, 0}; }
    static HaltReason faulted(Fault f, std::uint32_t pc) { return {Kind::Fault, 0, std::move(f), pc, 0}; }
    static HaltReason limit() { return {Kind::InstructionLimit, 0, std::nullopt, 0, 0}; }
    static HaltReason illegal(std::uint32_t pc, std::uint32_t word) { return {Kind::IllegalInstruction, 0, std::nullopt, pc, word}; }

    bool operator==(const HaltReason&) const = default;
  };

  constexpr std::string_view
  haltKindName(HaltReason::Kind k)
  {
    switch (k)
      {
      case HaltReason::Kind::Exit:               return "exit";
      case HaltReason::Kind::Fault:              return "fault";
      case HaltReason::Kind::InstructionLimit:   return "instruction_limit";
      case HaltReason::Kind::IllegalInstruction: return "illegal_instruction";
      }
    return "?";
  }

  inline std::string
  describe(const HaltReason& h)
  {
    switch (h.kind)
      {
      case HaltReason::Kind::Exit:
        return "exit " + std::to_string(h.exitCode);
      case HaltReason::Kind::Fault:
        return std::string(faultKindName(h.fault->kind)) + " at pc " + detail::hex8(h.pc) +
               " addr " + detail::hex8(h.fault->addr) + ": " + h.fault->message;
      case HaltReason::Kind::InstructionLimit:
        return "instruction limit reached";
      case HaltReason::Kind::IllegalInstruction:
        return "illegal instruction " + detail::hex8(h.word) + " at pc " + detail::hex8(h.pc);
      }
    return {};
  }

  struct RunStats
  {
    std::uint64_t instret = 0;
    std::uint64_t cycles = 0;
    MemStats mem;
    std::uint64_t nonzeroImmLogicStores = 0;
    double wallSeconds = 0;
  };

  struct RunResult
  {
    HaltReason halt;
    RunStats stats;
  };

  enum class Counter : std::uint8_t { Cycle, Instret };

  /// In-order RV32IM interpreter with the LiM extension. One instruction per
  /// step, all memory traffic through LimMemory packets.
  class Cpu
  {
  public:
    using TraceSink = std::function<void(const TraceRecord&)>;

    explicit Cpu(LimMemory& memory, TimingModel timing = {},
                 std::ostream* out = nullptr, std::ostream* err = nullptr)
      : mem_(memory), timing_(timing), out_(out), err_(err)
    { }

    CpuState& state() { return state_; }
    const CpuState& state() const { return state_; }
    LimMemory& memory() { return mem_; }
    const TimingModel& timing() const { return timing_; }

    void setTraceSink(TraceSink sink) { trace_ = std::move(sink); }

    std::uint64_t nonzeroImmLogicStores() const { return nonzeroImmLogicStores_; }

    std::uint64_t readCounter(Counter which) const
    {
      return which == Counter::Cycle ? state_.cycles : state_.instret;
    }

    /// Execute one instruction. Returns a halt reason when execution must
    /// stop; a faulting or illegal instruction does not retire.
    std::optional<HaltReason> step()
    {
      const std::uint32_t pc = state_.pc;
      MemResponse fetched = mem_.fetch(pc);
      if (not fetched.ok())
        return HaltReason::faulted(*fetched.fault, pc);

      const Instruction inst = decode(fetched.data);
      if (not inst.isLegal())
        return HaltReason::illegal(pc, fetched.data);

      TraceRecord rec;
      std::optional<HaltReason> halt;
      std::uint32_t nextPc = pc + 4;

      const std::uint32_t a = state_.reg(inst.rs1);
      const std::uint32_t b = state_.reg(inst.rs2);
      const auto sa = static_cast<std::int32_t>(a);
      const auto sb = static_cast<std::int32_t>(b);
      const auto uimm = static_cast<std::uint32_t>(inst.imm);
      std::optional<std::uint32_t> result;

      auto memFault = [&](const MemResponse& r) -> std::optional<HaltReason> {
        if (r.ok())
          return std::nullopt;
        return HaltReason::faulted(*r.fault, pc);
      };

      auto takeBranch = [&](bool cond) {
        if (cond)
          nextPc = pc + uimm;
      };

      using MK = MemRequest::Kind;

      switch (inst.op)
        {
        case Opcode::Lui:   result = uimm; break;
        case Opcode::Auipc: result = pc + uimm; break;
        case Opcode::Jal:
          result = pc + 4;
          nextPc = pc + uimm;
          break;
        case Opcode::Jalr:
          result = pc + 4;
          nextPc = (a + uimm) & ~1u;
          break;

        case Opcode::Beq:  takeBranch(a == b); break;
        case Opcode::Bne:  takeBranch(a != b); break;
        case Opcode::Blt:  takeBranch(sa < sb); break;
        case Opcode::Bge:  takeBranch(sa >= sb); break;
        case Opcode::Bltu: takeBranch(a < b); break;
        case Opcode::Bgeu: takeBranch(a >= b); break;

        case Opcode::Lb: case Opcode::Lh: case Opcode::Lw:
        case Opcode::Lbu: case Opcode::Lhu:
          {
            MK kind = (inst.op == Opcode::Lw) ? MK::ReadWord
                    : (inst.op == Opcode::Lh or inst.op == Opcode::Lhu) ? MK::ReadHalf
                    : MK::ReadByte;
            std::uint32_t addr = a + uimm;
            MemResponse r = mem_.handle(MemRequest::read(kind, addr));
            if (auto f = memFault(r))
              return f;
            std::uint32_t v = r.data;
            if (inst.op == Opcode::Lb)
              v = static_cast<std::uint32_t>(detail::signExtend(v, 8));
            else if (inst.op == Opcode::Lh)
              v = static_cast<std::uint32_t>(detail::signExtend(v, 16));
            result = v;
            rec.mem = TraceRecord::MemEffect{MemEffectKind::Read, addr, r.data};
            break;
          }

        case Opcode::Sb: case Opcode::Sh: case Opcode::Sw:
          {
            MK kind = inst.op == Opcode::Sw ? MK::WriteWord : inst.op == Opcode::Sh ? MK::WriteHalf : MK::WriteByte;
            std::uint32_t data = inst.op == Opcode::Sw ? b : inst.op == Opcode::Sh ? (b & 0xffff) : (b & 0xff);
            std::uint32_t addr = a + uimm;
            MemResponse r = mem_.handle(MemRequest::write(kind, addr, data));
            if (auto f = memFault(r))
              return f;
            if (r.logicStore and inst.imm != 0)
              ++nonzeroImmLogicStores_;
            rec.mem = TraceRecord::MemEffect{r.logicStore ? MemEffectKind::LogicWrite : MemEffectKind::Write, addr, data};
            break;
          }

        case Opcode::Addi:  result = a + uimm; break;
        case Opcode::Slti:  result = sa < inst.imm ? 1 : 0; break;
        case Opcode::Sltiu: result = a < uimm ? 1 : 0; break;
        case Opcode::Xori:  result = a ^ uimm; break;
        case Opcode::Ori:   result = a | uimm; break;
        case Opcode::Andi:  result = a & uimm; break;
        case Opcode::Slli:  result = a << (uimm & 31); break;
        case Opcode::Srli:  result = a >> (uimm & 31); break;
        case Opcode::Srai:  result = static_cast<std::uint32_t>(sa >> (uimm & 31)); break;

        case Opcode::Add:  result = a + b; break;
        case Opcode::Sub:  result = a - b; break;
        case Opcode::Sll:  result = a << (b & 31); break;
        case Opcode::Slt:  result = sa < sb ? 1 : 0; break;
        case Opcode::Sltu: result = a < b ? 1 : 0; break;
        case Opcode::Xor:  result = a ^ b; break;
        case Opcode::Srl:  result = a >> (b & 31); break;
        case Opcode::Sra:  result = static_cast<std::uint32_t>(sa >> (b & 31)); break;
        case Opcode::Or:   result = a | b; break;
        case Opcode::And:  result = a & b; break;

        case Opcode::Mul:
          result = a * b;
          break;
        case Opcode::Mulh:
          result = static_cast<std::uint32_t>((std::int64_t(sa) * std::int64_t(sb)) >> 32);
          break;
        case Opcode::Mulhsu:
          result = static_cast<std::uint32_t>((std::int64_t(sa) * std::int64_t(std::uint64_t(b))) >> 32);
          break;
        case Opcode::Mulhu:
          result = static_cast<std::uint32_t>((std::uint64_t(a) * std::uint64_t(b)) >> 32);
          break;
        case Opcode::Div:
          if (b == 0)
            result = 0xffffffffu;
          else if (a == 0x80000000u and sb == -1)
            result = a;
          else
            result = static_cast<std::uint32_t>(sa / sb);
          break;
        case Opcode::Divu:
          result = b == 0 ? 0xffffffffu : a / b;
          break;
        case Opcode::Rem:
          if (b == 0)
            result = a;
          else if (a == 0x80000000u and sb == -1)
            result = 0;
          else
            result = static_cast<std::uint32_t>(sa % sb);
          break;
        case Opcode::Remu:
          result = b == 0 ? a : a % b;
          break;

        case Opcode::Fence:
          break;
        case Opcode::Ecall:
          halt = ecallDispatch();
          if (halt and halt->kind == HaltReason::Kind::Fault)
            {
              halt->pc = pc;
              return halt;
            }
          if (not halt)
            rec.rd = TraceRecord::RegWrite{reg::a0.index(), state_.reg(reg::a0)};
          break;
        case Opcode::Ebreak:
          return HaltReason::faulted(Fault{FaultKind::Breakpoint, pc, "ebreak"}, pc);

        case Opcode::Rdcycle:    result = static_cast<std::uint32_t>(state_.cycles); break;
        case Opcode::Rdcycleh:   result = static_cast<std::uint32_t>(state_.cycles >> 32); break;
        case Opcode::Rdinstret:  result = static_cast<std::uint32_t>(state_.instret); break;
        case Opcode::Rdinstreth: result = static_cast<std::uint32_t>(state_.instret >> 32); break;

        case Opcode::LimActive:
          {
            MemResponse r = mem_.handle(MemRequest::activate(a, b, inst.memOp));
            if (auto f = memFault(r))
              return f;
            rec.mem = TraceRecord::MemEffect{MemEffectKind::Activate, a, b};
            break;
          }
        case Opcode::LimLoadMask:
          {
            MemResponse r = mem_.handle(MemRequest::loadMask(a, b, inst.memOp));
            if (auto f = memFault(r))
              return f;
            result = r.data;
            rec.mem = TraceRecord::MemEffect{MemEffectKind::LoadMask, a, r.data};
            break;
          }

        case Opcode::Illegal:
          return HaltReason::illegal(pc, fetched.data);
        }

      if (nextPc & 3)
        return HaltReason::faulted(Fault{FaultKind::MisalignedFetch, nextPc,
                                         "jump target is not word-aligned"}, pc);

      // Retire.
      if (trace_)
        {
          rec.cycle = state_.cycles;
          rec.pc = pc;
          rec.raw = fetched.data;
          rec.text = disassemble(inst);
          if (result and inst.rd.index() != 0)
            rec.rd = TraceRecord::RegWrite{inst.rd.index(), *result};
        }
      if (result)
        state_.setReg(inst.rd, *result);
      state_.pc = nextPc;
      state_.cycles += timing_.cost(inst.op);
      ++state_.instret;
      if (trace_)
        trace_(rec);
      return halt;
    }

    /// Step until a halt or until maxInstructions have retired.
    RunResult run(std::uint64_t maxInstructions)
    {
      auto start = std::chrono::steady_clock::now();
      std::optional<HaltReason> halt;
      while (not halt)
        {
          if (state_.instret >= maxInstructions)
            {
              halt = HaltReason::limit();
              break;
            }
          halt = step();
        }
      auto stop = std::chrono::steady_clock::now();

      RunResult res;
      res.halt = *halt;
      res.stats.instret = state_.instret;
      res.stats.cycles = state_.cycles;
      res.stats.mem = mem_.stats();
      res.stats.nonzeroImmLogicStores = nonzeroImmLogicStores_;
      res.stats.wallSeconds = std::chrono::duration<double>(stop - start).count();
      return res;
    }

    /// Environment call: a7 selects. 93 exits with a0, 64 writes a2 bytes
    /// from a1 to fd a0 (1 or 2) and returns the count in a0.
    std::optional<HaltReason> ecallDispatch()
    {
      const std::uint32_t a0 = state_.reg(reg::a0);
      const std::uint32_t a1 = state_.reg(reg::a1);
      const std::uint32_t a2 = state_.reg(reg::a2);
      const std::uint32_t a7 = state_.reg(reg::a7);

      switch (a7)
        {
        case 93:
          return HaltReason::exit(static_cast<std::int32_t>(a0));
        case 64:
          {
            if (a0 != 1 and a0 != 2)
              return HaltReason::faulted(Fault{FaultKind::BadFileDescriptor, a0,
                                               "write to unsupported file descriptor"}, state_.pc);
            auto bytes = mem_.peekBytes(a1, a2);
            if (not bytes)
              return HaltReason::faulted(Fault{FaultKind::OutOfBounds, a1,
                                               "write buffer outside memory"}, state_.pc);
            std::ostream* os = (a0 == 1) ? out_ : err_;
            if (os)
              os->write(bytes->data(), static_cast<std::streamsize>(bytes->size()));
            state_.setReg(reg::a0, a2);
            return std::nullopt;
          }
        default:
          return HaltReason::faulted(Fault{FaultKind::UnsupportedSyscall, a7,
                                           "unsupported syscall " + std::to_string(a7)}, state_.pc);
        }
    }

  private:
    LimMemory& mem_;
    TimingModel timing_;
    std::ostream* out_ = nullptr;
    std::ostream* err_ = nullptr;
    CpuState state_;
    TraceSink trace_;
    std::uint64_t nonzeroImmLogicStores_ = 0;
  };

} // namespace limsim
