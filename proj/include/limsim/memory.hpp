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

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "limsim/mem_op.hpp"

namespace limsim
{

  enum class FaultKind : std::uint8_t
  {
    OutOfBounds,
    MisalignedWordAccess,
    MisalignedHalfAccess,
    MisalignedActivation,
    MisalignedFetch,
    SubWordLogicStore,
    LoadMaskStateMismatch,
    UnsupportedSyscall,
    BadFileDescriptor,
    Breakpoint,
  };

  constexpr std::string_view
  faultKindName(FaultKind kind)
  {
    switch (kind)
      {
      case FaultKind::OutOfBounds:           return "OutOfBounds";
      case FaultKind::MisalignedWordAccess:  return "MisalignedWordAccess";
      case FaultKind::MisalignedHalfAccess:  return "MisalignedHalfAccess";
      case FaultKind::MisalignedActivation:  return "MisalignedActivation";
      case FaultKind::MisalignedFetch:       return "MisalignedFetch";
      case FaultKind::SubWordLogicStore:     return "SubWordLogicStore";
      case FaultKind::LoadMaskStateMismatch: return "LoadMaskStateMismatch";
      case FaultKind::UnsupportedSyscall:    return "UnsupportedSyscall";
      case FaultKind::BadFileDescriptor:     return "BadFileDescriptor";
      case FaultKind::Breakpoint:            return "Breakpoint";
      }
    return "?";
  }

  struct Fault
  {
    FaultKind kind;
    std::uint32_t addr = 0;
    std::string message;

    bool operator==(const Fault&) const = default;
  };

  /// Packet sent from the CPU to the memory controller.
  struct MemRequest
  {
    enum class Kind : std::uint8_t
    {
      ReadWord, ReadHalf, ReadByte,
      WriteWord, WriteHalf, WriteByte,
      Activate, LoadMask,
    };

    Kind kind = Kind::ReadWord;
    std::uint32_t addr = 0;
    std::uint32_t data = 0;     // write data, mask, or activation range in words
    MemOpCode memOp = MemOpCode::None;

    static MemRequest read(Kind k, std::uint32_t addr) { return {k, addr, 0, MemOpCode::None}; }
    static MemRequest write(Kind k, std::uint32_t addr, std::uint32_t data) { return {k, addr, data, MemOpCode::None}; }
    static MemRequest activate(std::uint32_t addr, std::uint32_t words, MemOpCode op) { return {Kind::Activate, addr, words, op}; }
    static MemRequest loadMask(std::uint32_t addr, std::uint32_t mask, MemOpCode op) { return {Kind::LoadMask, addr, mask, op}; }
  };

  struct MemResponse
  {
    std::uint32_t data = 0;
    std::optional<Fault> fault;
    bool logicStore = false;    // a WriteWord was combined by an activated cell

    bool ok() const { return not fault.has_value(); }

    static MemResponse failure(FaultKind kind, std::uint32_t addr, std::string msg)
    {
      MemResponse r;
      r.fault = Fault{kind, addr, std::move(msg)};
      return r;
    }
  };

  struct MemStats
  {
    std::uint64_t plainReads = 0;
    std::uint64_t plainWrites = 0;
    std::uint64_t logicStores = 0;
    std::uint64_t loadMasks = 0;
    std::uint64_t activations = 0;
    std::uint64_t activatedCellsCurrent = 0;
    std::uint64_t activatedCellsPeak = 0;
    std::uint64_t fetches = 0;   // instruction traffic, kept apart from data accesses

    std::uint64_t dataAccesses() const { return plainReads + plainWrites + logicStores + loadMasks; }

    bool operator==(const MemStats&) const = default;
  };

  struct CellView
  {
    std::uint32_t addr;
    std::uint32_t word;
    MemOpCode state;

    bool operator==(const CellView&) const = default;
  };

  /// Flat, little-endian, zero-initialized memory where every 32-bit word is
  /// a logic-in-memory cell. Cell states are sparse: an absent entry is NONE.
  class LimMemory
  {
  public:
    static constexpr std::uint64_t defaultSize = 16u << 20;

    explicit LimMemory(std::uint64_t sizeBytes = defaultSize, bool strictLim = false)
      : strict_(strictLim)
    {
      if (sizeBytes < 4 or (sizeBytes & (sizeBytes - 1)) != 0 or sizeBytes > (std::uint64_t(1) << 32))
        throw std::invalid_argument("memory size must be a power of two between 4 bytes and 4 GiB");
      data_.assign(sizeBytes, 0);
    }

    std::uint64_t size() const { return data_.size(); }
    bool strictLim() const { return strict_; }
    const MemStats& stats() const { return stats_; }

    MemOpCode cellState(std::uint32_t addr) const
    {
      auto it = cells_.find(addr & ~3u);
      return it == cells_.end() ? MemOpCode::None : it->second;
    }

    std::size_t activatedCells() const { return cells_.size(); }

    /// Dispatch one packet. Exactly one stats counter moves per request
    /// that does not fault.
    MemResponse handle(const MemRequest& req)
    {
      using K = MemRequest::Kind;
      switch (req.kind)
        {
        case K::ReadWord:
        case K::ReadHalf:
        case K::ReadByte:
          return read(req);
        case K::WriteWord:
          return writeWord(req.addr, req.data);
        case K::WriteHalf:
        case K::WriteByte:
          return writeSubWord(req);
        case K::Activate:
          return activate(req.addr, req.data, req.memOp);
        case K::LoadMask:
          return loadMask(req.addr, req.data, req.memOp);
        }
      return MemResponse::failure(FaultKind::OutOfBounds, req.addr, "unknown request kind");
    }

    /// Set the state of rangeWords consecutive cells starting at baseAddr.
    MemResponse activate(std::uint32_t baseAddr, std::uint32_t rangeWords, MemOpCode op)
    {
      if (baseAddr & 3)
        return MemResponse::failure(FaultKind::MisalignedActivation, baseAddr,
                                    "activation base is not word-aligned");
      std::uint64_t end = std::uint64_t(baseAddr) + 4 * std::uint64_t(rangeWords);
      if (end > size())
        return MemResponse::failure(FaultKind::OutOfBounds, baseAddr,
                                    "activation range exceeds memory");

      for (std::uint64_t a = baseAddr; a < end; a += 4)
        {
          auto addr = static_cast<std::uint32_t>(a);
          if (op == MemOpCode::None)
            cells_.erase(addr);
          else
            cells_.insert_or_assign(addr, op);
        }
      ++stats_.activations;
      stats_.activatedCellsCurrent = cells_.size();
      stats_.activatedCellsPeak = std::max(stats_.activatedCellsPeak, stats_.activatedCellsCurrent);
      return {};
    }

    /// Instruction fetch. Bypasses the data counters.
    MemResponse fetch(std::uint32_t addr)
    {
      if (addr & 3)
        return MemResponse::failure(FaultKind::MisalignedFetch, addr, "fetch address is not word-aligned");
      if (not inBounds(addr, 4))
        return MemResponse::failure(FaultKind::OutOfBounds, addr, "fetch outside memory");
      ++stats_.fetches;
      MemResponse r;
      r.data = rawWord(addr);
      return r;
    }

    /// Word-aligned view over [begin, end). No counters change.
    std::vector<CellView> snapshot(std::uint32_t begin, std::uint32_t end) const
    {
      if ((begin & 3) or (end & 3) or end < begin or end > size())
        throw std::out_of_range("snapshot range out of bounds or misaligned");
      std::vector<CellView> out;
      out.reserve((end - begin) / 4);
      for (std::uint64_t a = begin; a < end; a += 4)
        {
          auto addr = static_cast<std::uint32_t>(a);
          out.push_back({addr, rawWord(addr), cellState(addr)});
        }
      return out;
    }

    /// Program installation path: copies bytes without touching stats or
    /// cell states.
    void install(std::uint32_t addr, std::span<const std::uint8_t> bytes)
    {
      if (not inBounds(addr, bytes.size()))
        throw std::out_of_range("install outside memory");
      std::copy(bytes.begin(), bytes.end(), data_.begin() + addr);
    }

    void installZeros(std::uint32_t addr, std::uint64_t count)
    {
      if (not inBounds(addr, count))
        throw std::out_of_range("install outside memory");
      std::fill_n(data_.begin() + addr, count, std::uint8_t(0));
    }

    /// Uncounted byte read used by the environment-call layer.
    std::optional<std::string> peekBytes(std::uint32_t addr, std::uint32_t count) const
    {
      if (not inBounds(addr, count))
        return std::nullopt;
      return std::string(reinterpret_cast<const char*>(data_.data()) + addr, count);
    }

    /// Uncounted word read for tests and tools.
    std::uint32_t peekWord(std::uint32_t addr) const
    {
      if ((addr & 3) or not inBounds(addr, 4))
        throw std::out_of_range("peekWord: bad address");
      return rawWord(addr);
    }

    bool inBounds(std::uint64_t addr, std::uint64_t len) const
    {
      return addr <= size() and len <= size() - addr;
    }

  private:
    std::uint32_t rawWord(std::uint32_t addr) const
    {
      std::uint32_t v;
      std::memcpy(&v, data_.data() + addr, 4);
      return v;   // host is little-endian
    }

    void storeRaw(std::uint32_t addr, std::uint32_t value, unsigned bytes)
    {
      for (unsigned i = 0; i < bytes; ++i)
        data_[addr + i] = static_cast<std::uint8_t>(value >> (8 * i));
    }

    static unsigned widthOf(MemRequest::Kind k)
    {
      using K = MemRequest::Kind;
      switch (k)
        {
        case K::ReadWord: case K::WriteWord: case K::LoadMask: return 4;
        case K::ReadHalf: case K::WriteHalf: return 2;
        default: return 1;
        }
    }

    std::optional<MemResponse> checkAccess(std::uint32_t addr, unsigned width) const
    {
      if (width == 4 and (addr & 3))
        return MemResponse::failure(FaultKind::MisalignedWordAccess, addr, "misaligned word access");
      if (width == 2 and (addr & 1))
        return MemResponse::failure(FaultKind::MisalignedHalfAccess, addr, "misaligned halfword access");
      if (not inBounds(addr, width))
        return MemResponse::failure(FaultKind::OutOfBounds, addr, "access outside memory");
      return std::nullopt;
    }

    MemResponse read(const MemRequest& req)
    {
      unsigned width = widthOf(req.kind);
      if (auto f = checkAccess(req.addr, width))
        return *f;
      MemResponse r;
      for (unsigned i = 0; i < width; ++i)
        r.data |= std::uint32_t(data_[req.addr + i]) << (8 * i);
      ++stats_.plainReads;
      return r;
    }

    MemResponse writeWord(std::uint32_t addr, std::uint32_t value)
    {
      if (auto f = checkAccess(addr, 4))
        return *f;
      MemResponse r;
      MemOpCode state = cellState(addr);
      if (state == MemOpCode::None)
        {
          storeRaw(addr, value, 4);
          ++stats_.plainWrites;
        }
      else
        {
          storeRaw(addr, applyMemOp(state, rawWord(addr), value), 4);
          ++stats_.logicStores;
          r.logicStore = true;
        }
      return r;
    }

    MemResponse writeSubWord(const MemRequest& req)
    {
      unsigned width = widthOf(req.kind);
      if (auto f = checkAccess(req.addr, width))
        return *f;
      if (cellState(req.addr) != MemOpCode::None)
        return MemResponse::failure(FaultKind::SubWordLogicStore, req.addr,
                                    "sub-word store into an activated cell");
      storeRaw(req.addr, req.data, width);
      ++stats_.plainWrites;
      return {};
    }

    MemResponse loadMask(std::uint32_t addr, std::uint32_t mask, MemOpCode op)
    {
      if (auto f = checkAccess(addr, 4))
        return *f;
      if (strict_ and cellState(addr) != op)
        return MemResponse::failure(FaultKind::LoadMaskStateMismatch, addr,
                                    "load-mask op does not match the cell's activation state");
      MemResponse r;
      std::uint32_t word = rawWord(addr);
      r.data = (op == MemOpCode::None) ? word : applyMemOp(op, word, mask);
      ++stats_.loadMasks;
      return r;
    }

    std::vector<std::uint8_t> data_;
    std::map<std::uint32_t, MemOpCode> cells_;
    MemStats stats_;
    bool strict_ = false;
  };

} // namespace limsim
