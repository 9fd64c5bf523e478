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
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>

namespace limsim
{

  /// Activation state of a logic-in-memory cell, and the operation selector
  /// carried by the LiM instructions. The enumerator values are the 3-bit
  /// wire encoding placed in funct3; 7 is reserved.
  enum class MemOpCode : std::uint8_t
  {
    None = 0,
    And  = 1,
    Or   = 2,
    Xor  = 3,
    Nand = 4,
    Nor  = 5,
    Xnor = 6,
  };

  inline constexpr std::array<MemOpCode, 7> allMemOps = {
    MemOpCode::None, MemOpCode::And, MemOpCode::Or, MemOpCode::Xor,
    MemOpCode::Nand, MemOpCode::Nor, MemOpCode::Xnor,
  };

  /// The six ops that actually compute something.
  inline constexpr std::array<MemOpCode, 6> logicMemOps = {
    MemOpCode::And, MemOpCode::Or, MemOpCode::Xor,
    MemOpCode::Nand, MemOpCode::Nor, MemOpCode::Xnor,
  };

  constexpr std::uint32_t
  encodeMemOp(MemOpCode op)
  {
    return static_cast<std::uint32_t>(op);
  }

  /// Decode a 3-bit field. Returns nullopt for the reserved value 7.
  constexpr std::optional<MemOpCode>
  decodeMemOp(std::uint32_t bits)
  {
    if (bits > 6)
      return std::nullopt;
    return static_cast<MemOpCode>(bits);
  }

  constexpr std::string_view
  memOpName(MemOpCode op)
  {
    switch (op)
      {
      case MemOpCode::None: return "none";
      case MemOpCode::And:  return "and";
      case MemOpCode::Or:   return "or";
      case MemOpCode::Xor:  return "xor";
      case MemOpCode::Nand: return "nand";
      case MemOpCode::Nor:  return "nor";
      case MemOpCode::Xnor: return "xnor";
      }
    return "?";
  }

  constexpr std::optional<MemOpCode>
  parseMemOp(std::string_view name)
  {
    for (auto op : allMemOps)
      if (memOpName(op) == name)
        return op;
    return std::nullopt;
  }

  /// Combine a stored cell value with incoming data. NONE has no logic
  /// meaning (plain store / plain load) and callers must handle it before
  /// getting here.
  constexpr std::uint32_t
  applyMemOp(MemOpCode op, std::uint32_t a, std::uint32_t b)
  {
    switch (op)
      {
      case MemOpCode::And:  return a & b;
      case MemOpCode::Or:   return a | b;
      case MemOpCode::Xor:  return a ^ b;
      case MemOpCode::Nand: return ~(a & b);
      case MemOpCode::Nor:  return ~(a | b);
      case MemOpCode::Xnor: return ~(a ^ b);
      case MemOpCode::None: break;
      }
    throw std::invalid_argument("applyMemOp: NONE is not a logic operation");
  }

} // namespace limsim
