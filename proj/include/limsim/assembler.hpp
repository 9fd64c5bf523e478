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
#include <cctype>
#include <charconv>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "limsim/disasm.hpp"
#include "limsim/isa.hpp"
#include "limsim/mem_op.hpp"

namespace limsim
{

  enum class AsmErrorKind : std::uint8_t
  {
    UndefinedLabel,
    DuplicateLabel,
    BranchOutOfRange,
    BadOperand,
    UnknownMnemonic,
    BadDirective,
    SegmentOverlap,
  };

  constexpr std::string_view
  asmErrorKindName(AsmErrorKind k)
  {
    switch (k)
      {
      case AsmErrorKind::UndefinedLabel:   return "undefined label";
      case AsmErrorKind::DuplicateLabel:   return "duplicate label";
      case AsmErrorKind::BranchOutOfRange: return "branch out of range";
      case AsmErrorKind::BadOperand:       return "bad operand";
      case AsmErrorKind::UnknownMnemonic:  return "unknown mnemonic";
      case AsmErrorKind::BadDirective:     return "bad directive";
      case AsmErrorKind::SegmentOverlap:   return "segment overlap";
      }
    return "error";
  }

  class AsmError : public std::runtime_error
  {
  public:
    AsmError(AsmErrorKind kind, int line, const std::string& detail)
      : std::runtime_error("line " + std::to_string(line) + ": " +
                           std::string(asmErrorKindName(kind)) + ": " + detail),
        kind_(kind), line_(line)
    { }

    AsmErrorKind kind() const { return kind_; }
    int line() const { return line_; }

  private:
    AsmErrorKind kind_;
    int line_;
  };

  struct AsmWarning
  {
    int line;
    std::string message;
  };

  enum class SegmentFlags : std::uint8_t { Rx, Rw };

  struct Segment
  {
    std::uint32_t base = 0;
    std::vector<std::uint8_t> bytes;
    SegmentFlags flags = SegmentFlags::Rx;

    std::uint64_t end() const { return std::uint64_t(base) + bytes.size(); }
    bool operator==(const Segment&) const = default;
  };

  /// Assembled program: non-overlapping segments sorted by address.
  struct ProgramImage
  {
    std::vector<Segment> segments;
    std::uint32_t entry = 0;
    std::map<std::string, std::uint32_t> symbols;

    /// Lowest and one-past-highest address covered by any segment.
    std::pair<std::uint32_t, std::uint64_t> extent() const
    {
      std::uint32_t lo = ~0u;
      std::uint64_t hi = 0;
      for (const auto& s : segments)
        {
          lo = std::min(lo, s.base);
          hi = std::max(hi, s.end());
        }
      return {segments.empty() ? 0 : lo, hi};
    }

    /// Contiguous bytes from the lowest segment base, gaps zero-filled.
    std::vector<std::uint8_t> flatten() const
    {
      auto [lo, hi] = extent();
      std::vector<std::uint8_t> out(segments.empty() ? 0 : hi - lo, 0);
      for (const auto& s : segments)
        std::copy(s.bytes.begin(), s.bytes.end(), out.begin() + (s.base - lo));
      return out;
    }

    /// "<hex8> <name>" per line, ordered by address then name.
    std::string symbolMap() const
    {
      std::vector<std::pair<std::uint32_t, std::string>> v;
      for (const auto& [name, addr] : symbols)
        v.emplace_back(addr, name);
      std::sort(v.begin(), v.end());
      std::string out;
      for (const auto& [addr, name] : v)
        out += detail::hex8(addr, false) + " " + name + "\n";
      return out;
    }

    bool operator==(const ProgramImage&) const = default;
  };

  struct AsmOptions
  {
    std::uint32_t textBase = 0x1000;
    std::uint32_t dataBase = 0x100000;
  };

  namespace detail
  {
    inline std::string_view trim(std::string_view s)
    {
      while (not s.empty() and std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
      while (not s.empty() and std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
      return s;
    }

    inline bool isIdentStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) or c == '_' or c == '.'; }
    inline bool isIdentChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) or c == '_' or c == '.' or c == '$'; }

    inline std::string lower(std::string_view s)
    {
      std::string out(s);
      for (auto& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      return out;
    }

    inline std::optional<Reg> parseReg(std::string_view s)
    {
      static const std::map<std::string, unsigned, std::less<>> abi = {
        {"zero", 0}, {"ra", 1}, {"sp", 2}, {"gp", 3}, {"tp", 4},
        {"t0", 5}, {"t1", 6}, {"t2", 7}, {"s0", 8}, {"fp", 8}, {"s1", 9},
        {"a0", 10}, {"a1", 11}, {"a2", 12}, {"a3", 13}, {"a4", 14}, {"a5", 15},
        {"a6", 16}, {"a7", 17}, {"s2", 18}, {"s3", 19}, {"s4", 20}, {"s5", 21},
        {"s6", 22}, {"s7", 23}, {"s8", 24}, {"s9", 25}, {"s10", 26}, {"s11", 27},
        {"t3", 28}, {"t4", 29}, {"t5", 30}, {"t6", 31},
      };
      s = trim(s);
      if (s.size() >= 2 and s[0] == 'x')
        {
          unsigned n = 0;
          auto [p, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), n);
          if (ec == std::errc() and p == s.data() + s.size() and n < 32)
            return Reg(n);
          return std::nullopt;
        }
      auto it = abi.find(s);
      if (it == abi.end())
        return std::nullopt;
      return Reg(it->second);
    }

    /// Split operands on commas that are outside parentheses and quotes.
    inline std::vector<std::string> splitOperands(std::string_view s)
    {
      std::vector<std::string> out;
      int depth = 0;
      bool quoted = false;
      std::string cur;
      for (std::size_t i = 0; i < s.size(); ++i)
        {
          char c = s[i];
          if (quoted)
            {
              cur += c;
              if (c == '\\' and i + 1 < s.size())
                cur += s[++i];
              else if (c == '"')
                quoted = false;
              continue;
            }
          if (c == '"')
            quoted = true;
          else if (c == '(')
            ++depth;
          else if (c == ')')
            --depth;
          if (c == ',' and depth == 0)
            {
              out.emplace_back(trim(cur));
              cur.clear();
              continue;
            }
          cur += c;
        }
      auto last = trim(cur);
      if (not last.empty() or not out.empty())
        out.emplace_back(last);
      return out;
    }

    /// Position of a '#' comment start outside string literals, or npos.
    inline std::size_t commentStart(std::string_view line)
    {
      bool quoted = false;
      for (std::size_t i = 0; i < line.size(); ++i)
        {
          char c = line[i];
          if (quoted)
            {
              if (c == '\\')
                ++i;
              else if (c == '"')
                quoted = false;
            }
          else if (c == '"')
            quoted = true;
          else if (c == '#')
            return i;
        }
      return std::string_view::npos;
    }

    struct Statement
    {
      int line = 0;
      std::string mnemonic;              // lower-cased; starts with '.' for directives
      std::vector<std::string> operands;
      std::string rest;                  // raw operand text, used by string directives
    };

    struct ParsedSource
    {
      struct LabelDef { int line; std::string name; std::size_t beforeStatement; };
      std::vector<Statement> statements;
      std::vector<LabelDef> labels;
    };

    inline ParsedSource parseSource(std::string_view source)
    {
      ParsedSource out;
      int lineNo = 0;
      std::size_t pos = 0;
      while (pos <= source.size())
        {
          std::size_t nl = source.find('\n', pos);
          if (nl == std::string_view::npos)
            nl = source.size();
          std::string_view line = source.substr(pos, nl - pos);
          pos = nl + 1;
          ++lineNo;

          if (auto c = commentStart(line); c != std::string_view::npos)
            line = line.substr(0, c);
          line = trim(line);

          // Leading labels.
          while (not line.empty() and isIdentStart(line[0]))
            {
              std::size_t i = 1;
              while (i < line.size() and isIdentChar(line[i]))
                ++i;
              if (i < line.size() and line[i] == ':')
                {
                  std::string name(line.substr(0, i));
                  if (name[0] == '.' and name.size() == 1)
                    throw AsmError(AsmErrorKind::BadOperand, lineNo, "bad label");
                  out.labels.push_back({lineNo, name, out.statements.size()});
                  line = trim(line.substr(i + 1));
                }
              else
                break;
            }
          if (line.empty())
            {
              if (pos > source.size())
                break;
              continue;
            }

          Statement st;
          st.line = lineNo;
          std::size_t i = 0;
          while (i < line.size() and not std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
          st.mnemonic = lower(line.substr(0, i));
          st.rest = std::string(trim(line.substr(i)));
          st.operands = splitOperands(st.rest);
          out.statements.push_back(std::move(st));
          if (pos > source.size())
            break;
        }
      return out;
    }

    inline std::optional<std::int64_t> parseNumber(std::string_view s)
    {
      s = trim(s);
      bool neg = false;
      if (not s.empty() and (s[0] == '-' or s[0] == '+'))
        {
          neg = s[0] == '-';
          s.remove_prefix(1);
        }
      if (s.empty())
        return std::nullopt;
      int base = 10;
      if (s.size() > 2 and s[0] == '0' and (s[1] == 'x' or s[1] == 'X'))
        {
          base = 16;
          s.remove_prefix(2);
        }
      else if (s.size() > 2 and s[0] == '0' and (s[1] == 'b' or s[1] == 'B'))
        {
          base = 2;
          s.remove_prefix(2);
        }
      else if (s.size() == 3 and s[0] == '\'' and s[2] == '\'')
        {
          std::int64_t v = static_cast<unsigned char>(s[1]);
          return neg ? -v : v;
        }
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
      if (ec != std::errc() or p != s.data() + s.size() or v > 0xffffffffull)
        return std::nullopt;
      auto sv = static_cast<std::int64_t>(v);
      return neg ? -sv : sv;
    }

    using SymbolLookup = std::function<std::optional<std::int64_t>(const std::string&)>;

    /// Result of evaluating an operand expression.
    struct ExprValue
    {
      std::int64_t value = 0;
      bool usesSymbol = false;
    };

    /// expr := ['-'] term (('+'|'-') term)*
    /// term := number | symbol | %hi(expr) | %lo(expr)
    /// Returns nullopt if a symbol is not (yet) known; throws on syntax errors.
    inline std::optional<ExprValue> evalExpr(std::string_view text, const SymbolLookup& lookup,
                                             int line, std::string* missing = nullptr)
    {
      std::string_view s = trim(text);
      if (s.empty())
        throw AsmError(AsmErrorKind::BadOperand, line, "empty expression");

      ExprValue total;
      bool unknown = false;
      std::size_t i = 0;
      int sign = 1;
      bool expectTerm = true;

      auto skipSpace = [&] {
        while (i < s.size() and std::isspace(static_cast<unsigned char>(s[i])))
          ++i;
      };

      while (true)
        {
          skipSpace();
          if (i >= s.size())
            break;
          if (not expectTerm)
            {
              if (s[i] == '+') sign = 1;
              else if (s[i] == '-') sign = -1;
              else throw AsmError(AsmErrorKind::BadOperand, line, "unexpected '" + std::string(s.substr(i)) + "'");
              ++i;
              expectTerm = true;
              continue;
            }
          if (s[i] == '-' or s[i] == '+')
            {
              if (s[i] == '-')
                sign = -sign;
              ++i;
              continue;
            }

          std::int64_t term = 0;
          if (s[i] == '%')
            {
              std::size_t open = s.find('(', i);
              if (open == std::string_view::npos)
                throw AsmError(AsmErrorKind::BadOperand, line, "malformed relocation operator");
              std::string op(s.substr(i + 1, open - i - 1));
              int depth = 0;
              std::size_t close = open;
              for (; close < s.size(); ++close)
                {
                  if (s[close] == '(') ++depth;
                  else if (s[close] == ')' and --depth == 0) break;
                }
              if (close >= s.size())
                throw AsmError(AsmErrorKind::BadOperand, line, "unbalanced parentheses");
              auto inner = evalExpr(s.substr(open + 1, close - open - 1), lookup, line, missing);
              i = close + 1;
              if (not inner)
                unknown = true;
              else
                {
                  auto v = static_cast<std::uint32_t>(inner->value);
                  if (op == "hi")
                    term = ((v + 0x800u) >> 12) & 0xfffff;
                  else if (op == "lo")
                    term = signExtend(v & 0xfff, 12);
                  else
                    throw AsmError(AsmErrorKind::BadOperand, line, "unknown operator %" + op);
                  total.usesSymbol |= inner->usesSymbol;
                }
            }
          else if (std::isdigit(static_cast<unsigned char>(s[i])) or s[i] == '\'')
            {
              std::size_t j = i;
              if (s[i] == '\'')
                j = std::min(s.size(), i + 3);
              else
                while (j < s.size() and std::isalnum(static_cast<unsigned char>(s[j])))
                  ++j;
              auto n = parseNumber(s.substr(i, j - i));
              if (not n)
                throw AsmError(AsmErrorKind::BadOperand, line, "bad number '" + std::string(s.substr(i, j - i)) + "'");
              term = *n;
              i = j;
            }
          else if (isIdentStart(s[i]))
            {
              std::size_t j = i + 1;
              while (j < s.size() and isIdentChar(s[j]))
                ++j;
              std::string name(s.substr(i, j - i));
              i = j;
              auto v = lookup(name);
              if (not v)
                {
                  unknown = true;
                  if (missing and missing->empty())
                    *missing = name;
                }
              else
                term = *v;
              total.usesSymbol = true;
            }
          else
            throw AsmError(AsmErrorKind::BadOperand, line, "bad expression '" + std::string(s) + "'");

          total.value += sign * term;
          sign = 1;
          expectTerm = false;
        }
      if (expectTerm)
        throw AsmError(AsmErrorKind::BadOperand, line, "dangling operator in '" + std::string(s) + "'");
      if (unknown)
        return std::nullopt;
      return total;
    }

    /// Split "imm(reg)" into its parts. The immediate may be empty.
    inline std::optional<std::pair<std::string, std::string>> splitMemOperand(std::string_view s)
    {
      s = trim(s);
      if (s.empty() or s.back() != ')')
        return std::nullopt;
      int depth = 0;
      for (std::size_t i = s.size(); i-- > 0;)
        {
          if (s[i] == ')') ++depth;
          else if (s[i] == '(' and --depth == 0)
            return std::make_pair(std::string(trim(s.substr(0, i))),
                                  std::string(trim(s.substr(i + 1, s.size() - i - 2))));
        }
      return std::nullopt;
    }

    inline std::string unescape(std::string_view quoted, int line)
    {
      quoted = trim(quoted);
      if (quoted.size() < 2 or quoted.front() != '"' or quoted.back() != '"')
        throw AsmError(AsmErrorKind::BadDirective, line, "expected a quoted string");
      std::string out;
      for (std::size_t i = 1; i + 1 < quoted.size(); ++i)
        {
          char c = quoted[i];
          if (c != '\\')
            {
              out += c;
              continue;
            }
          if (i + 2 >= quoted.size())
            throw AsmError(AsmErrorKind::BadDirective, line, "dangling escape");
          char e = quoted[++i];
          switch (e)
            {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            case '0': out += '\0'; break;
            case '\\': out += '\\'; break;
            case '"': out += '"'; break;
            default:
              throw AsmError(AsmErrorKind::BadDirective, line, std::string("unknown escape \\") + e);
            }
        }
      return out;
    }

    /// Two-pass assembly state shared by assemble() and the pairing lint.
    class Assembly
    {
    public:
      struct Emitted
      {
        int line;
        std::uint32_t addr;
        Instruction inst;
      };

      Assembly(std::string_view source, AsmOptions opts)
        : opts_(opts), parsed_(parseSource(source))
      {
        pass1();
        pass2();
      }

      ProgramImage image() const
      {
        ProgramImage img;
        img.symbols = symbols_;
        img.segments = buildSegments();
        auto it = symbols_.find("_start");
        img.entry = it != symbols_.end() ? it->second : opts_.textBase;
        bool inside = false;
        for (const auto& s : img.segments)
          if (s.flags == SegmentFlags::Rx and img.entry >= s.base and img.entry < s.end())
            inside = true;
        if (not inside)
          throw AsmError(AsmErrorKind::BadOperand, 0,
                         "entry point " + hex8(img.entry) + " is not inside the text section");
        return img;
      }

      const std::vector<Emitted>& instructions() const { return emitted_; }

    private:
      enum class Section { Text, Data };

      struct Chunk
      {
        Section section;
        std::uint32_t base;
        std::vector<std::uint8_t> bytes;
        int line;
      };

      struct Cursor
      {
        Section section = Section::Text;
        std::uint32_t textPc;
        std::uint32_t dataPc;

        std::uint32_t& pc() { return section == Section::Text ? textPc : dataPc; }
      };

      // Pass 1: layout and symbols.
      void pass1()
      {
        Cursor cur{Section::Text, opts_.textBase, opts_.dataBase};
        std::size_t nextLabel = 0;
        auto& labels = parsed_.labels;

        auto bindLabels = [&](std::size_t stmtIndex) {
          while (nextLabel < labels.size() and labels[nextLabel].beforeStatement == stmtIndex)
            {
              const auto& l = labels[nextLabel++];
              if (symbols_.count(l.name))
                throw AsmError(AsmErrorKind::DuplicateLabel, l.line, "'" + l.name + "' already defined");
              symbols_[l.name] = cur.pc();
            }
        };

        for (std::size_t i = 0; i < parsed_.statements.size(); ++i)
          {
            const Statement& st = parsed_.statements[i];
            bindLabels(i);
            layout_.push_back({cur.section, cur.pc()});
            std::uint64_t size = st.mnemonic[0] == '.' ? directiveLayout(st, cur) : instructionSize(st);
            std::uint64_t next = std::uint64_t(cur.pc()) + size;
            if (next > 0xffffffffull + 1)
              throw AsmError(AsmErrorKind::BadDirective, st.line, "location counter overflows the address space");
            cur.pc() = static_cast<std::uint32_t>(next);
          }
        bindLabels(parsed_.statements.size());
      }

      /// Handles layout-affecting directives in pass 1; returns bytes emitted.
      std::uint64_t directiveLayout(const Statement& st, Cursor& cur)
      {
        const auto& m = st.mnemonic;
        const auto& ops = st.operands;
        if (m == ".text") { cur.section = Section::Text; return 0; }
        if (m == ".data") { cur.section = Section::Data; return 0; }
        if (m == ".section")
          {
            if (ops.size() == 1 and ops[0] == ".text") cur.section = Section::Text;
            else if (ops.size() == 1 and ops[0] == ".data") cur.section = Section::Data;
            else throw AsmError(AsmErrorKind::BadDirective, st.line, "only .text and .data sections exist");
            return 0;
          }
        if (m == ".org")
          {
            cur.pc() = static_cast<std::uint32_t>(constant(st, 0, 0, 0xffffffffll));
            return 0;
          }
        if (m == ".globl" or m == ".global")
          return 0;
        if (m == ".equ" or m == ".set")
          {
            if (ops.size() != 2 or ops[0].empty() or not isIdentStart(ops[0][0]))
              throw AsmError(AsmErrorKind::BadDirective, st.line, ".equ needs a name and a value");
            if (symbols_.count(ops[0]))
              throw AsmError(AsmErrorKind::DuplicateLabel, st.line, "'" + ops[0] + "' already defined");
            symbols_[ops[0]] = static_cast<std::uint32_t>(constant(st, 1, INT32_MIN, 0xffffffffll));
            return 0;
          }
        if (m == ".word") return 4 * countValues(st);
        if (m == ".half") return 2 * countValues(st);
        if (m == ".byte") return countValues(st);
        if (m == ".asciz" or m == ".string") return unescape(st.rest, st.line).size() + 1;
        if (m == ".ascii") return unescape(st.rest, st.line).size();
        if (m == ".space" or m == ".zero")
          return static_cast<std::uint64_t>(constant(st, 0, 0, 0xffffffffll));
        if (m == ".align" or m == ".p2align")
          {
            auto n = constant(st, 0, 0, 16);
            std::uint64_t align = std::uint64_t(1) << n;
            std::uint64_t pc = cur.pc();
            return (align - pc % align) % align;
          }
        throw AsmError(AsmErrorKind::BadDirective, st.line, "unknown directive " + m);
      }

      static std::uint64_t countValues(const Statement& st)
      {
        if (st.operands.empty())
          throw AsmError(AsmErrorKind::BadDirective, st.line, st.mnemonic + " needs at least one value");
        return st.operands.size();
      }

      /// A constant operand that must be known during pass 1.
      std::int64_t constant(const Statement& st, std::size_t idx, std::int64_t lo, std::int64_t hi) const
      {
        if (idx >= st.operands.size())
          throw AsmError(AsmErrorKind::BadDirective, st.line, st.mnemonic + ": missing operand");
        auto v = evalExpr(st.operands[idx], lookupKnown(), st.line);
        if (not v)
          throw AsmError(AsmErrorKind::BadDirective, st.line, st.mnemonic + ": value must be a constant");
        if (v->value < lo or v->value > hi)
          throw AsmError(AsmErrorKind::BadDirective, st.line, st.mnemonic + ": value out of range");
        return v->value;
      }

      SymbolLookup lookupKnown() const
      {
        return [this](const std::string& name) -> std::optional<std::int64_t> {
          auto it = symbols_.find(name);
          if (it == symbols_.end())
            return std::nullopt;
          return static_cast<std::int64_t>(it->second);
        };
      }

      std::uint64_t instructionSize(const Statement& st) const
      {
        const auto& m = st.mnemonic;
        if (m == "la" or m == "call" or m == "tail")
          return 8;
        if (m == "li")
          {
            if (st.operands.size() != 2)
              throw AsmError(AsmErrorKind::BadOperand, st.line, "li needs rd, imm");
            auto v = evalExpr(st.operands[1], lookupKnown(), st.line);
            if (not v)
              throw AsmError(AsmErrorKind::BadOperand, st.line, "li needs a constant (use la for addresses)");
            return liSequence(static_cast<std::uint32_t>(v->value)).size() * 4;
          }
        return 4;
      }

      /// lui/addi split used by li. Returns (hi20, lo12) pairs per emitted word.
      struct LiPart { bool isLui; std::int32_t imm; };

      static std::vector<LiPart> liSequence(std::uint32_t value)
      {
        auto sv = static_cast<std::int32_t>(value);
        if (fitsSigned(sv, 12))
          return {{false, sv}};
        std::int32_t lo = signExtend(value & 0xfff, 12);
        std::uint32_t hi = (value - static_cast<std::uint32_t>(lo)) & 0xfffff000u;
        std::vector<LiPart> seq{{true, static_cast<std::int32_t>(hi)}};
        if (lo != 0)
          seq.push_back({false, lo});
        return seq;
      }

      // Pass 2: encoding.
      void pass2()
      {
        for (std::size_t i = 0; i < parsed_.statements.size(); ++i)
          {
            const Statement& st = parsed_.statements[i];
            auto [section, pc] = layout_[i];
            Chunk& chunk = chunkAt(section, pc, st.line);
            if (st.mnemonic[0] == '.')
              emitDirective(st, chunk, pc);
            else
              emitInstruction(st, chunk, pc, section);
          }
      }

      Chunk& chunkAt(Section section, std::uint32_t pc, int line)
      {
        if (not chunks_.empty())
          {
            Chunk& last = chunks_.back();
            if (last.section == section and std::uint64_t(last.base) + last.bytes.size() == pc)
              return last;
          }
        // Reuse an earlier chunk if the section switched back to its end.
        for (auto& c : chunks_)
          if (c.section == section and std::uint64_t(c.base) + c.bytes.size() == pc)
            return c;
        chunks_.push_back({section, pc, {}, line});
        return chunks_.back();
      }

      SymbolLookup lookupAll(int line) const
      {
        return [this, line](const std::string& name) -> std::optional<std::int64_t> {
          auto it = symbols_.find(name);
          if (it == symbols_.end())
            throw AsmError(AsmErrorKind::UndefinedLabel, line, "'" + name + "'");
          return static_cast<std::int64_t>(it->second);
        };
      }

      ExprValue eval(const Statement& st, const std::string& text) const
      {
        return *evalExpr(text, lookupAll(st.line), st.line);
      }

      static void put(Chunk& c, std::uint32_t value, unsigned bytes)
      {
        for (unsigned i = 0; i < bytes; ++i)
          c.bytes.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
      }

      void emitDirective(const Statement& st, Chunk& chunk, std::uint32_t pc)
      {
        const auto& m = st.mnemonic;
        auto emitValues = [&](unsigned width, std::int64_t lo, std::int64_t hi) {
          for (const auto& op : st.operands)
            {
              auto v = eval(st, op).value;
              if (v < lo or v > hi)
                throw AsmError(AsmErrorKind::BadOperand, st.line, "value " + op + " does not fit " + m);
              put(chunk, static_cast<std::uint32_t>(v), width);
            }
        };
        if (m == ".word") emitValues(4, INT32_MIN, 0xffffffffll);
        else if (m == ".half") emitValues(2, -0x8000, 0xffff);
        else if (m == ".byte") emitValues(1, -0x80, 0xff);
        else if (m == ".asciz" or m == ".string" or m == ".ascii")
          {
            std::string s = unescape(st.rest, st.line);
            for (char c : s)
              chunk.bytes.push_back(static_cast<std::uint8_t>(c));
            if (m != ".ascii")
              chunk.bytes.push_back(0);
          }
        else if (m == ".space" or m == ".zero")
          chunk.bytes.resize(chunk.bytes.size() + constant(st, 0, 0, 0xffffffffll), 0);
        else if (m == ".align" or m == ".p2align")
          {
            std::uint64_t align = std::uint64_t(1) << constant(st, 0, 0, 16);
            chunk.bytes.resize(chunk.bytes.size() + (align - pc % align) % align, 0);
          }
      }

      Reg regOperand(const Statement& st, std::size_t idx) const
      {
        auto r = parseReg(st.operands.at(idx));
        if (not r)
          throw AsmError(AsmErrorKind::BadOperand, st.line, "expected a register, got '" + st.operands.at(idx) + "'");
        return *r;
      }

      void expectOperands(const Statement& st, std::size_t n) const
      {
        if (st.operands.size() != n)
          throw AsmError(AsmErrorKind::BadOperand, st.line,
                         st.mnemonic + " expects " + std::to_string(n) + " operand(s)");
      }

      std::int32_t immOperand(const Statement& st, const std::string& text, unsigned bits) const
      {
        auto v = eval(st, text).value;
        if (not fitsSigned(v, bits))
          throw AsmError(AsmErrorKind::BadOperand, st.line, "immediate " + text + " out of range");
        return static_cast<std::int32_t>(v);
      }

      /// Branch/jump target: a plain number is a pc-relative offset, an
      /// expression with a symbol is an absolute address.
      std::int32_t targetOffset(const Statement& st, const std::string& text, std::uint32_t pc, unsigned bits) const
      {
        ExprValue v = eval(st, text);
        std::int64_t off = v.usesSymbol ? v.value - std::int64_t(pc) : v.value;
        if (not fitsSigned(off, bits))
          throw AsmError(AsmErrorKind::BranchOutOfRange, st.line,
                         "target " + text + " is " + std::to_string(off) + " bytes away");
        if (off & 1)
          throw AsmError(AsmErrorKind::BadOperand, st.line, "target offset is odd");
        return static_cast<std::int32_t>(off);
      }

      void emit(Chunk& chunk, const Statement& st, std::uint32_t& pc, Section section, Instruction inst)
      {
        std::uint32_t word;
        try
          {
            word = encode(inst);
          }
        catch (const std::out_of_range& e)
          {
            throw AsmError(AsmErrorKind::BadOperand, st.line, e.what());
          }
        put(chunk, word, 4);
        if (section == Section::Text)
          emitted_.push_back({st.line, pc, inst});
        pc += 4;
      }

      static Instruction make(Opcode op, Reg rd = {}, Reg rs1 = {}, Reg rs2 = {}, std::int32_t imm = 0)
      {
        Instruction i;
        i.op = op;
        i.rd = rd;
        i.rs1 = rs1;
        i.rs2 = rs2;
        i.imm = imm;
        return i;
      }

      static int fenceBits(std::string_view s, int line)
      {
        s = trim(s);
        if (s == "0")
          return 0;
        int bits = 0;
        for (char c : s)
          {
            int b = c == 'i' ? 8 : c == 'o' ? 4 : c == 'r' ? 2 : c == 'w' ? 1 : -1;
            if (b < 0 or (bits & b))
              throw AsmError(AsmErrorKind::BadOperand, line, "bad fence set '" + std::string(s) + "'");
            bits |= b;
          }
        return bits;
      }

      /// imm(reg) or (reg) operand for loads, stores and jalr.
      std::pair<std::int32_t, Reg> memOperand(const Statement& st, const std::string& text) const
      {
        auto parts = splitMemOperand(text);
        if (not parts)
          throw AsmError(AsmErrorKind::BadOperand, st.line, "expected imm(reg), got '" + text + "'");
        auto base = parseReg(parts->second);
        if (not base)
          throw AsmError(AsmErrorKind::BadOperand, st.line, "bad base register in '" + text + "'");
        std::int32_t imm = parts->first.empty() ? 0 : immOperand(st, parts->first, 12);
        return {imm, *base};
      }

      void emitInstruction(const Statement& st, Chunk& chunk, std::uint32_t pc, Section section)
      {
        const std::string& m = st.mnemonic;
        const auto& ops = st.operands;
        auto out = [&](Instruction inst) { emit(chunk, st, pc, section, inst); };

        if (emitPseudo(st, pc, out))
          return;

        auto opc = opcodeForMnemonic(m);
        if (not opc)
          throw AsmError(AsmErrorKind::UnknownMnemonic, st.line, "'" + m + "'");

        switch (opInfo(*opc).format)
          {
          case Format::None:
            break;
          case Format::U:
            {
              expectOperands(st, 2);
              auto v = eval(st, ops[1]).value;
              if (v < 0 or v > 0xfffff)
                throw AsmError(AsmErrorKind::BadOperand, st.line, "upper immediate out of range");
              out(make(*opc, regOperand(st, 0), {}, {}, static_cast<std::int32_t>(static_cast<std::uint32_t>(v) << 12)));
              return;
            }
          case Format::J:
            if (ops.size() == 1)
              out(make(*opc, reg::ra, {}, {}, targetOffset(st, ops[0], pc, 21)));
            else
              {
                expectOperands(st, 2);
                out(make(*opc, regOperand(st, 0), {}, {}, targetOffset(st, ops[1], pc, 21)));
              }
            return;
          case Format::Jalr:
            if (ops.size() == 1 and parseReg(ops[0]))
              out(make(*opc, reg::ra, regOperand(st, 0)));
            else if (ops.size() == 2 and parseReg(ops[1]))
              out(make(*opc, regOperand(st, 0), regOperand(st, 1)));
            else if (ops.size() == 2)
              {
                auto [imm, base] = memOperand(st, ops[1]);
                out(make(*opc, regOperand(st, 0), base, {}, imm));
              }
            else
              {
                expectOperands(st, 3);
                out(make(*opc, regOperand(st, 0), regOperand(st, 1), {}, immOperand(st, ops[2], 12)));
              }
            return;
          case Format::B:
            expectOperands(st, 3);
            out(make(*opc, {}, regOperand(st, 0), regOperand(st, 1), targetOffset(st, ops[2], pc, 13)));
            return;
          case Format::Load:
            {
              expectOperands(st, 2);
              auto [imm, base] = memOperand(st, ops[1]);
              out(make(*opc, regOperand(st, 0), base, {}, imm));
              return;
            }
          case Format::Store:
            {
              expectOperands(st, 2);
              auto [imm, base] = memOperand(st, ops[1]);
              out(make(*opc, {}, base, regOperand(st, 0), imm));
              return;
            }
          case Format::IArith:
            expectOperands(st, 3);
            out(make(*opc, regOperand(st, 0), regOperand(st, 1), {}, immOperand(st, ops[2], 12)));
            return;
          case Format::IShift:
            {
              expectOperands(st, 3);
              auto v = eval(st, ops[2]).value;
              if (v < 0 or v > 31)
                throw AsmError(AsmErrorKind::BadOperand, st.line, "shift amount out of range");
              out(make(*opc, regOperand(st, 0), regOperand(st, 1), {}, static_cast<std::int32_t>(v)));
              return;
            }
          case Format::R:
            expectOperands(st, 3);
            out(make(*opc, regOperand(st, 0), regOperand(st, 1), regOperand(st, 2)));
            return;
          case Format::Fence:
            if (ops.empty())
              out(make(*opc, {}, {}, {}, 0xff));
            else
              {
                expectOperands(st, 2);
                out(make(*opc, {}, {}, {}, (fenceBits(ops[0], st.line) << 4) | fenceBits(ops[1], st.line)));
              }
            return;
          case Format::System:
            expectOperands(st, 0);
            out(make(*opc));
            return;
          case Format::Counter:
            expectOperands(st, 1);
            out(make(*opc, regOperand(st, 0)));
            return;
          case Format::LimActive:
            {
              expectOperands(st, 3);
              Instruction i = make(*opc, {}, regOperand(st, 0), regOperand(st, 1));
              i.memOp = memOpOperand(st, ops[2]);
              out(i);
              return;
            }
          case Format::LimLoadMask:
            {
              expectOperands(st, 4);
              Instruction i = make(*opc, regOperand(st, 0), regOperand(st, 1), regOperand(st, 2));
              i.memOp = memOpOperand(st, ops[3]);
              out(i);
              return;
            }
          }
        throw AsmError(AsmErrorKind::UnknownMnemonic, st.line, "'" + m + "'");
      }

      MemOpCode memOpOperand(const Statement& st, const std::string& text) const
      {
        auto op = parseMemOp(lower(trim(text)));
        if (not op)
          throw AsmError(AsmErrorKind::BadOperand, st.line,
                         "expected one of none/and/or/xor/nand/nor/xnor, got '" + text + "'");
        return *op;
      }

      template <typename Out>
      bool emitPseudo(const Statement& st, std::uint32_t pc, Out&& out)
      {
        const std::string& m = st.mnemonic;
        const auto& ops = st.operands;
        using O = Opcode;

        auto branchZero = [&](O op, bool swap) {
          expectOperands(st, 2);
          Reg r = regOperand(st, 0);
          std::int32_t off = targetOffset(st, ops[1], pc, 13);
          out(swap ? make(op, {}, reg::zero, r, off) : make(op, {}, r, reg::zero, off));
        };
        auto branchSwapped = [&](O op) {
          expectOperands(st, 3);
          out(make(op, {}, regOperand(st, 1), regOperand(st, 0), targetOffset(st, ops[2], pc, 13)));
        };
        auto pcRelPair = [&](Reg rd, O second, Reg link, const std::string& target) {
          std::int64_t off = eval(st, target).value - std::int64_t(pc);
          auto uoff = static_cast<std::uint32_t>(off);
          std::int32_t lo = signExtend(uoff & 0xfff, 12);
          std::uint32_t hi = (uoff - static_cast<std::uint32_t>(lo)) & 0xfffff000u;
          out(make(O::Auipc, link, {}, {}, static_cast<std::int32_t>(hi)));
          if (second == O::Addi)
            out(make(O::Addi, rd, link, {}, lo));
          else
            out(make(O::Jalr, rd, link, {}, lo));
        };

        if (m == "nop") { expectOperands(st, 0); out(make(O::Addi)); }
        else if (m == "li")
          {
            expectOperands(st, 2);
            Reg rd = regOperand(st, 0);
            auto value = static_cast<std::uint32_t>(eval(st, ops[1]).value);
            auto seq = liSequence(value);
            for (auto part : seq)
              {
                if (part.isLui)
                  out(make(O::Lui, rd, {}, {}, part.imm));
                else
                  out(make(O::Addi, rd, seq.size() == 2 ? rd : reg::zero, {}, part.imm));
              }
          }
        else if (m == "la") { expectOperands(st, 2); Reg rd = regOperand(st, 0); pcRelPair(rd, O::Addi, rd, ops[1]); }
        else if (m == "call") { expectOperands(st, 1); pcRelPair(reg::ra, O::Jalr, reg::ra, ops[0]); }
        else if (m == "tail") { expectOperands(st, 1); pcRelPair(reg::zero, O::Jalr, Reg(6), ops[0]); }
        else if (m == "mv") { expectOperands(st, 2); out(make(O::Addi, regOperand(st, 0), regOperand(st, 1))); }
        else if (m == "not") { expectOperands(st, 2); out(make(O::Xori, regOperand(st, 0), regOperand(st, 1), {}, -1)); }
        else if (m == "neg") { expectOperands(st, 2); out(make(O::Sub, regOperand(st, 0), reg::zero, regOperand(st, 1))); }
        else if (m == "seqz") { expectOperands(st, 2); out(make(O::Sltiu, regOperand(st, 0), regOperand(st, 1), {}, 1)); }
        else if (m == "snez") { expectOperands(st, 2); out(make(O::Sltu, regOperand(st, 0), reg::zero, regOperand(st, 1))); }
        else if (m == "sltz") { expectOperands(st, 2); out(make(O::Slt, regOperand(st, 0), regOperand(st, 1), reg::zero)); }
        else if (m == "sgtz") { expectOperands(st, 2); out(make(O::Slt, regOperand(st, 0), reg::zero, regOperand(st, 1))); }
        else if (m == "j") { expectOperands(st, 1); out(make(O::Jal, reg::zero, {}, {}, targetOffset(st, ops[0], pc, 21))); }
        else if (m == "jr") { expectOperands(st, 1); out(make(O::Jalr, reg::zero, regOperand(st, 0))); }
        else if (m == "ret") { expectOperands(st, 0); out(make(O::Jalr, reg::zero, reg::ra)); }
        else if (m == "beqz") branchZero(O::Beq, false);
        else if (m == "bnez") branchZero(O::Bne, false);
        else if (m == "bltz") branchZero(O::Blt, false);
        else if (m == "bgez") branchZero(O::Bge, false);
        else if (m == "blez") branchZero(O::Bge, true);
        else if (m == "bgtz") branchZero(O::Blt, true);
        else if (m == "bgt") branchSwapped(O::Blt);
        else if (m == "ble") branchSwapped(O::Bge);
        else if (m == "bgtu") branchSwapped(O::Bltu);
        else if (m == "bleu") branchSwapped(O::Bgeu);
        else
          return false;
        return true;
      }

      std::vector<Segment> buildSegments() const
      {
        std::vector<const Chunk*> live;
        for (const auto& c : chunks_)
          if (not c.bytes.empty())
            live.push_back(&c);
        std::sort(live.begin(), live.end(), [](const Chunk* a, const Chunk* b) { return a->base < b->base; });

        std::vector<Segment> segs;
        for (std::size_t i = 0; i < live.size(); ++i)
          {
            const Chunk& c = *live[i];
            if (std::uint64_t(c.base) + c.bytes.size() > 0x100000000ull)
              throw AsmError(AsmErrorKind::SegmentOverlap, c.line, "section runs past the end of the address space");
            if (i > 0)
              {
                const Chunk& p = *live[i - 1];
                if (std::uint64_t(p.base) + p.bytes.size() > c.base)
                  throw AsmError(AsmErrorKind::SegmentOverlap, c.line,
                                 "bytes at " + hex8(c.base) + " overlap earlier output");
              }
            auto flags = c.section == Section::Text ? SegmentFlags::Rx : SegmentFlags::Rw;
            if (not segs.empty() and segs.back().flags == flags and segs.back().end() == c.base)
              segs.back().bytes.insert(segs.back().bytes.end(), c.bytes.begin(), c.bytes.end());
            else
              segs.push_back({c.base, c.bytes, flags});
          }
        return segs;
      }

      AsmOptions opts_;
      ParsedSource parsed_;
      std::map<std::string, std::uint32_t> symbols_;
      std::vector<std::pair<Section, std::uint32_t>> layout_;
      std::vector<Chunk> chunks_;
      std::vector<Emitted> emitted_;
    };
  } // namespace detail

  /// Two-pass assembly of RV32IM source plus the lim.active / lim.loadmask
  /// mnemonics. Throws AsmError.
  inline ProgramImage
  assemble(std::string_view source, AsmOptions options = {})
  {
    return detail::Assembly(source, options).image();
  }

  /// Straight-line check of the LiM pairing rules: a store through an
  /// activated base register must use a zero offset, and lim.loadmask must
  /// come after some lim.active. Never fails the build.
  inline std::vector<AsmWarning>
  lintLimPairing(std::string_view source, AsmOptions options = {})
  {
    detail::Assembly assembly(source, options);
    std::vector<AsmWarning> warnings;
    std::set<unsigned> activeBases;
    bool anyActivation = false;

    for (const auto& e : assembly.instructions())
      {
        const Instruction& i = e.inst;
        if (i.op == Opcode::LimActive)
          {
            anyActivation = true;
            if (i.memOp == MemOpCode::None)
              activeBases.erase(i.rs1.index());
            else
              activeBases.insert(i.rs1.index());
          }
        else if (i.op == Opcode::Sw and i.imm != 0 and activeBases.count(i.rs1.index()))
          warnings.push_back({e.line, "store through activated base x" + std::to_string(i.rs1.index()) +
                                      " has nonzero offset " + std::to_string(i.imm) +
                                      "; a logic store needs a zero immediate"});
        else if (i.op == Opcode::LimLoadMask and not anyActivation)
          warnings.push_back({e.line, "lim.loadmask with no preceding lim.active"});
      }
    return warnings;
  }

} // namespace limsim
