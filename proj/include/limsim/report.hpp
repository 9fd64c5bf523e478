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
#include <string>

#include <json.hpp>

#include "limsim/cpu.hpp"

namespace limsim
{

  /// Process exit status for a finished run: the low byte of the guest exit
  /// code, or 70 for any other halt.
  constexpr int
  processStatus(const HaltReason& h)
  {
    if (h.kind == HaltReason::Kind::Exit)
      return h.exitCode & 0xFF;
    return 70;
  }

  /// Run statistics as one JSON object. Every key is always present.
  inline nlohmann::ordered_json
  statsJson(const RunResult& r)
  {
    const MemStats& m = r.stats.mem;
    nlohmann::ordered_json j;
    j["instret"] = r.stats.instret;
    j["cycles"] = r.stats.cycles;
    j["halt_reason"] = std::string(haltKindName(r.halt.kind));
    j["halt_detail"] = describe(r.halt);
    j["exit_code"] = r.halt.kind == HaltReason::Kind::Exit ? r.halt.exitCode : 0;
    j["data_accesses"] = m.dataAccesses();
    j["plain_reads"] = m.plainReads;
    j["plain_writes"] = m.plainWrites;
    j["logic_stores"] = m.logicStores;
    j["load_masks"] = m.loadMasks;
    j["activations"] = m.activations;
    j["activated_cells_current"] = m.activatedCellsCurrent;
    j["activated_cells_peak"] = m.activatedCellsPeak;
    j["fetches"] = m.fetches;
    j["nonzero_imm_logic_store"] = r.stats.nonzeroImmLogicStores;
    j["wall_seconds"] = r.stats.wallSeconds;
    return j;
  }

  inline std::string
  statsText(const RunResult& r)
  {
    return statsJson(r).dump(2) + "\n";
  }

} // namespace limsim
