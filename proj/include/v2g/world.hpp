/*
 * Copyright (C) 2026 the v2gsim authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "v2g/consensus.hpp"
#include "v2g/report.hpp"
#include "v2g/scenario.hpp"
#include "v2g/simnet.hpp"

namespace v2g::world {

/// Everything a finished scenario leaves behind.
struct RunArtifacts {
    report::MetricsReport metrics;
    std::string trace_text;
    std::vector<sim::TraceRecord> trace;
    Bytes ledger_bytes;  // the aggregator's ledger replica, serialized

    struct RunInfo {
        std::uint32_t ev = 0;
        std::uint32_t cs = 0;
        Tick planned_at = 0;
        bool started = false;
        bool authenticated = false;
        bool terminated = false;
        std::string ev_phase;
        std::string cs_phase;
    };
    std::vector<RunInfo> runs;

    struct TxTiming {
        crypto::Digest tx_hash{};
        Tick broadcast_at = 0;
        std::optional<Tick> committed_at;
    };
    std::vector<TxTiming> tx_timings;

    std::vector<consensus::Block> committed_blocks;  // aggregator's view
    std::vector<std::string> registered_ids;         // every TrueId that registered
    bool ok() const { return metrics.ok(); }
};

/// Builds the simulated network from a scenario, drives registration and the
/// main phase, evaluates the scenario's expectations, and collects metrics.
RunArtifacts run_scenario(const scenario::ScenarioSpec& spec);

}  // namespace v2g::world
