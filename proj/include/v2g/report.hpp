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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace v2g::report {

/// Authentication-phase cost figures for one protocol role.
struct RoleFigures {
    std::uint64_t ecm = 0;
    std::uint64_t hash = 0;
    std::uint64_t tokens_in = 0;
    std::uint64_t bytes_in = 0;
};

struct MetricsReport {
    std::string scenario;
    std::string curve;
    std::uint64_t seed = 0;

    // Keyed "EV" / "CS" / "CAG"; sums over all entities of the role.
    std::map<std::string, RoleFigures> auth_phase;

    std::uint64_t runs_total = 0;
    std::uint64_t runs_authenticated = 0;
    std::uint64_t runs_terminated = 0;

    bool attack_defeated = false;

    std::uint64_t blocks_committed = 0;
    std::uint64_t consensus_retries = 0;
    std::uint64_t txs_created = 0;
    std::uint64_t txs_broadcast = 0;
    std::uint64_t txs_committed = 0;
    std::uint64_t receipts_delivered = 0;
    std::int64_t reward_committed_micro = 0;
    std::int64_t ev_balance_total_micro = 0;
    bool replicas_prefix_consistent = true;

    std::vector<std::string> verdicts;
    std::vector<std::string> failures;  // unmet expectations

    bool ok() const { return failures.empty(); }

    /// Line-delimited key-value records (machine readable).
    std::string key_values() const;
    /// Aligned per-role overhead comparison table.
    std::string overhead_table() const;
    /// key_values + blank line + table: the metrics.txt payload.
    std::string full_text() const;
};

}  // namespace v2g::report
