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
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "v2g/consensus.hpp"
#include "v2g/simnet.hpp"

namespace v2g::scenario {

/// One planned charging visit: which EV plugs into which CS, when, and how
/// much energy changes hands.
struct SessionPlan {
    std::uint32_t ev = 0;
    std::uint32_t cs = 0;
    Tick at = 0;
    std::int64_t kwh_milli = 0;
};

/// Adversary rule as written in the scenario file; entity names are resolved
/// to node ids when the world is built.
struct AdvRuleSpec {
    std::optional<std::string> tag;  // M1..M5
    std::optional<std::string> src;
    std::optional<std::string> dst;
    std::optional<std::uint32_t> nth;
    std::string action;  // drop | delay | replay | tamper | spoof | redirect
    Tick delay_ms = 0;
    std::size_t field_index = 0;
    std::string set_hex;
    std::string target;  // spoof "as=", redirect "to="
};

struct Expectations {
    std::optional<std::uint64_t> runs_authenticated;
    bool runs_terminated_all = false;
    std::optional<std::uint64_t> runs_terminated;
    std::optional<bool> attack_defeated;
    std::optional<std::uint64_t> min_blocks;
    std::optional<std::uint64_t> blocks;
    std::optional<std::uint64_t> txs_committed;
    std::optional<std::int64_t> reward_total_micro;
};

struct ScenarioSpec {
    std::string name = "scenario";
    std::string curve = "p256";
    std::uint64_t seed = 1;
    Tick stop_ms = 30000;
    Tick window_ms = 5000;
    Tick session_timeout_ms = 10000;
    Tick charge_ms = 500;

    std::uint32_t num_evs = 1;
    std::uint32_t num_css = 1;
    std::vector<std::string> revoked;

    Tick open_delay_ms = 5;
    Tick open_jitter_ms = 0;
    Tick secure_delay_ms = 1;

    bool consensus_enabled = false;
    std::uint32_t speaker_term = 1;
    Tick block_interval_ms = 1000;
    bool literal_speaker_formula = false;
    std::int64_t price_milli = 200;
    std::map<std::uint32_t, consensus::Byzantine> byzantine;  // cs index -> behavior

    std::vector<SessionPlan> sessions;
    std::vector<AdvRuleSpec> adversary;
    Expectations expect;

    /// Cross-field invariants (committee size, session references, ...).
    /// Throws ScenarioConfigError on violation.
    void validate() const;
};

ScenarioSpec parse_scenario(std::istream& in, const std::string& origin);
ScenarioSpec parse_scenario_file(const std::filesystem::path& path);

}  // namespace v2g::scenario
