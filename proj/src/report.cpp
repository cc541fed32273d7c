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

#include "v2g/report.hpp"

#include <iomanip>
#include <sstream>

#include "v2g/consensus.hpp"

namespace v2g::report {

namespace {
std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}
}  // namespace

std::string MetricsReport::key_values() const {
    std::ostringstream o;
    o << "scenario " << scenario << "\n";
    o << "curve " << curve << "\n";
    o << "seed " << seed << "\n";
    o << "runs_total " << runs_total << "\n";
    o << "runs_authenticated " << runs_authenticated << "\n";
    o << "runs_terminated " << runs_terminated << "\n";
    for (const auto& [role, f] : auth_phase) {
        std::string r = lower(role);
        o << "auth." << r << ".ecm " << f.ecm << "\n";
        o << "auth." << r << ".hash " << f.hash << "\n";
        o << "auth." << r << ".tokens_in " << f.tokens_in << "\n";
        o << "auth." << r << ".bytes_in " << f.bytes_in << "\n";
    }
    o << "consensus.blocks_committed " << blocks_committed << "\n";
    o << "consensus.retries " << consensus_retries << "\n";
    o << "consensus.txs_created " << txs_created << "\n";
    o << "consensus.txs_broadcast " << txs_broadcast << "\n";
    o << "consensus.txs_committed " << txs_committed << "\n";
    o << "consensus.receipts_delivered " << receipts_delivered << "\n";
    o << "consensus.reward_committed " << consensus::format_micro(reward_committed_micro)
      << "\n";
    o << "consensus.ev_balance_total " << consensus::format_micro(ev_balance_total_micro)
      << "\n";
    o << "consensus.prefix_consistent " << (replicas_prefix_consistent ? "true" : "false")
      << "\n";
    for (const std::string& v : verdicts) o << "verdict " << v << "\n";
    for (const std::string& f : failures) o << "failure " << f << "\n";
    o << "status " << (failures.empty() ? "ok" : "assertion-failed") << "\n";
    return o.str();
}

std::string MetricsReport::overhead_table() const {
    std::ostringstream o;
    if (runs_total == 0 || auth_phase.empty()) {
        o << "(no completed authentication runs; overhead table empty)\n";
        return o.str();
    }
    o << std::left << std::setw(6) << "role" << std::right << std::setw(8) << "ecm"
      << std::setw(8) << "hash" << std::setw(12) << "tokens_in" << std::setw(12)
      << "bytes_in" << "\n";
    for (const char* role : {"EV", "CS", "CAG"}) {
        auto it = auth_phase.find(role);
        if (it == auth_phase.end()) continue;
        const RoleFigures& f = it->second;
        o << std::left << std::setw(6) << role << std::right << std::setw(8) << f.ecm
          << std::setw(8) << f.hash << std::setw(12) << f.tokens_in << std::setw(12)
          << f.bytes_in << "\n";
    }
    return o.str();
}

std::string MetricsReport::full_text() const { return key_values() + "\n" + overhead_table(); }

}  // namespace v2g::report
