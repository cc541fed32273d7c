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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "v2g/bytes.hpp"
#include "v2g/counters.hpp"
#include "v2g/hash.hpp"
#include "v2g/messages.hpp"

namespace v2g::consensus {

using crypto::Digest;

// Amounts are exact fixed-point integers: energy and price carry three
// decimal places (milli units), rewards six (micro units), so
// reward = energy * price holds without rounding.
std::int64_t parse_milli(std::string_view s);
std::string format_milli(std::int64_t v);
std::string format_micro(std::int64_t v);

struct Transaction {
    Digest ev_ptd{};
    Digest cs_ptd{};
    std::int64_t energy_milli_kwh = 0;
    std::int64_t price_milli = 0;
    std::int64_t reward_micro = 0;
    Digest session_ref{};
    Tick created_at = 0;

    bool amounts_consistent() const;

    Bytes encode() const;
    static Transaction decode(ByteView body);
    Digest hash(crypto::OpCounters& meter) const;
};

Transaction make_transaction(const Digest& ev_ptd, const Digest& cs_ptd,
                             std::int64_t energy_milli_kwh, std::int64_t price_milli,
                             const Digest& session_ref, Tick created_at);

struct Block {
    std::uint64_t height = 0;
    Digest prev_hash{};
    std::vector<Transaction> txs;
    std::uint32_t proposer = 0;  // committee index, 1-based
    Tick timestamp = 0;
    Digest block_hash{};

    /// Hash over every field except block_hash itself.
    Digest compute_hash(crypto::OpCounters& meter) const;

    Bytes encode() const;  // includes block_hash as the trailing field
    static Block decode(ByteView body);
};

struct Vote {
    std::uint32_t voter = 0;
    std::uint64_t height = 0;
    Digest block_hash{};
    bool approve = false;
};

struct ConsensusConfig {
    std::uint32_t committee_size = 4;
    std::uint32_t speaker_term = 1;    // m: consecutive heights per speaker
    Tick block_interval = 1000;        // t: virtual ms between block attempts
    bool literal_speaker_formula = false;

    std::uint32_t fault_bound() const { return (committee_size - 1) / 3; }
    std::uint32_t quorum() const { return committee_size - fault_bound(); }
};

/// Committee index (1-based) of the speaker for a height. Each speaker
/// serves speaker_term consecutive heights; the literal variant keys the
/// rotation on height mod term instead.
std::uint32_t speaker_index(std::uint64_t height, const ConsensusConfig& cfg);
/// Rotation with a retry offset: each failed attempt at a height hands the
/// role to the next committee member.
std::uint32_t speaker_index(std::uint64_t height, std::uint32_t view,
                            const ConsensusConfig& cfg);

/// Hash-chained block list. Appends are validated; a violation halts the
/// replica and records why.
class Ledger {
public:
    std::uint64_t next_height() const { return blocks_.size(); }
    const std::vector<Block>& blocks() const { return blocks_; }
    Digest head_hash() const;

    bool append(const Block& block, crypto::OpCounters& meter);
    bool halted() const { return halted_; }
    const std::string& halt_reason() const { return halt_reason_; }

    /// Committed reward per EV pseudo identity, in micro units.
    std::map<Digest, std::int64_t> balances() const;
    std::int64_t total_rewards() const;

    Bytes serialize() const;
    void save(const std::filesystem::path& path) const;

private:
    std::vector<Block> blocks_;
    bool halted_ = false;
    std::string halt_reason_;
};

struct VerifyReport {
    bool ok = false;
    std::size_t block_count = 0;
    std::optional<std::uint64_t> fail_height;
    std::string detail;
};

VerifyReport verify_ledger_bytes(ByteView data);
VerifyReport verify_ledger_file(const std::filesystem::path& path);

/// Consensus wire messages (tags 0x20-0x23 plus the transaction relay pair).
Bytes encode_proposal(const Block& block);
Block decode_proposal(ByteView payload);
Bytes encode_vote_request(std::uint64_t height, const Digest& block_hash);
void decode_vote_request(ByteView payload, std::uint64_t& height, Digest& block_hash);
Bytes encode_vote(const Vote& vote);
Vote decode_vote(ByteView payload);
Bytes encode_commit(const Block& block);
Block decode_commit(ByteView payload);
Bytes encode_tx_submit(const Transaction& tx);
Transaction decode_tx_submit(ByteView payload);
Bytes encode_tx_broadcast(const Transaction& tx);
Transaction decode_tx_broadcast(ByteView payload);

enum class Byzantine {
    None,
    RejectAll,      // votes reject on every proposal
    Withhold,       // never votes
    SilentSpeaker,  // skips proposing when it holds the speaker role
};
const char* byzantine_name(Byzantine b);

/// One committee member's consensus state machine. Pure with respect to the
/// network: handlers return the messages to transmit.
class Replica {
public:
    struct Out {
        std::optional<std::uint32_t> to;  // committee index; nullopt = all others
        bool also_observer = false;       // deliver to the aggregator as well
        Bytes payload;
    };

    Replica(std::uint32_t index, ConsensusConfig cfg, Byzantine behavior = Byzantine::None);

    std::uint32_t index() const { return index_; }
    const ConsensusConfig& config() const { return cfg_; }
    const Ledger& ledger() const { return ledger_; }
    const std::map<Digest, Transaction>& mempool() const { return mempool_; }
    std::uint64_t retries() const { return retries_; }
    crypto::OpCounters& hash_meter() { return hash_meter_; }

    /// Buffer a broadcast transaction; duplicates collapse by hash.
    void add_transaction(const Transaction& tx);

    /// Block-interval tick: advance the retry view if the previous attempt
    /// died, then propose when holding the speaker role with work pending.
    std::vector<Out> on_interval(Tick now);

    void on_proposal(std::uint32_t from, const Block& block);
    std::vector<Out> on_vote_request(std::uint32_t from, std::uint64_t height,
                                     const Digest& block_hash);
    std::vector<Out> on_vote(const Vote& vote);
    bool on_commit(const Block& block);

private:
    std::uint32_t expected_speaker(std::uint64_t height) const;
    void prune_mempool(const Block& block);

    std::uint32_t index_;
    ConsensusConfig cfg_;
    Byzantine behavior_;
    Ledger ledger_;
    std::map<Digest, Transaction> mempool_;
    crypto::OpCounters hash_meter_;

    struct Pending {
        Block block;
        std::set<std::uint32_t> approvals;
        std::set<std::uint32_t> voted;
    };
    std::optional<Pending> pending_;  // set while this replica is proposing

    std::map<Digest, Block> seen_proposals_;
    std::set<std::pair<std::uint64_t, Digest>> voted_on_;

    std::uint32_t view_ = 0;
    std::uint64_t retries_ = 0;
    bool tick_seen_ = false;
    std::uint64_t last_tick_height_ = 0;
    bool last_tick_had_work_ = false;
};

}  // namespace v2g::consensus
