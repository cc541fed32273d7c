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

#include "v2g/consensus.hpp"

#include <fstream>

#include "v2g/codec.hpp"

namespace v2g::consensus {

using wire::FieldReader;
using wire::MsgTag;

// ---------------------------------------------------------------------------
// Fixed-point amounts

std::int64_t parse_milli(std::string_view s) {
    if (s.empty()) throw CodecError("empty decimal");
    bool negative = false;
    std::size_t i = 0;
    if (s[0] == '-') {
        negative = true;
        i = 1;
    }
    std::int64_t whole = 0;
    bool any = false;
    for (; i < s.size() && s[i] != '.'; ++i) {
        if (s[i] < '0' || s[i] > '9') throw CodecError("bad decimal digit");
        whole = whole * 10 + (s[i] - '0');
        any = true;
    }
    std::int64_t frac = 0;
    if (i < s.size()) {
        ++i;  // skip '.'
        int places = 0;
        for (; i < s.size(); ++i, ++places) {
            if (s[i] < '0' || s[i] > '9') throw CodecError("bad decimal digit");
            if (places >= 3) throw CodecError("more than 3 decimal places");
            frac = frac * 10 + (s[i] - '0');
            any = true;
        }
        while (places < 3) {
            frac *= 10;
            ++places;
        }
    }
    if (!any) throw CodecError("empty decimal");
    std::int64_t v = whole * 1000 + frac;
    return negative ? -v : v;
}

namespace {
std::string format_scaled(std::int64_t v, std::int64_t scale, int places) {
    std::string sign = v < 0 ? "-" : "";
    std::uint64_t a = v < 0 ? static_cast<std::uint64_t>(-v) : static_cast<std::uint64_t>(v);
    std::string frac = std::to_string(a % scale);
    frac.insert(0, places - frac.size(), '0');
    while (frac.size() > 1 && frac.back() == '0') frac.pop_back();
    std::string out = sign + std::to_string(a / scale);
    if (frac != "0") out += "." + frac;
    return out;
}
}  // namespace

std::string format_milli(std::int64_t v) { return format_scaled(v, 1000, 3); }
std::string format_micro(std::int64_t v) { return format_scaled(v, 1000000, 6); }

// ---------------------------------------------------------------------------
// Transaction

bool Transaction::amounts_consistent() const {
    if (energy_milli_kwh < 0 || price_milli < 0) return false;
    __int128 expect = static_cast<__int128>(energy_milli_kwh) * price_milli;
    return expect == static_cast<__int128>(reward_micro);
}

Bytes Transaction::encode() const {
    Bytes out;
    for (const Bytes& f : {wire::field_pseudo(ev_ptd), wire::field_pseudo(cs_ptd),
                           wire::field_i64(energy_milli_kwh), wire::field_i64(price_milli),
                           wire::field_i64(reward_micro), wire::field_digest(session_ref),
                           wire::field_timestamp(created_at)}) {
        out.insert(out.end(), f.begin(), f.end());
    }
    return out;
}

Transaction Transaction::decode(ByteView body) {
    FieldReader r(body);
    Transaction tx;
    tx.ev_ptd = r.read_pseudo();
    tx.cs_ptd = r.read_pseudo();
    tx.energy_milli_kwh = r.read_i64();
    tx.price_milli = r.read_i64();
    tx.reward_micro = r.read_i64();
    tx.session_ref = r.read_digest();
    tx.created_at = r.read_timestamp();
    r.expect_end();
    return tx;
}

Digest Transaction::hash(crypto::OpCounters& meter) const {
    std::array<Bytes, 1> fields{wire::field_blob(encode())};
    return crypto::hash_concat(fields, meter);
}

Transaction make_transaction(const Digest& ev_ptd, const Digest& cs_ptd,
                             std::int64_t energy_milli_kwh, std::int64_t price_milli,
                             const Digest& session_ref, Tick created_at) {
    if (energy_milli_kwh < 0 || price_milli < 0) {
        throw std::invalid_argument("negative amount");
    }
    Transaction tx;
    tx.ev_ptd = ev_ptd;
    tx.cs_ptd = cs_ptd;
    tx.energy_milli_kwh = energy_milli_kwh;
    tx.price_milli = price_milli;
    tx.reward_micro = energy_milli_kwh * price_milli;
    tx.session_ref = session_ref;
    tx.created_at = created_at;
    return tx;
}

// ---------------------------------------------------------------------------
// Block

namespace {

Bytes block_header_fields(const Block& b) {
    Bytes out;
    for (const Bytes& f : {wire::field_u64(b.height), wire::field_digest(b.prev_hash),
                           wire::field_u64(b.proposer), wire::field_timestamp(b.timestamp),
                           wire::field_u64(b.txs.size())}) {
        out.insert(out.end(), f.begin(), f.end());
    }
    for (const Transaction& tx : b.txs) {
        Bytes f = wire::field_blob(tx.encode());
        out.insert(out.end(), f.begin(), f.end());
    }
    return out;
}

}  // namespace

Digest Block::compute_hash(crypto::OpCounters& meter) const {
    std::array<Bytes, 1> fields{block_header_fields(*this)};
    return crypto::hash_concat(fields, meter);
}

Bytes Block::encode() const {
    Bytes out = block_header_fields(*this);
    Bytes f = wire::field_digest(block_hash);
    out.insert(out.end(), f.begin(), f.end());
    return out;
}

Block Block::decode(ByteView body) {
    FieldReader r(body);
    Block b;
    b.height = r.read_u64();
    b.prev_hash = r.read_digest();
    b.proposer = static_cast<std::uint32_t>(r.read_u64());
    b.timestamp = r.read_timestamp();
    std::uint64_t count = r.read_u64();
    for (std::uint64_t i = 0; i < count; ++i) {
        b.txs.push_back(Transaction::decode(r.read_blob()));
    }
    b.block_hash = r.read_digest();
    r.expect_end();
    return b;
}

// ---------------------------------------------------------------------------
// Speaker selection

std::uint32_t speaker_index(std::uint64_t height, const ConsensusConfig& cfg) {
    return speaker_index(height, 0, cfg);
}

std::uint32_t speaker_index(std::uint64_t height, std::uint32_t view,
                            const ConsensusConfig& cfg) {
    if (cfg.committee_size == 0) throw std::invalid_argument("empty committee");
    std::uint32_t m = cfg.speaker_term == 0 ? 1 : cfg.speaker_term;
    std::uint64_t base = cfg.literal_speaker_formula ? height % m : height / m;
    return static_cast<std::uint32_t>((base + view) % cfg.committee_size) + 1;
}

// ---------------------------------------------------------------------------
// Ledger

Digest Ledger::head_hash() const {
    return blocks_.empty() ? crypto::zero_digest() : blocks_.back().block_hash;
}

bool Ledger::append(const Block& block, crypto::OpCounters& meter) {
    if (halted_) return false;
    auto fail = [&](std::string why) {
        halted_ = true;
        halt_reason_ = std::move(why);
        return false;
    };
    if (block.height != next_height()) return fail("height conflict");
    if (block.prev_hash != head_hash()) return fail("previous-hash mismatch");
    if (block.compute_hash(meter) != block.block_hash) return fail("block-hash mismatch");
    for (const Transaction& tx : block.txs) {
        if (!tx.amounts_consistent()) return fail("inconsistent reward amount");
    }
    blocks_.push_back(block);
    return true;
}

std::map<Digest, std::int64_t> Ledger::balances() const {
    std::map<Digest, std::int64_t> out;
    for (const Block& b : blocks_) {
        for (const Transaction& tx : b.txs) out[tx.ev_ptd] += tx.reward_micro;
    }
    return out;
}

std::int64_t Ledger::total_rewards() const {
    std::int64_t sum = 0;
    for (const Block& b : blocks_) {
        for (const Transaction& tx : b.txs) sum += tx.reward_micro;
    }
    return sum;
}

Bytes Ledger::serialize() const {
    Bytes out;
    for (const Block& b : blocks_) {
        Bytes enc = b.encode();
        append_u32be(out, static_cast<std::uint32_t>(enc.size()));
        out.insert(out.end(), enc.begin(), enc.end());
    }
    return out;
}

void Ledger::save(const std::filesystem::path& path) const {
    Bytes data = serialize();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open ledger file for writing");
    f.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
}

VerifyReport verify_ledger_bytes(ByteView data) {
    VerifyReport report;
    crypto::OpCounters scratch;
    Digest prev = crypto::zero_digest();
    std::size_t pos = 0;
    std::uint64_t height = 0;
    while (pos < data.size()) {
        if (pos + 4 > data.size()) {
            report.fail_height = height;
            report.detail = "truncated record length";
            return report;
        }
        std::uint32_t len = read_u32be(data, pos);
        pos += 4;
        if (pos + len > data.size()) {
            report.fail_height = height;
            report.detail = "truncated block record";
            return report;
        }
        Block b;
        try {
            b = Block::decode(data.subspan(pos, len));
        } catch (const CodecError& e) {
            report.fail_height = height;
            report.detail = std::string("undecodable block: ") + e.what();
            return report;
        }
        pos += len;
        if (b.height != height) {
            report.fail_height = height;
            report.detail = "height mismatch";
            return report;
        }
        if (b.prev_hash != prev) {
            report.fail_height = height;
            report.detail = "previous-hash mismatch";
            return report;
        }
        if (b.compute_hash(scratch) != b.block_hash) {
            report.fail_height = height;
            report.detail = "block-hash mismatch";
            return report;
        }
        prev = b.block_hash;
        ++height;
    }
    report.ok = true;
    report.block_count = height;
    return report;
}

VerifyReport verify_ledger_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open ledger file: " + path.string());
    Bytes data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return verify_ledger_bytes(data);
}

// ---------------------------------------------------------------------------
// Consensus wire messages

namespace {
Bytes tagged_blob(MsgTag tag, const Bytes& inner) {
    Bytes out;
    out.push_back(static_cast<std::uint8_t>(tag));
    Bytes f = wire::field_blob(inner);
    out.insert(out.end(), f.begin(), f.end());
    return out;
}

Bytes blob_body(ByteView payload, MsgTag expect) {
    if (payload.empty() || payload[0] != static_cast<std::uint8_t>(expect)) {
        throw CodecError("message tag mismatch");
    }
    FieldReader r(payload.subspan(1));
    Bytes inner = r.read_blob();
    r.expect_end();
    return inner;
}
}  // namespace

Bytes encode_proposal(const Block& block) { return tagged_blob(MsgTag::Proposal, block.encode()); }
Block decode_proposal(ByteView payload) { return Block::decode(blob_body(payload, MsgTag::Proposal)); }

Bytes encode_vote_request(std::uint64_t height, const Digest& block_hash) {
    Bytes out;
    out.push_back(static_cast<std::uint8_t>(MsgTag::VoteRequest));
    for (const Bytes& f : {wire::field_u64(height), wire::field_digest(block_hash)}) {
        out.insert(out.end(), f.begin(), f.end());
    }
    return out;
}

void decode_vote_request(ByteView payload, std::uint64_t& height, Digest& block_hash) {
    if (payload.empty() || payload[0] != static_cast<std::uint8_t>(MsgTag::VoteRequest)) {
        throw CodecError("message tag mismatch");
    }
    FieldReader r(payload.subspan(1));
    height = r.read_u64();
    block_hash = r.read_digest();
    r.expect_end();
}

Bytes encode_vote(const Vote& vote) {
    Bytes out;
    out.push_back(static_cast<std::uint8_t>(MsgTag::Vote));
    for (const Bytes& f : {wire::field_u64(vote.voter), wire::field_u64(vote.height),
                           wire::field_digest(vote.block_hash),
                           wire::field_u64(vote.approve ? 1 : 0)}) {
        out.insert(out.end(), f.begin(), f.end());
    }
    return out;
}

Vote decode_vote(ByteView payload) {
    if (payload.empty() || payload[0] != static_cast<std::uint8_t>(MsgTag::Vote)) {
        throw CodecError("message tag mismatch");
    }
    FieldReader r(payload.subspan(1));
    Vote v;
    v.voter = static_cast<std::uint32_t>(r.read_u64());
    v.height = r.read_u64();
    v.block_hash = r.read_digest();
    v.approve = r.read_u64() != 0;
    r.expect_end();
    return v;
}

Bytes encode_commit(const Block& block) { return tagged_blob(MsgTag::Commit, block.encode()); }
Block decode_commit(ByteView payload) { return Block::decode(blob_body(payload, MsgTag::Commit)); }

Bytes encode_tx_submit(const Transaction& tx) { return tagged_blob(MsgTag::TxSubmit, tx.encode()); }
Transaction decode_tx_submit(ByteView payload) {
    return Transaction::decode(blob_body(payload, MsgTag::TxSubmit));
}

Bytes encode_tx_broadcast(const Transaction& tx) {
    return tagged_blob(MsgTag::TxBroadcast, tx.encode());
}
Transaction decode_tx_broadcast(ByteView payload) {
    return Transaction::decode(blob_body(payload, MsgTag::TxBroadcast));
}

const char* byzantine_name(Byzantine b) {
    switch (b) {
        case Byzantine::None: return "none";
        case Byzantine::RejectAll: return "reject_all";
        case Byzantine::Withhold: return "withhold";
        case Byzantine::SilentSpeaker: return "silent_speaker";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Replica

Replica::Replica(std::uint32_t index, ConsensusConfig cfg, Byzantine behavior)
    : index_(index), cfg_(cfg), behavior_(behavior) {
    if (index_ == 0 || index_ > cfg_.committee_size) {
        throw std::invalid_argument("replica index out of committee range");
    }
}

std::uint32_t Replica::expected_speaker(std::uint64_t height) const {
    return speaker_index(height, view_, cfg_);
}

void Replica::add_transaction(const Transaction& tx) {
    if (!tx.amounts_consistent()) return;
    mempool_.emplace(tx.hash(hash_meter_), tx);
}

std::vector<Replica::Out> Replica::on_interval(Tick now) {
    std::uint64_t next = ledger_.next_height();
    if (tick_seen_) {
        if (next == last_tick_height_ && last_tick_had_work_) {
            // Previous attempt produced no commit; retry under the next
            // speaker in the rotation.
            view_ += 1;
            retries_ += 1;
            pending_.reset();
        } else if (next != last_tick_height_) {
            view_ = 0;
        }
    }
    tick_seen_ = true;
    last_tick_height_ = next;
    last_tick_had_work_ = !mempool_.empty();

    std::vector<Out> out;
    if (mempool_.empty()) return out;
    if (expected_speaker(next) != index_) return out;
    // A Byzantine member never helps the protocol along from the speaker
    // seat; the rotation moves past it after one idle interval.
    if (behavior_ != Byzantine::None) return out;

    Block block;
    block.height = next;
    block.prev_hash = ledger_.head_hash();
    for (const auto& [hash, tx] : mempool_) block.txs.push_back(tx);  // hash order
    block.proposer = index_;
    block.timestamp = now;
    block.block_hash = block.compute_hash(hash_meter_);

    pending_ = Pending{block, {}, {}};
    seen_proposals_[block.block_hash] = block;

    out.push_back(Out{std::nullopt, false, encode_proposal(block)});
    out.push_back(Out{std::nullopt, false, encode_vote_request(block.height, block.block_hash)});
    return out;
}

void Replica::on_proposal(std::uint32_t, const Block& block) {
    seen_proposals_[block.block_hash] = block;
}

std::vector<Replica::Out> Replica::on_vote_request(std::uint32_t from, std::uint64_t height,
                                                   const Digest& block_hash) {
    std::vector<Out> out;
    if (from == index_) return out;
    // The speaker orchestrates but casts no ballot of its own.
    if (expected_speaker(height) == index_) return out;
    if (behavior_ == Byzantine::Withhold) return out;

    auto key = std::make_pair(height, block_hash);
    if (voted_on_.contains(key)) return out;
    voted_on_.insert(key);

    bool approve = false;
    auto it = seen_proposals_.find(block_hash);
    if (it != seen_proposals_.end()) {
        const Block& b = it->second;
        bool all_known = true;
        for (const Transaction& tx : b.txs) {
            if (!mempool_.contains(tx.hash(hash_meter_)) || !tx.amounts_consistent()) {
                all_known = false;
                break;
            }
        }
        approve = all_known && b.height == ledger_.next_height() &&
                  b.prev_hash == ledger_.head_hash() &&
                  b.proposer == expected_speaker(b.height) && b.proposer == from;
    }
    if (behavior_ == Byzantine::RejectAll) approve = false;

    out.push_back(Out{from, false, encode_vote(Vote{index_, height, block_hash, approve})});
    return out;
}

std::vector<Replica::Out> Replica::on_vote(const Vote& vote) {
    std::vector<Out> out;
    if (!pending_) return out;
    if (vote.block_hash != pending_->block.block_hash) return out;
    if (vote.voter == index_ || vote.voter == 0 || vote.voter > cfg_.committee_size) return out;
    if (pending_->voted.contains(vote.voter)) return out;
    pending_->voted.insert(vote.voter);
    if (vote.approve) pending_->approvals.insert(vote.voter);

    // The proposal carries the speaker's implicit approval.
    if (pending_->approvals.size() + 1 < cfg_.quorum()) return out;

    Block block = pending_->block;
    pending_.reset();
    if (!ledger_.append(block, hash_meter_)) return out;
    prune_mempool(block);
    view_ = 0;
    out.push_back(Out{std::nullopt, true, encode_commit(block)});
    return out;
}

bool Replica::on_commit(const Block& block) {
    if (block.height < ledger_.next_height()) return false;  // replayed commit
    if (!ledger_.append(block, hash_meter_)) return false;
    prune_mempool(block);
    if (pending_ && pending_->block.height == block.height) pending_.reset();
    view_ = 0;
    return true;
}

void Replica::prune_mempool(const Block& block) {
    for (const Transaction& tx : block.txs) mempool_.erase(tx.hash(hash_meter_));
}

}  // namespace v2g::consensus
