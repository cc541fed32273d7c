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

#include "v2g/world.hpp"

#include <algorithm>
#include <memory>
#include <set>
#include <sstream>

#include "v2g/entities.hpp"

namespace v2g::world {

using consensus::Replica;
using proto::Cag;
using proto::Cs;
using proto::Ev;
using scenario::ScenarioSpec;
using sim::Channel;
using sim::Delivery;
using sim::NodeId;
using sim::ScenarioConfigError;
using sim::Sim;
using sim::TimerEvent;
using wire::MsgTag;

namespace {

enum TimerTag : std::uint64_t {
    kRegSend = 1,
    kPlugIn,
    kSessionTimeoutCs,
    kSessionTimeoutEv,
    kCharge,
    kInterval,
};

std::string ev_true_id(std::uint32_t j) { return "EV-" + std::to_string(j); }
std::string cs_true_id(std::uint32_t i) { return "CS-" + std::to_string(i); }

class World;

class EvNode final : public sim::Node {
public:
    EvNode(World& w, std::uint32_t index, Ev ev)
        : w_(w), index_(index), ev_(std::move(ev)), name_("ev" + std::to_string(index)) {}

    void set_self(NodeId id) { self_ = id; }
    const std::string& name() const override { return name_; }
    void on_message(Sim& sim, const Delivery& d) override;
    void on_timer(Sim& sim, const TimerEvent& t) override;

    Ev& entity() { return ev_; }
    const Ev& entity() const { return ev_; }

private:
    World& w_;
    std::uint32_t index_;
    Ev ev_;
    std::string name_;
    NodeId self_ = 0;
};

class CsNode final : public sim::Node {
public:
    CsNode(World& w, std::uint32_t index, Cs cs, std::optional<Replica> replica,
           std::uint64_t rng_seed)
        : w_(w),
          index_(index),
          cs_(std::move(cs)),
          replica_(std::move(replica)),
          rng_(rng_seed),
          name_("cs" + std::to_string(index)) {}

    void set_self(NodeId id) { self_ = id; }
    const std::string& name() const override { return name_; }
    void on_message(Sim& sim, const Delivery& d) override;
    void on_timer(Sim& sim, const TimerEvent& t) override;

    Cs& entity() { return cs_; }
    const Cs& entity() const { return cs_; }
    Replica* replica() { return replica_ ? &*replica_ : nullptr; }
    const Replica* replica() const { return replica_ ? &*replica_ : nullptr; }

private:
    void route(Sim& sim, const std::vector<Replica::Out>& outs);
    void deliver_receipts(Sim& sim, const consensus::Block& block);
    void sync_receipts(Sim& sim);
    void verdict_from_session(Sim& sim, NodeId ev, proto::Phase before) const;

    World& w_;
    std::uint32_t index_;
    Cs cs_;
    std::optional<Replica> replica_;
    Rng rng_;
    std::string name_;
    NodeId self_ = 0;
    // session reference -> (run id, EV node) for receipt routing
    std::map<crypto::Digest, std::pair<std::uint64_t, NodeId>> ref_routes_;
    std::size_t receipts_done_ = 0;  // ledger blocks already receipted
};

class CagNode final : public sim::Node {
public:
    CagNode(World& w, Cag cag, std::uint64_t reg_seed)
        : w_(w), cag_(std::move(cag)), reg_rng_(reg_seed), name_("cag") {}

    void set_self(NodeId id) { self_ = id; }
    const std::string& name() const override { return name_; }
    void on_message(Sim& sim, const Delivery& d) override;

    Cag& entity() { return cag_; }
    const Cag& entity() const { return cag_; }
    const consensus::Ledger& ledger() const { return ledger_; }

private:
    World& w_;
    Cag cag_;
    Rng reg_rng_;
    std::string name_;
    NodeId self_ = 0;
    consensus::Ledger ledger_;
    crypto::OpCounters ledger_meter_;
    std::set<crypto::Digest> rewarded_refs_;
    std::vector<NodeId> registered_cs_nodes_;
};

class World {
public:
    explicit World(const ScenarioSpec& spec);
    RunArtifacts run();

    const ScenarioSpec& spec() const { return spec_; }
    const crypto::CurveParams& curve() const { return *curve_; }
    Tick window() const { return spec_.window_ms; }

    NodeId cag_id() const { return cag_id_; }
    NodeId cs_node(std::uint32_t index) const { return cs_ids_.at(index); }
    NodeId ev_node(std::uint32_t index) const { return ev_ids_.at(index); }
    const std::vector<NodeId>& cs_ids() const { return cs_ids_; }
    NodeId committee_node(std::uint32_t committee_index) const {
        return cs_ids_.at(committee_index - 1);
    }
    std::optional<std::uint32_t> committee_of(NodeId id) const;

    struct RunState {
        std::uint32_t ev = 0;
        std::uint32_t cs = 0;
        Tick at = 0;
        std::int64_t kwh_milli = 0;
        bool started = false;
        bool authenticated = false;
    };
    const RunState& run_state(std::uint64_t run_id) const { return runs_.at(run_id - 1); }

    void note_registered(NodeId node, const crypto::Digest& ptd, const std::string& id);
    void note_run_started(std::uint64_t run_id) { runs_.at(run_id - 1).started = true; }
    void note_run_authenticated(std::uint64_t run_id) {
        runs_.at(run_id - 1).authenticated = true;
    }
    void note_tx_created() { ++txs_created_; }
    void note_tx_broadcast(const consensus::Transaction& tx, Tick now);
    void note_committed(const consensus::Block& block, Tick now);
    void note_receipt() { ++receipts_; }

private:
    void build_nodes();
    void schedule_phase_events();
    std::vector<sim::AdversaryRule> resolve_adversary();
    NodeId resolve_entity(const std::string& name) const;
    RunArtifacts collect();

    const ScenarioSpec& spec_;
    const crypto::CurveParams* curve_;
    Sim sim_;

    std::unique_ptr<CagNode> cag_node_;
    std::vector<std::unique_ptr<CsNode>> cs_nodes_;
    std::vector<std::unique_ptr<EvNode>> ev_nodes_;
    NodeId cag_id_ = 0;
    std::vector<NodeId> cs_ids_;
    std::vector<NodeId> ev_ids_;

    std::map<NodeId, crypto::Digest> ptds_;
    std::vector<std::string> registered_ids_;
    std::vector<RunState> runs_;

    std::map<crypto::Digest, RunArtifacts::TxTiming> txs_;
    std::uint64_t txs_created_ = 0;
    std::uint64_t txs_broadcast_ = 0;
    std::uint64_t receipts_ = 0;
    std::int64_t committed_reward_accum_ = 0;
    std::vector<consensus::Block> committed_;
    crypto::OpCounters scratch_hash_;

    struct Baseline {
        crypto::OpCounters ops;
        sim::CommMeter comm;
    };
    std::map<NodeId, Baseline> baseline_;

    friend class EvNode;
    friend class CsNode;
    friend class CagNode;
};

// ---------------------------------------------------------------------------
// EvNode

void EvNode::on_message(Sim& sim, const Delivery& d) {
    try {
        auto tag = wire::peek_tag(d.payload);
        if (!tag) {
            sim.set_verdict("unknown-tag");
            return;
        }
        switch (*tag) {
            case MsgTag::RegResponse: {
                ev_.complete_registration(wire::RegResponse::decode(d.payload, w_.curve()));
                w_.note_registered(self_, ev_.ptd(), ev_.true_id());
                break;
            }
            case MsgTag::M1: {
                if (!ev_.registered()) {
                    sim.set_verdict("unregistered");
                    return;
                }
                auto m1 = wire::M1::decode(d.payload, w_.curve());
                const auto* pre1 = ev_.session(d.src);
                proto::Phase before1 = pre1 ? pre1->phase : proto::Phase::Start;
                auto m2 = ev_.handle_m1(d.src, m1, d.corr, sim.now(), w_.window());
                if (!m2) {
                    const auto* s = ev_.session(d.src);
                    if (s && s->phase == proto::Phase::Terminated &&
                        before1 != proto::Phase::Terminated) {
                        sim.set_verdict("terminated: " + s->fail_reason);
                    } else {
                        sim.set_verdict("rejected: stale T_CS");
                    }
                    return;
                }
                sim.send(self_, d.src, Channel::Open, m2->encode(w_.curve()), d.corr);
                sim.schedule_timer(self_, sim.now() + w_.spec().session_timeout_ms,
                                   kSessionTimeoutEv, d.src, d.corr);
                break;
            }
            case MsgTag::M5: {
                if (!ev_.registered()) {
                    sim.set_verdict("unregistered");
                    return;
                }
                auto m5 = wire::M5::decode(d.payload, w_.curve());
                const auto* pre5 = ev_.session(d.src);
                proto::Phase before5 = pre5 ? pre5->phase : proto::Phase::Start;
                bool ok = ev_.handle_m5(d.src, m5, sim.now(), w_.window());
                const auto* s = ev_.session(d.src);
                if (!ok) {
                    if (s && s->phase == proto::Phase::Terminated &&
                        before5 != proto::Phase::Terminated) {
                        sim.set_verdict("terminated: " + s->fail_reason);
                    } else if (s && s->phase == proto::Phase::Terminated) {
                        sim.set_verdict("ignored");
                    } else {
                        sim.set_verdict("rejected: no matching session state");
                    }
                    return;
                }
                sim.set_verdict("authenticated");
                w_.note_run_authenticated(s->run_id);
                if (w_.spec().consensus_enabled) {
                    sim.schedule_timer(self_, sim.now() + w_.spec().charge_ms, kCharge,
                                       s->run_id, d.src);
                }
                break;
            }
            case MsgTag::Receipt: {
                wire::Receipt::decode(d.payload, w_.curve());
                w_.note_receipt();
                break;
            }
            default:
                sim.set_verdict("unexpected-tag");
        }
    } catch (const CodecError& e) {
        sim.set_verdict(std::string("malformed: ") + e.what());
    }
}

void EvNode::on_timer(Sim& sim, const TimerEvent& t) {
    switch (t.tag) {
        case kRegSend: {
            wire::RegRequest req = ev_.make_registration(sim.now());
            sim.send(self_, w_.cag_id(), Channel::Secure, req.encode(w_.curve()));
            break;
        }
        case kSessionTimeoutEv: {
            NodeId cs = static_cast<NodeId>(t.a);
            const auto* s = ev_.session(cs);
            if (s && s->run_id == t.b) ev_.timeout_session(cs, sim.now());
            break;
        }
        case kCharge: {
            std::uint64_t run_id = t.a;
            NodeId cs = static_cast<NodeId>(t.b);
            const auto* s = ev_.session(cs);
            if (!s || s->run_id != run_id || s->phase != proto::Phase::Authenticated) break;
            wire::EnergyRecord rec{s->auth_ev_cag, w_.run_state(run_id).kwh_milli};
            // The meter reading travels over the physical attachment, which
            // the network adversary cannot touch.
            sim.send(self_, cs, Channel::Secure, rec.encode(w_.curve()), run_id);
            break;
        }
        default:
            break;
    }
}

// ---------------------------------------------------------------------------
// CsNode

void CsNode::verdict_from_session(Sim& sim, NodeId ev, proto::Phase before) const {
    const auto* s = cs_.session(ev);
    if (s && s->phase == proto::Phase::Terminated && before != proto::Phase::Terminated) {
        sim.set_verdict("terminated: " + s->fail_reason);
    } else {
        sim.set_verdict("ignored");
    }
}

void CsNode::on_message(Sim& sim, const Delivery& d) {
    try {
        auto tag = wire::peek_tag(d.payload);
        if (!tag) {
            sim.set_verdict("unknown-tag");
            return;
        }
        switch (*tag) {
            case MsgTag::RegResponse: {
                cs_.complete_registration(wire::RegResponse::decode(d.payload, w_.curve()));
                w_.note_registered(self_, cs_.ptd(), cs_.true_id());
                break;
            }
            case MsgTag::RegistryPush: {
                auto push = wire::RegistryPush::decode(d.payload, w_.curve());
                cs_.registry_update(push.entries);
                break;
            }
            case MsgTag::M2: {
                if (!cs_.registered()) {
                    sim.set_verdict("unregistered");
                    return;
                }
                auto m2 = wire::M2::decode(d.payload, w_.curve());
                const auto* pre = cs_.session(d.src);
                proto::Phase before = pre ? pre->phase : proto::Phase::Start;
                auto m3 = cs_.handle_m2(d.src, m2, rng_, sim.now(), w_.window());
                if (!m3) {
                    verdict_from_session(sim, d.src, before);
                    return;
                }
                const auto* s = cs_.session(d.src);
                ref_routes_[s->auth_ev_cag] = {s->run_id, d.src};
                sim.send(self_, w_.cag_id(), Channel::Open, m3->encode(w_.curve()), d.corr);
                break;
            }
            case MsgTag::M4: {
                if (!cs_.registered()) {
                    sim.set_verdict("unregistered");
                    return;
                }
                auto m4 = wire::M4::decode(d.payload, w_.curve());
                const auto* pre4 = cs_.session_by_run(d.corr);
                proto::Phase before4 = pre4 ? pre4->phase : proto::Phase::Start;
                auto m5 = cs_.handle_m4(d.corr, m4, sim.now(), w_.window());
                if (!m5) {
                    auto* s = cs_.session_by_run(d.corr);
                    if (s && s->phase == proto::Phase::Terminated &&
                        before4 != proto::Phase::Terminated) {
                        sim.set_verdict("terminated: " + s->fail_reason);
                    } else {
                        sim.set_verdict("ignored");
                    }
                    return;
                }
                auto peer = cs_.peer_of_run(d.corr);
                if (!peer) {
                    sim.set_verdict("ignored");
                    return;
                }
                sim.send(self_, *peer, Channel::Open, m5->encode(w_.curve()), d.corr);
                break;
            }
            case MsgTag::EnergyRecord: {
                if (!w_.spec().consensus_enabled) {
                    sim.set_verdict("service-settled");
                    return;
                }
                auto rec = wire::EnergyRecord::decode(d.payload, w_.curve());
                const auto* s = cs_.settle(d.src, rec.session_ref);
                if (!s) {
                    sim.set_verdict("rejected: no authenticated session");
                    return;
                }
                auto tx = consensus::make_transaction(s->ptd_ev, cs_.ptd(),
                                                      rec.energy_milli_kwh,
                                                      w_.spec().price_milli,
                                                      rec.session_ref, sim.now());
                w_.note_tx_created();
                sim.send(self_, w_.cag_id(), Channel::Open,
                         consensus::encode_tx_submit(tx), d.corr);
                break;
            }
            case MsgTag::TxBroadcast: {
                if (!replica_) return;
                replica_->add_transaction(consensus::decode_tx_broadcast(d.payload));
                break;
            }
            case MsgTag::Proposal: {
                if (!replica_) return;
                auto from = w_.committee_of(d.src);
                if (!from) return;
                replica_->on_proposal(*from, consensus::decode_proposal(d.payload));
                break;
            }
            case MsgTag::VoteRequest: {
                if (!replica_) return;
                auto from = w_.committee_of(d.src);
                if (!from) return;
                std::uint64_t height = 0;
                crypto::Digest hash{};
                consensus::decode_vote_request(d.payload, height, hash);
                route(sim, replica_->on_vote_request(*from, height, hash));
                break;
            }
            case MsgTag::Vote: {
                if (!replica_) return;
                route(sim, replica_->on_vote(consensus::decode_vote(d.payload)));
                break;
            }
            case MsgTag::Commit: {
                if (!replica_) return;
                auto block = consensus::decode_commit(d.payload);
                if (replica_->on_commit(block)) {
                    sync_receipts(sim);
                } else if (replica_->ledger().halted()) {
                    sim.set_verdict("halted: " + replica_->ledger().halt_reason());
                } else {
                    sim.set_verdict("stale-commit");
                }
                break;
            }
            default:
                sim.set_verdict("unexpected-tag");
        }
    } catch (const CodecError& e) {
        sim.set_verdict(std::string("malformed: ") + e.what());
    }
}

void CsNode::on_timer(Sim& sim, const TimerEvent& t) {
    switch (t.tag) {
        case kRegSend: {
            wire::RegRequest req = cs_.make_registration(sim.now());
            sim.send(self_, w_.cag_id(), Channel::Secure, req.encode(w_.curve()));
            break;
        }
        case kPlugIn: {
            std::uint64_t run_id = t.a;
            if (!cs_.registered()) break;  // never registered; run cannot start
            const auto& plan = w_.run_state(run_id);
            NodeId ev = w_.ev_node(plan.ev);
            wire::M1 m1 = cs_.start_session(ev, run_id, rng_, sim.now());
            w_.note_run_started(run_id);
            sim.send(self_, ev, Channel::Open, m1.encode(w_.curve()), run_id);
            sim.schedule_timer(self_, sim.now() + w_.spec().session_timeout_ms,
                               kSessionTimeoutCs, ev, run_id);
            break;
        }
        case kSessionTimeoutCs: {
            NodeId ev = static_cast<NodeId>(t.a);
            const auto* s = cs_.session(ev);
            if (s && s->run_id == t.b) cs_.timeout_session(ev, sim.now());
            break;
        }
        case kInterval: {
            if (replica_) route(sim, replica_->on_interval(sim.now()));
            Tick next = sim.now() + w_.spec().block_interval_ms;
            if (next <= w_.spec().stop_ms) sim.schedule_timer(self_, next, kInterval);
            break;
        }
        default:
            break;
    }
}

void CsNode::route(Sim& sim, const std::vector<Replica::Out>& outs) {
    for (const Replica::Out& out : outs) {
        if (out.to) {
            sim.send(self_, w_.committee_node(*out.to), Channel::Open, out.payload);
        } else {
            for (NodeId peer : w_.cs_ids()) {
                if (peer != self_) sim.send(self_, peer, Channel::Open, out.payload);
            }
        }
        if (out.also_observer) {
            sim.send(self_, w_.cag_id(), Channel::Open, out.payload);
        }
    }
    // A committing speaker appends locally without a loopback message, so
    // receipts are synced here as well as on remote commits.
    sync_receipts(sim);
}

void CsNode::sync_receipts(Sim& sim) {
    if (!replica_) return;
    const auto& blocks = replica_->ledger().blocks();
    while (receipts_done_ < blocks.size()) {
        deliver_receipts(sim, blocks[receipts_done_]);
        ++receipts_done_;
    }
}

void CsNode::deliver_receipts(Sim& sim, const consensus::Block& block) {
    for (const consensus::Transaction& tx : block.txs) {
        if (!cs_.registered() || !(tx.cs_ptd == cs_.ptd())) continue;
        auto it = ref_routes_.find(tx.session_ref);
        if (it == ref_routes_.end()) continue;
        crypto::OpCounters scratch;
        wire::Receipt receipt{tx.hash(scratch), block.height};
        sim.send(self_, it->second.second, Channel::Open, receipt.encode(w_.curve()),
                 it->second.first);
    }
}

// ---------------------------------------------------------------------------
// CagNode

void CagNode::on_message(Sim& sim, const Delivery& d) {
    try {
        auto tag = wire::peek_tag(d.payload);
        if (!tag) {
            sim.set_verdict("unknown-tag");
            return;
        }
        switch (*tag) {
            case MsgTag::RegRequest: {
                auto req = wire::RegRequest::decode(d.payload, w_.curve());
                auto outcome = cag_.handle_registration(req, reg_rng_, sim.now(),
                                                        w_.window());
                if (!outcome.response) {
                    sim.set_verdict("rejected: " + outcome.reject_reason);
                    return;
                }
                sim.send(self_, d.src, Channel::Secure,
                         outcome.response->encode(w_.curve()));
                if (req.role == wire::Role::Cs) {
                    registered_cs_nodes_.push_back(d.src);
                    // New station gets the full registry snapshot.
                    wire::RegistryPush snapshot{cag_.registry()};
                    sim.send(self_, d.src, Channel::Secure, snapshot.encode(w_.curve()));
                }
                // Everyone already on line learns the newcomer.
                wire::RegistryPush update{{cag_.registry().back()}};
                for (NodeId cs : registered_cs_nodes_) {
                    if (cs != d.src) sim.send(self_, cs, Channel::Secure,
                                              update.encode(w_.curve()));
                }
                break;
            }
            case MsgTag::M3: {
                auto m3 = wire::M3::decode(d.payload, w_.curve());
                auto m4 = cag_.handle_m3(m3, sim.now(), w_.window());
                if (!m4) {
                    sim.set_verdict("rejected: " + cag_.last_reject_reason());
                    return;
                }
                sim.send(self_, d.src, Channel::Open, m4->encode(w_.curve()), d.corr);
                break;
            }
            case MsgTag::TxSubmit: {
                auto tx = consensus::decode_tx_submit(d.payload);
                bool valid = cag_.validate_reward_claim(tx.session_ref, tx.ev_ptd,
                                                        tx.cs_ptd) &&
                             tx.amounts_consistent() &&
                             tx.price_milli == w_.spec().price_milli &&
                             !rewarded_refs_.contains(tx.session_ref);
                if (!valid) {
                    sim.set_verdict("tx-rejected");
                    return;
                }
                rewarded_refs_.insert(tx.session_ref);
                w_.note_tx_broadcast(tx, sim.now());
                Bytes bcast = consensus::encode_tx_broadcast(tx);
                for (NodeId cs : registered_cs_nodes_) {
                    sim.send(self_, cs, Channel::Open, bcast);
                }
                break;
            }
            case MsgTag::Commit: {
                auto block = consensus::decode_commit(d.payload);
                if (block.height < ledger_.next_height()) {
                    sim.set_verdict("stale-commit");
                    return;
                }
                if (ledger_.append(block, ledger_meter_)) {
                    w_.note_committed(block, sim.now());
                } else {
                    sim.set_verdict("halted: " + ledger_.halt_reason());
                }
                break;
            }
            default:
                sim.set_verdict("unexpected-tag");
        }
    } catch (const CodecError& e) {
        sim.set_verdict(std::string("malformed: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// World

World::World(const ScenarioSpec& spec)
    : spec_(spec),
      curve_(&crypto::CurveParams::by_name(spec.curve)),
      sim_(sim::LinkConfig{spec.open_delay_ms, spec.open_jitter_ms, spec.secure_delay_ms},
           mix_seed(spec.seed, "jitter", 0)) {
    spec_.validate();
    build_nodes();
}

void World::build_nodes() {
    Rng cag_rng(mix_seed(spec_.seed, "cag", 0));
    Cag cag(*curve_, cag_rng);
    proto::PublicParams params = cag.public_params();

    cag_node_ = std::make_unique<CagNode>(*this, std::move(cag),
                                          mix_seed(spec_.seed, "registrar", 0));
    cag_id_ = sim_.add_node(cag_node_.get());
    cag_node_->set_self(cag_id_);

    consensus::ConsensusConfig cfg;
    cfg.committee_size = spec_.num_css;
    cfg.speaker_term = spec_.speaker_term;
    cfg.block_interval = spec_.block_interval_ms;
    cfg.literal_speaker_formula = spec_.literal_speaker_formula;

    for (std::uint32_t i = 0; i < spec_.num_css; ++i) {
        std::optional<Replica> replica;
        if (spec_.consensus_enabled) {
            auto byz = consensus::Byzantine::None;
            auto it = spec_.byzantine.find(i);
            if (it != spec_.byzantine.end()) byz = it->second;
            replica.emplace(i + 1, cfg, byz);
        }
        auto node = std::make_unique<CsNode>(*this, i, Cs(cs_true_id(i), params),
                                             std::move(replica),
                                             mix_seed(spec_.seed, "cs", i));
        NodeId id = sim_.add_node(node.get());
        node->set_self(id);
        cs_ids_.push_back(id);
        cs_nodes_.push_back(std::move(node));
    }
    for (std::uint32_t j = 0; j < spec_.num_evs; ++j) {
        auto node = std::make_unique<EvNode>(*this, j, Ev(ev_true_id(j), params));
        NodeId id = sim_.add_node(node.get());
        node->set_self(id);
        ev_ids_.push_back(id);
        ev_nodes_.push_back(std::move(node));
    }

    for (const std::string& id : spec_.revoked) cag_node_->entity().revoke(id);

    sim_.set_ptd_resolver([this](NodeId id) -> std::optional<crypto::Digest> {
        auto it = ptds_.find(id);
        if (it == ptds_.end()) return std::nullopt;
        return it->second;
    });
    sim_.set_adversary(resolve_adversary());
}

NodeId World::resolve_entity(const std::string& name) const {
    if (name == "cag") return cag_id_;
    auto parse_index = [&](const char* prefix) -> std::optional<std::uint32_t> {
        std::string p(prefix);
        if (name.rfind(p, 0) != 0 || name.size() <= p.size()) return std::nullopt;
        std::uint32_t v = 0;
        for (char c : name.substr(p.size())) {
            if (c < '0' || c > '9') return std::nullopt;
            v = v * 10 + static_cast<std::uint32_t>(c - '0');
        }
        return v;
    };
    if (auto i = parse_index("cs")) {
        if (*i < cs_ids_.size()) return cs_ids_[*i];
    }
    if (auto j = parse_index("ev")) {
        if (*j < ev_ids_.size()) return ev_ids_[*j];
    }
    throw ScenarioConfigError("adversary rule references unknown entity: " + name);
}

std::vector<sim::AdversaryRule> World::resolve_adversary() {
    std::vector<sim::AdversaryRule> rules;
    for (const scenario::AdvRuleSpec& spec : spec_.adversary) {
        sim::AdversaryRule rule;
        if (spec.tag) {
            static const std::map<std::string, MsgTag> kTags{
                {"M1", MsgTag::M1}, {"M2", MsgTag::M2}, {"M3", MsgTag::M3},
                {"M4", MsgTag::M4}, {"M5", MsgTag::M5}};
            auto it = kTags.find(*spec.tag);
            if (it == kTags.end()) {
                throw ScenarioConfigError("adversary rule matches unknown tag: " + *spec.tag);
            }
            rule.match.tag = it->second;
        }
        if (spec.src) rule.match.src = resolve_entity(*spec.src);
        if (spec.dst) rule.match.dst = resolve_entity(*spec.dst);
        rule.match.nth = spec.nth;

        using Kind = sim::AdversaryAction::Kind;
        if (spec.action == "drop") rule.action.kind = Kind::Drop;
        else if (spec.action == "delay") rule.action.kind = Kind::Delay;
        else if (spec.action == "replay") rule.action.kind = Kind::Replay;
        else if (spec.action == "tamper") rule.action.kind = Kind::Tamper;
        else if (spec.action == "spoof") rule.action.kind = Kind::Spoof;
        else if (spec.action == "redirect") rule.action.kind = Kind::Redirect;
        else throw ScenarioConfigError("unknown adversary action: " + spec.action);

        rule.action.delay_ms = spec.delay_ms;
        rule.action.field_index = spec.field_index;
        if (!spec.set_hex.empty()) rule.action.set_bytes = from_hex(spec.set_hex);
        if (!spec.target.empty()) rule.action.target = resolve_entity(spec.target);
        rules.push_back(std::move(rule));
    }
    return rules;
}

std::optional<std::uint32_t> World::committee_of(NodeId id) const {
    for (std::uint32_t i = 0; i < cs_ids_.size(); ++i) {
        if (cs_ids_[i] == id) return i + 1;
    }
    return std::nullopt;
}

void World::note_registered(NodeId node, const crypto::Digest& ptd, const std::string& id) {
    ptds_[node] = ptd;
    registered_ids_.push_back(id);
}

void World::note_tx_broadcast(const consensus::Transaction& tx, Tick now) {
    ++txs_broadcast_;
    crypto::Digest h = tx.hash(scratch_hash_);
    auto& timing = txs_[h];
    timing.tx_hash = h;
    timing.broadcast_at = now;
}

void World::note_committed(const consensus::Block& block, Tick now) {
    committed_.push_back(block);
    for (const consensus::Transaction& tx : block.txs) {
        committed_reward_accum_ += tx.reward_micro;
        crypto::Digest h = tx.hash(scratch_hash_);
        auto it = txs_.find(h);
        if (it != txs_.end() && !it->second.committed_at) it->second.committed_at = now;
    }
}

void World::schedule_phase_events() {
    for (std::uint32_t i = 0; i < spec_.num_css; ++i) {
        sim_.schedule_timer(cs_ids_[i], 10 + 20 * i, kRegSend);
    }
    for (std::uint32_t j = 0; j < spec_.num_evs; ++j) {
        sim_.schedule_timer(ev_ids_[j], 600 + 20 * j, kRegSend);
    }
    std::uint64_t run_id = 1;
    for (const scenario::SessionPlan& plan : spec_.sessions) {
        runs_.push_back(RunState{plan.ev, plan.cs, plan.at, plan.kwh_milli, false, false});
        sim_.schedule_timer(cs_ids_[plan.cs], plan.at, kPlugIn, run_id);
        ++run_id;
    }
    if (spec_.consensus_enabled) {
        for (NodeId cs : cs_ids_) {
            sim_.schedule_timer(cs, spec_.block_interval_ms, kInterval);
        }
    }
}

RunArtifacts World::run() {
    schedule_phase_events();

    Tick auth_start = spec_.stop_ms;
    for (const auto& plan : spec_.sessions) auth_start = std::min(auth_start, plan.at);
    Tick snapshot_at = auth_start > 0 ? auth_start - 1 : 0;
    sim_.run_until(snapshot_at);

    std::size_t expected = 0;
    auto revoked = [&](const std::string& id) {
        return std::find(spec_.revoked.begin(), spec_.revoked.end(), id) !=
               spec_.revoked.end();
    };
    for (std::uint32_t i = 0; i < spec_.num_css; ++i) expected += revoked(cs_true_id(i)) ? 0 : 1;
    for (std::uint32_t j = 0; j < spec_.num_evs; ++j) expected += revoked(ev_true_id(j)) ? 0 : 1;
    if (!spec_.sessions.empty() && registered_ids_.size() != expected) {
        throw ScenarioConfigError(
            "sessions begin before registration completes; move plug-ins later");
    }

    for (std::uint32_t j = 0; j < spec_.num_evs; ++j) {
        baseline_[ev_ids_[j]] = {ev_nodes_[j]->entity().meter(), sim_.comm_meter(ev_ids_[j])};
    }
    for (std::uint32_t i = 0; i < spec_.num_css; ++i) {
        baseline_[cs_ids_[i]] = {cs_nodes_[i]->entity().meter(), sim_.comm_meter(cs_ids_[i])};
    }
    baseline_[cag_id_] = {cag_node_->entity().meter(), sim_.comm_meter(cag_id_)};

    sim_.run_until(spec_.stop_ms);
    return collect();
}

RunArtifacts World::collect() {
    RunArtifacts art;
    report::MetricsReport& m = art.metrics;
    m.scenario = spec_.name;
    m.curve = spec_.curve;
    m.seed = spec_.seed;

    auto add_role = [&](const char* role, NodeId id, const crypto::OpCounters& ops) {
        const Baseline& base = baseline_.at(id);
        crypto::OpCounters d = ops.delta_since(base.ops);
        sim::CommMeter c = sim_.comm_meter(id).delta_since(base.comm);
        report::RoleFigures& f = m.auth_phase[role];
        f.ecm += d.ecm_count;
        f.hash += d.hash_count;
        f.tokens_in += c.incoming_tokens;
        f.bytes_in += c.incoming_bytes;
    };
    for (std::uint32_t j = 0; j < spec_.num_evs; ++j) {
        add_role("EV", ev_ids_[j], ev_nodes_[j]->entity().meter());
    }
    for (std::uint32_t i = 0; i < spec_.num_css; ++i) {
        add_role("CS", cs_ids_[i], cs_nodes_[i]->entity().meter());
    }
    add_role("CAG", cag_id_, cag_node_->entity().meter());

    // Per-run outcomes.
    bool stray_authenticated = false;
    for (const auto& node : ev_nodes_) {
        for (const auto& [peer, s] : node->entity().sessions()) {
            bool planned = s.run_id >= 1 && s.run_id <= runs_.size() &&
                           runs_[s.run_id - 1].started;
            if (s.phase == proto::Phase::Authenticated && !planned) {
                stray_authenticated = true;
            }
        }
    }
    m.runs_total = runs_.size();
    for (std::size_t i = 0; i < runs_.size(); ++i) {
        const RunState& r = runs_[i];
        RunArtifacts::RunInfo info;
        info.ev = r.ev;
        info.cs = r.cs;
        info.planned_at = r.at;
        info.started = r.started;
        info.authenticated = r.authenticated;
        info.terminated = r.started && !r.authenticated;
        const auto* es = ev_nodes_[r.ev]->entity().session(cs_ids_[r.cs]);
        info.ev_phase = es && es->run_id == i + 1 ? proto::phase_name(es->phase) : "-";
        const auto* ss = cs_nodes_[r.cs]->entity().session(ev_ids_[r.ev]);
        info.cs_phase = ss && ss->run_id == i + 1 ? proto::phase_name(ss->phase) : "-";
        if (r.authenticated) ++m.runs_authenticated;
        if (info.terminated) ++m.runs_terminated;
        art.runs.push_back(std::move(info));
    }

    // Consensus view.
    const consensus::Ledger& cag_ledger = cag_node_->ledger();
    m.blocks_committed = cag_ledger.blocks().size();
    m.txs_created = txs_created_;
    m.txs_broadcast = txs_broadcast_;
    for (const auto& b : cag_ledger.blocks()) m.txs_committed += b.txs.size();
    m.receipts_delivered = receipts_;
    m.reward_committed_micro = committed_reward_accum_;
    for (const auto& [ptd, balance] : cag_ledger.balances()) {
        (void)ptd;
        m.ev_balance_total_micro += balance;
    }
    std::uint64_t retries = 0;
    for (const auto& node : cs_nodes_) {
        if (node->replica()) retries = std::max(retries, node->replica()->retries());
    }
    m.consensus_retries = retries;

    // Prefix consistency across every replica plus the aggregator's copy.
    std::vector<const consensus::Ledger*> ledgers{&cag_ledger};
    for (const auto& node : cs_nodes_) {
        if (node->replica()) ledgers.push_back(&node->replica()->ledger());
    }
    for (std::size_t a = 0; a < ledgers.size() && m.replicas_prefix_consistent; ++a) {
        for (std::size_t b = a + 1; b < ledgers.size(); ++b) {
            const auto& ba = ledgers[a]->blocks();
            const auto& bb = ledgers[b]->blocks();
            std::size_t shared = std::min(ba.size(), bb.size());
            for (std::size_t h = 0; h < shared; ++h) {
                if (!(ba[h].block_hash == bb[h].block_hash)) {
                    m.replicas_prefix_consistent = false;
                    break;
                }
            }
            if (!m.replicas_prefix_consistent) break;
        }
    }

    bool all_started_terminated = !runs_.empty();
    for (const RunState& r : runs_) {
        if (!r.started || r.authenticated) all_started_terminated = false;
    }
    m.attack_defeated = all_started_terminated && m.runs_authenticated == 0 &&
                        !stray_authenticated && txs_created_ == 0 &&
                        m.blocks_committed == 0;

    // Expectations.
    const scenario::Expectations& e = spec_.expect;
    auto fail = [&](const std::string& msg) { m.failures.push_back(msg); };
    auto check_u64 = [&](const std::optional<std::uint64_t>& want, std::uint64_t got,
                         const char* what) {
        if (want && *want != got) {
            std::ostringstream oss;
            oss << what << ": expected " << *want << ", got " << got;
            fail(oss.str());
        }
    };
    check_u64(e.runs_authenticated, m.runs_authenticated, "runs_authenticated");
    if (e.runs_terminated_all && m.runs_terminated != m.runs_total) {
        std::ostringstream oss;
        oss << "runs_terminated: expected all (" << m.runs_total << "), got "
            << m.runs_terminated;
        fail(oss.str());
    }
    check_u64(e.runs_terminated, m.runs_terminated, "runs_terminated");
    if (e.attack_defeated && *e.attack_defeated != m.attack_defeated) {
        fail(m.attack_defeated ? "attack unexpectedly defeated" : "attack not defeated");
    }
    if (e.min_blocks && m.blocks_committed < *e.min_blocks) {
        std::ostringstream oss;
        oss << "blocks: expected at least " << *e.min_blocks << ", got "
            << m.blocks_committed;
        fail(oss.str());
    }
    check_u64(e.blocks, m.blocks_committed, "blocks");
    check_u64(e.txs_committed, m.txs_committed, "txs_committed");
    if (e.reward_total_micro && *e.reward_total_micro != m.reward_committed_micro) {
        fail("reward_total: expected " + consensus::format_micro(*e.reward_total_micro) +
             ", got " + consensus::format_micro(m.reward_committed_micro));
    }

    if (m.attack_defeated && e.attack_defeated && *e.attack_defeated) {
        m.verdicts.push_back("attack defeated");
    }
    m.verdicts.push_back(m.failures.empty() ? "scenario completed"
                                            : "scenario assertions failed");

    art.trace = sim_.trace();
    art.trace_text = sim_.render_trace();
    art.ledger_bytes = cag_ledger.serialize();
    art.committed_blocks = cag_ledger.blocks();
    art.registered_ids = registered_ids_;
    for (const auto& [hash, timing] : txs_) art.tx_timings.push_back(timing);
    return art;
}

}  // namespace

RunArtifacts run_scenario(const scenario::ScenarioSpec& spec) {
    World w(spec);
    return w.run();
}

}  // namespace v2g::world
