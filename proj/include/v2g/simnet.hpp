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
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "v2g/bytes.hpp"
#include "v2g/hash.hpp"
#include "v2g/messages.hpp"
#include "v2g/rng.hpp"

namespace v2g::sim {

using NodeId = std::uint32_t;

/// Registration and the physical metering path ride the secure channel; the
/// adversary only ever sees the open channel.
enum class Channel : std::uint8_t { Secure, Open };
const char* channel_name(Channel c);

/// Scenario configuration problem (bad rule, bad field index, bad file).
class ScenarioConfigError : public std::runtime_error {
public:
    explicit ScenarioConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A handler blew up mid-run; carries the offending event in the message.
class ScenarioFailure : public std::runtime_error {
public:
    explicit ScenarioFailure(const std::string& what) : std::runtime_error(what) {}
};

struct Delivery {
    Tick at = 0;
    std::uint64_t seq = 0;
    NodeId src = 0;
    NodeId dst = 0;
    Channel channel = Channel::Open;
    /// Transport-level correlation (per-session connection id). Not part of
    /// the wire bytes and never entering any token.
    std::uint64_t corr = 0;
    Bytes payload;
    bool adversary_made = false;
    std::string adv_note;
};

struct TimerEvent {
    Tick at = 0;
    std::uint64_t seq = 0;
    NodeId owner = 0;
    std::uint64_t tag = 0;
    std::uint64_t a = 0;
    std::uint64_t b = 0;
};

class Sim;

class Node {
public:
    virtual ~Node() = default;
    virtual const std::string& name() const = 0;
    virtual void on_message(Sim& sim, const Delivery& d) = 0;
    virtual void on_timer(Sim& sim, const TimerEvent& t) { (void)sim; (void)t; }
};

/// Incoming-traffic meter. Bytes cover every delivered message; tokens count
/// the top-level fields of the five auth messages only.
struct CommMeter {
    std::uint64_t incoming_tokens = 0;
    std::uint64_t incoming_bytes = 0;

    CommMeter delta_since(const CommMeter& base) const {
        return {incoming_tokens - base.incoming_tokens, incoming_bytes - base.incoming_bytes};
    }
};

struct TraceRecord {
    Tick tick = 0;
    std::string src;
    std::string dst;
    Channel channel = Channel::Open;
    std::optional<wire::MsgTag> tag;
    std::size_t len = 0;
    std::string verdict;
    Bytes payload;  // retained for post-run inspection, not rendered
};

struct AdversaryMatch {
    std::optional<wire::MsgTag> tag;
    std::optional<NodeId> src;
    std::optional<NodeId> dst;
    std::optional<std::uint32_t> nth;  // 1-based occurrence among matches
};

struct AdversaryAction {
    enum class Kind { Drop, Delay, Replay, Tamper, Spoof, Redirect };
    Kind kind = Kind::Drop;
    Tick delay_ms = 0;            // Delay, Replay
    std::size_t field_index = 0;  // Tamper
    Bytes set_bytes;              // Tamper; empty means flip one bit
    NodeId target = 0;            // Spoof: claimed source. Redirect: new destination.
};

struct AdversaryRule {
    AdversaryMatch match;
    AdversaryAction action;
    std::uint32_t seen = 0;
};

struct LinkConfig {
    Tick open_delay = 5;
    Tick open_jitter = 0;
    Tick secure_delay = 1;
};

/// Discrete-event loop with a single global virtual clock. Strictly
/// single-threaded; determinism comes from (time, sequence) ordering and
/// seeded jitter. Per-(src,dst,channel) delivery is FIFO, as on a
/// connection-oriented link; adversary-injected clones may break that order
/// on purpose.
class Sim {
public:
    Sim(LinkConfig links, std::uint64_t jitter_seed);

    NodeId add_node(Node* node);
    Node* node(NodeId id) const;
    const std::string& node_name(NodeId id) const;
    std::size_t node_count() const { return nodes_.size(); }

    void set_adversary(std::vector<AdversaryRule> rules) { rules_ = std::move(rules); }
    /// Lets spoof rules look up the pseudo identity a node registered under.
    using PtdResolver = std::function<std::optional<crypto::Digest>(NodeId)>;
    void set_ptd_resolver(PtdResolver resolver) { resolver_ = std::move(resolver); }

    void send(NodeId src, NodeId dst, Channel channel, Bytes payload,
              std::uint64_t corr = 0, Tick extra_delay = 0);
    void schedule_timer(NodeId owner, Tick at, std::uint64_t tag, std::uint64_t a = 0,
                        std::uint64_t b = 0);

    void run_until(Tick limit);

    Tick now() const { return clock_; }
    /// Handler-visible verdict for the delivery being processed.
    void set_verdict(const std::string& verdict);

    const std::vector<TraceRecord>& trace() const { return trace_; }
    std::string render_trace() const;
    const CommMeter& comm_meter(NodeId id) const;
    const std::map<NodeId, CommMeter>& comm_meters() const { return meters_; }

private:
    struct QueuedDelivery : Delivery {};
    void enqueue(Delivery d, bool fifo_clamp);
    void process_rules(Delivery& d, bool& dropped);
    void apply_action(const AdversaryAction& action, Delivery& d, bool& dropped);
    void dispatch(const Delivery& d);
    void dispatch(const TimerEvent& t);

    Tick clock_ = 0;
    std::uint64_t next_seq_ = 0;
    LinkConfig links_;
    Rng jitter_rng_;
    std::vector<Node*> nodes_;
    std::vector<AdversaryRule> rules_;
    PtdResolver resolver_;

    struct Event {
        Tick at;
        std::uint64_t seq;
        bool is_timer;
        Delivery delivery;
        TimerEvent timer;
    };
    struct EventLater {
        bool operator()(const Event& a, const Event& b) const {
            if (a.at != b.at) return a.at > b.at;
            return a.seq > b.seq;
        }
    };
    std::priority_queue<Event, std::vector<Event>, EventLater> queue_;

    std::map<std::tuple<NodeId, NodeId, Channel>, Tick> fifo_floor_;
    std::vector<TraceRecord> trace_;
    std::map<NodeId, CommMeter> meters_;
    TraceRecord* current_record_ = nullptr;
};

}  // namespace v2g::sim
