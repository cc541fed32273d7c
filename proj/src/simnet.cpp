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

#include "v2g/simnet.hpp"

#include <sstream>

#include "v2g/codec.hpp"

namespace v2g::sim {

const char* channel_name(Channel c) { return c == Channel::Secure ? "secure" : "open"; }

Sim::Sim(LinkConfig links, std::uint64_t jitter_seed)
    : links_(links), jitter_rng_(jitter_seed) {}

NodeId Sim::add_node(Node* node) {
    nodes_.push_back(node);
    NodeId id = static_cast<NodeId>(nodes_.size() - 1);
    meters_[id];  // materialize the meter row
    return id;
}

Node* Sim::node(NodeId id) const {
    if (id >= nodes_.size()) throw std::out_of_range("unknown node id");
    return nodes_[id];
}

const std::string& Sim::node_name(NodeId id) const { return node(id)->name(); }

const CommMeter& Sim::comm_meter(NodeId id) const { return meters_.at(id); }

void Sim::set_verdict(const std::string& verdict) {
    if (current_record_) current_record_->verdict = verdict;
}

namespace {

bool rule_matches(AdversaryRule& rule, const Delivery& d) {
    const AdversaryMatch& m = rule.match;
    if (m.tag) {
        auto tag = wire::peek_tag(d.payload);
        if (!tag || *tag != *m.tag) return false;
    }
    if (m.src && *m.src != d.src) return false;
    if (m.dst && *m.dst != d.dst) return false;
    rule.seen += 1;
    if (m.nth && *m.nth != rule.seen) return false;
    return true;
}

void append_note(Delivery& d, const std::string& note) {
    if (!d.adv_note.empty()) d.adv_note += ",";
    d.adv_note += note;
}

}  // namespace

void Sim::apply_action(const AdversaryAction& action, Delivery& d, bool& dropped) {
    using Kind = AdversaryAction::Kind;
    switch (action.kind) {
        case Kind::Drop:
            dropped = true;
            append_note(d, "drop");
            break;
        case Kind::Delay:
            d.at += action.delay_ms;
            append_note(d, "delay");
            break;
        case Kind::Replay: {
            Delivery clone = d;
            clone.at = d.at + action.delay_ms;
            clone.adversary_made = true;
            clone.adv_note = "replayed";
            enqueue(std::move(clone), false);
            append_note(d, "replay-cloned");
            break;
        }
        case Kind::Tamper: {
            if (d.payload.empty()) throw ScenarioConfigError("tamper on empty payload");
            auto fields = wire::split_fields(ByteView(d.payload).subspan(1));
            if (action.field_index >= fields.size()) {
                throw ScenarioConfigError("tamper on unknown field offset");
            }
            const wire::FieldSpan& f = fields[action.field_index];
            std::size_t base = 1 + f.payload_offset;
            if (!action.set_bytes.empty()) {
                if (action.set_bytes.size() != f.payload_len) {
                    throw ScenarioConfigError("tamper bytes do not match field length");
                }
                std::copy(action.set_bytes.begin(), action.set_bytes.end(),
                          d.payload.begin() + static_cast<std::ptrdiff_t>(base));
            } else {
                if (f.payload_len == 0) throw ScenarioConfigError("tamper on empty field");
                d.payload[base + f.payload_len - 1] ^= 0x01;
            }
            append_note(d, "tamper");
            break;
        }
        case Kind::Spoof: {
            auto tag = wire::peek_tag(d.payload);
            if (!tag) throw ScenarioConfigError("spoof on unknown message tag");
            if (!resolver_) throw ScenarioConfigError("spoof without identity resolver");
            auto ptd = resolver_(action.target);
            if (!ptd) throw ScenarioConfigError("spoof target has no pseudo identity");
            // The claimed source decides which pseudo-id field is rewritten.
            wire::Role role = wire::Role::Ev;
            if (node_name(action.target).rfind("cs", 0) == 0) role = wire::Role::Cs;
            auto index = wire::pseudo_field_index(*tag, role);
            if (!index) throw ScenarioConfigError("message has no matching pseudo-id field");
            auto fields = wire::split_fields(ByteView(d.payload).subspan(1));
            const wire::FieldSpan& f = fields[*index];
            if (f.payload_len != ptd->size()) {
                throw ScenarioConfigError("pseudo-id field width mismatch");
            }
            std::copy(ptd->begin(), ptd->end(),
                      d.payload.begin() + static_cast<std::ptrdiff_t>(1 + f.payload_offset));
            d.src = action.target;
            append_note(d, "spoof");
            break;
        }
        case Kind::Redirect:
            d.dst = action.target;
            append_note(d, "redirect");
            break;
    }
}

void Sim::process_rules(Delivery& d, bool& dropped) {
    for (AdversaryRule& rule : rules_) {
        if (dropped) break;
        if (!rule_matches(rule, d)) continue;
        apply_action(rule.action, d, dropped);
    }
}

void Sim::enqueue(Delivery d, bool fifo_clamp) {
    if (fifo_clamp) {
        auto key = std::make_tuple(d.src, d.dst, d.channel);
        auto it = fifo_floor_.find(key);
        if (it != fifo_floor_.end() && d.at < it->second) d.at = it->second;
        fifo_floor_[key] = d.at;
    }
    Event ev;
    ev.at = d.at;
    ev.seq = next_seq_++;
    ev.is_timer = false;
    d.seq = ev.seq;
    ev.delivery = std::move(d);
    queue_.push(std::move(ev));
}

void Sim::send(NodeId src, NodeId dst, Channel channel, Bytes payload, std::uint64_t corr,
               Tick extra_delay) {
    Delivery d;
    d.src = src;
    d.dst = dst;
    d.channel = channel;
    d.corr = corr;
    d.payload = std::move(payload);

    Tick delay;
    if (channel == Channel::Secure) {
        delay = links_.secure_delay;
    } else {
        delay = links_.open_delay;
        if (links_.open_jitter > 0) delay += jitter_rng_.next_below(links_.open_jitter + 1);
    }
    d.at = clock_ + delay + extra_delay;

    bool dropped = false;
    if (channel == Channel::Open) process_rules(d, dropped);
    if (dropped) {
        TraceRecord rec;
        rec.tick = clock_;
        rec.src = node_name(d.src);
        rec.dst = node_name(d.dst);
        rec.channel = channel;
        rec.tag = wire::peek_tag(d.payload);
        rec.len = d.payload.size();
        rec.verdict = "adversary-drop";
        rec.payload = d.payload;
        trace_.push_back(std::move(rec));
        return;
    }
    bool clamp = !d.adversary_made;
    enqueue(std::move(d), clamp);
}

void Sim::schedule_timer(NodeId owner, Tick at, std::uint64_t tag, std::uint64_t a,
                         std::uint64_t b) {
    Event ev;
    ev.at = at < clock_ ? clock_ : at;
    ev.seq = next_seq_++;
    ev.is_timer = true;
    ev.timer = TimerEvent{ev.at, ev.seq, owner, tag, a, b};
    queue_.push(std::move(ev));
}

void Sim::dispatch(const Delivery& d) {
    CommMeter& meter = meters_[d.dst];
    meter.incoming_bytes += d.payload.size();
    if (auto tag = wire::peek_tag(d.payload)) {
        meter.incoming_tokens += wire::token_count(*tag);
    }

    TraceRecord rec;
    rec.tick = d.at;
    rec.src = node_name(d.src);
    rec.dst = node_name(d.dst);
    rec.channel = d.channel;
    rec.tag = wire::peek_tag(d.payload);
    rec.len = d.payload.size();
    rec.verdict = d.adv_note.empty() ? "ok" : "ok[" + d.adv_note + "]";
    rec.payload = d.payload;
    trace_.push_back(std::move(rec));
    current_record_ = &trace_.back();

    try {
        node(d.dst)->on_message(*this, d);
    } catch (const ScenarioConfigError&) {
        current_record_ = nullptr;
        throw;
    } catch (const std::exception& e) {
        std::ostringstream oss;
        oss << "handler panic at t=" << d.at << " " << node_name(d.src) << "->"
            << node_name(d.dst) << " tag="
            << (trace_.back().tag ? wire::tag_name(*trace_.back().tag) : "?") << ": "
            << e.what();
        trace_.back().verdict = "panic";
        current_record_ = nullptr;
        throw ScenarioFailure(oss.str());
    }
    current_record_ = nullptr;
}

void Sim::dispatch(const TimerEvent& t) {
    try {
        node(t.owner)->on_timer(*this, t);
    } catch (const ScenarioConfigError&) {
        throw;
    } catch (const std::exception& e) {
        std::ostringstream oss;
        oss << "timer handler panic at t=" << t.at << " owner=" << node_name(t.owner)
            << " tag=" << t.tag << ": " << e.what();
        throw ScenarioFailure(oss.str());
    }
}

void Sim::run_until(Tick limit) {
    while (!queue_.empty() && queue_.top().at <= limit) {
        Event ev = queue_.top();
        queue_.pop();
        clock_ = ev.at;
        if (ev.is_timer) {
            dispatch(ev.timer);
        } else {
            dispatch(ev.delivery);
        }
    }
    clock_ = limit;
}

std::string Sim::render_trace() const {
    std::ostringstream oss;
    for (const TraceRecord& r : trace_) {
        oss << "t=" << r.tick << " src=" << r.src << " dst=" << r.dst
            << " chan=" << channel_name(r.channel)
            << " tag=" << (r.tag ? wire::tag_name(*r.tag) : "-") << " len=" << r.len
            << " verdict=" << r.verdict << "\n";
    }
    return oss.str();
}

}  // namespace v2g::sim
