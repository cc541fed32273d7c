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

#include "v2g/scenario.hpp"

#include <fstream>
#include <sstream>

namespace v2g::scenario {

using sim::ScenarioConfigError;

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

class LineError {
public:
    LineError(const std::string& origin, int line) : origin_(origin), line_(line) {}

    [[noreturn]] void fail(const std::string& msg) const {
        std::ostringstream oss;
        oss << origin_ << ":" << line_ << ": " << msg;
        throw ScenarioConfigError(oss.str());
    }

    std::uint64_t to_u64(const std::string& v) const {
        try {
            std::size_t used = 0;
            std::uint64_t res = std::stoull(v, &used);
            if (used != v.size()) fail("not an integer: " + v);
            return res;
        } catch (const ScenarioConfigError&) {
            throw;
        } catch (...) {
            fail("not an integer: " + v);
        }
    }

    bool to_bool(const std::string& v) const {
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        fail("not a boolean: " + v);
    }

private:
    std::string origin_;
    int line_;
};

// "key=value" pair inside a structured line (rule / session).
bool split_kv(const std::string& tok, std::string& key, std::string& value) {
    std::size_t eq = tok.find('=');
    if (eq == std::string::npos) return false;
    key = tok.substr(0, eq);
    value = tok.substr(eq + 1);
    return true;
}

std::uint32_t entity_index(const std::string& name, const char* prefix, const LineError& at) {
    std::string p(prefix);
    if (name.rfind(p, 0) != 0 || name.size() <= p.size()) {
        at.fail("expected " + p + "<index>, got: " + name);
    }
    return static_cast<std::uint32_t>(at.to_u64(name.substr(p.size())));
}

SessionPlan parse_session(const std::string& value, const LineError& at) {
    auto toks = tokenize(value);
    if (toks.size() < 3) at.fail("session needs: ev<i> cs<j> at=<ms> [kwh=<decimal>]");
    SessionPlan plan;
    plan.ev = entity_index(toks[0], "ev", at);
    plan.cs = entity_index(toks[1], "cs", at);
    plan.kwh_milli = 1000;
    bool have_at = false;
    for (std::size_t i = 2; i < toks.size(); ++i) {
        std::string k, v;
        if (!split_kv(toks[i], k, v)) at.fail("expected key=value, got: " + toks[i]);
        if (k == "at") {
            plan.at = at.to_u64(v);
            have_at = true;
        } else if (k == "kwh") {
            try {
                plan.kwh_milli = consensus::parse_milli(v);
            } catch (const std::exception& e) {
                at.fail(std::string("bad kwh: ") + e.what());
            }
        } else {
            at.fail("unknown session key: " + k);
        }
    }
    if (!have_at) at.fail("session needs at=<ms>");
    if (plan.kwh_milli < 0) at.fail("kwh must be non-negative");
    return plan;
}

AdvRuleSpec parse_rule(const std::string& value, const LineError& at) {
    auto toks = tokenize(value);
    std::size_t i = 0;
    if (toks.empty() || toks[i] != "match") at.fail("rule must start with 'match'");
    ++i;
    AdvRuleSpec rule;
    for (; i < toks.size() && toks[i] != ":"; ++i) {
        std::string k, v;
        if (!split_kv(toks[i], k, v)) at.fail("expected key=value in match, got: " + toks[i]);
        if (k == "tag") {
            rule.tag = v;
        } else if (k == "src") {
            rule.src = v;
        } else if (k == "dst") {
            rule.dst = v;
        } else if (k == "nth") {
            rule.nth = static_cast<std::uint32_t>(at.to_u64(v));
        } else {
            at.fail("unknown match key: " + k);
        }
    }
    if (i >= toks.size()) at.fail("rule missing ':' before action");
    ++i;  // skip ':'
    if (i >= toks.size()) at.fail("rule missing action");
    rule.action = toks[i++];
    for (; i < toks.size(); ++i) {
        std::string k, v;
        if (!split_kv(toks[i], k, v)) at.fail("expected key=value in action, got: " + toks[i]);
        if (k == "delay_ms") {
            rule.delay_ms = at.to_u64(v);
        } else if (k == "field") {
            rule.field_index = at.to_u64(v);
        } else if (k == "set") {
            rule.set_hex = v;
        } else if (k == "as" || k == "to") {
            rule.target = v;
        } else {
            at.fail("unknown action key: " + k);
        }
    }
    if (rule.action != "drop" && rule.action != "delay" && rule.action != "replay" &&
        rule.action != "tamper" && rule.action != "spoof" && rule.action != "redirect") {
        at.fail("unknown action: " + rule.action);
    }
    if ((rule.action == "spoof" || rule.action == "redirect") && rule.target.empty()) {
        at.fail(rule.action + " needs as=/to=<entity>");
    }
    return rule;
}

consensus::Byzantine parse_byzantine(const std::string& v, const LineError& at) {
    if (v == "reject_all") return consensus::Byzantine::RejectAll;
    if (v == "withhold") return consensus::Byzantine::Withhold;
    if (v == "silent_speaker") return consensus::Byzantine::SilentSpeaker;
    at.fail("unknown byzantine behavior: " + v);
}

}  // namespace

void ScenarioSpec::validate() const {
    auto fail = [](const std::string& msg) { throw ScenarioConfigError(msg); };
    if (num_evs == 0 && !sessions.empty()) fail("sessions configured without EVs");
    if (consensus_enabled && num_css < 4) {
        fail("consensus scenarios need at least 4 charging stations");
    }
    if (curve != "p256" && curve != "toy") fail("unknown curve: " + curve);
    for (const SessionPlan& s : sessions) {
        if (s.ev >= num_evs) fail("session references unknown EV");
        if (s.cs >= num_css) fail("session references unknown CS");
        if (s.at >= stop_ms) fail("session starts after stop time");
    }
    for (const auto& [cs, b] : byzantine) {
        (void)b;
        if (cs >= num_css) fail("byzantine behavior references unknown CS");
    }
    if (speaker_term == 0) fail("speaker_term must be positive");
    if (block_interval_ms == 0) fail("block_interval_ms must be positive");
    if (price_milli < 0) fail("price must be non-negative");
}

ScenarioSpec parse_scenario(std::istream& in, const std::string& origin) {
    ScenarioSpec spec;
    std::string section;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        LineError at(origin, lineno);
        std::string line = raw;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') at.fail("unterminated section header");
            section = line.substr(1, line.size() - 2);
            if (section != "general" && section != "entities" && section != "links" &&
                section != "consensus" && section != "sessions" && section != "adversary" &&
                section != "expect") {
                at.fail("unknown section: " + section);
            }
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) at.fail("expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) at.fail("empty key");
        if (value.empty()) at.fail("empty value for key: " + key);

        if (section == "general") {
            if (key == "name") spec.name = value;
            else if (key == "curve") spec.curve = value;
            else if (key == "seed") spec.seed = at.to_u64(value);
            else if (key == "stop_ms") spec.stop_ms = at.to_u64(value);
            else if (key == "window_ms") spec.window_ms = at.to_u64(value);
            else if (key == "session_timeout_ms") spec.session_timeout_ms = at.to_u64(value);
            else if (key == "charge_ms") spec.charge_ms = at.to_u64(value);
            else at.fail("unknown key in [general]: " + key);
        } else if (section == "entities") {
            if (key == "evs") spec.num_evs = static_cast<std::uint32_t>(at.to_u64(value));
            else if (key == "css") spec.num_css = static_cast<std::uint32_t>(at.to_u64(value));
            else if (key == "revoked") spec.revoked.push_back(value);
            else at.fail("unknown key in [entities]: " + key);
        } else if (section == "links") {
            if (key == "open_delay_ms") spec.open_delay_ms = at.to_u64(value);
            else if (key == "open_jitter_ms") spec.open_jitter_ms = at.to_u64(value);
            else if (key == "secure_delay_ms") spec.secure_delay_ms = at.to_u64(value);
            else at.fail("unknown key in [links]: " + key);
        } else if (section == "consensus") {
            if (key == "enabled") spec.consensus_enabled = at.to_bool(value);
            else if (key == "speaker_term")
                spec.speaker_term = static_cast<std::uint32_t>(at.to_u64(value));
            else if (key == "block_interval_ms") spec.block_interval_ms = at.to_u64(value);
            else if (key == "literal_speaker_formula")
                spec.literal_speaker_formula = at.to_bool(value);
            else if (key == "price_per_kwh") {
                try {
                    spec.price_milli = consensus::parse_milli(value);
                } catch (const std::exception& e) {
                    at.fail(std::string("bad price: ") + e.what());
                }
            } else if (key == "byzantine") {
                auto toks = tokenize(value);
                if (toks.size() != 2) at.fail("byzantine needs: cs<i> <behavior>");
                spec.byzantine[entity_index(toks[0], "cs", at)] = parse_byzantine(toks[1], at);
            } else {
                at.fail("unknown key in [consensus]: " + key);
            }
        } else if (section == "sessions") {
            if (key == "session") spec.sessions.push_back(parse_session(value, at));
            else at.fail("unknown key in [sessions]: " + key);
        } else if (section == "adversary") {
            if (key == "rule") spec.adversary.push_back(parse_rule(value, at));
            else at.fail("unknown key in [adversary]: " + key);
        } else if (section == "expect") {
            if (key == "runs_authenticated") spec.expect.runs_authenticated = at.to_u64(value);
            else if (key == "runs_terminated") {
                if (value == "all") spec.expect.runs_terminated_all = true;
                else spec.expect.runs_terminated = at.to_u64(value);
            } else if (key == "attack_defeated") spec.expect.attack_defeated = at.to_bool(value);
            else if (key == "min_blocks") spec.expect.min_blocks = at.to_u64(value);
            else if (key == "blocks") spec.expect.blocks = at.to_u64(value);
            else if (key == "txs_committed") spec.expect.txs_committed = at.to_u64(value);
            else if (key == "reward_total") {
                try {
                    // reward totals are micro units: milli * milli
                    spec.expect.reward_total_micro = consensus::parse_milli(value) * 1000;
                } catch (const std::exception& e) {
                    at.fail(std::string("bad reward_total: ") + e.what());
                }
            } else {
                at.fail("unknown key in [expect]: " + key);
            }
        } else {
            at.fail("key outside any section: " + key);
        }
    }
    spec.validate();
    return spec;
}

ScenarioSpec parse_scenario_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ScenarioConfigError("cannot open scenario file: " + path.string());
    return parse_scenario(f, path.filename().string());
}

}  // namespace v2g::scenario
