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

#include "v2g/entities.hpp"

#include <array>
#include <stdexcept>

#include "v2g/codec.hpp"

namespace v2g::proto {

using crypto::Digest;
using crypto::OpCounters;
using crypto::Point;
using crypto::Scalar;

bool validate_timestamp(Tick ts, Tick now, Tick window) {
    Tick age = now >= ts ? now - ts : ts - now;
    return age <= window;
}

namespace {

Bytes true_id_payload(Role role, const std::string& id) {
    Bytes payload;
    payload.push_back(static_cast<std::uint8_t>(role));
    payload.insert(payload.end(), id.begin(), id.end());
    return payload;
}

}  // namespace

Digest token_ev_cs(const Point& r1_point, const Point& shared, const PseudoId& ptd_ev,
                   const PseudoId& ptd_cs, Tick t_ev, const crypto::CurveParams& curve,
                   OpCounters& meter) {
    std::array<Bytes, 5> fields{wire::field_point(r1_point, curve),
                                wire::field_point(shared, curve),
                                wire::field_pseudo(ptd_ev), wire::field_pseudo(ptd_cs),
                                wire::field_timestamp(t_ev)};
    return crypto::hash_concat(fields, meter);
}

Digest token_ev_cag(const Point& r1_point, const Point& shared, const PseudoId& ptd_ev,
                    const PseudoId& ptd_cag, Tick t_ev, const crypto::CurveParams& curve,
                    OpCounters& meter) {
    std::array<Bytes, 5> fields{wire::field_point(r1_point, curve),
                                wire::field_point(shared, curve),
                                wire::field_pseudo(ptd_ev), wire::field_pseudo(ptd_cag),
                                wire::field_timestamp(t_ev)};
    return crypto::hash_concat(fields, meter);
}

Digest token_cs_cag(const Point& shared, const PseudoId& ptd_cs, const PseudoId& ptd_cag,
                    Tick t_cs, const Digest& auth_ev_cag,
                    const crypto::CurveParams& curve, OpCounters& meter) {
    std::array<Bytes, 5> fields{wire::field_point(shared, curve),
                                wire::field_pseudo(ptd_cs), wire::field_pseudo(ptd_cag),
                                wire::field_timestamp(t_cs),
                                wire::field_digest(auth_ev_cag)};
    return crypto::hash_concat(fields, meter);
}

Digest token_cag(const Point& shared, const PseudoId& ptd_ev, const PseudoId& ptd_cs,
                 const PseudoId& ptd_cag, Tick t_cag, const crypto::CurveParams& curve,
                 OpCounters& meter) {
    std::array<Bytes, 5> fields{wire::field_point(shared, curve),
                                wire::field_pseudo(ptd_ev), wire::field_pseudo(ptd_cs),
                                wire::field_pseudo(ptd_cag),
                                wire::field_timestamp(t_cag)};
    return crypto::hash_concat(fields, meter);
}

PseudoId pseudo_identity(const Scalar& sk, Role role, const std::string& true_id,
                         const crypto::CurveParams& curve, OpCounters& meter) {
    std::array<Bytes, 2> fields{wire::field_scalar(sk, curve),
                                wire::field_id(true_id_payload(role, true_id))};
    return crypto::hash_concat(fields, meter);
}

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Start: return "start";
        case Phase::M1Sent: return "m1-sent";
        case Phase::M2Sent: return "m2-sent";
        case Phase::M3Sent: return "m3-sent";
        case Phase::M5Sent: return "m5-sent";
        case Phase::Authenticated: return "authenticated";
        case Phase::Done: return "done";
        case Phase::Terminated: return "terminated";
    }
    return "?";
}

bool phase_terminal(Phase p) {
    return p == Phase::Authenticated || p == Phase::Done || p == Phase::Terminated;
}

// ---------------------------------------------------------------------------
// Party

Party::Party(Role role, std::string true_id, PublicParams params)
    : role_(role), true_id_(std::move(true_id)), params_(std::move(params)) {
    if (true_id_.empty()) throw std::invalid_argument("true id must be non-empty");
}

RegRequest Party::make_registration(Tick now) const {
    return RegRequest{role_, true_id_, now};
}

void Party::complete_registration(const RegResponse& resp) {
    credential_ = Credential{resp.ptd, resp.sk};
}

const PseudoId& Party::ptd() const {
    if (!credential_) throw std::logic_error("not registered");
    return credential_->ptd;
}

const Scalar& Party::sk() const {
    if (!credential_) throw std::logic_error("not registered");
    return credential_->sk;
}

// ---------------------------------------------------------------------------
// Ev

Ev::Ev(std::string true_id, PublicParams params)
    : Party(Role::Ev, std::move(true_id), std::move(params)) {}

const EvSession* Ev::session(PeerId cs) const {
    auto it = sessions_.find(cs);
    return it == sessions_.end() ? nullptr : &it->second;
}

std::optional<M2> Ev::handle_m1(PeerId cs, const M1& m1, std::uint64_t run_id, Tick now,
                                Tick window) {
    if (!registered()) throw std::logic_error("EV not registered");
    if (!validate_timestamp(m1.t_cs, now, window)) return std::nullopt;

    auto it = sessions_.find(cs);
    if (it != sessions_.end() && !phase_terminal(it->second.phase)) {
        // A second challenge while one run is in flight is a protocol
        // violation; tear the old run down and do not answer.
        it->second.phase = Phase::Terminated;
        it->second.fail_reason = "unexpected M1 mid-session";
        return std::nullopt;
    }

    Point r2 = crypto::scalar_mult(sk(), m1.r1_point, curve(), meter_);
    Tick t_ev = now;
    Digest auth_ev_cs =
        token_ev_cs(m1.r1_point, r2, ptd(), m1.ptd_cs, t_ev, curve(), meter_);
    Digest auth_ev_cag =
        token_ev_cag(m1.r1_point, r2, ptd(), params_.ptd_cag, t_ev, curve(), meter_);

    EvSession s;
    s.run_id = run_id;
    s.phase = Phase::M2Sent;
    s.ptd_cs = m1.ptd_cs;
    s.r1_point = m1.r1_point;
    s.t_ev = t_ev;
    s.auth_ev_cag = auth_ev_cag;
    s.started_at = now;
    sessions_[cs] = std::move(s);

    return M2{auth_ev_cs, auth_ev_cag, t_ev, ptd()};
}

bool Ev::handle_m5(PeerId cs, const M5& m5, Tick now, Tick window) {
    if (!registered()) throw std::logic_error("EV not registered");
    auto it = sessions_.find(cs);
    if (it == sessions_.end()) return false;  // no matching session state
    EvSession& s = it->second;
    if (phase_terminal(s.phase)) return false;
    if (s.phase != Phase::M2Sent) {
        s.phase = Phase::Terminated;
        s.fail_reason = "M5 out of order";
        return false;
    }
    if (!validate_timestamp(m5.t_cag, now, window)) {
        s.phase = Phase::Terminated;
        s.fail_reason = "stale T_CAG";
        return false;
    }
    Point shared = crypto::scalar_mult(m5.r1, params_.pk_cag, curve(), meter_);
    Digest expected =
        token_cag(shared, ptd(), s.ptd_cs, params_.ptd_cag, m5.t_cag, curve(), meter_);
    if (expected != m5.auth_cag) {
        s.phase = Phase::Terminated;
        s.fail_reason = "CAG token mismatch";
        return false;
    }
    s.phase = Phase::Authenticated;
    return true;
}

void Ev::timeout_session(PeerId cs, Tick) {
    auto it = sessions_.find(cs);
    if (it == sessions_.end() || phase_terminal(it->second.phase)) return;
    it->second.phase = Phase::Terminated;
    it->second.fail_reason = "timeout";
}

// ---------------------------------------------------------------------------
// Cs

Cs::Cs(std::string true_id, PublicParams params)
    : Party(Role::Cs, std::move(true_id), std::move(params)) {}

void Cs::registry_update(const std::vector<RegistryEntry>& entries) {
    for (const RegistryEntry& e : entries) {
        if (e.role == Role::Ev) ev_registry_[e.ptd] = e.pk;
    }
}

std::optional<Point> Cs::lookup_ev_key(const PseudoId& ptd) const {
    auto it = ev_registry_.find(ptd);
    if (it == ev_registry_.end()) return std::nullopt;
    return it->second;
}

const CsSession* Cs::session(PeerId ev) const {
    auto it = sessions_.find(ev);
    return it == sessions_.end() ? nullptr : &it->second;
}

CsSession* Cs::session_by_run(std::uint64_t run_id) {
    auto it = run_to_peer_.find(run_id);
    if (it == run_to_peer_.end()) return nullptr;
    auto sit = sessions_.find(it->second);
    if (sit == sessions_.end() || sit->second.run_id != run_id) return nullptr;
    return &sit->second;
}

void Cs::terminate(CsSession& s, const std::string& reason) {
    s.phase = Phase::Terminated;
    s.fail_reason = reason;
}

M1 Cs::start_session(PeerId ev, std::uint64_t run_id, Rng& rng, Tick now) {
    if (!registered()) throw std::logic_error("CS not registered");
    auto it = sessions_.find(ev);
    if (it != sessions_.end() && !phase_terminal(it->second.phase)) {
        terminate(it->second, "superseded by new session");
    }

    // Fresh nonce per session. The used-set wraps once the toy group is
    // exhausted so long toy runs cannot spin forever.
    if (crypto::BigInt(used_nonces_.size()) >= curve().group_order() - 1) {
        used_nonces_.clear();
    }
    Scalar r1 = crypto::random_scalar(rng, curve());
    while (used_nonces_.contains(r1.value)) r1 = crypto::random_scalar(rng, curve());
    used_nonces_.insert(r1.value);

    Point r1_point = crypto::scalar_mult(r1, curve().base_point(), curve(), meter_);

    CsSession s;
    s.run_id = run_id;
    s.phase = Phase::M1Sent;
    s.r1 = r1;
    s.r1_point = r1_point;
    s.t_cs = now;
    s.started_at = now;
    sessions_[ev] = std::move(s);
    run_to_peer_[run_id] = ev;

    return M1{r1_point, ptd(), now};
}

std::optional<M3> Cs::handle_m2(PeerId ev, const M2& m2, Rng& rng, Tick now, Tick window) {
    if (!registered()) throw std::logic_error("CS not registered");
    auto it = sessions_.find(ev);
    if (it == sessions_.end()) return std::nullopt;  // stray answer
    CsSession& s = it->second;
    if (phase_terminal(s.phase)) return std::nullopt;
    if (s.phase != Phase::M1Sent) {
        terminate(s, "M2 out of order");
        return std::nullopt;
    }
    if (!validate_timestamp(m2.t_ev, now, window)) {
        terminate(s, "stale T_EV");
        return std::nullopt;
    }
    auto pk_ev = lookup_ev_key(m2.ptd_ev);
    if (!pk_ev) {
        terminate(s, "unknown PTD_EV");
        return std::nullopt;
    }
    Point shared = crypto::scalar_mult(s.r1, *pk_ev, curve(), meter_);
    Digest expected =
        token_ev_cs(s.r1_point, shared, m2.ptd_ev, ptd(), m2.t_ev, curve(), meter_);
    if (expected != m2.auth_ev_cs) {
        terminate(s, "EV token mismatch");
        return std::nullopt;
    }

    Scalar r2 = crypto::random_scalar(rng, curve());
    Point r3 = crypto::scalar_mult(r2, curve().base_point(), curve(), meter_);
    Point r4 = crypto::scalar_mult(sk(), r3, curve(), meter_);
    Tick t_cs = now;
    Digest auth_cs_cag =
        token_cs_cag(r4, ptd(), params_.ptd_cag, t_cs, m2.auth_ev_cag, curve(), meter_);

    s.phase = Phase::M3Sent;
    s.ptd_ev = m2.ptd_ev;
    s.auth_ev_cag = m2.auth_ev_cag;

    return M3{auth_cs_cag, t_cs, m2.t_ev, s.r1, r2, s.r1_point, m2.ptd_ev, ptd()};
}

std::optional<M5> Cs::handle_m4(std::uint64_t run_id, const M4& m4, Tick now, Tick window) {
    if (!registered()) throw std::logic_error("CS not registered");
    CsSession* s = session_by_run(run_id);
    if (!s) return std::nullopt;
    if (phase_terminal(s->phase) || s->phase == Phase::M5Sent) return std::nullopt;
    if (s->phase != Phase::M3Sent) {
        terminate(*s, "M4 out of order");
        return std::nullopt;
    }
    if (!validate_timestamp(m4.t_cag, now, window)) {
        terminate(*s, "stale T_CAG");
        return std::nullopt;
    }
    Point shared = crypto::scalar_mult(s->r1, params_.pk_cag, curve(), meter_);
    Digest expected = token_cag(shared, s->ptd_ev, ptd(), params_.ptd_cag, m4.t_cag,
                                curve(), meter_);
    if (expected != m4.auth_cag) {
        terminate(*s, "CAG token mismatch");
        return std::nullopt;
    }
    s->phase = Phase::M5Sent;
    return M5{m4.auth_cag, m4.t_cag, s->r1};
}

const CsSession* Cs::settle(PeerId ev, const crypto::Digest& session_ref) {
    auto it = sessions_.find(ev);
    if (it == sessions_.end()) return nullptr;
    CsSession& s = it->second;
    if (s.phase != Phase::M5Sent) return nullptr;
    if (s.auth_ev_cag != session_ref) return nullptr;
    s.phase = Phase::Done;
    return &s;
}

std::optional<PeerId> Cs::peer_of_run(std::uint64_t run_id) const {
    auto it = run_to_peer_.find(run_id);
    if (it == run_to_peer_.end()) return std::nullopt;
    return it->second;
}

void Cs::timeout_session(PeerId ev, Tick) {
    auto it = sessions_.find(ev);
    if (it == sessions_.end()) return;
    Phase p = it->second.phase;
    if (p == Phase::Terminated || p == Phase::Done) return;
    // A CS-side session that never settled the service is torn down even if
    // the CAG round trip succeeded.
    it->second.phase = Phase::Terminated;
    it->second.fail_reason = "timeout";
}

// ---------------------------------------------------------------------------
// Cag

Cag::Cag(const crypto::CurveParams& curve, Rng& rng) {
    crypto::KeyPair kp = crypto::keygen(rng, curve, meter_);
    sk_ = kp.sk;
    params_.curve = &curve;
    params_.pk_cag = kp.pk;
    params_.ptd_cag = pseudo_identity(sk_, Role::Cag, "CAG", curve, meter_);
}

void Cag::revoke(const std::string& true_id) {
    if (repository_.contains(true_id)) {
        throw std::invalid_argument("cannot revoke a registered identity");
    }
    revocation_list_.insert(true_id);
}

Cag::RegistrationOutcome Cag::handle_registration(const RegRequest& req, Rng& rng,
                                                  Tick now, Tick window) {
    const crypto::CurveParams& curve = *params_.curve;
    if (req.true_id.empty()) {
        last_reject_reason_ = "empty identity";
        return {std::nullopt, last_reject_reason_};
    }
    if (!validate_timestamp(req.t, now, window)) {
        last_reject_reason_ = "stale timestamp";
        return {std::nullopt, last_reject_reason_};
    }
    if (revocation_list_.contains(req.true_id)) {
        last_reject_reason_ = "revoked";
        return {std::nullopt, last_reject_reason_};
    }
    if (repository_.contains(req.true_id)) {
        last_reject_reason_ = "already registered";
        return {std::nullopt, last_reject_reason_};
    }

    crypto::KeyPair kp = crypto::keygen(rng, curve, meter_);
    PseudoId ptd = pseudo_identity(kp.sk, req.role, req.true_id, curve, meter_);
    while (by_ptd_.contains(ptd)) {
        kp = crypto::keygen(rng, curve, meter_);
        ptd = pseudo_identity(kp.sk, req.role, req.true_id, curve, meter_);
    }

    repository_[req.true_id] = Record{ptd, kp.pk, req.role};
    by_ptd_[ptd] = kp.pk;
    registry_.push_back(RegistryEntry{ptd, kp.pk, req.role});
    last_reject_reason_.clear();
    return {RegResponse{ptd, kp.pk, kp.sk}, ""};
}

std::optional<M4> Cag::handle_m3(const M3& m3, Tick now, Tick window) {
    const crypto::CurveParams& curve = *params_.curve;
    if (!validate_timestamp(m3.t_ev, now, window) ||
        !validate_timestamp(m3.t_cs, now, window)) {
        last_reject_reason_ = "stale timestamp";
        return std::nullopt;
    }

    Bytes r1_key = crypto::encode_point(m3.r1_point, curve);
    auto seen = r1_seen_.find(r1_key);
    if (seen != r1_seen_.end() && now - seen->second <= window) {
        last_reject_reason_ = "replayed R1";
        return std::nullopt;
    }

    auto pk_ev = lookup_key(m3.ptd_ev);
    auto pk_cs = lookup_key(m3.ptd_cs);
    if (!pk_ev || !pk_cs) {
        last_reject_reason_ = "unknown pseudo identity";
        return std::nullopt;
    }

    Point ev_shared = crypto::scalar_mult(m3.r1, *pk_ev, curve, meter_);
    Digest auth_ev_cag = token_ev_cag(m3.r1_point, ev_shared, m3.ptd_ev, params_.ptd_cag,
                                      m3.t_ev, curve, meter_);
    Point cs_shared = crypto::scalar_mult(m3.r2, *pk_cs, curve, meter_);
    Digest expected = token_cs_cag(cs_shared, m3.ptd_cs, params_.ptd_cag, m3.t_cs,
                                   auth_ev_cag, curve, meter_);
    if (expected != m3.auth_cs_cag) {
        last_reject_reason_ = "token mismatch";
        return std::nullopt;
    }

    Point r5 = crypto::scalar_mult(sk_, m3.r1_point, curve, meter_);
    Tick t_cag = now;
    Digest auth_cag = token_cag(r5, m3.ptd_ev, m3.ptd_cs, params_.ptd_cag, t_cag, curve,
                                meter_);

    r1_seen_[r1_key] = now;
    session_table_[auth_ev_cag] = SessionInfo{m3.ptd_ev, m3.ptd_cs, now};
    last_reject_reason_.clear();
    return M4{auth_cag, t_cag};
}

bool Cag::session_known(const Digest& session_ref) const {
    return session_table_.contains(session_ref);
}

const Cag::SessionInfo* Cag::session_info(const Digest& session_ref) const {
    auto it = session_table_.find(session_ref);
    return it == session_table_.end() ? nullptr : &it->second;
}

bool Cag::validate_reward_claim(const Digest& session_ref, const PseudoId& ev_ptd,
                                const PseudoId& cs_ptd) const {
    const SessionInfo* info = session_info(session_ref);
    return info && info->ptd_ev == ev_ptd && info->ptd_cs == cs_ptd;
}

std::optional<Point> Cag::lookup_key(const PseudoId& ptd) const {
    auto it = by_ptd_.find(ptd);
    if (it == by_ptd_.end()) return std::nullopt;
    return it->second;
}

}  // namespace v2g::proto
