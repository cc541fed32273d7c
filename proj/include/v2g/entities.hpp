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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "v2g/curve.hpp"
#include "v2g/hash.hpp"
#include "v2g/messages.hpp"

namespace v2g::proto {

using wire::M1;
using wire::M2;
using wire::M3;
using wire::M4;
using wire::M5;
using wire::PseudoId;
using wire::RegRequest;
using wire::RegResponse;
using wire::RegistryEntry;
using wire::Role;

/// Opaque transport address of a peer, assigned by the network layer. This
/// is connection identity, never protocol identity: nothing derived from it
/// enters a token.
using PeerId = std::uint32_t;

/// Group parameters and aggregator identity every participant learns during
/// system initialization.
struct PublicParams {
    const crypto::CurveParams* curve = nullptr;
    crypto::Point pk_cag;
    PseudoId ptd_cag{};
};

/// accept iff |now - ts| <= window. Both boundaries inclusive.
bool validate_timestamp(Tick ts, Tick now, Tick window);

// Token constructions. Each call costs one hash on the meter; both the
// issuing and the verifying side go through the same builder, with the
// shared point supplied from whichever side of the exchange it holds.

crypto::Digest token_ev_cs(const crypto::Point& r1_point, const crypto::Point& shared,
                           const PseudoId& ptd_ev, const PseudoId& ptd_cs, Tick t_ev,
                           const crypto::CurveParams& curve, crypto::OpCounters& meter);

crypto::Digest token_ev_cag(const crypto::Point& r1_point, const crypto::Point& shared,
                            const PseudoId& ptd_ev, const PseudoId& ptd_cag, Tick t_ev,
                            const crypto::CurveParams& curve, crypto::OpCounters& meter);

crypto::Digest token_cs_cag(const crypto::Point& shared, const PseudoId& ptd_cs,
                            const PseudoId& ptd_cag, Tick t_cs,
                            const crypto::Digest& auth_ev_cag,
                            const crypto::CurveParams& curve, crypto::OpCounters& meter);

crypto::Digest token_cag(const crypto::Point& shared, const PseudoId& ptd_ev,
                         const PseudoId& ptd_cs, const PseudoId& ptd_cag, Tick t_cag,
                         const crypto::CurveParams& curve, crypto::OpCounters& meter);

/// PTD = H(sk || true id). The aggregator's own pseudo identity uses the
/// fixed id string "CAG".
PseudoId pseudo_identity(const crypto::Scalar& sk, Role role, const std::string& true_id,
                         const crypto::CurveParams& curve, crypto::OpCounters& meter);

/// Where one authentication run stands. Progression is strict; any failed
/// check parks the session in Terminated.
enum class Phase {
    Start,
    M1Sent,    // CS issued the challenge
    M2Sent,    // EV answered, awaiting the aggregator round trip
    M3Sent,    // CS escalated to the CAG
    M5Sent,    // CS verified the CAG and forwarded M5
    Authenticated,
    Done,      // service settled (CS side)
    Terminated,
};

const char* phase_name(Phase p);
bool phase_terminal(Phase p);

struct EvSession {
    std::uint64_t run_id = 0;
    Phase phase = Phase::Start;
    PseudoId ptd_cs{};
    crypto::Point r1_point;
    Tick t_ev = 0;
    crypto::Digest auth_ev_cag{};  // doubles as the session reference
    Tick started_at = 0;
    std::string fail_reason;
};

struct CsSession {
    std::uint64_t run_id = 0;
    Phase phase = Phase::Start;
    crypto::Scalar r1{};
    crypto::Point r1_point;
    Tick t_cs = 0;
    PseudoId ptd_ev{};
    crypto::Digest auth_ev_cag{};
    Tick started_at = 0;
    std::string fail_reason;
};

/// Shared registration-side behaviour of EVs and CSs: identity, credential
/// obtained from the aggregator, and the op meter.
class Party {
public:
    Party(Role role, std::string true_id, PublicParams params);

    RegRequest make_registration(Tick now) const;
    void complete_registration(const RegResponse& resp);
    bool registered() const { return credential_.has_value(); }

    Role role() const { return role_; }
    const std::string& true_id() const { return true_id_; }
    const PublicParams& params() const { return params_; }
    const PseudoId& ptd() const;
    const crypto::Scalar& sk() const;
    crypto::OpCounters& meter() { return meter_; }
    const crypto::OpCounters& meter() const { return meter_; }

protected:
    const crypto::CurveParams& curve() const { return *params_.curve; }

    Role role_;
    std::string true_id_;
    PublicParams params_;
    crypto::OpCounters meter_;

    struct Credential {
        PseudoId ptd;
        crypto::Scalar sk;
    };
    std::optional<Credential> credential_;
};

class Ev : public Party {
public:
    Ev(std::string true_id, PublicParams params);

    /// Answers a station's challenge with the two digest tokens. Rejects a
    /// stale M1 without opening a session. One ECM, two hashes.
    std::optional<M2> handle_m1(PeerId cs, const M1& m1, std::uint64_t run_id, Tick now,
                                Tick window);

    /// Verifies the aggregator token relayed by the CS. One ECM, one hash.
    /// True only when the session reaches Authenticated.
    bool handle_m5(PeerId cs, const M5& m5, Tick now, Tick window);

    void timeout_session(PeerId cs, Tick now);

    const std::map<PeerId, EvSession>& sessions() const { return sessions_; }
    const EvSession* session(PeerId cs) const;

private:
    std::map<PeerId, EvSession> sessions_;
};

class Cs : public Party {
public:
    Cs(std::string true_id, PublicParams params);

    void registry_update(const std::vector<RegistryEntry>& entries);
    std::optional<crypto::Point> lookup_ev_key(const PseudoId& ptd) const;

    /// Opens a run: fresh nonce, R1 = r1*P, emit the challenge. One ECM.
    M1 start_session(PeerId ev, std::uint64_t run_id, Rng& rng, Tick now);

    /// Verifies the EV's token, then escalates to the aggregator. Three
    /// ECM, two hashes on the honest path.
    std::optional<M3> handle_m2(PeerId ev, const M2& m2, Rng& rng, Tick now, Tick window);

    /// Verifies the aggregator and forwards M5 to the EV. One ECM, one
    /// hash.
    std::optional<M5> handle_m4(std::uint64_t run_id, const M4& m4, Tick now, Tick window);

    /// Settles the service once the smart meter confirms the energy
    /// transfer. Succeeds only for a session that finished the full flow
    /// under the same session reference.
    const CsSession* settle(PeerId ev, const crypto::Digest& session_ref);

    std::optional<PeerId> peer_of_run(std::uint64_t run_id) const;

    void timeout_session(PeerId ev, Tick now);

    const std::map<PeerId, CsSession>& sessions() const { return sessions_; }
    const CsSession* session(PeerId ev) const;
    CsSession* session_by_run(std::uint64_t run_id);

private:
    void terminate(CsSession& s, const std::string& reason);

    std::map<PseudoId, crypto::Point> ev_registry_;
    std::map<PeerId, CsSession> sessions_;
    std::map<std::uint64_t, PeerId> run_to_peer_;
    std::set<crypto::BigInt> used_nonces_;
};

/// Central aggregator: curve owner, registrar, and the verification anchor
/// of the hierarchical flow.
class Cag {
public:
    Cag(const crypto::CurveParams& curve, Rng& rng);

    const PublicParams& public_params() const { return params_; }
    crypto::OpCounters& meter() { return meter_; }
    const crypto::OpCounters& meter() const { return meter_; }

    void revoke(const std::string& true_id);

    struct RegistrationOutcome {
        std::optional<RegResponse> response;
        std::string reject_reason;  // empty on success
    };
    RegistrationOutcome handle_registration(const RegRequest& req, Rng& rng, Tick now,
                                            Tick window);

    /// Verifies both nested tokens and answers with M4. Three ECM, three
    /// hashes on the honest path.
    std::optional<M4> handle_m3(const M3& m3, Tick now, Tick window);

    /// Sessions this aggregator has vouched for (M4 issued).
    bool session_known(const crypto::Digest& session_ref) const;
    struct SessionInfo {
        PseudoId ptd_ev;
        PseudoId ptd_cs;
        Tick verified_at;
    };
    const SessionInfo* session_info(const crypto::Digest& session_ref) const;

    /// A reward claim is only honored when it references a session this
    /// aggregator authenticated, for exactly the parties it authenticated.
    bool validate_reward_claim(const crypto::Digest& session_ref, const PseudoId& ev_ptd,
                               const PseudoId& cs_ptd) const;

    const std::vector<RegistryEntry>& registry() const { return registry_; }
    std::optional<crypto::Point> lookup_key(const PseudoId& ptd) const;
    std::size_t repository_size() const { return repository_.size(); }
    const std::string& last_reject_reason() const { return last_reject_reason_; }

private:
    PublicParams params_;
    crypto::Scalar sk_;
    crypto::OpCounters meter_;

    struct Record {
        PseudoId ptd;
        crypto::Point pk;
        Role role;
    };
    std::map<std::string, Record> repository_;  // true id -> record
    std::set<std::string> revocation_list_;
    std::vector<RegistryEntry> registry_;
    std::map<PseudoId, crypto::Point> by_ptd_;
    std::map<Bytes, Tick> r1_seen_;  // encoded R1 -> accept tick (replay cache)
    std::map<crypto::Digest, SessionInfo> session_table_;
    std::string last_reject_reason_;
};

}  // namespace v2g::proto
