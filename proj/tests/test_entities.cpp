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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "v2g/entities.hpp"

using namespace v2g;
using namespace v2g::crypto;
using namespace v2g::proto;

namespace {

constexpr Tick kWindow = 5000;
constexpr PeerId kEvPeer = 7;

// Drives registration directly, no network in between.
struct Handshake {
    Rng cag_rng;
    Rng reg_rng;
    Rng cs_rng;
    Cag cag;
    Ev ev;
    Cs cs;

    explicit Handshake(const CurveParams& curve, std::uint64_t seed = 1,
                       const std::string& ev_id = "EV-001")
        : cag_rng(mix_seed(seed, "cag", 0)),
          reg_rng(mix_seed(seed, "reg", 0)),
          cs_rng(mix_seed(seed, "cs", 0)),
          cag(curve, cag_rng),
          ev(ev_id, cag.public_params()),
          cs("CS-001", cag.public_params()) {
        register_party(ev, 10);
        register_party(cs, 20);
        cs.registry_update(cag.registry());
    }

    void register_party(Party& p, Tick now) {
        auto outcome = cag.handle_registration(p.make_registration(now), reg_rng, now,
                                               kWindow);
        REQUIRE(outcome.response.has_value());
        p.complete_registration(*outcome.response);
    }

    struct Transcript {
        wire::M1 m1;
        wire::M2 m2;
        wire::M3 m3;
        wire::M4 m4;
        wire::M5 m5;
    };

    // One honest end-to-end run starting at t.
    Transcript honest_run(Tick t, std::uint64_t run_id = 1) {
        Transcript tr;
        tr.m1 = cs.start_session(kEvPeer, run_id, cs_rng, t);
        auto m2 = ev.handle_m1(kEvPeer == 0 ? 1 : 0, tr.m1, run_id, t + 1, kWindow);
        REQUIRE(m2);
        tr.m2 = *m2;
        auto m3 = cs.handle_m2(kEvPeer, tr.m2, cs_rng, t + 2, kWindow);
        REQUIRE(m3);
        tr.m3 = *m3;
        auto m4 = cag.handle_m3(tr.m3, t + 3, kWindow);
        REQUIRE(m4);
        tr.m4 = *m4;
        auto m5 = cs.handle_m4(run_id, tr.m4, t + 4, kWindow);
        REQUIRE(m5);
        tr.m5 = *m5;
        REQUIRE(ev.handle_m5(kEvPeer == 0 ? 1 : 0, tr.m5, t + 5, kWindow));
        return tr;
    }
};

Digest flip_bit(Digest d) {
    d[0] ^= 0x01;
    return d;
}

}  // namespace

TEST_CASE("timestamp window is inclusive on both edges") {
    const Tick now = 20000;
    CHECK(validate_timestamp(now, now, kWindow));
    CHECK(validate_timestamp(now - kWindow, now, kWindow));
    CHECK_FALSE(validate_timestamp(now - kWindow - 1, now, kWindow));
    CHECK(validate_timestamp(now + kWindow, now, kWindow));
    CHECK_FALSE(validate_timestamp(now + kWindow + 1, now, kWindow));
}

TEST_CASE("registration issues credentials and populates the repository") {
    const auto& c = CurveParams::p256();
    Rng cag_rng(1), reg_rng(2);
    Cag cag(c, cag_rng);
    Ev ev("EV-001", cag.public_params());

    auto outcome = cag.handle_registration(ev.make_registration(100), reg_rng, 100, kWindow);
    REQUIRE(outcome.response);
    CHECK(cag.repository_size() == 1);

    // Issued key pair is consistent and the pseudo identity is H(sk || id).
    OpCounters scratch;
    CHECK(outcome.response->pk ==
          scalar_mult(outcome.response->sk, c.base_point(), c, scratch));
    CHECK(outcome.response->ptd ==
          pseudo_identity(outcome.response->sk, wire::Role::Ev, "EV-001", c, scratch));

    ev.complete_registration(*outcome.response);
    CHECK(ev.registered());
    CHECK(ev.ptd() == outcome.response->ptd);
}

TEST_CASE("registration rejections: duplicate, revoked, stale") {
    const auto& c = CurveParams::p256();
    Rng cag_rng(1), reg_rng(2);
    Cag cag(c, cag_rng);
    cag.revoke("EV-BAD");

    wire::RegRequest fresh{wire::Role::Ev, "EV-001", 100};
    REQUIRE(cag.handle_registration(fresh, reg_rng, 100, kWindow).response);

    auto dup = cag.handle_registration(fresh, reg_rng, 200, kWindow);
    CHECK_FALSE(dup.response);
    CHECK(dup.reject_reason == "already registered");

    auto revoked = cag.handle_registration({wire::Role::Ev, "EV-BAD", 200}, reg_rng, 200,
                                           kWindow);
    CHECK_FALSE(revoked.response);
    CHECK(revoked.reject_reason == "revoked");

    auto stale = cag.handle_registration({wire::Role::Ev, "EV-002", 10}, reg_rng,
                                         10 + kWindow + 1, kWindow);
    CHECK_FALSE(stale.response);
    CHECK(stale.reject_reason == "stale timestamp");

    CHECK(cag.repository_size() == 1);
    CHECK_THROWS_AS(cag.revoke("EV-001"), std::invalid_argument);  // already registered
}

TEST_CASE("honest run authenticates and meters the exact per-role figures") {
    for (const auto* curve : {&CurveParams::p256(), &CurveParams::toy()}) {
        Handshake h(*curve);
        OpCounters ev0 = h.ev.meter();
        OpCounters cs0 = h.cs.meter();
        OpCounters cag0 = h.cag.meter();

        h.honest_run(1000);

        const auto* evs = h.ev.session(0);
        REQUIRE(evs);
        CHECK(evs->phase == Phase::Authenticated);
        const auto* css = h.cs.session(kEvPeer);
        REQUIRE(css);
        CHECK(css->phase == Phase::M5Sent);

        OpCounters evd = h.ev.meter().delta_since(ev0);
        CHECK(evd.ecm_count == 2);
        CHECK(evd.hash_count == 3);
        OpCounters csd = h.cs.meter().delta_since(cs0);
        CHECK(csd.ecm_count == 5);
        CHECK(csd.hash_count == 3);
        OpCounters cagd = h.cag.meter().delta_since(cag0);
        CHECK(cagd.ecm_count == 3);
        CHECK(cagd.hash_count == 3);
    }
}

TEST_CASE("per-step meter deltas match the protocol description") {
    Handshake h(CurveParams::p256());
    auto m1 = h.cs.start_session(kEvPeer, 1, h.cs_rng, 1000);

    OpCounters before = h.ev.meter();
    auto m2 = h.ev.handle_m1(0, m1, 1, 1001, kWindow);
    REQUIRE(m2);
    OpCounters d = h.ev.meter().delta_since(before);
    CHECK(d.ecm_count == 1);
    CHECK(d.hash_count == 2);

    auto m3 = h.cs.handle_m2(kEvPeer, *m2, h.cs_rng, 1002, kWindow);
    REQUIRE(m3);

    before = h.cag.meter();
    auto m4 = h.cag.handle_m3(*m3, 1003, kWindow);
    REQUIRE(m4);
    d = h.cag.meter().delta_since(before);
    CHECK(d.ecm_count == 3);
    CHECK(d.hash_count == 3);

    auto m5 = h.cs.handle_m4(1, *m4, 1004, kWindow);
    REQUIRE(m5);

    before = h.ev.meter();
    REQUIRE(h.ev.handle_m5(0, *m5, 1005, kWindow));
    d = h.ev.meter().delta_since(before);
    CHECK(d.ecm_count == 1);
    CHECK(d.hash_count == 1);
}

TEST_CASE("completeness holds over many seeded runs") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Handshake h(CurveParams::p256(), seed);
        h.honest_run(1000 + seed);
        CHECK(h.ev.session(0)->phase == Phase::Authenticated);
    }
}

TEST_CASE("token symmetry: both sides derive the same shared point") {
    Handshake h(CurveParams::p256());
    auto m1 = h.cs.start_session(kEvPeer, 1, h.cs_rng, 100);
    // The CS's r1 against the EV key equals the EV's sk against R1.
    const auto* s = h.cs.session(kEvPeer);
    OpCounters scratch;
    Point via_cs = scalar_mult(s->r1, *h.cag.lookup_key(h.ev.ptd()), CurveParams::p256(),
                               scratch);
    Point via_ev = scalar_mult(h.ev.sk(), m1.r1_point, CurveParams::p256(), scratch);
    CHECK(via_cs == via_ev);
}

TEST_CASE("fresh nonce per session") {
    Handshake h(CurveParams::p256());
    auto m1a = h.cs.start_session(kEvPeer, 1, h.cs_rng, 100);
    Scalar r1a = h.cs.session(kEvPeer)->r1;
    auto m1b = h.cs.start_session(kEvPeer, 2, h.cs_rng, 200);
    Scalar r1b = h.cs.session(kEvPeer)->r1;
    CHECK_FALSE(r1a == r1b);
    CHECK_FALSE(m1a.r1_point == m1b.r1_point);
}

TEST_CASE("soundness on the toy curve: exactly one candidate R2 verifies") {
    const auto& c = CurveParams::toy();
    Handshake h(c);
    auto m1 = h.cs.start_session(kEvPeer, 1, h.cs_rng, 1000);
    const auto* s = h.cs.session(kEvPeer);

    // What the CS will accept for this session.
    OpCounters scratch;
    Point shared_cs = scalar_mult(s->r1, *h.cag.lookup_key(h.ev.ptd()), c, scratch);
    Digest expected = token_ev_cs(m1.r1_point, shared_cs, h.ev.ptd(), h.cs.ptd(), 1001, c,
                                  scratch);

    // An adversary without SK_EV can only enumerate candidate R2 values.
    int accepted = 0;
    Point the_right_one = scalar_mult(h.ev.sk(), m1.r1_point, c, scratch);
    for (const Point& candidate : oracle::enumerate_points(c)) {
        Digest forged = token_ev_cs(m1.r1_point, candidate, h.ev.ptd(), h.cs.ptd(), 1001,
                                    c, scratch);
        if (forged == expected) {
            ++accepted;
            CHECK(candidate == the_right_one);
        }
    }
    CHECK(accepted == 1);

    // Handler-level: the right R2 passes, a wrong one tears the session down.
    Digest auth_cag = token_ev_cag(m1.r1_point, the_right_one, h.ev.ptd(),
                                   h.cag.public_params().ptd_cag, 1001, c, scratch);
    wire::M2 good{expected, auth_cag, 1001, h.ev.ptd()};
    CHECK(h.cs.handle_m2(kEvPeer, good, h.cs_rng, 1002, kWindow));

    auto m1b = h.cs.start_session(kEvPeer, 2, h.cs_rng, 2000);
    Point wrong = point_add(the_right_one, c.base_point(), c);
    Digest forged = token_ev_cs(m1b.r1_point, wrong, h.ev.ptd(), h.cs.ptd(), 2001, c,
                                scratch);
    wire::M2 bad{forged, auth_cag, 2001, h.ev.ptd()};
    CHECK_FALSE(h.cs.handle_m2(kEvPeer, bad, h.cs_rng, 2002, kWindow));
    CHECK(h.cs.session(kEvPeer)->phase == Phase::Terminated);
}

TEST_CASE("stale messages are rejected regardless of token validity") {
    Handshake h(CurveParams::p256());

    SUBCASE("stale M1") {
        auto m1 = h.cs.start_session(kEvPeer, 1, h.cs_rng, 1000);
        CHECK_FALSE(h.ev.handle_m1(0, m1, 1, 1000 + kWindow + 1, kWindow));
        CHECK(h.ev.session(0) == nullptr);  // no session opened
    }
    SUBCASE("stale M2 with otherwise valid tokens") {
        auto m1 = h.cs.start_session(kEvPeer, 1, h.cs_rng, 1000);
        auto m2 = h.ev.handle_m1(0, m1, 1, 1001, kWindow);
        REQUIRE(m2);
        CHECK_FALSE(h.cs.handle_m2(kEvPeer, *m2, h.cs_rng, 1001 + kWindow + 1, kWindow));
        CHECK(h.cs.session(kEvPeer)->phase == Phase::Terminated);
        CHECK(h.cs.session(kEvPeer)->fail_reason == "stale T_EV");
    }
    SUBCASE("stale M3") {
        auto m1 = h.cs.start_session(kEvPeer, 1, h.cs_rng, 1000);
        auto m2 = h.ev.handle_m1(0, m1, 1, 1001, kWindow);
        auto m3 = h.cs.handle_m2(kEvPeer, *m2, h.cs_rng, 1002, kWindow);
        REQUIRE(m3);
        CHECK_FALSE(h.cag.handle_m3(*m3, 1002 + kWindow + 1, kWindow));
        CHECK(h.cag.last_reject_reason() == "stale timestamp");
    }
}

TEST_CASE("tampered tokens terminate the run at the right checkpoint") {
    Handshake h(CurveParams::p256());

    auto m1 = h.cs.start_session(kEvPeer, 1, h.cs_rng, 1000);
    auto m2 = h.ev.handle_m1(0, m1, 1, 1001, kWindow);
    REQUIRE(m2);

    SUBCASE("flipped Auth_EV_CS dies at the CS") {
        wire::M2 bad = *m2;
        bad.auth_ev_cs = flip_bit(bad.auth_ev_cs);
        CHECK_FALSE(h.cs.handle_m2(kEvPeer, bad, h.cs_rng, 1002, kWindow));
        CHECK(h.cs.session(kEvPeer)->fail_reason == "EV token mismatch");
    }
    SUBCASE("flipped Auth_EV_CAG passes the CS but dies at the CAG") {
        wire::M2 bad = *m2;
        bad.auth_ev_cag = flip_bit(bad.auth_ev_cag);
        auto m3 = h.cs.handle_m2(kEvPeer, bad, h.cs_rng, 1002, kWindow);
        REQUIRE(m3);  // the CS cannot see inside the nested token
        CHECK_FALSE(h.cag.handle_m3(*m3, 1003, kWindow));
        CHECK(h.cag.last_reject_reason() == "token mismatch");
    }
    SUBCASE("flipped Auth_CS_CAG dies at the CAG") {
        auto m3 = h.cs.handle_m2(kEvPeer, *m2, h.cs_rng, 1002, kWindow);
        REQUIRE(m3);
        wire::M3 bad = *m3;
        bad.auth_cs_cag = flip_bit(bad.auth_cs_cag);
        CHECK_FALSE(h.cag.handle_m3(bad, 1003, kWindow));
    }
    SUBCASE("r1 replaced by r1+1 dies at the CAG") {
        auto m3 = h.cs.handle_m2(kEvPeer, *m2, h.cs_rng, 1002, kWindow);
        REQUIRE(m3);
        wire::M3 bad = *m3;
        bad.r1 = make_scalar(bad.r1.value + 1, CurveParams::p256());
        CHECK_FALSE(h.cag.handle_m3(bad, 1003, kWindow));
        CHECK(h.cag.last_reject_reason() == "token mismatch");
    }
    SUBCASE("flipped Auth_CAG in M4 dies at the CS") {
        auto m3 = h.cs.handle_m2(kEvPeer, *m2, h.cs_rng, 1002, kWindow);
        auto m4 = h.cag.handle_m3(*m3, 1003, kWindow);
        REQUIRE(m4);
        wire::M4 bad = *m4;
        bad.auth_cag = flip_bit(bad.auth_cag);
        CHECK_FALSE(h.cs.handle_m4(1, bad, 1004, kWindow));
        CHECK(h.cs.session(kEvPeer)->fail_reason == "CAG token mismatch");
    }
    SUBCASE("flipped Auth_CAG in M5 dies at the EV") {
        auto m3 = h.cs.handle_m2(kEvPeer, *m2, h.cs_rng, 1002, kWindow);
        auto m4 = h.cag.handle_m3(*m3, 1003, kWindow);
        auto m5 = h.cs.handle_m4(1, *m4, 1004, kWindow);
        REQUIRE(m5);
        wire::M5 bad = *m5;
        bad.auth_cag = flip_bit(bad.auth_cag);
        CHECK_FALSE(h.ev.handle_m5(0, bad, 1005, kWindow));
        CHECK(h.ev.session(0)->phase == Phase::Terminated);
        CHECK(h.ev.session(0)->fail_reason == "CAG token mismatch");
    }
}

TEST_CASE("unknown pseudo identity terminates at the CS") {
    Handshake h(CurveParams::p256());
    auto m1 = h.cs.start_session(kEvPeer, 1, h.cs_rng, 1000);
    auto m2 = h.ev.handle_m1(0, m1, 1, 1001, kWindow);
    REQUIRE(m2);
    wire::M2 bad = *m2;
    bad.ptd_ev = flip_bit(bad.ptd_ev);
    CHECK_FALSE(h.cs.handle_m2(kEvPeer, bad, h.cs_rng, 1002, kWindow));
    CHECK(h.cs.session(kEvPeer)->fail_reason == "unknown PTD_EV");
}

TEST_CASE("an M3 with a repeated R1 is rejected inside the window") {
    Handshake h(CurveParams::p256());
    auto m1 = h.cs.start_session(kEvPeer, 1, h.cs_rng, 1000);
    auto m2 = h.ev.handle_m1(0, m1, 1, 1001, kWindow);
    auto m3 = h.cs.handle_m2(kEvPeer, *m2, h.cs_rng, 1002, kWindow);
    REQUIRE(m3);
    REQUIRE(h.cag.handle_m3(*m3, 1003, kWindow));
    // Identical M3 again, still fresh: the R1 replay cache rejects it.
    CHECK_FALSE(h.cag.handle_m3(*m3, 1004, kWindow));
    CHECK(h.cag.last_reject_reason() == "replayed R1");
}

TEST_CASE("M5 bound to a different session nonce is rejected") {
    Handshake h(CurveParams::p256());
    auto tr = h.honest_run(1000);

    // Re-run to a fresh session, then splice the r1 of an unrelated value.
    auto m1 = h.cs.start_session(kEvPeer, 2, h.cs_rng, 3000);
    auto m2 = h.ev.handle_m1(0, m1, 2, 3001, kWindow);
    REQUIRE(m2);
    auto m3 = h.cs.handle_m2(kEvPeer, *m2, h.cs_rng, 3002, kWindow);
    auto m4 = h.cag.handle_m3(*m3, 3003, kWindow);
    auto m5 = h.cs.handle_m4(2, *m4, 3004, kWindow);
    REQUIRE(m5);

    wire::M5 spliced = *m5;
    spliced.r1 = tr.m5.r1;  // r1 from the earlier session
    CHECK_FALSE(h.ev.handle_m5(0, spliced, 3005, kWindow));
    CHECK(h.ev.session(0)->phase == Phase::Terminated);
}

TEST_CASE("M5 into a session that never sent M2 is rejected without state") {
    Handshake h(CurveParams::p256());
    auto tr = h.honest_run(1000);
    // Terminal session: a replayed M5 is ignored.
    CHECK_FALSE(h.ev.handle_m5(0, tr.m5, 1010, kWindow));
    CHECK(h.ev.session(0)->phase == Phase::Authenticated);
    // Unknown peer: nothing to verify against.
    CHECK_FALSE(h.ev.handle_m5(99, tr.m5, 1010, kWindow));
    CHECK(h.ev.session(99) == nullptr);
}

TEST_CASE("cross-session token reuse never verifies") {
    const auto& c = CurveParams::p256();
    Handshake h(c);
    // Collect M2s from several sessions, then cross-feed each into a younger
    // session whose r1 differs.
    std::vector<wire::M2> m2s;
    for (std::uint64_t run = 1; run <= 6; ++run) {
        auto m1 = h.cs.start_session(kEvPeer, run, h.cs_rng, 1000 * run);
        // Distinct transport peers so the EV treats each run independently.
        auto m2 = h.ev.handle_m1(static_cast<PeerId>(100 + run), m1, run,
                                 1000 * run + 1, kWindow);
        REQUIRE(m2);
        m2s.push_back(*m2);
    }
    // The live session belongs to run 6. Every older token must fail.
    for (std::size_t i = 0; i + 1 < m2s.size(); ++i) {
        wire::M2 stale = m2s[i];
        stale.t_ev = 6000;  // refresh the timestamp so only the token decides
        auto m3 = h.cs.handle_m2(kEvPeer, stale, h.cs_rng, 6002, kWindow);
        CHECK_FALSE(m3);
        // Re-open the session for the next probe.
        auto m1 = h.cs.start_session(kEvPeer, 100 + i, h.cs_rng, 6000);
        (void)m1;
    }
}

TEST_CASE("out-of-order messages terminate mid-flight sessions") {
    Handshake h(CurveParams::p256());
    auto m1 = h.cs.start_session(kEvPeer, 1, h.cs_rng, 1000);
    auto m2 = h.ev.handle_m1(0, m1, 1, 1001, kWindow);
    auto m3 = h.cs.handle_m2(kEvPeer, *m2, h.cs_rng, 1002, kWindow);
    REQUIRE(m3);
    // Session is now waiting on M4; a duplicate M2 is a protocol violation.
    CHECK_FALSE(h.cs.handle_m2(kEvPeer, *m2, h.cs_rng, 1003, kWindow));
    CHECK(h.cs.session(kEvPeer)->phase == Phase::Terminated);
    CHECK(h.cs.session(kEvPeer)->fail_reason == "M2 out of order");
}

TEST_CASE("service settlement only on the authenticated session reference") {
    Handshake h(CurveParams::p256());
    h.honest_run(1000);
    const auto* s = h.cs.session(kEvPeer);
    Digest wrong = flip_bit(s->auth_ev_cag);
    CHECK(h.cs.settle(kEvPeer, wrong) == nullptr);
    const auto* settled = h.cs.settle(kEvPeer, s->auth_ev_cag);
    REQUIRE(settled);
    CHECK(settled->phase == Phase::Done);
    // Second settlement attempt is refused.
    CHECK(h.cs.settle(kEvPeer, s->auth_ev_cag) == nullptr);
}

TEST_CASE("CAG session table answers for vouched sessions only") {
    Handshake h(CurveParams::p256());
    auto tr = h.honest_run(1000);
    CHECK(h.cag.session_known(tr.m2.auth_ev_cag));
    const auto* info = h.cag.session_info(tr.m2.auth_ev_cag);
    REQUIRE(info);
    CHECK(info->ptd_ev == h.ev.ptd());
    CHECK(info->ptd_cs == h.cs.ptd());
    CHECK_FALSE(h.cag.session_known(flip_bit(tr.m2.auth_ev_cag)));
}

TEST_CASE("M5 relays the exact nonce and token the session opened with") {
    Handshake h(CurveParams::p256());
    auto tr = h.honest_run(1000);
    CHECK(tr.m5.r1 == tr.m3.r1);
    CHECK(tr.m5.auth_cag == tr.m4.auth_cag);
    CHECK(tr.m5.t_cag == tr.m4.t_cag);
    // R1 emitted in M1 is on the curve and consistent with M3.
    CHECK(CurveParams::p256().contains(tr.m1.r1_point));
    CHECK(tr.m3.r1_point == tr.m1.r1_point);
}

TEST_CASE("reward claims need a vouched session with matching parties") {
    Handshake h(CurveParams::p256());

    // Session that dies at the CAG: never vouched, never rewardable.
    auto m1 = h.cs.start_session(kEvPeer, 1, h.cs_rng, 1000);
    auto m2 = h.ev.handle_m1(0, m1, 1, 1001, kWindow);
    REQUIRE(m2);
    auto m3 = h.cs.handle_m2(kEvPeer, *m2, h.cs_rng, 1002, kWindow);
    REQUIRE(m3);
    wire::M3 bad = *m3;
    bad.auth_cs_cag = flip_bit(bad.auth_cs_cag);
    CHECK_FALSE(h.cag.handle_m3(bad, 1003, kWindow));
    CHECK_FALSE(h.cag.validate_reward_claim(m2->auth_ev_cag, h.ev.ptd(), h.cs.ptd()));

    // Completed session: claim valid, but only for the authenticated pair.
    h.ev.timeout_session(0, 2500);  // clear the stalled run first
    auto tr = h.honest_run(3000, 2);
    CHECK(h.cag.validate_reward_claim(tr.m2.auth_ev_cag, h.ev.ptd(), h.cs.ptd()));
    CHECK_FALSE(h.cag.validate_reward_claim(tr.m2.auth_ev_cag, h.cs.ptd(), h.ev.ptd()));
    CHECK_FALSE(
        h.cag.validate_reward_claim(flip_bit(tr.m2.auth_ev_cag), h.ev.ptd(), h.cs.ptd()));
}
