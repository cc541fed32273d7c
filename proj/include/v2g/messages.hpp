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
#include <optional>
#include <vector>

#include "v2g/codec.hpp"
#include "v2g/curve.hpp"
#include "v2g/hash.hpp"

namespace v2g::wire {

/// Leading message-type byte of every wire message.
enum class MsgTag : std::uint8_t {
    M1 = 0x01,
    M2 = 0x02,
    M3 = 0x03,
    M4 = 0x04,
    M5 = 0x05,
    RegRequest = 0x10,
    RegResponse = 0x11,
    RegistryPush = 0x12,
    EnergyRecord = 0x13,
    Proposal = 0x20,
    VoteRequest = 0x21,
    Vote = 0x22,
    Commit = 0x23,
    TxSubmit = 0x24,
    TxBroadcast = 0x25,
    Receipt = 0x26,
};

std::optional<MsgTag> peek_tag(ByteView payload);
const char* tag_name(MsgTag tag);

/// Number of protocol tokens (top-level fields) a message of this type
/// carries. Zero for everything outside the five-message auth flow.
unsigned token_count(MsgTag tag);

/// Roles on the wire: one byte inside the identity field payload.
enum class Role : std::uint8_t { Ev = 0x01, Cs = 0x02, Cag = 0x03 };
const char* role_name(Role role);

using PseudoId = crypto::Digest;

// Auth flow, in wire field order.

struct M1 {
    crypto::Point r1_point;  // R1 = r1*P
    PseudoId ptd_cs;
    Tick t_cs;

    Bytes encode(const crypto::CurveParams& curve) const;
    static M1 decode(ByteView body, const crypto::CurveParams& curve);
};

struct M2 {
    crypto::Digest auth_ev_cs;
    crypto::Digest auth_ev_cag;
    Tick t_ev;
    PseudoId ptd_ev;

    Bytes encode(const crypto::CurveParams& curve) const;
    static M2 decode(ByteView body, const crypto::CurveParams& curve);
};

struct M3 {
    crypto::Digest auth_cs_cag;
    Tick t_cs;
    Tick t_ev;
    crypto::Scalar r1;
    crypto::Scalar r2;
    crypto::Point r1_point;
    PseudoId ptd_ev;
    PseudoId ptd_cs;

    Bytes encode(const crypto::CurveParams& curve) const;
    static M3 decode(ByteView body, const crypto::CurveParams& curve);
};

struct M4 {
    crypto::Digest auth_cag;
    Tick t_cag;

    Bytes encode(const crypto::CurveParams& curve) const;
    static M4 decode(ByteView body, const crypto::CurveParams& curve);
};

struct M5 {
    crypto::Digest auth_cag;
    Tick t_cag;
    crypto::Scalar r1;

    Bytes encode(const crypto::CurveParams& curve) const;
    static M5 decode(ByteView body, const crypto::CurveParams& curve);
};

// Registration, carried on the secure channel only.

struct RegRequest {
    Role role;
    std::string true_id;
    Tick t;

    Bytes encode(const crypto::CurveParams& curve) const;
    static RegRequest decode(ByteView body, const crypto::CurveParams& curve);
};

struct RegResponse {
    PseudoId ptd;
    crypto::Point pk;
    crypto::Scalar sk;

    Bytes encode(const crypto::CurveParams& curve) const;
    static RegResponse decode(ByteView body, const crypto::CurveParams& curve);
};

struct RegistryEntry {
    PseudoId ptd;
    crypto::Point pk;
    Role role;
};

struct RegistryPush {
    std::vector<RegistryEntry> entries;

    Bytes encode(const crypto::CurveParams& curve) const;
    static RegistryPush decode(ByteView body, const crypto::CurveParams& curve);
};

/// Smart-meter reading the EV releases after it has authenticated the far
/// side: how much energy moved in the session identified by session_ref.
struct EnergyRecord {
    crypto::Digest session_ref;
    std::int64_t energy_milli_kwh;

    Bytes encode(const crypto::CurveParams& curve) const;
    static EnergyRecord decode(ByteView body, const crypto::CurveParams& curve);
};

struct Receipt {
    crypto::Digest tx_hash;
    std::uint64_t block_height;

    Bytes encode(const crypto::CurveParams& curve) const;
    static Receipt decode(ByteView body, const crypto::CurveParams& curve);
};

/// Field index of the EV or CS pseudo-identity inside a message body, for
/// adversarial rewrites. nullopt when the message has no such field.
std::optional<std::size_t> pseudo_field_index(MsgTag tag, Role role);

}  // namespace v2g::wire
