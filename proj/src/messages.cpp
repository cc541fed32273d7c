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

#include "v2g/messages.hpp"

namespace v2g::wire {

namespace {

Bytes with_tag(MsgTag tag, std::initializer_list<const Bytes*> fields) {
    Bytes out;
    out.push_back(static_cast<std::uint8_t>(tag));
    for (const Bytes* f : fields) out.insert(out.end(), f->begin(), f->end());
    return out;
}

ByteView body_of(ByteView payload, MsgTag expect) {
    if (payload.empty()) throw CodecError("empty message");
    if (payload[0] != static_cast<std::uint8_t>(expect)) {
        throw CodecError("message tag mismatch");
    }
    return payload.subspan(1);
}

Bytes encode_true_id(Role role, const std::string& id) {
    Bytes payload;
    payload.push_back(static_cast<std::uint8_t>(role));
    payload.insert(payload.end(), id.begin(), id.end());
    return payload;
}

}  // namespace

std::optional<MsgTag> peek_tag(ByteView payload) {
    if (payload.empty()) return std::nullopt;
    switch (payload[0]) {
        case 0x01: case 0x02: case 0x03: case 0x04: case 0x05:
        case 0x10: case 0x11: case 0x12: case 0x13:
        case 0x20: case 0x21: case 0x22: case 0x23:
        case 0x24: case 0x25: case 0x26:
            return static_cast<MsgTag>(payload[0]);
        default:
            return std::nullopt;
    }
}

const char* tag_name(MsgTag tag) {
    switch (tag) {
        case MsgTag::M1: return "M1";
        case MsgTag::M2: return "M2";
        case MsgTag::M3: return "M3";
        case MsgTag::M4: return "M4";
        case MsgTag::M5: return "M5";
        case MsgTag::RegRequest: return "REG_REQ";
        case MsgTag::RegResponse: return "REG_RESP";
        case MsgTag::RegistryPush: return "REGISTRY";
        case MsgTag::EnergyRecord: return "ENERGY";
        case MsgTag::Proposal: return "PROPOSAL";
        case MsgTag::VoteRequest: return "VOTE_REQ";
        case MsgTag::Vote: return "VOTE";
        case MsgTag::Commit: return "COMMIT";
        case MsgTag::TxSubmit: return "TX_SUBMIT";
        case MsgTag::TxBroadcast: return "TX_BCAST";
        case MsgTag::Receipt: return "RECEIPT";
    }
    return "?";
}

unsigned token_count(MsgTag tag) {
    switch (tag) {
        case MsgTag::M1: return 3;
        case MsgTag::M2: return 4;
        case MsgTag::M3: return 8;
        case MsgTag::M4: return 2;
        case MsgTag::M5: return 3;
        default: return 0;
    }
}

const char* role_name(Role role) {
    switch (role) {
        case Role::Ev: return "EV";
        case Role::Cs: return "CS";
        case Role::Cag: return "CAG";
    }
    return "?";
}

Bytes M1::encode(const crypto::CurveParams& curve) const {
    Bytes f1 = field_point(r1_point, curve);
    Bytes f2 = field_pseudo(ptd_cs);
    Bytes f3 = field_timestamp(t_cs);
    return with_tag(MsgTag::M1, {&f1, &f2, &f3});
}

M1 M1::decode(ByteView payload, const crypto::CurveParams& curve) {
    FieldReader r(body_of(payload, MsgTag::M1));
    M1 m;
    m.r1_point = r.read_point(curve);
    m.ptd_cs = r.read_pseudo();
    m.t_cs = r.read_timestamp();
    r.expect_end();
    return m;
}

Bytes M2::encode(const crypto::CurveParams&) const {
    Bytes f1 = field_digest(auth_ev_cs);
    Bytes f2 = field_digest(auth_ev_cag);
    Bytes f3 = field_timestamp(t_ev);
    Bytes f4 = field_pseudo(ptd_ev);
    return with_tag(MsgTag::M2, {&f1, &f2, &f3, &f4});
}

M2 M2::decode(ByteView payload, const crypto::CurveParams&) {
    FieldReader r(body_of(payload, MsgTag::M2));
    M2 m;
    m.auth_ev_cs = r.read_digest();
    m.auth_ev_cag = r.read_digest();
    m.t_ev = r.read_timestamp();
    m.ptd_ev = r.read_pseudo();
    r.expect_end();
    return m;
}

Bytes M3::encode(const crypto::CurveParams& curve) const {
    Bytes f1 = field_digest(auth_cs_cag);
    Bytes f2 = field_timestamp(t_cs);
    Bytes f3 = field_timestamp(t_ev);
    Bytes f4 = field_scalar(r1, curve);
    Bytes f5 = field_scalar(r2, curve);
    Bytes f6 = field_point(r1_point, curve);
    Bytes f7 = field_pseudo(ptd_ev);
    Bytes f8 = field_pseudo(ptd_cs);
    return with_tag(MsgTag::M3, {&f1, &f2, &f3, &f4, &f5, &f6, &f7, &f8});
}

M3 M3::decode(ByteView payload, const crypto::CurveParams& curve) {
    FieldReader r(body_of(payload, MsgTag::M3));
    M3 m;
    m.auth_cs_cag = r.read_digest();
    m.t_cs = r.read_timestamp();
    m.t_ev = r.read_timestamp();
    m.r1 = r.read_scalar(curve);
    m.r2 = r.read_scalar(curve);
    m.r1_point = r.read_point(curve);
    m.ptd_ev = r.read_pseudo();
    m.ptd_cs = r.read_pseudo();
    r.expect_end();
    return m;
}

Bytes M4::encode(const crypto::CurveParams&) const {
    Bytes f1 = field_digest(auth_cag);
    Bytes f2 = field_timestamp(t_cag);
    return with_tag(MsgTag::M4, {&f1, &f2});
}

M4 M4::decode(ByteView payload, const crypto::CurveParams&) {
    FieldReader r(body_of(payload, MsgTag::M4));
    M4 m;
    m.auth_cag = r.read_digest();
    m.t_cag = r.read_timestamp();
    r.expect_end();
    return m;
}

Bytes M5::encode(const crypto::CurveParams& curve) const {
    Bytes f1 = field_digest(auth_cag);
    Bytes f2 = field_timestamp(t_cag);
    Bytes f3 = field_scalar(r1, curve);
    return with_tag(MsgTag::M5, {&f1, &f2, &f3});
}

M5 M5::decode(ByteView payload, const crypto::CurveParams& curve) {
    FieldReader r(body_of(payload, MsgTag::M5));
    M5 m;
    m.auth_cag = r.read_digest();
    m.t_cag = r.read_timestamp();
    m.r1 = r.read_scalar(curve);
    r.expect_end();
    return m;
}

Bytes RegRequest::encode(const crypto::CurveParams&) const {
    if (true_id.empty()) throw CodecError("true id must be non-empty");
    Bytes f1 = field_id(encode_true_id(role, true_id));
    Bytes f2 = field_timestamp(t);
    return with_tag(MsgTag::RegRequest, {&f1, &f2});
}

RegRequest RegRequest::decode(ByteView payload, const crypto::CurveParams&) {
    FieldReader r(body_of(payload, MsgTag::RegRequest));
    Bytes id = r.read_id();
    if (id.size() < 2) throw CodecError("true id too short");
    RegRequest req;
    if (id[0] != 0x01 && id[0] != 0x02) throw CodecError("bad role byte");
    req.role = static_cast<Role>(id[0]);
    req.true_id.assign(id.begin() + 1, id.end());
    req.t = r.read_timestamp();
    r.expect_end();
    return req;
}

Bytes RegResponse::encode(const crypto::CurveParams& curve) const {
    Bytes f1 = field_pseudo(ptd);
    Bytes f2 = field_point(pk, curve);
    Bytes f3 = field_scalar(sk, curve);
    return with_tag(MsgTag::RegResponse, {&f1, &f2, &f3});
}

RegResponse RegResponse::decode(ByteView payload, const crypto::CurveParams& curve) {
    FieldReader r(body_of(payload, MsgTag::RegResponse));
    RegResponse resp;
    resp.ptd = r.read_pseudo();
    resp.pk = r.read_point(curve);
    resp.sk = r.read_scalar(curve);
    r.expect_end();
    return resp;
}

Bytes RegistryPush::encode(const crypto::CurveParams& curve) const {
    Bytes out;
    out.push_back(static_cast<std::uint8_t>(MsgTag::RegistryPush));
    for (const RegistryEntry& e : entries) {
        Bytes f1 = field_pseudo(e.ptd);
        Bytes f2 = field_point(e.pk, curve);
        Bytes f3 = field_u64(static_cast<std::uint64_t>(e.role));
        out.insert(out.end(), f1.begin(), f1.end());
        out.insert(out.end(), f2.begin(), f2.end());
        out.insert(out.end(), f3.begin(), f3.end());
    }
    return out;
}

RegistryPush RegistryPush::decode(ByteView payload, const crypto::CurveParams& curve) {
    FieldReader r(body_of(payload, MsgTag::RegistryPush));
    RegistryPush push;
    while (!r.done()) {
        RegistryEntry e;
        e.ptd = r.read_pseudo();
        e.pk = r.read_point(curve);
        std::uint64_t role = r.read_u64();
        if (role != 0x01 && role != 0x02) throw CodecError("bad registry role");
        e.role = static_cast<Role>(role);
        push.entries.push_back(std::move(e));
    }
    return push;
}

Bytes EnergyRecord::encode(const crypto::CurveParams&) const {
    Bytes f1 = field_digest(session_ref);
    Bytes f2 = field_i64(energy_milli_kwh);
    return with_tag(MsgTag::EnergyRecord, {&f1, &f2});
}

EnergyRecord EnergyRecord::decode(ByteView payload, const crypto::CurveParams&) {
    FieldReader r(body_of(payload, MsgTag::EnergyRecord));
    EnergyRecord rec;
    rec.session_ref = r.read_digest();
    rec.energy_milli_kwh = r.read_i64();
    r.expect_end();
    if (rec.energy_milli_kwh < 0) throw CodecError("negative energy");
    return rec;
}

Bytes Receipt::encode(const crypto::CurveParams&) const {
    Bytes f1 = field_digest(tx_hash);
    Bytes f2 = field_u64(block_height);
    return with_tag(MsgTag::Receipt, {&f1, &f2});
}

Receipt Receipt::decode(ByteView payload, const crypto::CurveParams&) {
    FieldReader r(body_of(payload, MsgTag::Receipt));
    Receipt rc;
    rc.tx_hash = r.read_digest();
    rc.block_height = r.read_u64();
    r.expect_end();
    return rc;
}

std::optional<std::size_t> pseudo_field_index(MsgTag tag, Role role) {
    switch (tag) {
        case MsgTag::M1:
            if (role == Role::Cs) return 1;
            return std::nullopt;
        case MsgTag::M2:
            if (role == Role::Ev) return 3;
            return std::nullopt;
        case MsgTag::M3:
            if (role == Role::Ev) return 6;
            if (role == Role::Cs) return 7;
            return std::nullopt;
        default:
            return std::nullopt;
    }
}

}  // namespace v2g::wire
