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

#include "v2g/codec.hpp"

#include <limits>

namespace v2g::wire {

Bytes make_field(FieldType type, ByteView payload) {
    if (payload.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw CodecError("field payload too long");
    }
    Bytes out;
    out.reserve(3 + payload.size());
    out.push_back(static_cast<std::uint8_t>(type));
    append_u16be(out, static_cast<std::uint16_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

Bytes field_point(const crypto::Point& q, const crypto::CurveParams& curve) {
    return make_field(FieldType::Point, crypto::encode_point(q, curve));
}

Bytes field_scalar(const crypto::Scalar& s, const crypto::CurveParams& curve) {
    return make_field(FieldType::Scalar, crypto::encode_scalar(s, curve));
}

Bytes field_digest(const crypto::Digest& d) {
    return make_field(FieldType::Digest, ByteView{d.data(), d.size()});
}

Bytes field_pseudo(const crypto::Digest& d) {
    return make_field(FieldType::PseudoId, ByteView{d.data(), d.size()});
}

Bytes field_timestamp(Tick t) {
    Bytes payload;
    append_u64be(payload, t);
    return make_field(FieldType::Timestamp, payload);
}

Bytes field_u64(std::uint64_t v) {
    Bytes payload;
    append_u64be(payload, v);
    return make_field(FieldType::U64, payload);
}

Bytes field_i64(std::int64_t v) {
    Bytes payload;
    append_u64be(payload, static_cast<std::uint64_t>(v));
    return make_field(FieldType::I64, payload);
}

Bytes field_id(ByteView id_payload) { return make_field(FieldType::IdBytes, id_payload); }

Bytes field_blob(ByteView payload) { return make_field(FieldType::Blob, payload); }

FieldType FieldReader::peek_type() const {
    if (pos_ >= data_.size()) throw CodecError("field stream exhausted");
    return static_cast<FieldType>(data_[pos_]);
}

ByteView FieldReader::next(FieldType expect) {
    if (pos_ + 3 > data_.size()) throw CodecError("truncated field header");
    auto type = static_cast<FieldType>(data_[pos_]);
    if (type != expect) throw CodecError("unexpected field type");
    std::size_t len = read_u16be(data_, pos_ + 1);
    if (pos_ + 3 + len > data_.size()) throw CodecError("truncated field payload");
    ByteView payload = data_.subspan(pos_ + 3, len);
    pos_ += 3 + len;
    return payload;
}

crypto::Point FieldReader::read_point(const crypto::CurveParams& curve) {
    return crypto::decode_point(next(FieldType::Point), curve);
}

crypto::Scalar FieldReader::read_scalar(const crypto::CurveParams& curve) {
    return crypto::decode_scalar(next(FieldType::Scalar), curve);
}

crypto::Digest FieldReader::read_digest() {
    return crypto::digest_from(next(FieldType::Digest));
}

crypto::Digest FieldReader::read_pseudo() {
    return crypto::digest_from(next(FieldType::PseudoId));
}

Tick FieldReader::read_timestamp() {
    ByteView p = next(FieldType::Timestamp);
    if (p.size() != 8) throw CodecError("timestamp field must be 8 bytes");
    return read_u64be(p, 0);
}

std::uint64_t FieldReader::read_u64() {
    ByteView p = next(FieldType::U64);
    if (p.size() != 8) throw CodecError("u64 field must be 8 bytes");
    return read_u64be(p, 0);
}

std::int64_t FieldReader::read_i64() {
    ByteView p = next(FieldType::I64);
    if (p.size() != 8) throw CodecError("i64 field must be 8 bytes");
    return static_cast<std::int64_t>(read_u64be(p, 0));
}

Bytes FieldReader::read_id() {
    ByteView p = next(FieldType::IdBytes);
    return Bytes(p.begin(), p.end());
}

Bytes FieldReader::read_blob() {
    ByteView p = next(FieldType::Blob);
    return Bytes(p.begin(), p.end());
}

void FieldReader::expect_end() const {
    if (pos_ != data_.size()) throw CodecError("trailing bytes after last field");
}

std::vector<FieldSpan> split_fields(ByteView body) {
    std::vector<FieldSpan> out;
    std::size_t pos = 0;
    while (pos < body.size()) {
        if (pos + 3 > body.size()) throw CodecError("truncated field header");
        auto type = static_cast<FieldType>(body[pos]);
        std::size_t len = read_u16be(body, pos + 1);
        if (pos + 3 + len > body.size()) throw CodecError("truncated field payload");
        out.push_back(FieldSpan{type, pos + 3, len});
        pos += 3 + len;
    }
    return out;
}

}  // namespace v2g::wire
