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
#include <string>
#include <vector>

#include "v2g/bytes.hpp"
#include "v2g/curve.hpp"
#include "v2g/hash.hpp"

namespace v2g::wire {

// Every protocol field is encoded as 1-byte type tag + 2-byte big-endian
// payload length + payload. The same field encoding feeds both hash
// preimages and message bodies, so the framing is normative and bit-exact.
enum class FieldType : std::uint8_t {
    Point = 0x01,
    Scalar = 0x02,
    Digest = 0x03,
    Timestamp = 0x04,
    IdBytes = 0x05,
    PseudoId = 0x06,
    U64 = 0x07,
    Blob = 0x08,
    I64 = 0x09,
};

Bytes make_field(FieldType type, ByteView payload);

Bytes field_point(const crypto::Point& q, const crypto::CurveParams& curve);
Bytes field_scalar(const crypto::Scalar& s, const crypto::CurveParams& curve);
Bytes field_digest(const crypto::Digest& d);
Bytes field_pseudo(const crypto::Digest& d);
Bytes field_timestamp(Tick t);
Bytes field_u64(std::uint64_t v);
Bytes field_i64(std::int64_t v);
Bytes field_id(ByteView id_payload);
Bytes field_blob(ByteView payload);

/// Sequential reader over a field stream. Typed reads throw CodecError on a
/// type or length mismatch; expect_end rejects trailing bytes.
class FieldReader {
public:
    explicit FieldReader(ByteView data) : data_(data) {}

    bool done() const { return pos_ >= data_.size(); }

    FieldType peek_type() const;
    ByteView next(FieldType expect);

    crypto::Point read_point(const crypto::CurveParams& curve);
    crypto::Scalar read_scalar(const crypto::CurveParams& curve);
    crypto::Digest read_digest();
    crypto::Digest read_pseudo();
    Tick read_timestamp();
    std::uint64_t read_u64();
    std::int64_t read_i64();
    Bytes read_id();
    Bytes read_blob();

    void expect_end() const;

private:
    ByteView data_;
    std::size_t pos_ = 0;
};

/// Location of one encoded field inside a message body (offsets relative to
/// the start of the body, i.e. excluding any leading message tag byte).
struct FieldSpan {
    FieldType type;
    std::size_t payload_offset;
    std::size_t payload_len;
};

/// Splits a field stream without interpreting payloads. Used by the
/// adversary to address fields by ordinal.
std::vector<FieldSpan> split_fields(ByteView body);

}  // namespace v2g::wire
