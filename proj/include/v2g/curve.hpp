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

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <string>

#include "v2g/bytes.hpp"
#include "v2g/counters.hpp"
#include "v2g/rng.hpp"

namespace v2g::crypto {

using BigInt = boost::multiprecision::cpp_int;

/// Affine point on a short-Weierstrass curve, or the point at infinity.
struct Point {
    BigInt x;
    BigInt y;
    bool infinity = true;

    Point() = default;
    Point(BigInt px, BigInt py) : x(std::move(px)), y(std::move(py)), infinity(false) {}

    static Point at_infinity() { return Point{}; }
    bool is_infinity() const { return infinity; }

    friend bool operator==(const Point& a, const Point& b) {
        if (a.infinity || b.infinity) return a.infinity == b.infinity;
        return a.x == b.x && a.y == b.y;
    }
};

/// Group parameters for y^2 = x^3 + ax + b over F_p with a base point of
/// prime order n. Construction validates non-singularity, base-point
/// membership, and that n annihilates the base point.
class CurveParams {
public:
    CurveParams(std::string name, BigInt p, BigInt a, BigInt b, BigInt gx, BigInt gy,
                BigInt n, unsigned cofactor);

    /// NIST P-256, the production-scale default.
    static const CurveParams& p256();
    /// Tiny exhaustively-enumerable curve y^2 = x^3 + 2x + 2 over F_17,
    /// generator (5,1) of order 19. Used as a brute-force oracle.
    static const CurveParams& toy();
    static const CurveParams& by_name(const std::string& name);

    const std::string& name() const { return name_; }
    const BigInt& prime_modulus() const { return p_; }
    const BigInt& coeff_a() const { return a_; }
    const BigInt& coeff_b() const { return b_; }
    const Point& base_point() const { return g_; }
    const BigInt& group_order() const { return n_; }
    unsigned cofactor() const { return cofactor_; }

    /// Byte width of one field element (x coordinate) on the wire.
    std::size_t field_bytes() const { return field_bytes_; }
    /// Byte width of one scalar on the wire.
    std::size_t scalar_bytes() const { return scalar_bytes_; }

    /// True for on-curve affine points and for the point at infinity.
    bool contains(const Point& q) const;

private:
    std::string name_;
    BigInt p_, a_, b_, n_;
    Point g_;
    unsigned cofactor_;
    std::size_t field_bytes_;
    std::size_t scalar_bytes_;
};

/// Multiplier in [1, n-1]. Values are reduced mod the group order at
/// construction; a residue of zero is rejected.
struct Scalar {
    BigInt value;

    friend bool operator==(const Scalar& a, const Scalar& b) { return a.value == b.value; }
};

struct KeyPair {
    Scalar sk;
    Point pk;
};

Scalar make_scalar(BigInt v, const CurveParams& curve);

/// Chord-and-tangent group addition. Throws CodecError if an operand is
/// off-curve.
Point point_add(const Point& p1, const Point& p2, const CurveParams& curve);

/// k*Q by double-and-add (Jacobian internally). Counts one ECM on the meter.
Point scalar_mult(const Scalar& k, const Point& q, const CurveParams& curve,
                  OpCounters& meter);

/// Fresh key pair with sk uniform in [1, n-1] and pk = sk*P. Deterministic
/// under a fixed rng. The base-point multiplication is metered.
KeyPair keygen(Rng& rng, const CurveParams& curve, OpCounters& meter);

/// Uniform scalar in [1, n-1] by rejection sampling.
Scalar random_scalar(Rng& rng, const CurveParams& curve);

/// Compressed encoding: parity byte 0x02/0x03 followed by the big-endian x
/// coordinate at the curve's field width; the point at infinity is the
/// single byte 0x00.
Bytes encode_point(const Point& q, const CurveParams& curve);
Point decode_point(ByteView in, const CurveParams& curve);

/// Big-endian fixed-width scalar encoding at the curve's scalar width.
Bytes encode_scalar(const Scalar& s, const CurveParams& curve);
Scalar decode_scalar(ByteView in, const CurveParams& curve);

}  // namespace v2g::crypto
