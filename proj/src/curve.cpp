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

#include "v2g/curve.hpp"

#include <stdexcept>
#include <utility>

namespace v2g::crypto {

namespace {

BigInt mod(const BigInt& v, const BigInt& p) {
    BigInt r = v % p;
    if (r < 0) r += p;
    return r;
}

BigInt mod_mul(const BigInt& a, const BigInt& b, const BigInt& p) { return mod(a * b, p); }

// Fermat inverse; p is prime throughout this module.
BigInt mod_inv(const BigInt& a, const BigInt& p) {
    if (mod(a, p) == 0) throw std::invalid_argument("inverse of zero");
    return boost::multiprecision::powm(mod(a, p), p - 2, p);
}

// Tonelli-Shanks square root mod an odd prime. Returns false when a is a
// non-residue.
bool mod_sqrt(const BigInt& a_in, const BigInt& p, BigInt& out) {
    BigInt a = mod(a_in, p);
    if (a == 0) {
        out = 0;
        return true;
    }
    using boost::multiprecision::powm;
    if (powm(a, (p - 1) / 2, p) != 1) return false;
    if (p % 4 == 3) {
        out = powm(a, (p + 1) / 4, p);
        return true;
    }
    // Factor p-1 = q * 2^s with q odd.
    BigInt q = p - 1;
    unsigned s = 0;
    while (q % 2 == 0) {
        q /= 2;
        ++s;
    }
    // Find a non-residue z.
    BigInt z = 2;
    while (powm(z, (p - 1) / 2, p) != p - 1) ++z;
    BigInt m = s;
    BigInt c = powm(z, q, p);
    BigInt t = powm(a, q, p);
    BigInt r = powm(a, (q + 1) / 2, p);
    while (t != 1) {
        BigInt t2 = t;
        unsigned i = 0;
        while (t2 != 1) {
            t2 = mod_mul(t2, t2, p);
            ++i;
            if (BigInt(i) == m) return false;
        }
        BigInt b = c;
        for (BigInt j = 0; j < m - i - 1; ++j) b = mod_mul(b, b, p);
        m = i;
        c = mod_mul(b, b, p);
        t = mod_mul(t, c, p);
        r = mod_mul(r, b, p);
    }
    out = r;
    return true;
}

bool on_curve_raw(const Point& q, const BigInt& p, const BigInt& a, const BigInt& b) {
    if (q.is_infinity()) return true;
    if (q.x < 0 || q.x >= p || q.y < 0 || q.y >= p) return false;
    BigInt lhs = mod_mul(q.y, q.y, p);
    BigInt rhs = mod(mod_mul(mod_mul(q.x, q.x, p), q.x, p) + mod_mul(a, q.x, p) + b, p);
    return lhs == rhs;
}

Point add_raw(const Point& p1, const Point& p2, const BigInt& p, const BigInt& a) {
    if (p1.is_infinity()) return p2;
    if (p2.is_infinity()) return p1;
    if (p1.x == p2.x) {
        if (mod(p1.y + p2.y, p) == 0) return Point::at_infinity();
        // Tangent rule.
        BigInt lambda = mod_mul(mod(3 * mod_mul(p1.x, p1.x, p) + a, p),
                                mod_inv(2 * p1.y, p), p);
        BigInt x3 = mod(mod_mul(lambda, lambda, p) - p1.x - p2.x, p);
        BigInt y3 = mod(mod_mul(lambda, p1.x - x3, p) - p1.y, p);
        return Point{std::move(x3), std::move(y3)};
    }
    // Chord rule.
    BigInt lambda = mod_mul(mod(p2.y - p1.y, p), mod_inv(mod(p2.x - p1.x, p), p), p);
    BigInt x3 = mod(mod_mul(lambda, lambda, p) - p1.x - p2.x, p);
    BigInt y3 = mod(mod_mul(lambda, p1.x - x3, p) - p1.y, p);
    return Point{std::move(x3), std::move(y3)};
}

// Jacobian coordinates (X, Y, Z) with x = X/Z^2, y = Y/Z^3. Avoids a field
// inversion per group operation during scalar multiplication.
struct Jac {
    BigInt x, y, z;  // z == 0 encodes infinity
};

Jac to_jac(const Point& q) {
    if (q.is_infinity()) return {1, 1, 0};
    return {q.x, q.y, 1};
}

Point from_jac(const Jac& j, const BigInt& p) {
    if (j.z == 0) return Point::at_infinity();
    BigInt zi = mod_inv(j.z, p);
    BigInt zi2 = mod_mul(zi, zi, p);
    return Point{mod_mul(j.x, zi2, p), mod_mul(j.y, mod_mul(zi2, zi, p), p)};
}

Jac jac_double(const Jac& q, const BigInt& p, const BigInt& a) {
    if (q.z == 0 || q.y == 0) return {1, 1, 0};
    BigInt y2 = mod_mul(q.y, q.y, p);
    BigInt s = mod_mul(4 * q.x % p, y2, p);
    BigInt z2 = mod_mul(q.z, q.z, p);
    BigInt m = mod(3 * mod_mul(q.x, q.x, p) + mod_mul(a, mod_mul(z2, z2, p), p), p);
    BigInt x3 = mod(mod_mul(m, m, p) - 2 * s, p);
    BigInt y3 = mod(mod_mul(m, mod(s - x3, p), p) - mod_mul(8 * y2 % p, y2, p), p);
    BigInt z3 = mod_mul(2 * q.y % p, q.z, p);
    return {std::move(x3), std::move(y3), std::move(z3)};
}

// Mixed addition: q2 is affine (z = 1).
Jac jac_add_affine(const Jac& q1, const Point& q2, const BigInt& p, const BigInt& a) {
    if (q1.z == 0) return to_jac(q2);
    if (q2.is_infinity()) return q1;
    BigInt z1z1 = mod_mul(q1.z, q1.z, p);
    BigInt u2 = mod_mul(q2.x, z1z1, p);
    BigInt s2 = mod_mul(q2.y, mod_mul(z1z1, q1.z, p), p);
    if (u2 == q1.x) {
        if (s2 != q1.y) return {1, 1, 0};
        return jac_double(q1, p, a);
    }
    BigInt h = mod(u2 - q1.x, p);
    BigInt r = mod(s2 - q1.y, p);
    BigInt h2 = mod_mul(h, h, p);
    BigInt h3 = mod_mul(h2, h, p);
    BigInt v = mod_mul(q1.x, h2, p);
    BigInt x3 = mod(mod_mul(r, r, p) - h3 - 2 * v, p);
    BigInt y3 = mod(mod_mul(r, mod(v - x3, p), p) - mod_mul(q1.y, h3, p), p);
    BigInt z3 = mod_mul(q1.z, h, p);
    return {std::move(x3), std::move(y3), std::move(z3)};
}

Point mult_raw(const BigInt& k, const Point& q, const BigInt& p, const BigInt& a) {
    Jac acc{1, 1, 0};
    for (int i = static_cast<int>(boost::multiprecision::msb(k)); i >= 0; --i) {
        acc = jac_double(acc, p, a);
        if (boost::multiprecision::bit_test(k, static_cast<unsigned>(i))) {
            acc = jac_add_affine(acc, q, p, a);
        }
    }
    return from_jac(acc, p);
}

std::size_t byte_width(const BigInt& v) {
    std::size_t bits = boost::multiprecision::msb(v) + 1;
    return (bits + 7) / 8;
}

void append_fixed_be(Bytes& out, const BigInt& v, std::size_t width) {
    Bytes tmp(width, 0);
    BigInt cur = v;
    for (std::size_t i = 0; i < width; ++i) {
        tmp[width - 1 - i] = static_cast<std::uint8_t>(cur & 0xff);
        cur >>= 8;
    }
    if (cur != 0) throw std::invalid_argument("value exceeds encoding width");
    out.insert(out.end(), tmp.begin(), tmp.end());
}

BigInt read_be(ByteView in) {
    BigInt v = 0;
    for (std::uint8_t b : in) v = (v << 8) | b;
    return v;
}

}  // namespace

CurveParams::CurveParams(std::string name, BigInt p, BigInt a, BigInt b, BigInt gx,
                         BigInt gy, BigInt n, unsigned cofactor)
    : name_(std::move(name)),
      p_(std::move(p)),
      a_(std::move(a)),
      b_(std::move(b)),
      n_(std::move(n)),
      g_(std::move(gx), std::move(gy)),
      cofactor_(cofactor),
      field_bytes_(byte_width(p_)),
      scalar_bytes_(byte_width(n_)) {
    BigInt disc = mod(4 * mod_mul(mod_mul(a_, a_, p_), a_, p_) +
                          27 * mod_mul(b_, b_, p_),
                      p_);
    if (disc == 0) throw std::invalid_argument("singular curve");
    if (!on_curve_raw(g_, p_, a_, b_)) throw std::invalid_argument("base point off curve");
    if (!mult_raw(n_, g_, p_, a_).is_infinity()) {
        throw std::invalid_argument("group order does not annihilate base point");
    }
}

const CurveParams& CurveParams::p256() {
    static const CurveParams curve{
        "p256",
        BigInt("0xffffffff00000001000000000000000000000000ffffffffffffffffffffffff"),
        BigInt("0xffffffff00000001000000000000000000000000fffffffffffffffffffffffc"),
        BigInt("0x5ac635d8aa3a93e7b3ebbd55769886bc651d06b0cc53b0f63bce3c3e27d2604b"),
        BigInt("0x6b17d1f2e12c4247f8bce6e563a440f277037d812deb33a0f4a13945d898c296"),
        BigInt("0x4fe342e2fe1a7f9b8ee7eb4a7c0f9e162bce33576b315ececbb6406837bf51f5"),
        BigInt("0xffffffff00000000ffffffffffffffffbce6faada7179e84f3b9cac2fc632551"),
        1};
    return curve;
}

const CurveParams& CurveParams::toy() {
    static const CurveParams curve{"toy", 17, 2, 2, 5, 1, 19, 1};
    return curve;
}

const CurveParams& CurveParams::by_name(const std::string& name) {
    if (name == "p256") return p256();
    if (name == "toy") return toy();
    throw std::invalid_argument("unknown curve: " + name);
}

bool CurveParams::contains(const Point& q) const { return on_curve_raw(q, p_, a_, b_); }

Scalar make_scalar(BigInt v, const CurveParams& curve) {
    BigInt r = mod(v, curve.group_order());
    if (r == 0) throw std::invalid_argument("scalar is zero mod group order");
    return Scalar{std::move(r)};
}

Point point_add(const Point& p1, const Point& p2, const CurveParams& curve) {
    if (!curve.contains(p1) || !curve.contains(p2)) {
        throw CodecError("point_add operand not on curve");
    }
    return add_raw(p1, p2, curve.prime_modulus(), curve.coeff_a());
}

Point scalar_mult(const Scalar& k, const Point& q, const CurveParams& curve,
                  OpCounters& meter) {
    if (k.value <= 0 || k.value >= curve.group_order()) {
        throw std::invalid_argument("scalar out of range");
    }
    if (!curve.contains(q)) throw CodecError("scalar_mult operand not on curve");
    meter.ecm_count += 1;
    if (q.is_infinity()) return q;
    return mult_raw(k.value, q, curve.prime_modulus(), curve.coeff_a());
}

Scalar random_scalar(Rng& rng, const CurveParams& curve) {
    const BigInt& n = curve.group_order();
    const unsigned bits = boost::multiprecision::msb(n) + 1;
    const unsigned words = (bits + 63) / 64;
    const unsigned top_shift = words * 64 - bits;
    while (true) {
        BigInt v = 0;
        for (unsigned i = 0; i < words; ++i) v = (v << 64) | rng.next_u64();
        v >>= top_shift;
        if (v >= 1 && v < n) return Scalar{std::move(v)};
    }
}

KeyPair keygen(Rng& rng, const CurveParams& curve, OpCounters& meter) {
    Scalar sk = random_scalar(rng, curve);
    Point pk = scalar_mult(sk, curve.base_point(), curve, meter);
    return KeyPair{std::move(sk), std::move(pk)};
}

Bytes encode_point(const Point& q, const CurveParams& curve) {
    if (q.is_infinity()) return Bytes{0x00};
    if (!curve.contains(q)) throw CodecError("encode_point: point not on curve");
    Bytes out;
    out.push_back(q.y % 2 == 0 ? 0x02 : 0x03);
    append_fixed_be(out, q.x, curve.field_bytes());
    return out;
}

Point decode_point(ByteView in, const CurveParams& curve) {
    if (in.size() == 1 && in[0] == 0x00) return Point::at_infinity();
    if (in.size() != 1 + curve.field_bytes()) {
        throw CodecError("decode_point: wrong length");
    }
    if (in[0] != 0x02 && in[0] != 0x03) throw CodecError("decode_point: bad parity byte");
    BigInt x = read_be(in.subspan(1));
    const BigInt& p = curve.prime_modulus();
    if (x >= p) throw CodecError("decode_point: x out of field");
    BigInt rhs = mod(mod_mul(mod_mul(x, x, p), x, p) + mod_mul(curve.coeff_a(), x, p) +
                         curve.coeff_b(),
                     p);
    BigInt y;
    if (!mod_sqrt(rhs, p, y)) throw CodecError("decode_point: x not on curve");
    bool want_odd = in[0] == 0x03;
    if ((y % 2 != 0) != want_odd) y = p - y;
    return Point{std::move(x), std::move(y)};
}

Bytes encode_scalar(const Scalar& s, const CurveParams& curve) {
    Bytes out;
    append_fixed_be(out, s.value, curve.scalar_bytes());
    return out;
}

Scalar decode_scalar(ByteView in, const CurveParams& curve) {
    if (in.size() != curve.scalar_bytes()) throw CodecError("decode_scalar: wrong length");
    BigInt v = read_be(in);
    if (v == 0 || v >= curve.group_order()) throw CodecError("decode_scalar: out of range");
    return Scalar{std::move(v)};
}

}  // namespace v2g::crypto
