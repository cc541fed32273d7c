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

#include <vector>

#include "v2g/curve.hpp"
#include "v2g/scenario.hpp"

// Test-side brute-force elliptic-curve arithmetic, kept independent of the
// library: affine-only formulas with an extended-Euclid inverse (the library
// multiplies in Jacobian space and inverts via Fermat). Used as the oracle
// that scalar multiplication is checked against.
namespace oracle {

using v2g::crypto::BigInt;
using v2g::crypto::Point;

inline BigInt norm(BigInt v, const BigInt& p) {
    v %= p;
    if (v < 0) v += p;
    return v;
}

inline BigInt egcd_inverse(const BigInt& a_in, const BigInt& p) {
    BigInt r0 = p, r1 = norm(a_in, p);
    BigInt s0 = 0, s1 = 1;
    while (r1 != 0) {
        BigInt q = r0 / r1;
        BigInt r2 = r0 - q * r1;
        BigInt s2 = s0 - q * s1;
        r0 = r1;
        r1 = r2;
        s0 = s1;
        s1 = s2;
    }
    return norm(s0, p);
}

inline Point add(const Point& a, const Point& b, const BigInt& p, const BigInt& ca) {
    if (a.is_infinity()) return b;
    if (b.is_infinity()) return a;
    BigInt lambda;
    if (a.x == b.x) {
        if (norm(a.y + b.y, p) == 0) return Point::at_infinity();
        lambda = norm((3 * a.x * a.x + ca) * egcd_inverse(2 * a.y, p), p);
    } else {
        lambda = norm((b.y - a.y) * egcd_inverse(norm(b.x - a.x, p), p), p);
    }
    BigInt x3 = norm(lambda * lambda - a.x - b.x, p);
    BigInt y3 = norm(lambda * (a.x - x3) - a.y, p);
    return Point{x3, y3};
}

/// k*q by plain repeated addition: q + q + ... (k times).
inline Point repeated_add(const BigInt& k, const Point& q, const BigInt& p,
                          const BigInt& ca) {
    Point acc = Point::at_infinity();
    for (BigInt i = 0; i < k; ++i) acc = add(acc, q, p, ca);
    return acc;
}

/// Every affine point of the curve found by scanning the full coordinate
/// grid, plus the point at infinity.
inline std::vector<Point> enumerate_points(const v2g::crypto::CurveParams& c) {
    std::vector<Point> pts;
    pts.push_back(Point::at_infinity());
    for (BigInt x = 0; x < c.prime_modulus(); ++x) {
        for (BigInt y = 0; y < c.prime_modulus(); ++y) {
            BigInt lhs = norm(y * y, c.prime_modulus());
            BigInt rhs = norm(x * x * x + c.coeff_a() * x + c.coeff_b(), c.prime_modulus());
            if (lhs == rhs) pts.push_back(Point{x, y});
        }
    }
    return pts;
}

}  // namespace oracle

namespace testutil {

/// Minimal honest scenario: n EVs, n CSs, one session each, consensus off.
inline v2g::scenario::ScenarioSpec honest_auth_spec(std::uint64_t seed) {
    v2g::scenario::ScenarioSpec spec;
    spec.name = "honest-auth";
    spec.curve = "p256";
    spec.seed = seed;
    spec.stop_ms = 8000;
    spec.num_evs = 1;
    spec.num_css = 1;
    spec.sessions.push_back({0, 0, 2000, 7500});
    return spec;
}

inline v2g::scenario::ScenarioSpec trading_spec(std::uint64_t seed) {
    v2g::scenario::ScenarioSpec spec;
    spec.name = "trading";
    spec.curve = "p256";
    spec.seed = seed;
    spec.stop_ms = 16000;
    spec.num_evs = 2;
    spec.num_css = 4;
    spec.consensus_enabled = true;
    spec.speaker_term = 1;
    spec.block_interval_ms = 1000;
    spec.price_milli = 200;
    spec.sessions.push_back({0, 0, 3000, 7500});
    spec.sessions.push_back({1, 1, 4200, 3250});
    return spec;
}

}  // namespace testutil
