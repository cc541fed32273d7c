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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "v2g/bytes.hpp"
#include "v2g/counters.hpp"

namespace v2g::crypto {

using Digest = std::array<std::uint8_t, 32>;

/// One-shot SHA-256 of raw bytes. The unmetered primitive; protocol code
/// goes through hash_concat.
Digest sha256(ByteView data);

/// Digest of the concatenation of already length-delimited fields. One hash
/// evaluation on the meter per call. Order-sensitive by construction.
Digest hash_concat(std::span<const Bytes> fields, OpCounters& meter);

std::string digest_hex(const Digest& d);
Bytes digest_bytes(const Digest& d);
Digest digest_from(ByteView in);

inline Digest zero_digest() { return Digest{}; }

}  // namespace v2g::crypto
