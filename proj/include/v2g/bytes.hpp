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
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace v2g {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Virtual clock ticks, in milliseconds of simulated time.
using Tick = std::uint64_t;

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

void append_u16be(Bytes& out, std::uint16_t v);
void append_u32be(Bytes& out, std::uint32_t v);
void append_u64be(Bytes& out, std::uint64_t v);
std::uint16_t read_u16be(ByteView in, std::size_t at);
std::uint32_t read_u32be(ByteView in, std::size_t at);
std::uint64_t read_u64be(ByteView in, std::size_t at);

/// Thrown when wire bytes cannot be decoded (bad tag, length, or content).
class CodecError : public std::runtime_error {
public:
    explicit CodecError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace v2g
