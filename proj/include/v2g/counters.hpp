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

namespace v2g::crypto {

/// Per-entity meter for the two cryptographic cost units tracked by the
/// overhead report: elliptic-curve scalar multiplications (ECM) and hash
/// evaluations. Counters only ever increase within a run.
struct OpCounters {
    std::uint64_t ecm_count = 0;
    std::uint64_t hash_count = 0;

    OpCounters delta_since(const OpCounters& base) const {
        return {ecm_count - base.ecm_count, hash_count - base.hash_count};
    }
};

}  // namespace v2g::crypto
