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

#include "v2g/hash.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace v2g::crypto {

Digest sha256(ByteView data) {
    Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.size()) {
        throw std::runtime_error("SHA-256 evaluation failed");
    }
    return out;
}

Digest hash_concat(std::span<const Bytes> fields, OpCounters& meter) {
    Bytes preimage;
    std::size_t total = 0;
    for (const Bytes& f : fields) total += f.size();
    preimage.reserve(total);
    for (const Bytes& f : fields) preimage.insert(preimage.end(), f.begin(), f.end());
    meter.hash_count += 1;
    return sha256(preimage);
}

std::string digest_hex(const Digest& d) { return to_hex(ByteView{d.data(), d.size()}); }

Bytes digest_bytes(const Digest& d) { return Bytes(d.begin(), d.end()); }

Digest digest_from(ByteView in) {
    if (in.size() != 32) throw CodecError("digest must be 32 bytes");
    Digest d;
    std::copy(in.begin(), in.end(), d.begin());
    return d;
}

}  // namespace v2g::crypto
