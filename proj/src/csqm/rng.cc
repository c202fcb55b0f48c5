// Copyright 2026 The CSQM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "csqm/rng.h"

#include "csqm/errors.h"

namespace csqm {

uint64_t fnv1a64(std::string_view text, uint64_t basis) {
    uint64_t h = basis;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Rng Rng::stream(uint64_t seed, std::string_view name) {
    // splitmix64 finalizer over (seed, name hash)
    uint64_t z = seed ^ fnv1a64(name);
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return Rng(z);
}

uint64_t Rng::below(uint64_t bound) {
    require(bound > 0, ErrorCode::InvalidArgument, "Rng::below requires a positive bound");
    uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    while (true) {
        uint64_t v = engine_();
        if (v < limit) {
            return v % bound;
        }
    }
}

}  // namespace csqm
