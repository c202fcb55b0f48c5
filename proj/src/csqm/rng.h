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

#ifndef CSQM_RNG_H
#define CSQM_RNG_H

#include <cstdint>
#include <random>
#include <string_view>

namespace csqm {

/// Seedable random stream. Only raw engine output is consumed (never a
/// std:: distribution) so a seed replays identically on every platform.
class Rng {
   public:
    explicit Rng(uint64_t seed = 0) : engine_(seed) {
    }

    /// Independent child stream identified by a name, e.g. one per actor.
    static Rng stream(uint64_t seed, std::string_view name);

    uint64_t next_u64() {
        return engine_();
    }
    bool next_bit() {
        return (engine_() >> 63) != 0;
    }
    /// Uniform in [0, bound). Rejection sampling, no modulo bias.
    uint64_t below(uint64_t bound);
    /// Uniform double in [0, 1) with 53 random bits.
    double unit() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

   private:
    std::mt19937_64 engine_;
};

/// FNV-1a; used to derive stream seeds from names.
uint64_t fnv1a64(std::string_view text, uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace csqm

#endif
