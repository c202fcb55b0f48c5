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

#ifndef CSQM_GF2_H
#define CSQM_GF2_H

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "csqm/rng.h"

namespace csqm {

/// Fixed-length bit string over GF(2).
///
/// Bit 0 is the leftmost character of the string form, so "1001" has bits
/// 0 and 3 set. The hex form "n:h" reads the string as a big-endian binary
/// number, e.g. "4:9" for 1001.
class BitVector {
   public:
    BitVector() = default;
    explicit BitVector(size_t num_bits);

    static BitVector from_string(std::string_view bits);
    static BitVector from_hex(std::string_view text);
    static BitVector random(size_t num_bits, Rng &rng);
    /// Unit vector e_i of the given length.
    static BitVector unit(size_t num_bits, size_t index);

    size_t size() const {
        return num_bits_;
    }
    bool get(size_t k) const {
        return (words_[k >> 6] >> (k & 63)) & 1;
    }
    void set(size_t k, bool value);
    void flip(size_t k) {
        words_[k >> 6] ^= uint64_t{1} << (k & 63);
    }

    BitVector &operator^=(const BitVector &other);
    BitVector operator^(const BitVector &other) const;
    BitVector operator&(const BitVector &other) const;
    bool operator==(const BitVector &other) const = default;
    bool operator<(const BitVector &other) const;

    /// Inner product over GF(2).
    bool dot(const BitVector &other) const;
    size_t popcount() const;
    bool is_zero() const;
    /// Index of the first set bit, or size() when zero.
    size_t first_set() const;

    BitVector slice(size_t begin, size_t length) const;
    BitVector concat(const BitVector &tail) const;

    std::string str() const;
    std::string hex() const;

    /// Packs the bits into an integer with bit 0 as the least significant
    /// bit. Only valid when size() <= 64.
    uint64_t to_index() const;
    static BitVector from_index(uint64_t value, size_t num_bits);

   private:
    void check_same_size(const BitVector &other) const;

    size_t num_bits_ = 0;
    std::vector<uint64_t> words_;
};

/// Rectangular matrix over GF(2), stored as rows.
class BitMatrix {
   public:
    BitMatrix() = default;
    BitMatrix(size_t num_rows, size_t num_cols);
    explicit BitMatrix(std::vector<BitVector> rows, size_t num_cols);

    static BitMatrix from_strings(const std::vector<std::string> &rows);
    /// Parses the row-list form produced by str_hex(), e.g. "[4:9,4:a]".
    static BitMatrix from_hex(std::string_view text);
    static BitMatrix random(size_t num_rows, size_t num_cols, Rng &rng);
    static BitMatrix identity(size_t n);
    /// `num_rows` copies of `row`; models a single pad string applied to
    /// every row of a matrix.
    static BitMatrix replicate_row(const BitVector &row, size_t num_rows);

    size_t rows() const {
        return rows_.size();
    }
    size_t cols() const {
        return num_cols_;
    }
    const BitVector &row(size_t i) const {
        return rows_.at(i);
    }
    BitVector &row(size_t i) {
        return rows_.at(i);
    }
    const std::vector<BitVector> &row_list() const {
        return rows_;
    }
    bool get(size_t r, size_t c) const {
        return rows_[r].get(c);
    }

    void push_row(const BitVector &row);
    BitMatrix without_row(size_t i) const;
    BitMatrix operator^(const BitMatrix &other) const;
    bool operator==(const BitMatrix &other) const = default;

    /// Row combination sum_i coeffs_i * row_i.
    BitVector combine(const BitVector &coeffs) const;
    /// Matrix-vector product: bit i is row_i . v.
    BitVector apply(const BitVector &v) const;

    std::string str() const;
    std::string str_hex() const;

   private:
    size_t num_cols_ = 0;
    std::vector<BitVector> rows_;
};

/// Affine subspace span(basis) + offset.
struct Coset {
    BitMatrix basis;
    BitVector offset;

    Coset() = default;
    Coset(BitMatrix basis, BitVector offset);
    size_t dimension() const {
        return basis.rows();
    }
};

/// Reduced row-echelon form with pivot bookkeeping.
struct Echelon {
    BitMatrix reduced;           // nonzero rows only
    std::vector<size_t> pivots;  // pivot column of each reduced row
    size_t rank() const {
        return pivots.size();
    }
    /// Reduces v against the echelon rows; zero result means v is in the span.
    BitVector reduce(BitVector v) const;
};

Echelon echelon(const BitMatrix &m);

size_t rank(const BitMatrix &m);
BitMatrix sample_full_rank(size_t num_rows, size_t num_cols, Rng &rng);
std::vector<BitVector> row_span(const BitMatrix &m);
BitMatrix perp(const BitMatrix &m);
bool coset_contains(const Coset &c, const BitVector &v);
BitMatrix xor_shift_rows(const BitMatrix &m, const BitVector &shift);
BitVector solve_dual_shift(const BitMatrix &m, const BitVector &target);

/// Largest row count accepted by row_span.
inline constexpr size_t kMaxSpanRows = 20;

}  // namespace csqm

#endif
