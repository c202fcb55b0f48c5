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

#include "csqm/gf2.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <set>

#include "csqm/errors.h"

namespace csqm {

namespace {

size_t words_for(size_t num_bits) {
    return (num_bits + 63) / 64;
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') {
        return c - '0';
    }
    if (c >= 'a' && c <= 'f') {
        return c - 'a' + 10;
    }
    return -1;
}

}  // namespace

BitVector::BitVector(size_t num_bits) : num_bits_(num_bits), words_(words_for(num_bits), 0) {
}

BitVector BitVector::from_string(std::string_view bits) {
    BitVector v(bits.size());
    for (size_t k = 0; k < bits.size(); k++) {
        if (bits[k] == '1') {
            v.flip(k);
        } else if (bits[k] != '0') {
            fail(ErrorCode::InvalidArgument, "bit string contains a character other than 0/1");
        }
    }
    return v;
}

BitVector BitVector::from_hex(std::string_view text) {
    size_t colon = text.find(':');
    require(colon != std::string_view::npos, ErrorCode::InvalidArgument, "hex bit vector lacks a length prefix");
    size_t n = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + colon, n);
    require(ec == std::errc() && ptr == text.data() + colon, ErrorCode::InvalidArgument, "bad bit length prefix");
    std::string_view digits = text.substr(colon + 1);
    require(digits.size() == (n + 3) / 4, ErrorCode::InvalidArgument, "hex digit count does not match bit length");
    BitVector v(n);
    // Digit j covers bit positions counted from the right end of the string.
    for (size_t j = 0; j < digits.size(); j++) {
        int d = hex_digit(digits[digits.size() - 1 - j]);
        require(d >= 0, ErrorCode::InvalidArgument, "invalid hex digit");
        for (size_t b = 0; b < 4; b++) {
            if ((d >> b) & 1) {
                size_t from_right = 4 * j + b;
                require(from_right < n, ErrorCode::InvalidArgument, "hex value exceeds bit length");
                v.flip(n - 1 - from_right);
            }
        }
    }
    return v;
}

BitVector BitVector::random(size_t num_bits, Rng &rng) {
    BitVector v(num_bits);
    for (size_t w = 0; w < v.words_.size(); w++) {
        v.words_[w] = rng.next_u64();
    }
    if (num_bits % 64 != 0 && !v.words_.empty()) {
        v.words_.back() &= (uint64_t{1} << (num_bits % 64)) - 1;
    }
    return v;
}

BitVector BitVector::unit(size_t num_bits, size_t index) {
    require(index < num_bits, ErrorCode::InvalidArgument, "unit vector index out of range");
    BitVector v(num_bits);
    v.flip(index);
    return v;
}

void BitVector::set(size_t k, bool value) {
    uint64_t mask = uint64_t{1} << (k & 63);
    if (value) {
        words_[k >> 6] |= mask;
    } else {
        words_[k >> 6] &= ~mask;
    }
}

void BitVector::check_same_size(const BitVector &other) const {
    require(num_bits_ == other.num_bits_, ErrorCode::InvalidArgument, "bit vector length mismatch");
}

BitVector &BitVector::operator^=(const BitVector &other) {
    check_same_size(other);
    for (size_t w = 0; w < words_.size(); w++) {
        words_[w] ^= other.words_[w];
    }
    return *this;
}

BitVector BitVector::operator^(const BitVector &other) const {
    BitVector out = *this;
    out ^= other;
    return out;
}

BitVector BitVector::operator&(const BitVector &other) const {
    check_same_size(other);
    BitVector out = *this;
    for (size_t w = 0; w < words_.size(); w++) {
        out.words_[w] &= other.words_[w];
    }
    return out;
}

bool BitVector::operator<(const BitVector &other) const {
    if (num_bits_ != other.num_bits_) {
        return num_bits_ < other.num_bits_;
    }
    return str() < other.str();
}

bool BitVector::dot(const BitVector &other) const {
    check_same_size(other);
    uint64_t acc = 0;
    for (size_t w = 0; w < words_.size(); w++) {
        acc ^= words_[w] & other.words_[w];
    }
    return std::popcount(acc) & 1;
}

size_t BitVector::popcount() const {
    size_t total = 0;
    for (uint64_t w : words_) {
        total += std::popcount(w);
    }
    return total;
}

bool BitVector::is_zero() const {
    return std::all_of(words_.begin(), words_.end(), [](uint64_t w) { return w == 0; });
}

size_t BitVector::first_set() const {
    for (size_t w = 0; w < words_.size(); w++) {
        if (words_[w]) {
            return 64 * w + std::countr_zero(words_[w]);
        }
    }
    return num_bits_;
}

BitVector BitVector::slice(size_t begin, size_t length) const {
    require(begin + length <= num_bits_, ErrorCode::InvalidArgument, "slice out of range");
    BitVector out(length);
    for (size_t k = 0; k < length; k++) {
        out.set(k, get(begin + k));
    }
    return out;
}

BitVector BitVector::concat(const BitVector &tail) const {
    BitVector out(num_bits_ + tail.num_bits_);
    for (size_t k = 0; k < num_bits_; k++) {
        out.set(k, get(k));
    }
    for (size_t k = 0; k < tail.num_bits_; k++) {
        out.set(num_bits_ + k, tail.get(k));
    }
    return out;
}

std::string BitVector::str() const {
    std::string s(num_bits_, '0');
    for (size_t k = 0; k < num_bits_; k++) {
        if (get(k)) {
            s[k] = '1';
        }
    }
    return s;
}

std::string BitVector::hex() const {
    static const char *kDigits = "0123456789abcdef";
    size_t num_digits = (num_bits_ + 3) / 4;
    std::string digits(num_digits, '0');
    for (size_t j = 0; j < num_digits; j++) {
        int d = 0;
        for (size_t b = 0; b < 4; b++) {
            size_t from_right = 4 * j + b;
            if (from_right < num_bits_ && get(num_bits_ - 1 - from_right)) {
                d |= 1 << b;
            }
        }
        digits[num_digits - 1 - j] = kDigits[d];
    }
    return std::to_string(num_bits_) + ":" + digits;
}

uint64_t BitVector::to_index() const {
    require(num_bits_ <= 64, ErrorCode::Capacity, "bit vector too long for an index");
    return words_.empty() ? 0 : words_[0];
}

BitVector BitVector::from_index(uint64_t value, size_t num_bits) {
    require(num_bits <= 64, ErrorCode::Capacity, "bit vector too long for an index");
    BitVector v(num_bits);
    if (num_bits > 0) {
        v.words_[0] = num_bits == 64 ? value : value & ((uint64_t{1} << num_bits) - 1);
    }
    return v;
}

BitMatrix::BitMatrix(size_t num_rows, size_t num_cols) : num_cols_(num_cols), rows_(num_rows, BitVector(num_cols)) {
}

BitMatrix::BitMatrix(std::vector<BitVector> rows, size_t num_cols) : num_cols_(num_cols), rows_(std::move(rows)) {
    for (const auto &r : rows_) {
        require(r.size() == num_cols_, ErrorCode::InvalidArgument, "matrix rows must share one length");
    }
}

BitMatrix BitMatrix::from_strings(const std::vector<std::string> &rows) {
    require(!rows.empty(), ErrorCode::InvalidArgument, "from_strings needs at least one row");
    std::vector<BitVector> out;
    for (const auto &r : rows) {
        out.push_back(BitVector::from_string(r));
    }
    size_t cols = out[0].size();
    return BitMatrix(std::move(out), cols);
}

BitMatrix BitMatrix::from_hex(std::string_view text) {
    require(text.size() >= 2 && text.front() == '[' && text.back() == ']', ErrorCode::InvalidArgument,
            "matrix must be a bracketed row list");
    std::string_view body = text.substr(1, text.size() - 2);
    std::vector<BitVector> rows;
    size_t cols = 0;
    bool have_cols = false;
    // An empty matrix is written "[c:]" to keep its column count.
    if (!body.empty() && body.back() == ':') {
        size_t c = 0;
        auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size() - 1, c);
        require(ec == std::errc(), ErrorCode::InvalidArgument, "bad empty-matrix column count");
        return BitMatrix(0, c);
    }
    while (!body.empty()) {
        size_t comma = body.find(',');
        std::string_view item = body.substr(0, comma);
        rows.push_back(BitVector::from_hex(item));
        if (!have_cols) {
            cols = rows.back().size();
            have_cols = true;
        }
        if (comma == std::string_view::npos) {
            break;
        }
        body = body.substr(comma + 1);
    }
    return BitMatrix(std::move(rows), cols);
}

BitMatrix BitMatrix::random(size_t num_rows, size_t num_cols, Rng &rng) {
    std::vector<BitVector> rows;
    for (size_t i = 0; i < num_rows; i++) {
        rows.push_back(BitVector::random(num_cols, rng));
    }
    return BitMatrix(std::move(rows), num_cols);
}

BitMatrix BitMatrix::identity(size_t n) {
    BitMatrix m(n, n);
    for (size_t i = 0; i < n; i++) {
        m.rows_[i].flip(i);
    }
    return m;
}

BitMatrix BitMatrix::replicate_row(const BitVector &row, size_t num_rows) {
    return BitMatrix(std::vector<BitVector>(num_rows, row), row.size());
}

void BitMatrix::push_row(const BitVector &row) {
    if (rows_.empty() && num_cols_ == 0) {
        num_cols_ = row.size();
    }
    require(row.size() == num_cols_, ErrorCode::InvalidArgument, "row length mismatch");
    rows_.push_back(row);
}

BitMatrix BitMatrix::without_row(size_t i) const {
    require(i < rows_.size(), ErrorCode::InvalidArgument, "row index out of range");
    BitMatrix out = *this;
    out.rows_.erase(out.rows_.begin() + static_cast<std::ptrdiff_t>(i));
    return out;
}

BitMatrix BitMatrix::operator^(const BitMatrix &other) const {
    require(rows() == other.rows() && cols() == other.cols(), ErrorCode::InvalidArgument, "matrix shape mismatch");
    BitMatrix out = *this;
    for (size_t i = 0; i < rows_.size(); i++) {
        out.rows_[i] ^= other.rows_[i];
    }
    return out;
}

BitVector BitMatrix::combine(const BitVector &coeffs) const {
    require(coeffs.size() == rows_.size(), ErrorCode::InvalidArgument, "coefficient count must equal row count");
    BitVector acc(num_cols_);
    for (size_t i = 0; i < rows_.size(); i++) {
        if (coeffs.get(i)) {
            acc ^= rows_[i];
        }
    }
    return acc;
}

BitVector BitMatrix::apply(const BitVector &v) const {
    require(v.size() == num_cols_, ErrorCode::InvalidArgument, "vector length must equal column count");
    BitVector out(rows_.size());
    for (size_t i = 0; i < rows_.size(); i++) {
        out.set(i, rows_[i].dot(v));
    }
    return out;
}

std::string BitMatrix::str() const {
    std::string s = "[";
    for (size_t i = 0; i < rows_.size(); i++) {
        if (i) {
            s += ",";
        }
        s += rows_[i].str();
    }
    return s + "]";
}

std::string BitMatrix::str_hex() const {
    if (rows_.empty()) {
        return "[" + std::to_string(num_cols_) + ":]";
    }
    std::string s = "[";
    for (size_t i = 0; i < rows_.size(); i++) {
        if (i) {
            s += ",";
        }
        s += rows_[i].hex();
    }
    return s + "]";
}

Coset::Coset(BitMatrix basis_in, BitVector offset_in) : basis(std::move(basis_in)), offset(std::move(offset_in)) {
    require(basis.cols() == offset.size(), ErrorCode::InvalidArgument, "coset offset length must equal basis width");
    require(rank(basis) == basis.rows(), ErrorCode::InvalidArgument, "coset basis must be full rank");
}

BitVector Echelon::reduce(BitVector v) const {
    for (size_t i = 0; i < pivots.size(); i++) {
        if (v.get(pivots[i])) {
            v ^= reduced.row(i);
        }
    }
    return v;
}

Echelon echelon(const BitMatrix &m) {
    std::vector<BitVector> rows = m.row_list();
    std::vector<size_t> pivots;
    size_t next = 0;
    for (size_t col = 0; col < m.cols() && next < rows.size(); col++) {
        size_t found = next;
        while (found < rows.size() && !rows[found].get(col)) {
            found++;
        }
        if (found == rows.size()) {
            continue;
        }
        std::swap(rows[next], rows[found]);
        for (size_t r = 0; r < rows.size(); r++) {
            if (r != next && rows[r].get(col)) {
                rows[r] ^= rows[next];
            }
        }
        pivots.push_back(col);
        next++;
    }
    rows.resize(next);
    return Echelon{BitMatrix(std::move(rows), m.cols()), std::move(pivots)};
}

size_t rank(const BitMatrix &m) {
    return echelon(m).rank();
}

BitMatrix sample_full_rank(size_t num_rows, size_t num_cols, Rng &rng) {
    require(num_rows <= num_cols, ErrorCode::InvalidArgument, "full-rank sampling needs rows <= cols");
    size_t attempts = 64 * std::max<size_t>(num_cols, 1);
    for (size_t a = 0; a < attempts; a++) {
        BitMatrix m = BitMatrix::random(num_rows, num_cols, rng);
        if (rank(m) == num_rows) {
            return m;
        }
    }
    fail(ErrorCode::Internal, "full-rank rejection sampling exhausted its retry budget");
}

std::vector<BitVector> row_span(const BitMatrix &m) {
    require(m.rows() <= kMaxSpanRows, ErrorCode::Capacity, "row span enumeration limited to 20 rows");
    std::set<BitVector> seen;
    for (uint64_t b = 0; b < (uint64_t{1} << m.rows()); b++) {
        seen.insert(m.combine(BitVector::from_index(b, m.rows())));
    }
    return {seen.begin(), seen.end()};
}

BitMatrix perp(const BitMatrix &m) {
    Echelon e = echelon(m);
    require(e.rank() == m.rows(), ErrorCode::InvalidArgument, "perp requires a full-rank matrix");
    std::vector<bool> is_pivot(m.cols(), false);
    for (size_t p : e.pivots) {
        is_pivot[p] = true;
    }
    // One null-space vector per free column: set the free bit, then fix each
    // pivot bit so that the corresponding reduced row is orthogonal.
    BitMatrix out(0, m.cols());
    for (size_t free = 0; free < m.cols(); free++) {
        if (is_pivot[free]) {
            continue;
        }
        BitVector v(m.cols());
        v.set(free, true);
        for (size_t i = 0; i < e.pivots.size(); i++) {
            if (e.reduced.get(i, free)) {
                v.set(e.pivots[i], true);
            }
        }
        out.push_row(v);
    }
    return out;
}

bool coset_contains(const Coset &c, const BitVector &v) {
    require(v.size() == c.offset.size(), ErrorCode::InvalidArgument, "vector length does not match coset");
    return echelon(c.basis).reduce(v ^ c.offset).is_zero();
}

BitMatrix xor_shift_rows(const BitMatrix &m, const BitVector &shift) {
    require(shift.size() == m.cols(), ErrorCode::InvalidArgument, "shift length must equal column count");
    std::vector<BitVector> rows;
    for (const auto &r : m.row_list()) {
        rows.push_back(r ^ shift);
    }
    return BitMatrix(std::move(rows), m.cols());
}

BitVector solve_dual_shift(const BitMatrix &m, const BitVector &target) {
    require(target.size() == m.rows(), ErrorCode::InvalidArgument, "target length must equal row count");
    // Eliminate on the augmented rows [m_i | d_i]; free variables are zero.
    std::vector<BitVector> aug;
    for (size_t i = 0; i < m.rows(); i++) {
        BitVector rhs(1);
        rhs.set(0, target.get(i));
        aug.push_back(m.row(i).concat(rhs));
    }
    BitMatrix augmented(std::move(aug), m.cols() + 1);
    Echelon e = echelon(augmented);
    require(e.rank() == m.rows(), ErrorCode::InvalidArgument, "solve_dual_shift requires a full-rank matrix");
    BitVector solution(m.cols());
    for (size_t i = 0; i < e.pivots.size(); i++) {
        require(e.pivots[i] < m.cols(), ErrorCode::Internal, "inconsistent system");
        solution.set(e.pivots[i], e.reduced.get(i, m.cols()));
    }
    return solution;
}

}  // namespace csqm
