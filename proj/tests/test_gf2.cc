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

#include <set>

#include "csqm/errors.h"
#include "csqm/gf2.h"
#include "doctest.h"
#include "oracles.h"

using namespace csqm;

namespace {

BitMatrix demo_ms() {
    return BitMatrix::from_strings({"0001", "0010"});
}

std::set<std::string> as_strings(const std::vector<BitVector> &vs) {
    std::set<std::string> out;
    for (const auto &v : vs) {
        out.insert(v.str());
    }
    return out;
}

}  // namespace

TEST_SUITE("gf2") {
TEST_CASE("bit vector string and hex forms") {
    BitVector r = BitVector::from_string("1001");
    CHECK(r.get(0));
    CHECK(!r.get(1));
    CHECK(r.get(3));
    CHECK(r.str() == "1001");
    CHECK(r.hex() == "4:9");
    CHECK(BitVector::from_hex("4:9") == r);
    CHECK(BitVector::from_hex("6:2d").str() == "101101");
    CHECK(BitVector::from_hex("0:").size() == 0);
    CHECK_THROWS_AS(BitVector::from_hex("4:99"), Error);
    CHECK_THROWS_AS(BitVector::from_hex("3:f"), Error);
    CHECK_THROWS_AS(BitVector::from_string("10a1"), Error);
    CHECK_THROWS_AS(r ^ BitVector(3), Error);

    Rng rng(5);
    for (int t = 0; t < 200; t++) {
        BitVector v = BitVector::random(1 + rng.below(150), rng);
        CHECK(BitVector::from_hex(v.hex()) == v);
        CHECK(BitVector::from_string(v.str()) == v);
    }
}

TEST_CASE("matrix hex round trip") {
    BitMatrix m = BitMatrix::from_strings({"1001", "1010"});
    CHECK(m.str_hex() == "[4:9,4:a]");
    CHECK(BitMatrix::from_hex("[4:9,4:a]") == m);
    BitMatrix empty(0, 6);
    CHECK(BitMatrix::from_hex(empty.str_hex()) == empty);
}

TEST_CASE("sample_full_rank") {
    Rng rng(7);
    BitMatrix m = sample_full_rank(3, 4, rng);
    CHECK(m.rows() == 3);
    CHECK(oracle::rank(m) == 3);
    CHECK(rank(m) == 3);

    BitMatrix one = sample_full_rank(1, 1, rng);
    CHECK(one.str() == "[1]");

    CHECK_THROWS_AS(sample_full_rank(5, 4, rng), Error);

    for (int t = 0; t < 100; t++) {
        size_t cols = 1 + rng.below(10);
        size_t rows = rng.below(cols + 1);
        BitMatrix s = sample_full_rank(rows, cols, rng);
        CHECK(oracle::rank(s) == rows);
    }
}

TEST_CASE("rank") {
    CHECK(rank(demo_ms()) == 2);
    CHECK(rank(BitMatrix(3, 5)) == 0);
    CHECK(rank(BitMatrix::from_strings({"11", "11"})) == 1);
    Rng rng(11);
    for (int t = 0; t < 300; t++) {
        BitMatrix m = BitMatrix::random(rng.below(8), 1 + rng.below(9), rng);
        CHECK(rank(m) == oracle::rank(m));
    }
}

TEST_CASE("row_span") {
    CHECK(as_strings(row_span(demo_ms())) == std::set<std::string>{"0000", "0001", "0010", "0011"});
    CHECK(as_strings(row_span(BitMatrix(0, 3))) == std::set<std::string>{"000"});
    CHECK(as_strings(row_span(BitMatrix::identity(2))) == std::set<std::string>{"00", "01", "10", "11"});

    Rng rng(13);
    for (int t = 0; t < 100; t++) {
        size_t cols = 1 + rng.below(12);
        BitMatrix m = BitMatrix::random(rng.below(7), cols, rng);
        auto span = row_span(m);
        CHECK(span.size() == (size_t{1} << rank(m)));
        std::set<std::string> set = as_strings(span);
        CHECK(set == oracle::span(oracle::rows_of(m), cols));
        for (const auto &a : span) {
            for (const auto &b : span) {
                CHECK(set.count((a ^ b).str()));
            }
        }
    }
    CHECK_THROWS_AS(row_span(BitMatrix(21, 30)), Error);
}

TEST_CASE("perp") {
    BitMatrix p = perp(demo_ms());
    CHECK(as_strings(row_span(p)) == std::set<std::string>{"0000", "1000", "0100", "1100"});
    CHECK(as_strings(row_span(p)) == oracle::orthogonal_complement(oracle::rows_of(demo_ms()), 4));
    CHECK(perp(BitMatrix::identity(5)).rows() == 0);
    CHECK(perp(BitMatrix::from_strings({"11"})).str() == "[11]");
    CHECK_THROWS_AS(perp(BitMatrix::from_strings({"11", "11"})), Error);

    Rng rng(17);
    for (int t = 0; t < 100; t++) {
        size_t cols = 1 + rng.below(10);
        BitMatrix m = sample_full_rank(rng.below(cols + 1), cols, rng);
        BitMatrix q = perp(m);
        CHECK(rank(q) + rank(m) == cols);
        for (const auto &a : q.row_list()) {
            for (const auto &b : m.row_list()) {
                CHECK(!a.dot(b));
            }
        }
        CHECK(as_strings(row_span(q)) == oracle::orthogonal_complement(oracle::rows_of(m), cols));
    }
}

TEST_CASE("coset_contains") {
    Coset s0(BitMatrix::from_strings({"0010"}), BitVector::from_string("0000"));
    CHECK(coset_contains(s0, BitVector::from_string("0010")));
    Coset s1(BitMatrix::from_strings({"0010"}), BitVector::from_string("0001"));
    CHECK(!coset_contains(s1, BitVector::from_string("0010")));
    CHECK(coset_contains(s1, s1.offset));
    CHECK_THROWS_AS(coset_contains(s1, BitVector(3)), Error);
    CHECK_THROWS_AS(Coset(BitMatrix::from_strings({"11", "11"}), BitVector(2)), Error);

    Rng rng(19);
    for (int t = 0; t < 60; t++) {
        size_t cols = 1 + rng.below(10);
        Coset c(sample_full_rank(rng.below(cols + 1), cols, rng), BitVector::random(cols, rng));
        std::set<std::string> members;
        for (const auto &v : oracle::span(oracle::rows_of(c.basis), cols)) {
            members.insert(oracle::xor_str(v, c.offset.str()));
        }
        for (uint64_t v = 0; v < (uint64_t{1} << cols); v++) {
            std::string s = oracle::bits_of(v, cols);
            CHECK(coset_contains(c, BitVector::from_string(s)) == (members.count(s) == 1));
        }
    }
}

TEST_CASE("xor_shift_rows") {
    BitMatrix padded = BitMatrix::from_strings({"1001", "1010"});
    CHECK(xor_shift_rows(padded, BitVector::from_string("1001")).str() == "[0000,0011]");
    CHECK(xor_shift_rows(padded, BitVector(4)) == padded);
    CHECK(xor_shift_rows(BitMatrix::from_strings({"1111"}), BitVector::from_string("1111")).str() == "[0000]");
    CHECK_THROWS_AS(xor_shift_rows(padded, BitVector(3)), Error);

    Rng rng(23);
    for (int t = 0; t < 50; t++) {
        BitMatrix m = BitMatrix::random(rng.below(6), 1 + rng.below(20), rng);
        BitVector r = BitVector::random(m.cols(), rng);
        CHECK(xor_shift_rows(xor_shift_rows(m, r), r) == m);
    }
}

TEST_CASE("solve_dual_shift") {
    CHECK(solve_dual_shift(demo_ms(), BitVector::from_string("00")).str() == "0000");
    BitVector e = solve_dual_shift(demo_ms(), BitVector::from_string("10"));
    CHECK(e.get(3));
    CHECK(!e.get(2));
    // Brute force agrees that such an e exists and ours is one of them.
    size_t solutions = 0;
    for (uint64_t v = 0; v < 16; v++) {
        BitVector cand = BitVector::from_string(oracle::bits_of(v, 4));
        if (demo_ms().apply(cand).str() == "10") {
            solutions++;
            if (cand == e) {
                solutions += 100;
            }
        }
    }
    CHECK(solutions == 104);
    CHECK(solve_dual_shift(BitMatrix::identity(2), BitVector::from_string("11")).str() == "11");

    Rng rng(29);
    for (int t = 0; t < 200; t++) {
        size_t cols = 1 + rng.below(40);
        BitMatrix m = sample_full_rank(rng.below(cols + 1), cols, rng);
        BitVector d = BitVector::random(m.rows(), rng);
        CHECK(m.apply(solve_dual_shift(m, d)) == d);
    }
}
}
