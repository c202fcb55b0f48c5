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

#include <cmath>
#include <map>

#include "csqm/errors.h"
#include "csqm/qstate.h"
#include "doctest.h"
#include "oracles.h"

using namespace csqm;

namespace {

std::vector<oracle::C> amps(const StateVector &s) {
    return {s.amplitudes().begin(), s.amplitudes().end()};
}

double max_dev(const std::vector<oracle::C> &a, const std::vector<oracle::C> &b) {
    double d = 0;
    for (size_t i = 0; i < a.size(); i++) {
        d = std::max(d, std::abs(a[i] - b[i]));
    }
    return d;
}

StateVector random_state(size_t n, Rng &rng) {
    std::vector<Amplitude> a(size_t{1} << n);
    double norm = 0;
    for (auto &x : a) {
        x = Amplitude(rng.unit() - 0.5, rng.unit() - 0.5);
        norm += std::norm(x);
    }
    for (auto &x : a) {
        x /= std::sqrt(norm);
    }
    return StateVector::from_amplitudes({{"q", n}}, a);
}

std::vector<size_t> iota(size_t begin, size_t n) {
    std::vector<size_t> out(n);
    for (size_t i = 0; i < n; i++) {
        out[i] = begin + i;
    }
    return out;
}

}  // namespace

TEST_SUITE("qstate") {
TEST_CASE("basic gates") {
    StateVector s = StateVector::basis_state(BitVector::from_string("0"));
    s.x(0);
    CHECK(std::abs(s.amplitude(1) - 1.0) < 1e-12);

    StateVector t = StateVector::basis_state(BitVector::from_string("110"));
    t.toffoli(0, 1, 2);
    CHECK(t.dump() == "111 1.000000000000 0.000000000000\n");

    StateVector hh({{"q", 2}});
    hh.h(0);
    hh.h(1);
    oracle::Dense m = oracle::mul(oracle::hadamard(1, 2), oracle::hadamard(0, 2));
    CHECK(max_dev(amps(hh), oracle::apply(m, {1.0, 0.0, 0.0, 0.0})) < 1e-12);
    for (auto a : hh.amplitudes()) {
        CHECK(std::abs(a - 0.5) < 1e-12);
    }

    size_t dup[2] = {0, 0};
    CHECK_THROWS_AS(hh.apply_gate(GateKind::CNOT, dup), Error);
    size_t far[1] = {5};
    CHECK_THROWS_AS(hh.apply_gate(GateKind::X, far), Error);
}

TEST_CASE("gates agree with dense matrices on random states") {
    Rng rng(31);
    const size_t n = 4;
    for (int t = 0; t < 100; t++) {
        StateVector s = random_state(n, rng);
        std::vector<oracle::C> ref = amps(s);
        for (int g = 0; g < 12; g++) {
            size_t a = rng.below(n), b = rng.below(n - 1), c = rng.below(n - 2);
            b += (b >= a);
            std::vector<size_t> rest;
            for (size_t q = 0; q < n; q++) {
                if (q != a && q != b) {
                    rest.push_back(q);
                }
            }
            c = rest[c];
            switch (rng.below(6)) {
                case 0:
                    s.h(a);
                    ref = oracle::apply(oracle::hadamard(a, n), ref);
                    break;
                case 1:
                    s.x(a);
                    ref = oracle::apply(oracle::pauli_x(a, n), ref);
                    break;
                case 2:
                    s.z(a);
                    ref = oracle::apply(oracle::pauli_z(a, n), ref);
                    break;
                case 3:
                    s.cnot(a, b);
                    ref = oracle::apply(oracle::cnot(a, b, n), ref);
                    break;
                case 4:
                    s.cz(a, b);
                    ref = oracle::apply(oracle::cz(a, b, n), ref);
                    break;
                default:
                    s.toffoli(a, b, c);
                    ref = oracle::apply(oracle::toffoli(a, b, c, n), ref);
                    break;
            }
            CHECK(std::abs(s.norm_squared() - 1.0) < 1e-9);
        }
        CHECK(max_dev(amps(s), ref) < 1e-12);
    }
}

TEST_CASE("pauli frame") {
    StateVector plus({{"q", 1}});
    plus.h(0);
    size_t q0[1] = {0};
    StateVector same = plus;
    same.apply_pauli_frame(PauliPad::zeros(1), q0);
    CHECK(states_equal(same, plus));

    StateVector zero({{"q", 1}});
    zero.apply_pauli_frame(PauliPad(BitVector::from_string("1"), BitVector::from_string("0")), q0);
    CHECK(std::abs(zero.amplitude(1) - 1.0) < 1e-12);

    StateVector zx = plus;
    zx.apply_pauli_frame(PauliPad(BitVector::from_string("1"), BitVector::from_string("1")), q0);
    oracle::Dense m = oracle::mul(oracle::pauli_z(0, 1), oracle::pauli_x(0, 1));
    CHECK(max_dev(amps(zx), oracle::apply(m, amps(plus))) < 1e-12);

    // Z X |+> and -X Z |+> agree up to global phase.
    StateVector other = plus;
    other.z(0);
    other.x(0);
    CHECK(states_equal(zx, other));
    zx.remove_pauli_frame(PauliPad(BitVector::from_string("1"), BitVector::from_string("1")), q0);
    CHECK(max_dev(amps(zx), amps(plus)) < 1e-12);

    CHECK_THROWS_AS(plus.apply_pauli_frame(PauliPad::zeros(2), q0), Error);
}

TEST_CASE("measurement") {
    Rng rng(37);
    size_t q0[1] = {0};
    StateVector one = StateVector::basis_state(BitVector::from_string("1"));
    MeasurementRecord r = one.measure(q0, Basis::Z, rng);
    CHECK(r.outcome.str() == "1");
    CHECK(r.probability == doctest::Approx(1.0));

    StateVector plus({{"q", 1}});
    plus.h(0);
    r = plus.measure(q0, Basis::X, rng);
    CHECK(r.outcome.str() == "0");
    CHECK(r.probability == doctest::Approx(1.0));

    StateVector token = coset_state(BitMatrix::from_strings({"0001", "0010"}), BitVector::from_string("1001"));
    std::set<std::string> allowed = {"1001", "1000", "1011", "1010"};
    std::vector<size_t> data = iota(0, 4);
    for (const auto &s : allowed) {
        CHECK(token.outcome_probability(data, BitVector::from_string(s)) == doctest::Approx(0.25));
    }
    for (int t = 0; t < 50; t++) {
        StateVector copy = token;
        MeasurementRecord m = copy.measure(data, Basis::Z, rng);
        CHECK(allowed.count(m.outcome.str()));
        CHECK(m.probability == doctest::Approx(0.25));
        CHECK(std::abs(copy.norm_squared() - 1.0) < 1e-9);
    }
}

TEST_CASE("born rule frequencies") {
    Rng rng(41);
    // Non-uniform 2-qubit state with analytic probabilities.
    std::vector<Amplitude> a = {std::sqrt(0.1), std::sqrt(0.2), Amplitude(0, std::sqrt(0.3)), -std::sqrt(0.4)};
    StateVector s = StateVector::from_amplitudes({{"q", 2}}, a);
    std::vector<size_t> qs = {0, 1};
    const int trials = 10000;
    std::map<uint64_t, int> counts;
    for (int t = 0; t < trials; t++) {
        StateVector copy = s;
        counts[copy.measure(qs, Basis::Z, rng).outcome.to_index()]++;
    }
    for (uint64_t i = 0; i < 4; i++) {
        double p = std::norm(a[i]);
        double se = std::sqrt(p * (1 - p) / trials);
        CHECK(std::abs(counts[i] / double(trials) - p) < 3 * se);
    }

    // X basis on a Y eigenstate: 1/2 each.
    int ones = 0;
    for (int t = 0; t < trials; t++) {
        StateVector y = StateVector::from_amplitudes({{"q", 1}}, {1 / std::sqrt(2.0), Amplitude(0, 1 / std::sqrt(2.0))});
        size_t q0[1] = {0};
        ones += y.measure(q0, Basis::X, rng).outcome.get(0);
    }
    CHECK(std::abs(ones / double(trials) - 0.5) < 3 * std::sqrt(0.25 / trials));
}

TEST_CASE("coset_state") {
    StateVector t = coset_state(BitMatrix(0, 3), BitVector::from_string("101"));
    CHECK(t.dump() == "101 1.000000000000 0.000000000000\n");

    StateVector demo = coset_state(BitMatrix::from_strings({"0001", "0010"}), BitVector::from_string("1001"));
    CHECK(demo.dump() ==
          "1000 0.500000000000 0.000000000000\n"
          "1001 0.500000000000 0.000000000000\n"
          "1010 0.500000000000 0.000000000000\n"
          "1011 0.500000000000 0.000000000000\n");

    StateVector pp = coset_state(BitMatrix::identity(2), BitVector(2));
    StateVector ref({{"data", 2}});
    ref.h(0);
    ref.h(1);
    CHECK(states_equal(pp, ref));

    CHECK_THROWS_AS(coset_state(BitMatrix::from_strings({"11", "11"}), BitVector(2)), Error);
}

TEST_CASE("membership unitary") {
    BitMatrix ms = BitMatrix::from_strings({"0001", "0010"});
    BitVector x = BitVector::from_string("1001");
    Coset s_plus_x(ms, x);
    Coset s0_plus_x(ms.without_row(0), x);
    std::vector<size_t> data = iota(0, 4);
    size_t anc[1] = {4};

    StateVector token = coset_state(ms, x);
    token.append_register("anc", 1);
    StateVector full = token;
    full.membership_unitary([&](const BitVector &v) { return coset_contains(s_plus_x, v); }, data, 4);
    CHECK(full.outcome_probability(anc, BitVector::from_string("1")) == doctest::Approx(1.0));

    StateVector half = token;
    half.membership_unitary([&](const BitVector &v) { return coset_contains(s0_plus_x, v); }, data, 4);
    CHECK(half.outcome_probability(anc, BitVector::from_string("1")) == doctest::Approx(0.5));

    StateVector off = StateVector::basis_state(BitVector::from_string("00000"));
    off.membership_unitary([&](const BitVector &v) { return coset_contains(s_plus_x, v); }, data, 4);
    CHECK(off.dump() == "00000 1.000000000000 0.000000000000\n");

    // Involution.
    StateVector twice = token;
    auto pred = [&](const BitVector &v) { return coset_contains(s0_plus_x, v); };
    twice.membership_unitary(pred, data, 4);
    twice.membership_unitary(pred, data, 4);
    CHECK(states_equal(twice, token));

    std::vector<size_t> overlap_data = {0, 1, 2, 4};
    CHECK_THROWS_AS(token.membership_unitary(pred, overlap_data, 4), Error);
}

TEST_CASE("states_equal") {
    Rng rng(43);
    StateVector s = random_state(3, rng);
    CHECK(states_equal(s, s));
    CHECK(!states_equal(StateVector::basis_state(BitVector::from_string("0")),
                        StateVector::basis_state(BitVector::from_string("1"))));
    StateVector a({{"q", 1}});
    a.h(0);
    StateVector b = a;
    a.x(0);
    a.z(0);
    b.z(0);
    b.x(0);
    CHECK(states_equal(a, b));
    CHECK_THROWS_AS(states_equal(s, a), Error);
}

TEST_CASE("index register measured in X leaves a Z-shifted coset state") {
    Rng rng(47);
    for (size_t lambda : {4, 6, 8}) {
        for (int t = 0; t < 20; t++) {
            size_t half = lambda / 2;
            BitMatrix m = sample_full_rank(half, lambda, rng);
            BitVector offset = BitVector::random(lambda, rng);
            // sum_b |b.M + offset>|b>, prepared with H and CNOT fan-out.
            StateVector s = StateVector::basis_state(offset);
            Register idx = s.append_register("index", half);
            for (size_t i = 0; i < half; i++) {
                s.h(idx[i]);
                for (size_t j = 0; j < lambda; j++) {
                    if (m.get(i, j)) {
                        s.cnot(idx[i], j);
                    }
                }
            }
            std::vector<size_t> iq = idx.qubits();
            MeasurementRecord d = s.measure(iq, Basis::X, rng);
            for (size_t i = 0; i < half; i++) {
                s.h(idx[i]);
                if (d.outcome.get(i)) {
                    s.x(idx[i]);
                }
            }
            s.drop_last_register("index");

            BitVector e = solve_dual_shift(m, d.outcome);
            StateVector expect = coset_state(m, offset);
            std::vector<size_t> data = iota(0, lambda);
            expect.apply_pauli_frame(PauliPad(BitVector(lambda), e), data);
            CHECK(states_equal(s, expect));
        }
    }
}

TEST_CASE("capacity") {
    CHECK_THROWS_AS(StateVector({{"q", kMaxQubits + 1}}), Error);
    StateVector s({{"q", 4}});
    CHECK_THROWS_AS(s.append_register("b", kMaxQubits - 3), Error);
    CHECK_THROWS_AS(s.append_register("q", 1), Error);
}
}
