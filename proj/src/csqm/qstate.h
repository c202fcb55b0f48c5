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

#ifndef CSQM_QSTATE_H
#define CSQM_QSTATE_H

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "csqm/gf2.h"
#include "csqm/rng.h"

namespace csqm {

using Amplitude = std::complex<double>;

inline constexpr size_t kMaxQubits = 24;
inline constexpr double kStateTolerance = 1e-9;

enum class GateKind { H, X, Z, CNOT, CZ, Toffoli };
enum class Basis { Z, X };

const char *gate_name(GateKind kind);
size_t gate_arity(GateKind kind);

/// Pauli one-time pad Z^z X^x, one (x, z) bit pair per padded qubit.
struct PauliPad {
    BitVector x;
    BitVector z;

    PauliPad() = default;
    PauliPad(BitVector x_bits, BitVector z_bits);
    static PauliPad zeros(size_t n) {
        return PauliPad(BitVector(n), BitVector(n));
    }
    size_t size() const {
        return x.size();
    }
    bool operator==(const PauliPad &other) const = default;
    /// Product of two pads, global phase dropped.
    PauliPad &operator^=(const PauliPad &other);
};

struct MeasurementRecord {
    std::vector<size_t> qubits;
    Basis basis = Basis::Z;
    BitVector outcome;
    double probability = 1.0;
};

/// A contiguous, named block of qubits inside a StateVector.
struct Register {
    std::string name;
    size_t begin = 0;
    size_t size = 0;
    size_t operator[](size_t k) const {
        return begin + k;
    }
    std::vector<size_t> qubits() const;
};

/// Dense state vector over at most kMaxQubits qubits. Qubit q corresponds to
/// bit q of the amplitude index.
class StateVector {
   public:
    /// |0...0> on the given registers, laid out in order.
    explicit StateVector(const std::vector<std::pair<std::string, size_t>> &registers = {});

    static StateVector basis_state(const BitVector &bits, const std::string &name = "data");
    /// Takes ownership of raw amplitudes; their count must be 2^(total qubits).
    static StateVector from_amplitudes(const std::vector<std::pair<std::string, size_t>> &registers,
                                       std::vector<Amplitude> amps);

    size_t num_qubits() const {
        return num_qubits_;
    }
    const std::vector<Amplitude> &amplitudes() const {
        return amps_;
    }
    Amplitude amplitude(uint64_t index) const {
        return amps_.at(index);
    }
    double norm_squared() const;

    const std::vector<Register> &registers() const {
        return registers_;
    }
    const Register &reg(const std::string &name) const;
    bool has_register(const std::string &name) const;

    /// Appends a register of |0> qubits at the high end.
    Register append_register(const std::string &name, size_t count);
    /// Removes the register at the high end; its qubits must all be |0>.
    void drop_last_register(const std::string &name);

    void h(size_t q);
    void x(size_t q);
    void z(size_t q);
    void cnot(size_t control, size_t target);
    void cz(size_t a, size_t b);
    void toffoli(size_t c1, size_t c2, size_t target);
    void apply_gate(GateKind kind, std::span<const size_t> targets);

    /// Applies X^x then Z^z on each listed qubit.
    void apply_pauli_frame(const PauliPad &pad, std::span<const size_t> targets);
    /// Undoes apply_pauli_frame (Z^z first, then X^x).
    void remove_pauli_frame(const PauliPad &pad, std::span<const size_t> targets);

    /// Relabels basis states: amplitude at index i moves to index perm(i).
    /// perm must be a bijection on [0, 2^n).
    void apply_permutation(const std::function<uint64_t(uint64_t)> &perm);

    /// |u>|y> -> |u>|y xor table[u]>, where u packs the input qubits (inputs[0]
    /// is the least significant bit) and the table entry is spread over the
    /// output qubits the same way.
    void xor_table(std::span<const size_t> inputs, std::span<const size_t> outputs, std::span<const uint32_t> table);

    /// |v>|c> -> |v>|c xor predicate(v)> with v read from the data qubits.
    void membership_unitary(const std::function<bool(const BitVector &)> &predicate, std::span<const size_t> data,
                            size_t ancilla);

    MeasurementRecord measure(std::span<const size_t> targets, Basis basis, Rng &rng);
    /// Probability that measuring `targets` in Z gives `outcome`.
    double outcome_probability(std::span<const size_t> targets, const BitVector &outcome) const;

    /// Bits of the given qubits within a basis index.
    static BitVector extract(uint64_t index, std::span<const size_t> qubits);

    /// Debug dump: "bitstring re im" per nonzero amplitude, sorted, qubit 0
    /// leftmost.
    std::string dump() const;

   private:
    void check_qubit(size_t q) const;
    void check_distinct(std::span<const size_t> targets) const;
    double measure_one(size_t q, bool &outcome, Rng &rng);

    size_t num_qubits_ = 0;
    std::vector<Amplitude> amps_;
    std::vector<Register> registers_;
};

StateVector coset_state(const BitMatrix &basis, const BitVector &offset);
bool states_equal(const StateVector &a, const StateVector &b);
/// |<a|b>|, requiring equal qubit counts.
double overlap(const StateVector &a, const StateVector &b);

}  // namespace csqm

#endif
