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

#include "csqm/qstate.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "csqm/errors.h"

namespace csqm {

const char *gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::H:
            return "H";
        case GateKind::X:
            return "X";
        case GateKind::Z:
            return "Z";
        case GateKind::CNOT:
            return "CNOT";
        case GateKind::CZ:
            return "CZ";
        case GateKind::Toffoli:
            return "TOFFOLI";
    }
    return "?";
}

size_t gate_arity(GateKind kind) {
    switch (kind) {
        case GateKind::H:
        case GateKind::X:
        case GateKind::Z:
            return 1;
        case GateKind::CNOT:
        case GateKind::CZ:
            return 2;
        case GateKind::Toffoli:
            return 3;
    }
    return 0;
}

PauliPad::PauliPad(BitVector x_bits, BitVector z_bits) : x(std::move(x_bits)), z(std::move(z_bits)) {
    require(x.size() == z.size(), ErrorCode::InvalidArgument, "pad x and z must have equal length");
}

PauliPad &PauliPad::operator^=(const PauliPad &other) {
    x ^= other.x;
    z ^= other.z;
    return *this;
}

std::vector<size_t> Register::qubits() const {
    std::vector<size_t> out(size);
    for (size_t k = 0; k < size; k++) {
        out[k] = begin + k;
    }
    return out;
}

StateVector::StateVector(const std::vector<std::pair<std::string, size_t>> &registers) {
    size_t total = 0;
    for (const auto &[name, count] : registers) {
        registers_.push_back(Register{name, total, count});
        total += count;
    }
    require(total <= kMaxQubits, ErrorCode::Capacity, "state vector limited to 24 qubits");
    num_qubits_ = total;
    amps_.assign(uint64_t{1} << total, Amplitude(0));
    amps_[0] = 1;
}

StateVector StateVector::basis_state(const BitVector &bits, const std::string &name) {
    StateVector s({{name, bits.size()}});
    s.amps_[0] = 0;
    s.amps_[bits.to_index()] = 1;
    return s;
}

StateVector StateVector::from_amplitudes(const std::vector<std::pair<std::string, size_t>> &registers,
                                         std::vector<Amplitude> amps) {
    StateVector s(registers);
    require(amps.size() == s.amps_.size(), ErrorCode::InvalidArgument, "amplitude count must be 2^qubits");
    s.amps_ = std::move(amps);
    return s;
}

double StateVector::norm_squared() const {
    double total = 0;
    for (const auto &a : amps_) {
        total += std::norm(a);
    }
    return total;
}

const Register &StateVector::reg(const std::string &name) const {
    for (const auto &r : registers_) {
        if (r.name == name) {
            return r;
        }
    }
    fail(ErrorCode::InvalidArgument, "unknown register '" + name + "'");
}

bool StateVector::has_register(const std::string &name) const {
    return std::any_of(registers_.begin(), registers_.end(), [&](const Register &r) { return r.name == name; });
}

Register StateVector::append_register(const std::string &name, size_t count) {
    require(!has_register(name), ErrorCode::InvalidArgument, "register name already in use");
    require(num_qubits_ + count <= kMaxQubits, ErrorCode::Capacity, "state vector limited to 24 qubits");
    Register r{name, num_qubits_, count};
    registers_.push_back(r);
    num_qubits_ += count;
    amps_.resize(uint64_t{1} << num_qubits_, Amplitude(0));
    return r;
}

void StateVector::drop_last_register(const std::string &name) {
    require(!registers_.empty() && registers_.back().name == name, ErrorCode::InvalidArgument,
            "only the most recently appended register can be dropped");
    size_t keep = num_qubits_ - registers_.back().size;
    uint64_t kept_size = uint64_t{1} << keep;
    double stray = 0;
    for (uint64_t i = kept_size; i < amps_.size(); i++) {
        stray += std::norm(amps_[i]);
    }
    require(stray < kStateTolerance, ErrorCode::Internal, "dropped register is not in |0>");
    amps_.resize(kept_size);
    num_qubits_ = keep;
    registers_.pop_back();
}

void StateVector::check_qubit(size_t q) const {
    require(q < num_qubits_, ErrorCode::InvalidArgument, "qubit index out of range");
}

void StateVector::check_distinct(std::span<const size_t> targets) const {
    for (size_t i = 0; i < targets.size(); i++) {
        check_qubit(targets[i]);
        for (size_t j = i + 1; j < targets.size(); j++) {
            require(targets[i] != targets[j], ErrorCode::InvalidArgument, "gate targets must be distinct");
        }
    }
}

void StateVector::h(size_t q) {
    check_qubit(q);
    const double r = M_SQRT1_2;
    const uint64_t bit = uint64_t{1} << q;
    const uint64_t n = amps_.size();
    for (uint64_t hi = 0; hi < n; hi += 2 * bit) {
        for (uint64_t i = hi; i < hi + bit; i++) {
            Amplitude a = amps_[i];
            Amplitude b = amps_[i | bit];
            amps_[i] = (a + b) * r;
            amps_[i | bit] = (a - b) * r;
        }
    }
}

void StateVector::x(size_t q) {
    check_qubit(q);
    const uint64_t bit = uint64_t{1} << q;
    const uint64_t n = amps_.size();
    for (uint64_t hi = 0; hi < n; hi += 2 * bit) {
        for (uint64_t i = hi; i < hi + bit; i++) {
            std::swap(amps_[i], amps_[i | bit]);
        }
    }
}

void StateVector::z(size_t q) {
    check_qubit(q);
    const uint64_t bit = uint64_t{1} << q;
    const uint64_t n = amps_.size();
    for (uint64_t hi = bit; hi < n; hi += 2 * bit) {
        for (uint64_t i = hi; i < hi + bit; i++) {
            amps_[i] = -amps_[i];
        }
    }
}

void StateVector::cnot(size_t control, size_t target) {
    size_t t[2] = {control, target};
    check_distinct(t);
    uint64_t cb = uint64_t{1} << control;
    uint64_t tb = uint64_t{1} << target;
    for (uint64_t i = 0; i < amps_.size(); i++) {
        if ((i & cb) && !(i & tb)) {
            std::swap(amps_[i], amps_[i | tb]);
        }
    }
}

void StateVector::cz(size_t a, size_t b) {
    size_t t[2] = {a, b};
    check_distinct(t);
    uint64_t mask = (uint64_t{1} << a) | (uint64_t{1} << b);
    for (uint64_t i = 0; i < amps_.size(); i++) {
        if ((i & mask) == mask) {
            amps_[i] = -amps_[i];
        }
    }
}

void StateVector::toffoli(size_t c1, size_t c2, size_t target) {
    size_t t[3] = {c1, c2, target};
    check_distinct(t);
    uint64_t mask = (uint64_t{1} << c1) | (uint64_t{1} << c2);
    uint64_t tb = uint64_t{1} << target;
    for (uint64_t i = 0; i < amps_.size(); i++) {
        if ((i & mask) == mask && !(i & tb)) {
            std::swap(amps_[i], amps_[i | tb]);
        }
    }
}

void StateVector::apply_gate(GateKind kind, std::span<const size_t> targets) {
    require(targets.size() == gate_arity(kind), ErrorCode::InvalidArgument, "wrong number of gate targets");
    switch (kind) {
        case GateKind::H:
            h(targets[0]);
            break;
        case GateKind::X:
            x(targets[0]);
            break;
        case GateKind::Z:
            z(targets[0]);
            break;
        case GateKind::CNOT:
            cnot(targets[0], targets[1]);
            break;
        case GateKind::CZ:
            cz(targets[0], targets[1]);
            break;
        case GateKind::Toffoli:
            toffoli(targets[0], targets[1], targets[2]);
            break;
    }
}

void StateVector::apply_pauli_frame(const PauliPad &pad, std::span<const size_t> targets) {
    require(pad.size() == targets.size(), ErrorCode::InvalidArgument, "pad length must equal target count");
    check_distinct(targets);
    for (size_t k = 0; k < targets.size(); k++) {
        if (pad.x.get(k)) {
            x(targets[k]);
        }
        if (pad.z.get(k)) {
            z(targets[k]);
        }
    }
}

void StateVector::remove_pauli_frame(const PauliPad &pad, std::span<const size_t> targets) {
    require(pad.size() == targets.size(), ErrorCode::InvalidArgument, "pad length must equal target count");
    check_distinct(targets);
    for (size_t k = 0; k < targets.size(); k++) {
        if (pad.z.get(k)) {
            z(targets[k]);
        }
        if (pad.x.get(k)) {
            x(targets[k]);
        }
    }
}

void StateVector::apply_permutation(const std::function<uint64_t(uint64_t)> &perm) {
    std::vector<Amplitude> out(amps_.size(), Amplitude(0));
    std::vector<bool> hit(amps_.size(), false);
    for (uint64_t i = 0; i < amps_.size(); i++) {
        uint64_t j = perm(i);
        require(j < amps_.size() && !hit[j], ErrorCode::Internal, "basis map is not a permutation");
        hit[j] = true;
        out[j] = amps_[i];
    }
    amps_ = std::move(out);
}

void StateVector::xor_table(std::span<const size_t> inputs, std::span<const size_t> outputs,
                            std::span<const uint32_t> table) {
    std::vector<size_t> all(inputs.begin(), inputs.end());
    all.insert(all.end(), outputs.begin(), outputs.end());
    check_distinct(all);
    require(inputs.size() < 32 && outputs.size() < 32, ErrorCode::InvalidArgument, "table register too wide");
    require(table.size() == (size_t{1} << inputs.size()), ErrorCode::InvalidArgument, "table size must be 2^inputs");
    // Spread each table entry onto the output qubit positions once.
    std::vector<uint64_t> flips(table.size(), 0);
    for (size_t u = 0; u < table.size(); u++) {
        require(table[u] < (uint64_t{1} << outputs.size()), ErrorCode::InvalidArgument, "table entry too wide");
        for (size_t k = 0; k < outputs.size(); k++) {
            if ((table[u] >> k) & 1) {
                flips[u] |= uint64_t{1} << outputs[k];
            }
        }
    }
    std::vector<Amplitude> out(amps_.size());
    for (uint64_t i = 0; i < amps_.size(); i++) {
        uint64_t u = 0;
        for (size_t k = 0; k < inputs.size(); k++) {
            u |= ((i >> inputs[k]) & 1) << k;
        }
        out[i ^ flips[u]] = amps_[i];
    }
    amps_ = std::move(out);
}

BitVector StateVector::extract(uint64_t index, std::span<const size_t> qubits) {
    BitVector v(qubits.size());
    for (size_t k = 0; k < qubits.size(); k++) {
        if ((index >> qubits[k]) & 1) {
            v.flip(k);
        }
    }
    return v;
}

void StateVector::membership_unitary(const std::function<bool(const BitVector &)> &predicate,
                                     std::span<const size_t> data, size_t ancilla) {
    check_distinct(data);
    check_qubit(ancilla);
    require(std::find(data.begin(), data.end(), ancilla) == data.end(), ErrorCode::InvalidArgument,
            "ancilla overlaps the data register");
    require(data.size() <= 20, ErrorCode::Capacity, "predicate table limited to 20 data qubits");
    // Tabulate the predicate once per data value.
    std::vector<bool> table(uint64_t{1} << data.size());
    for (uint64_t v = 0; v < table.size(); v++) {
        table[v] = predicate(BitVector::from_index(v, data.size()));
    }
    uint64_t ab = uint64_t{1} << ancilla;
    for (uint64_t i = 0; i < amps_.size(); i++) {
        if (i & ab) {
            continue;
        }
        uint64_t v = 0;
        for (size_t k = 0; k < data.size(); k++) {
            v |= ((i >> data[k]) & 1) << k;
        }
        if (table[v]) {
            std::swap(amps_[i], amps_[i | ab]);
        }
    }
}

double StateVector::measure_one(size_t q, bool &outcome, Rng &rng) {
    const uint64_t bit = uint64_t{1} << q;
    const uint64_t n = amps_.size();
    double p0 = 0;
    double p1 = 0;
    for (uint64_t hi = 0; hi < n; hi += 2 * bit) {
        for (uint64_t i = hi; i < hi + bit; i++) {
            p0 += std::norm(amps_[i]);
            p1 += std::norm(amps_[i | bit]);
        }
    }
    double total = p0 + p1;
    p1 /= total;
    // Outcomes with (numerically) zero probability are never sampled.
    if (p1 < kStateTolerance) {
        outcome = false;
    } else if (p1 > 1 - kStateTolerance) {
        outcome = true;
    } else {
        outcome = rng.unit() < p1;
    }
    double p = outcome ? p1 : 1 - p1;
    double scale = 1.0 / std::sqrt(p * total);
    const uint64_t keep = outcome ? bit : 0;
    for (uint64_t hi = 0; hi < n; hi += 2 * bit) {
        for (uint64_t i = hi; i < hi + bit; i++) {
            amps_[i | keep] *= scale;
            amps_[i | (bit ^ keep)] = 0;
        }
    }
    return p;
}

MeasurementRecord StateVector::measure(std::span<const size_t> targets, Basis basis, Rng &rng) {
    check_distinct(targets);
    MeasurementRecord rec;
    rec.qubits.assign(targets.begin(), targets.end());
    rec.basis = basis;
    rec.outcome = BitVector(targets.size());
    rec.probability = 1.0;
    if (basis == Basis::X) {
        for (size_t q : targets) {
            h(q);
        }
    }
    for (size_t k = 0; k < targets.size(); k++) {
        bool b = false;
        rec.probability *= measure_one(targets[k], b, rng);
        rec.outcome.set(k, b);
    }
    if (basis == Basis::X) {
        for (size_t q : targets) {
            h(q);
        }
    }
    return rec;
}

double StateVector::outcome_probability(std::span<const size_t> targets, const BitVector &outcome) const {
    check_distinct(targets);
    require(outcome.size() == targets.size(), ErrorCode::InvalidArgument, "outcome length must equal target count");
    uint64_t mask = 0;
    uint64_t want = 0;
    for (size_t k = 0; k < targets.size(); k++) {
        mask |= uint64_t{1} << targets[k];
        if (outcome.get(k)) {
            want |= uint64_t{1} << targets[k];
        }
    }
    double p = 0;
    for (uint64_t i = 0; i < amps_.size(); i++) {
        if ((i & mask) == want) {
            p += std::norm(amps_[i]);
        }
    }
    return p / norm_squared();
}

std::string StateVector::dump() const {
    std::map<std::string, Amplitude> lines;
    for (uint64_t i = 0; i < amps_.size(); i++) {
        if (std::abs(amps_[i]) < kStateTolerance) {
            continue;
        }
        std::string bits(num_qubits_, '0');
        for (size_t q = 0; q < num_qubits_; q++) {
            if ((i >> q) & 1) {
                bits[q] = '1';
            }
        }
        lines[bits] = amps_[i];
    }
    std::string out;
    char buf[96];
    for (const auto &[bits, a] : lines) {
        std::snprintf(buf, sizeof(buf), " %.12f %.12f\n", a.real() == 0 ? 0.0 : a.real(),
                      a.imag() == 0 ? 0.0 : a.imag());
        out += bits;
        out += buf;
    }
    return out;
}

StateVector coset_state(const BitMatrix &basis, const BitVector &offset) {
    require(basis.cols() == offset.size(), ErrorCode::InvalidArgument, "offset length must equal basis width");
    require(rank(basis) == basis.rows(), ErrorCode::InvalidArgument, "coset basis must be full rank");
    require(basis.rows() + basis.cols() <= kMaxQubits, ErrorCode::Capacity, "coset state too large");
    std::vector<BitVector> span = row_span(basis);
    std::vector<Amplitude> amps(uint64_t{1} << basis.cols(), Amplitude(0));
    double amp = 1.0 / std::sqrt(static_cast<double>(span.size()));
    for (const auto &v : span) {
        amps[(v ^ offset).to_index()] = amp;
    }
    return StateVector::from_amplitudes({{"data", basis.cols()}}, std::move(amps));
}

double overlap(const StateVector &a, const StateVector &b) {
    require(a.num_qubits() == b.num_qubits(), ErrorCode::InvalidArgument, "state dimension mismatch");
    Amplitude inner(0);
    const auto &aa = a.amplitudes();
    const auto &bb = b.amplitudes();
    for (uint64_t i = 0; i < aa.size(); i++) {
        inner += std::conj(aa[i]) * bb[i];
    }
    return std::abs(inner) / std::sqrt(a.norm_squared() * b.norm_squared());
}

bool states_equal(const StateVector &a, const StateVector &b) {
    return overlap(a, b) >= 1 - kStateTolerance;
}

}  // namespace csqm
