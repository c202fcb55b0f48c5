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

#include "csqm/qfhe.h"

#include <sodium.h>

#include <algorithm>
#include <cstdio>

#include "csqm/errors.h"

namespace csqm {

namespace {

std::string to_hex(const uint8_t *data, size_t n) {
    static const char *kDigits = "0123456789abcdef";
    std::string out;
    out.reserve(2 * n);
    for (size_t i = 0; i < n; i++) {
        out += kDigits[data[i] >> 4];
        out += kDigits[data[i] & 15];
    }
    return out;
}

std::vector<uint8_t> from_hex(const std::string &text) {
    require(text.size() % 2 == 0, ErrorCode::InvalidArgument, "odd-length hex string");
    std::vector<uint8_t> out(text.size() / 2);
    for (size_t i = 0; i < out.size(); i++) {
        unsigned v = 0;
        require(std::sscanf(text.c_str() + 2 * i, "%2x", &v) == 1, ErrorCode::InvalidArgument, "bad hex byte");
        out[i] = static_cast<uint8_t>(v);
    }
    return out;
}

std::string chain_hash(const std::string &prev, const std::string &label) {
    uint8_t out[16];
    std::string input = prev + "|" + label;
    crypto_generichash(out, sizeof(out), reinterpret_cast<const uint8_t *>(input.data()), input.size(), nullptr, 0);
    return to_hex(out, sizeof(out));
}

std::vector<std::string> split(const std::string &text, char sep) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (true) {
        size_t pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string::npos) {
            return parts;
        }
        start = pos + 1;
    }
}

// Pauli frame helpers over the [x | z] layout.
struct Frame {
    BitVector &bits;
    size_t n;
    explicit Frame(BitVector &b) : bits(b), n(b.size() / 2) {
    }
    bool x(size_t q) const {
        return bits.get(q);
    }
    bool z(size_t q) const {
        return bits.get(n + q);
    }
    void flip_x(size_t q) {
        bits.flip(q);
    }
    void flip_z(size_t q) {
        bits.flip(n + q);
    }
    void set_x(size_t q, bool v) {
        bits.set(q, v);
    }
    void set_z(size_t q, bool v) {
        bits.set(n + q, v);
    }
};

// Conjugation of a Pauli frame by Clifford gates.
void conj_h(Frame &f, size_t q) {
    bool x = f.x(q);
    f.set_x(q, f.z(q));
    f.set_z(q, x);
}

void conj_cnot(Frame &f, size_t c, size_t t) {
    if (f.x(c)) {
        f.flip_x(t);
    }
    if (f.z(t)) {
        f.flip_z(c);
    }
}

void conj_cz(Frame &f, size_t a, size_t b) {
    bool xa = f.x(a);
    bool xb = f.x(b);
    if (xb) {
        f.flip_z(a);
    }
    if (xa) {
        f.flip_z(b);
    }
}

// A two-qubit Pauli on (q1, q2, q3) positions used for gadget corrections.
struct LocalPauli {
    std::array<bool, 3> x{};
    std::array<bool, 3> z{};
};

void conj_cnot(LocalPauli &p, size_t c, size_t t) {
    if (p.x[c]) {
        p.x[t] = !p.x[t];
    }
    if (p.z[t]) {
        p.z[c] = !p.z[c];
    }
}

void conj_cz(LocalPauli &p, size_t a, size_t b) {
    bool xa = p.x[a];
    bool xb = p.x[b];
    if (xb) {
        p.z[a] = !p.z[a];
    }
    if (xa) {
        p.z[b] = !p.z[b];
    }
}

void conj_h(LocalPauli &p, size_t q) {
    std::swap(p.x[q], p.z[q]);
}

}  // namespace

void SealedCiphertext::record(const std::string &label) {
    log_.push_back(label);
    prov_count_++;
    prov_hash_ = chain_hash(prov_hash_, label);
}

void SealedCiphertext::evaluate(const std::string &label, const std::function<void(BitVector &)> &update) {
    BitVector next = bits_;
    update(next);
    bits_ = std::move(next);
    record(label);
}

void SealedCiphertext::evaluate_with(const SealedCiphertext &other, const std::string &label,
                                     const std::function<void(BitVector &, const BitVector &)> &update) {
    require(other.key_id_ == key_id_, ErrorCode::AccessDenied,
            "homomorphic evaluation across ciphertexts under different keys");
    BitVector next = bits_;
    update(next, other.bits_);
    bits_ = std::move(next);
    record(label);
}

SealedCiphertext SealedCiphertext::derive(const std::string &label,
                                          const std::function<BitVector(const BitVector &)> &fn) const {
    SealedCiphertext out;
    out.key_id_ = key_id_;
    out.bits_ = fn(bits_);
    out.prov_hash_ = prov_hash_;
    out.prov_count_ = prov_count_;
    out.record(label);
    return out;
}

FheContext::FheContext() {
    require(sodium_init() >= 0, ErrorCode::Internal, "libsodium initialization failed");
}

FheKey FheContext::keygen(size_t lambda, size_t level_budget, Rng &rng) {
    require(lambda >= 4 && lambda % 2 == 0, ErrorCode::InvalidArgument, "security parameter must be even and >= 4");
    KeyId id = 0;
    do {
        id = rng.next_u64();
    } while (id == 0 || secrets_.count(id));
    std::array<uint8_t, 32> secret{};
    for (size_t i = 0; i < secret.size(); i += 8) {
        uint64_t w = rng.next_u64();
        for (size_t b = 0; b < 8; b++) {
            secret[i + b] = static_cast<uint8_t>(w >> (8 * b));
        }
    }
    secrets_[id] = secret;
    return FheKey{id, lambda, level_budget};
}

SealedCiphertext FheContext::enc(const FheKey &key, const BitVector &bits) {
    require(secrets_.count(key.id), ErrorCode::AccessDenied, "key was not issued by this context");
    SealedCiphertext ct;
    ct.key_id_ = key.id;
    ct.bits_ = bits;
    ct.record("enc#" + std::to_string(enc_counter_++));
    return ct;
}

BitVector FheContext::dec(const FheKey &key, const SealedCiphertext &ct) const {
    require(secrets_.count(key.id), ErrorCode::AccessDenied, "key was not issued by this context");
    require(ct.key_id_ == key.id, ErrorCode::AccessDenied, "ciphertext is sealed under a different key");
    return ct.bits_;
}

std::vector<uint8_t> FheContext::keystream(KeyId id, const SealedCiphertext &ct, size_t num_bytes) const {
    auto it = secrets_.find(id);
    require(it != secrets_.end(), ErrorCode::Integrity, "sealed envelope names an unknown key");
    uint8_t nonce_full[16];
    std::string seed = ct.prov_hash_ + "#" + std::to_string(ct.prov_count_);
    crypto_generichash(nonce_full, sizeof(nonce_full), reinterpret_cast<const uint8_t *>(seed.data()), seed.size(),
                       nullptr, 0);
    std::vector<uint8_t> stream(num_bytes);
    if (num_bytes > 0) {
        crypto_stream_chacha20(stream.data(), num_bytes, nonce_full, it->second.data());
    }
    return stream;
}

std::string FheContext::serialize(const SealedCiphertext &ct) const {
    size_t n = ct.bits_.size();
    size_t num_bytes = (n + 7) / 8;
    std::vector<uint8_t> payload(num_bytes, 0);
    for (size_t k = 0; k < n; k++) {
        if (ct.bits_.get(k)) {
            payload[k / 8] |= static_cast<uint8_t>(1u << (k % 8));
        }
    }
    std::vector<uint8_t> ks = keystream(ct.key_id_, ct, num_bytes);
    for (size_t i = 0; i < num_bytes; i++) {
        payload[i] ^= ks[i];
    }
    char id[17];
    std::snprintf(id, sizeof(id), "%016llx", static_cast<unsigned long long>(ct.key_id_));
    return "SEALED/1:" + std::string(id) + ":" + std::to_string(n) + ":" + to_hex(payload.data(), num_bytes) + ":" +
           std::to_string(ct.prov_count_) + ":" + ct.prov_hash_;
}

SealedCiphertext FheContext::parse(const std::string &text) const {
    std::vector<std::string> parts = split(text, ':');
    require(parts.size() == 6 && parts[0] == "SEALED/1", ErrorCode::InvalidArgument, "not a SEALED/1 envelope");
    require(parts[1].size() == 16, ErrorCode::InvalidArgument, "bad key id field");
    SealedCiphertext ct;
    ct.key_id_ = std::stoull(parts[1], nullptr, 16);
    size_t n = std::stoul(parts[2]);
    ct.prov_count_ = std::stoull(parts[4]);
    ct.prov_hash_ = parts[5];
    std::vector<uint8_t> payload = from_hex(parts[3]);
    require(payload.size() == (n + 7) / 8, ErrorCode::InvalidArgument, "sealed payload length mismatch");
    std::vector<uint8_t> ks = keystream(ct.key_id_, ct, payload.size());
    ct.bits_ = BitVector(n);
    for (size_t i = 0; i < payload.size(); i++) {
        payload[i] ^= ks[i];
    }
    for (size_t k = 0; k < 8 * payload.size(); k++) {
        bool bit = (payload[k / 8] >> (k % 8)) & 1;
        if (k < n) {
            ct.bits_.set(k, bit);
        } else {
            require(!bit, ErrorCode::Integrity, "sealed payload has stray padding bits");
        }
    }
    require(serialize(ct) == text, ErrorCode::Integrity, "sealed envelope is not canonical");
    return ct;
}

BitVector otp(const BitVector &message, const BitVector &pad) {
    require(message.size() == pad.size(), ErrorCode::InvalidArgument, "one-time pad length must equal message length");
    return message ^ pad;
}

BitVector pad_to_bits(const PauliPad &pad) {
    return pad.x.concat(pad.z);
}

PauliPad bits_to_pad(const BitVector &bits) {
    require(bits.size() % 2 == 0, ErrorCode::InvalidArgument, "pad bit layout must have even length");
    size_t n = bits.size() / 2;
    return PauliPad(bits.slice(0, n), bits.slice(n, n));
}

InjectivePair::InjectivePair(bool s, size_t k, std::vector<uint32_t> table)
    : s_(s), k_(k), table_(std::move(table)), inverse_(table_.size()) {
    require(k >= 1 && k <= kMaxGadgetWidth, ErrorCode::InvalidArgument, "gadget width k must be in [1, 4]");
    require(table_.size() == (size_t{1} << (k + 1)), ErrorCode::InvalidArgument, "table size must be 2^(1+k)");
    std::vector<bool> hit(table_.size(), false);
    for (uint32_t u = 0; u < table_.size(); u++) {
        require(table_[u] < table_.size() && !hit[table_[u]], ErrorCode::InvalidArgument, "table is not a permutation");
        hit[table_[u]] = true;
        inverse_[table_[u]] = u;
    }
}

uint32_t InjectivePair::image(bool b, uint32_t point) const {
    require(point < table_.size(), ErrorCode::InvalidArgument, "domain point out of range");
    uint32_t mu_flip = (b && s_) ? (1u << k_) : 0u;
    return table_[point ^ mu_flip];
}

uint32_t InjectivePair::preimage(bool b, uint32_t y) const {
    require(y < table_.size(), ErrorCode::InvalidArgument, "image out of range");
    uint32_t mu_flip = (b && s_) ? (1u << k_) : 0u;
    return inverse_[y] ^ mu_flip;
}

InjectivePair sample_injective_pair(bool s, size_t k, Rng &rng) {
    require(k >= 1 && k <= kMaxGadgetWidth, ErrorCode::InvalidArgument, "gadget width k must be in [1, 4]");
    std::vector<uint32_t> table(size_t{1} << (k + 1));
    for (uint32_t i = 0; i < table.size(); i++) {
        table[i] = i;
    }
    for (size_t i = table.size() - 1; i > 0; i--) {
        std::swap(table[i], table[rng.below(i + 1)]);
    }
    return InjectivePair(s, k, std::move(table));
}

GadgetOutcome run_cnot_gadget(StateVector &state, size_t ctrl, size_t tgt, const InjectivePair &pair, Rng &rng) {
    require(ctrl != tgt && ctrl < state.num_qubits() && tgt < state.num_qubits(), ErrorCode::InvalidArgument,
            "gadget control and target must be distinct qubits");
    const size_t width = pair.k() + 1;
    Register pre = state.append_register("gadget.pre", width);
    Register img = state.append_register("gadget.img", width);

    // Uniform superposition over the domain (mu, r). pre[0] holds mu.
    for (size_t j = 0; j < width; j++) {
        state.h(pre[j]);
    }

    // |a>|mu,r>|y> -> |a>|mu,r>|y xor f_a(mu,r)>. Input bits are packed as
    // (a, mu, r) with a on top; pre[0] holds mu.
    std::vector<size_t> inputs;
    for (size_t j = 1; j < width; j++) {
        inputs.push_back(pre[j]);
    }
    inputs.push_back(pre[0]);
    inputs.push_back(ctrl);
    std::vector<uint32_t> table(size_t{1} << (width + 1));
    for (uint32_t u = 0; u < table.size(); u++) {
        bool a = (u >> width) & 1;
        table[u] = pair.image(a, u & ((1u << width) - 1));
    }
    std::vector<size_t> outputs = img.qubits();
    state.xor_table(inputs, outputs, table);

    // Copy mu onto the target.
    state.cnot(pre[0], tgt);

    std::vector<size_t> pre_qubits = pre.qubits();
    MeasurementRecord y_rec = state.measure(outputs, Basis::Z, rng);
    // Hadamard-basis measurement of (mu, r), leaving the qubits in |d>.
    for (size_t q : pre_qubits) {
        state.h(q);
    }
    MeasurementRecord d_rec = state.measure(pre_qubits, Basis::Z, rng);

    GadgetOutcome out;
    for (size_t j = 0; j < width; j++) {
        if (y_rec.outcome.get(j)) {
            out.y |= 1u << j;
        }
    }
    // d uses the same packing as the domain: bit k is the mu position.
    if (d_rec.outcome.get(0)) {
        out.d |= 1u << pair.k();
    }
    for (size_t j = 1; j < width; j++) {
        if (d_rec.outcome.get(j)) {
            out.d |= 1u << (j - 1);
        }
    }

    // Return ancillas to |0> and release them.
    for (size_t j = 0; j < width; j++) {
        if (y_rec.outcome.get(j)) {
            state.x(img[j]);
        }
        if (d_rec.outcome.get(j)) {
            state.x(pre[j]);
        }
    }
    state.drop_last_register("gadget.img");
    state.drop_last_register("gadget.pre");
    return out;
}

GadgetCorrection gadget_correction(const InjectivePair &pair, const GadgetOutcome &outcome) {
    uint32_t u0 = pair.preimage(false, outcome.y);
    uint32_t u1 = pair.preimage(true, outcome.y);
    GadgetCorrection c;
    c.x_on_target = (u0 >> pair.k()) & 1;
    c.z_on_control = std::popcount(outcome.d & (u0 ^ u1)) & 1;
    return c;
}

GadgetOutcome encrypted_cnot(StateVector &state, size_t ctrl, size_t tgt, const SealedCiphertext &ct_s,
                             const InjectivePair &pair, SealedCiphertext &ct_pads, Rng &rng) {
    require(ct_s.size() == 1, ErrorCode::InvalidArgument, "encrypted CNOT needs a single sealed bit");
    size_t padded = ct_pads.size() / 2;
    require(ctrl < padded && tgt < padded, ErrorCode::InvalidArgument, "gadget qubits must be padded");
    require(ct_s.sealed_predicate([&](const BitVector &s) { return s.get(0) == pair.hidden_bit(); }),
            ErrorCode::Integrity, "injective pair does not encode the sealed bit");
    GadgetOutcome outcome = run_cnot_gadget(state, ctrl, tgt, pair, rng);
    GadgetCorrection corr = gadget_correction(pair, outcome);
    ct_pads.evaluate_with(ct_s, "ecnot", [&](BitVector &bits, const BitVector &s) {
        Frame f(bits);
        if (s.get(0)) {
            conj_cnot(f, ctrl, tgt);
        }
        if (corr.x_on_target) {
            f.flip_x(tgt);
        }
        if (corr.z_on_control) {
            f.flip_z(ctrl);
        }
    });
    return outcome;
}

void eval_clifford_pad(GateKind gate, std::span<const size_t> targets, SealedCiphertext &ct_pads) {
    require(targets.size() == gate_arity(gate), ErrorCode::InvalidArgument, "wrong number of gate targets");
    size_t padded = ct_pads.size() / 2;
    for (size_t t : targets) {
        require(t < padded, ErrorCode::InvalidArgument, "gate target is not a padded qubit");
    }
    switch (gate) {
        case GateKind::X:
        case GateKind::Z:
            // Paulis commute with the pad up to a global phase.
            ct_pads.evaluate(gate_name(gate), [](BitVector &) {});
            return;
        case GateKind::H:
            ct_pads.evaluate("H", [&](BitVector &bits) {
                Frame f(bits);
                conj_h(f, targets[0]);
            });
            return;
        case GateKind::CNOT:
            ct_pads.evaluate("CNOT", [&](BitVector &bits) {
                Frame f(bits);
                conj_cnot(f, targets[0], targets[1]);
            });
            return;
        case GateKind::CZ:
            ct_pads.evaluate("CZ", [&](BitVector &bits) {
                Frame f(bits);
                conj_cz(f, targets[0], targets[1]);
            });
            return;
        case GateKind::Toffoli:
            break;
    }
    fail(ErrorCode::Unsupported, "Toffoli is not a Clifford gate");
}

const char *backend_name(Backend backend) {
    return backend == Backend::Gadget ? "gadget" : "semantic";
}

Backend parse_backend(const std::string &name) {
    if (name == "gadget") {
        return Backend::Gadget;
    }
    if (name == "semantic") {
        return Backend::Semantic;
    }
    fail(ErrorCode::InvalidArgument, "backend must be 'gadget' or 'semantic'");
}

HomomorphicEvaluator::HomomorphicEvaluator(StateVector &state, SealedCiphertext &pads, const FheKey &key,
                                           Backend backend, size_t gadget_width, Rng &rng)
    : state_(state), pads_(pads), key_(key), backend_(backend), gadget_width_(gadget_width), rng_(rng) {
    require(pads.key_id() == key.id, ErrorCode::AccessDenied, "pad ciphertext is not under the evaluation key");
    require(pads.size() % 2 == 0 && pads.size() / 2 <= state.num_qubits(), ErrorCode::InvalidArgument,
            "pad ciphertext does not fit the state");
    require(gadget_width >= 1 && gadget_width <= kMaxGadgetWidth, ErrorCode::InvalidArgument,
            "gadget width k must be in [1, 4]");
}

void HomomorphicEvaluator::check_padded(std::span<const size_t> targets) const {
    for (size_t t : targets) {
        require(t < pads_.size() / 2, ErrorCode::InvalidArgument, "gate target is not a padded qubit");
    }
}

void HomomorphicEvaluator::apply(GateKind gate, std::span<const size_t> targets) {
    check_padded(targets);
    if (gate == GateKind::Toffoli) {
        require(targets.size() == 3, ErrorCode::InvalidArgument, "Toffoli needs three targets");
        toffoli(targets[0], targets[1], targets[2]);
        return;
    }
    state_.apply_gate(gate, targets);
    eval_clifford_pad(gate, targets, pads_);
}

void HomomorphicEvaluator::run(const Circuit &circuit) {
    for (const auto &op : circuit) {
        apply(op);
    }
}

void HomomorphicEvaluator::load_classical_bit(size_t qubit, bool physical_bit, const SealedCiphertext &pad_source,
                                              size_t pad_index) {
    size_t q[1] = {qubit};
    check_padded(q);
    require(pad_index < pad_source.size(), ErrorCode::InvalidArgument, "pad index out of range");
    require(state_.outcome_probability(q, BitVector(1)) > 1 - kStateTolerance, ErrorCode::Internal,
            "classical bits load onto |0> qubits only");
    if (physical_bit) {
        state_.x(qubit);
    }
    pads_.evaluate_with(pad_source, "load", [&](BitVector &bits, const BitVector &src) {
        Frame f(bits);
        f.set_x(qubit, src.get(pad_index));
        f.set_z(qubit, false);
    });
}

void HomomorphicEvaluator::discard(size_t qubit) {
    size_t q[1] = {qubit};
    check_padded(q);
    MeasurementRecord rec = state_.measure(q, Basis::Z, rng_);
    require(rec.probability > 1 - kStateTolerance, ErrorCode::Internal, "discarded qubit was entangled");
    if (rec.outcome.get(0)) {
        state_.x(qubit);
    }
    pads_.evaluate("discard", [&](BitVector &bits) {
        Frame f(bits);
        f.set_x(qubit, false);
        f.set_z(qubit, false);
    });
}

void HomomorphicEvaluator::apply_opaque(const std::function<void(StateVector &)> &logical_unitary) {
    require(toffolis_ < key_.level_budget, ErrorCode::LevelExhausted, "level budget exhausted");
    toffolis_++;
    size_t padded = pads_.size() / 2;
    std::vector<size_t> qubits(padded);
    for (size_t q = 0; q < padded; q++) {
        qubits[q] = q;
    }
    PauliPad fresh(BitVector::random(padded, rng_), BitVector::random(padded, rng_));
    // Strip the sealed pad, run the program, re-pad with `fresh`.
    pads_.evaluate("opaque", [&](BitVector &bits) {
        state_.remove_pauli_frame(bits_to_pad(bits), qubits);
        logical_unitary(state_);
        state_.apply_pauli_frame(fresh, qubits);
        bits = pad_to_bits(fresh);
    });
}

void HomomorphicEvaluator::toffoli(size_t a, size_t b, size_t c) {
    require(toffolis_ < key_.level_budget, ErrorCode::LevelExhausted, "level budget exhausted");
    toffolis_++;
    if (backend_ == Backend::Gadget) {
        toffoli_gadget(a, b, c);
    } else {
        toffoli_semantic(a, b, c);
    }
}

// T (Z^z X^x) T^dag = CNOT^{x2}_{1,3} CNOT^{x1}_{2,3} CZ^{z3}_{1,2} . P' with
// P' = Z^{z1+x2 z3}X^{x1} (x) Z^{z2+x1 z3}X^{x2} (x) Z^{z3}X^{x1 x2+x3}.
// After the physical Toffoli the pad becomes P' and the Clifford prefix is
// what remains to be cancelled.
ToffoliExponents toffoli_pad_update(BitVector &bits, size_t a, size_t b, size_t c) {
    Frame f(bits);
    ToffoliExponents t{f.x(a), f.x(b), f.z(c)};
    if (t.x2 && t.z3) {
        f.flip_z(a);
    }
    if (t.x1 && t.z3) {
        f.flip_z(b);
    }
    if (t.x1 && t.x2) {
        f.flip_x(c);
    }
    return t;
}


void HomomorphicEvaluator::toffoli_semantic(size_t a, size_t b, size_t c) {
    state_.toffoli(a, b, c);
    ToffoliExponents t{};
    pads_.evaluate("toffoli", [&](BitVector &bits) { t = toffoli_pad_update(bits, a, b, c); });
    if (t.x2) {
        state_.cnot(a, c);
    }
    if (t.x1) {
        state_.cnot(b, c);
    }
    if (t.z3) {
        state_.cz(a, b);
    }
    // Fresh Pauli layer on the three qubits.
    size_t qs[3] = {a, b, c};
    PauliPad refresh(BitVector::random(3, rng_), BitVector::random(3, rng_));
    state_.apply_pauli_frame(refresh, qs);
    pads_.evaluate("refresh", [&](BitVector &bits) {
        Frame f(bits);
        for (size_t k = 0; k < 3; k++) {
            if (refresh.x.get(k)) {
                f.flip_x(qs[k]);
            }
            if (refresh.z.get(k)) {
                f.flip_z(qs[k]);
            }
        }
    });
}

void HomomorphicEvaluator::toffoli_gadget(size_t a, size_t b, size_t c) {
    state_.toffoli(a, b, c);
    SealedCiphertext exps = pads_.derive("toffoli-exponents", [&](const BitVector &bits) {
        BitVector copy = bits;
        ToffoliExponents t = toffoli_pad_update(copy, a, b, c);
        BitVector e(3);
        e.set(0, t.x2);
        e.set(1, t.x1);
        e.set(2, t.z3);
        return e;
    });
    pads_.evaluate("toffoli", [&](BitVector &bits) { toffoli_pad_update(bits, a, b, c); });

    auto sealed_bit = [&](size_t k) { return exps.derive("bit", [k](const BitVector &e) { return e.slice(k, 1); }); };
    auto hidden = [&](const SealedCiphertext &ct) {
        return ct.sealed_predicate([](const BitVector &e) { return e.get(0); });
    };
    // Local positions 0, 1, 2 stand for a, b, c.
    const size_t qs[3] = {a, b, c};
    auto fold = [&](const LocalPauli &p) {
        pads_.evaluate("gadget-correction", [&](BitVector &bits) {
            Frame f(bits);
            for (size_t k = 0; k < 3; k++) {
                if (p.x[k]) {
                    f.flip_x(qs[k]);
                }
                if (p.z[k]) {
                    f.flip_z(qs[k]);
                }
            }
        });
    };

    // 1) CNOT^{x2}_{a,c}; the rest of the prefix is CNOT^{x1}_{b,c} CZ^{z3}_{a,b}.
    SealedCiphertext s1 = sealed_bit(0);
    InjectivePair p1 = sample_injective_pair(hidden(s1), gadget_width_, rng_);
    GadgetOutcome o1 = run_cnot_gadget(state_, a, c, p1, rng_);
    gadget_runs_++;
    GadgetCorrection g1 = gadget_correction(p1, o1);
    LocalPauli q1;
    q1.x[2] = g1.x_on_target;
    q1.z[0] = g1.z_on_control;
    if (hidden(sealed_bit(1))) {
        conj_cnot(q1, 1, 2);
    }
    if (hidden(sealed_bit(2))) {
        conj_cz(q1, 0, 1);
    }
    fold(q1);

    // 2) CNOT^{x1}_{b,c}; remaining prefix CZ^{z3}_{a,b}.
    SealedCiphertext s2 = sealed_bit(1);
    InjectivePair p2 = sample_injective_pair(hidden(s2), gadget_width_, rng_);
    GadgetOutcome o2 = run_cnot_gadget(state_, b, c, p2, rng_);
    gadget_runs_++;
    GadgetCorrection g2 = gadget_correction(p2, o2);
    LocalPauli q2;
    q2.x[2] = g2.x_on_target;
    q2.z[1] = g2.z_on_control;
    if (hidden(sealed_bit(2))) {
        conj_cz(q2, 0, 1);
    }
    fold(q2);

    // 3) CZ^{z3}_{a,b} = H_b CNOT^{z3}_{a,b} H_b.
    SealedCiphertext s3 = sealed_bit(2);
    InjectivePair p3 = sample_injective_pair(hidden(s3), gadget_width_, rng_);
    state_.h(b);
    GadgetOutcome o3 = run_cnot_gadget(state_, a, b, p3, rng_);
    gadget_runs_++;
    state_.h(b);
    GadgetCorrection g3 = gadget_correction(p3, o3);
    LocalPauli q3;
    q3.x[1] = g3.x_on_target;
    q3.z[0] = g3.z_on_control;
    conj_h(q3, 1);
    fold(q3);
}

void eval_toffoli(HomomorphicEvaluator &evaluator, std::span<const size_t> targets) {
    require(targets.size() == 3, ErrorCode::InvalidArgument, "Toffoli needs three targets");
    evaluator.apply(GateKind::Toffoli, targets);
}

void eval_circuit(HomomorphicEvaluator &evaluator, const Circuit &circuit) {
    evaluator.run(circuit);
}

StateVector unpad(const StateVector &state, const PauliPad &pad) {
    StateVector out = state;
    std::vector<size_t> qubits(pad.size());
    for (size_t q = 0; q < pad.size(); q++) {
        qubits[q] = q;
    }
    out.remove_pauli_frame(pad, qubits);
    return out;
}

}  // namespace csqm
