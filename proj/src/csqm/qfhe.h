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

#ifndef CSQM_QFHE_H
#define CSQM_QFHE_H

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "csqm/gf2.h"
#include "csqm/qstate.h"
#include "csqm/rng.h"

namespace csqm {

// Classical FHE is modeled rather than implemented: a SealedCiphertext keeps
// its plaintext internally and only dec() with the owning key reveals it.
// Homomorphic updates are expressed as functions run over the sealed bits,
// which stands in for evaluating the same circuit under LWE encryption.

using KeyId = uint64_t;

struct FheKey {
    KeyId id = 0;
    size_t lambda = 0;
    size_t level_budget = 0;
};

class FheContext;

class SealedCiphertext {
   public:
    SealedCiphertext() = default;

    KeyId key_id() const {
        return key_id_;
    }
    size_t size() const {
        return bits_.size();
    }
    /// Labels of homomorphic updates applied since this object was created
    /// or parsed.
    const std::vector<std::string> &provenance() const {
        return log_;
    }
    uint64_t provenance_count() const {
        return prov_count_;
    }
    const std::string &provenance_hash() const {
        return prov_hash_;
    }

    /// Homomorphic update of the sealed bits in place.
    void evaluate(const std::string &label, const std::function<void(BitVector &)> &update);
    /// Homomorphic update that also reads another ciphertext under the same
    /// key.
    void evaluate_with(const SealedCiphertext &other, const std::string &label,
                       const std::function<void(BitVector &, const BitVector &)> &update);
    /// New ciphertext under the same key computed from the sealed bits.
    SealedCiphertext derive(const std::string &label, const std::function<BitVector(const BitVector &)> &fn) const;
    /// Homomorphically computes a public predicate of the sealed bits. Used
    /// only by the simulator to drive gates whose exponent is sealed; the
    /// value never enters a message.
    bool sealed_predicate(const std::function<bool(const BitVector &)> &fn) const {
        return fn(bits_);
    }

    bool operator==(const SealedCiphertext &other) const = default;

   private:
    friend class FheContext;
    void record(const std::string &label);

    KeyId key_id_ = 0;
    BitVector bits_;
    uint64_t prov_count_ = 0;
    std::string prov_hash_;
    std::vector<std::string> log_;
};

/// Stand-in for the encryption scheme itself: issues keys and seals and
/// unseals wire envelopes. Every actor in one simulated world shares one
/// context, the way all parties share the same public scheme.
class FheContext {
   public:
    FheContext();

    FheKey keygen(size_t lambda, size_t level_budget, Rng &rng);
    SealedCiphertext enc(const FheKey &key, const BitVector &bits);
    BitVector dec(const FheKey &key, const SealedCiphertext &ct) const;

    /// "SEALED/1:<key id>:<bits>:<masked payload>:<update count>:<hash>".
    std::string serialize(const SealedCiphertext &ct) const;
    SealedCiphertext parse(const std::string &text) const;

    size_t key_count() const {
        return secrets_.size();
    }

   private:
    std::vector<uint8_t> keystream(KeyId id, const SealedCiphertext &ct, size_t num_bytes) const;

    std::map<KeyId, std::array<uint8_t, 32>> secrets_;
    uint64_t next_id_ = 1;
    uint64_t enc_counter_ = 0;
};

/// One-time-pad XOR on classical bits.
BitVector otp(const BitVector &message, const BitVector &pad);

/// Sealed bits laid out as [x_0..x_{n-1} | z_0..z_{n-1}] for n padded qubits.
BitVector pad_to_bits(const PauliPad &pad);
PauliPad bits_to_pad(const BitVector &bits);

/// Pair of injective maps f_b(mu, r) = g(mu xor b*s, r) on {0,1}^{1+k}, g a
/// uniformly random permutation. Injectivity and the claw relation
/// mu_0 xor mu_1 = s hold exactly; claw-finding hardness is not modeled.
class InjectivePair {
   public:
    InjectivePair(bool s, size_t k, std::vector<uint32_t> table);

    size_t k() const {
        return k_;
    }
    size_t domain_size() const {
        return table_.size();
    }
    /// Domain point (mu, r) packed as mu * 2^k + r.
    uint32_t image(bool b, uint32_t point) const;

    /// Trapdoor inversion: the unique preimage of y under f_b.
    uint32_t preimage(bool b, uint32_t y) const;
    bool hidden_bit() const {
        return s_;
    }

   private:
    bool s_;
    size_t k_;
    std::vector<uint32_t> table_;
    std::vector<uint32_t> inverse_;
};

inline constexpr size_t kDefaultGadgetWidth = 3;
inline constexpr size_t kMaxGadgetWidth = 4;

InjectivePair sample_injective_pair(bool s, size_t k, Rng &rng);

/// Classical outcomes of one gadget run.
struct GadgetOutcome {
    uint32_t y = 0;  // image register
    uint32_t d = 0;  // Hadamard-basis outcome on the (mu, r) register
};

/// Physical part of the encrypted CNOT: on any state, applies
/// Z_ctrl^{d.(u_0 xor u_1)} X_tgt^{mu_0} CNOT^s_{ctrl,tgt} using 2(1+k)
/// temporary ancillas that are returned to |0> and dropped.
GadgetOutcome run_cnot_gadget(StateVector &state, size_t ctrl, size_t tgt, const InjectivePair &pair, Rng &rng);

/// Pauli correction left by a gadget run, as known through the trapdoor.
struct GadgetCorrection {
    bool x_on_target = false;
    bool z_on_control = false;
};
GadgetCorrection gadget_correction(const InjectivePair &pair, const GadgetOutcome &outcome);

/// Logical CNOT^s on a padded state. ct_pads seals the pads of qubits
/// [0, ct_pads.size()/2); ct_s seals s under the same key and must match
/// the pair.
GadgetOutcome encrypted_cnot(StateVector &state, size_t ctrl, size_t tgt, const SealedCiphertext &ct_s,
                             const InjectivePair &pair, SealedCiphertext &ct_pads, Rng &rng);

/// Pad update for a Clifford gate applied to a padded state.
void eval_clifford_pad(GateKind gate, std::span<const size_t> targets, SealedCiphertext &ct_pads);

/// Pad rule of a Toffoli on (a, b, c) over [x|z] pad bits. Rewrites the
/// bits into P' and returns the exponents of the Clifford corrections
/// CNOT^{x2}(a,c), CNOT^{x1}(b,c) and CZ^{z3}(a,b) left in front of it.
struct ToffoliExponents {
    bool x1, x2, z3;
};
ToffoliExponents toffoli_pad_update(BitVector &bits, size_t a, size_t b, size_t c);

enum class Backend { Gadget, Semantic };
const char *backend_name(Backend backend);
Backend parse_backend(const std::string &name);

struct Operation {
    GateKind gate;
    std::vector<size_t> targets;
};
using Circuit = std::vector<Operation>;

/// Runs gates on a padded state while keeping the sealed pads consistent.
/// Physical state = Z^z X^x (logical state) on the padded qubits.
class HomomorphicEvaluator {
   public:
    HomomorphicEvaluator(StateVector &state, SealedCiphertext &pads, const FheKey &key, Backend backend,
                         size_t gadget_width, Rng &rng);

    void apply(GateKind gate, std::span<const size_t> targets);
    void apply(const Operation &op) {
        apply(op.gate, op.targets);
    }
    void run(const Circuit &circuit);

    /// Puts the physical bit on a |0> qubit and copies its pad from
    /// pad_source[pad_index] (another ciphertext under the same key).
    void load_classical_bit(size_t qubit, bool physical_bit, const SealedCiphertext &pad_source, size_t pad_index);
    /// Measures a qubit known to hold a logical basis state, resets it to
    /// |0> and clears its pad.
    void discard(size_t qubit);

    /// Evaluates an arbitrary unitary on the logical state and re-pads every
    /// padded qubit with fresh randomness. Only the semantic route exists:
    /// the unitary is an opaque program, not a gate list.
    void apply_opaque(const std::function<void(StateVector &)> &logical_unitary);

    size_t toffolis_used() const {
        return toffolis_;
    }
    size_t gadget_runs() const {
        return gadget_runs_;
    }

   private:
    void toffoli(size_t a, size_t b, size_t c);
    void toffoli_gadget(size_t a, size_t b, size_t c);
    void toffoli_semantic(size_t a, size_t b, size_t c);
    void check_padded(std::span<const size_t> targets) const;

    StateVector &state_;
    SealedCiphertext &pads_;
    FheKey key_;
    Backend backend_;
    size_t gadget_width_;
    Rng &rng_;
    size_t toffolis_ = 0;
    size_t gadget_runs_ = 0;
};

void eval_toffoli(HomomorphicEvaluator &evaluator, std::span<const size_t> targets);
void eval_circuit(HomomorphicEvaluator &evaluator, const Circuit &circuit);

/// Removes the pads from a copy of the state; test and audit use only.
StateVector unpad(const StateVector &state, const PauliPad &pad);

}  // namespace csqm

#endif
