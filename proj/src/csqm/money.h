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

#ifndef CSQM_MONEY_H
#define CSQM_MONEY_H

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "csqm/gf2.h"
#include "csqm/qfhe.h"
#include "csqm/qstate.h"
#include "csqm/rng.h"

namespace csqm {

/// Qubit layout of the cloud register group while the mint circuit runs.
/// data [0, L), index [L, 1.5L), then one parity qubit and one row qubit.
struct MintLayout {
    size_t lambda = 0;

    size_t half() const {
        return lambda / 2;
    }
    size_t data(size_t j) const {
        return j;
    }
    size_t index(size_t i) const {
        return lambda + i;
    }
    size_t parity() const {
        return lambda + half();
    }
    size_t rowbit() const {
        return lambda + half() + 1;
    }
    size_t total() const {
        return lambda + half() + 2;
    }
};

/// One block: XOR encrypted row `row` into the data register under a
/// control qubit. Row r of the transmitted matrix is row r-1 of M_S for
/// r >= 1; row 0 is the affine row that carries R.
struct MintBlock {
    size_t row = 0;
    size_t control = 0;
};

/// The mint circuit: XOR row 0 into data unconditionally, then lambda/2
/// index-controlled blocks, then a parity-controlled XOR of row 0 again.
/// The receiver's shift adds R to every row, so rows 1..L/2 carry S_i + R;
/// the parity correction cancels the copies of R that an even number of
/// blocks would otherwise leave behind.
struct MintCircuit {
    MintLayout layout;
    std::vector<MintBlock> blocks;

    size_t lambda() const {
        return layout.lambda;
    }
    size_t toffoli_count() const;
};

/// Smallest and largest security parameters the simulator can mint.
inline constexpr size_t kMinLambda = 4;
inline constexpr size_t kMaxMintLambda = 14;
/// Largest lambda for the gadget backend (ancillas need room).
inline constexpr size_t kMaxGadgetLambda = 8;
inline constexpr size_t kMaxSignAttempts = 64;

void check_lambda(size_t lambda);

MintCircuit build_mint_circuit(size_t lambda);
/// Level budget for the mint key: four times the circuit's Toffoli count.
size_t mint_level_budget(size_t lambda);

/// [0; M_S]: the transmitted matrix gets an all-zero affine row on top.
BitMatrix affine_rows(const BitMatrix &ms);
/// Row-major bits of a matrix, the layout used when a matrix is sealed.
BitVector flatten(const BitMatrix &m);
BitMatrix unflatten(const BitVector &bits, size_t rows, size_t cols);

/// Cloud-side register group while minting.
struct CloudMintState {
    StateVector state;
    SealedCiphertext pads;  // [x | z] over layout.total() qubits
    size_t toffolis = 0;
    size_t gadget_runs = 0;
};

/// Homomorphically runs the mint circuit on fresh registers. `shifted` is
/// the physical matrix received from the receiver and ct_px seals its pad.
CloudMintState execute_mint_circuit(const MintCircuit &circuit, const BitMatrix &shifted,
                                    const SealedCiphertext &ct_px, const FheKey &eval_key, Backend backend,
                                    size_t gadget_width, Rng &rng);

/// Quantum money token held by a cloud: data (lambda qubits) and one
/// verification ancilla at qubit lambda.
struct TokenRegisters {
    uint64_t token_id = 0;
    size_t lambda = 0;
    StateVector state;
    bool consumed = false;

    size_t ancilla() const {
        return lambda;
    }
};

struct DisentangleResult {
    TokenRegisters token;
    /// Sealed [x | z] over the mint layout followed by the index outcome d.
    SealedCiphertext ct_xz;
    BitVector d;
};

/// Measures the index register in the X basis, releases the work qubits,
/// and appends the verification ancilla.
DisentangleResult disentangle_index(CloudMintState &&mint, uint64_t token_id, Rng &rng);

/// Membership predicates standing in for obfuscated programs.
struct TokenOracles {
    Coset primal0;  // S_0 + x
    Coset primal1;  // S_0 + x + w
    Coset dual;     // S^perp + z
};

TokenOracles build_oracles(const BitMatrix &ms, const BitVector &x, const BitVector &z);

enum class OracleKind { Primal0, Primal1, Primal, Dual };
const char *oracle_kind_name(OracleKind kind);

/// Published key of one token. Only evaluation is exposed; the cosets stay
/// inside the shared handle.
class PublicKey {
   public:
    PublicKey() = default;
    PublicKey(std::shared_ptr<const TokenOracles> oracles, uint64_t token_id, size_t lambda);

    bool evaluate(OracleKind kind, const BitVector &v) const;
    uint64_t token_id() const {
        return token_id_;
    }
    size_t lambda() const {
        return lambda_;
    }
    /// Content hash naming the oracle programs.
    const std::string &handle() const {
        return handle_;
    }
    /// "PK/1:<token id>:<lambda>:<handle>".
    std::string serialize() const;
    bool valid() const {
        return oracles_ != nullptr;
    }

   private:
    std::shared_ptr<const TokenOracles> oracles_;
    uint64_t token_id_ = 0;
    size_t lambda_ = 0;
    std::string handle_;
};

/// Everything the bank keeps about one token. Never sent to another role.
struct BankTokenSecrets {
    uint64_t token_id = 0;
    BitMatrix ms;
    BitMatrix px;
    KeyId fhek = 0;
    BitVector x;
    BitVector z;  // includes the index correction e
    BitVector e;
    BitVector d_logical;
    BitVector w;
    BitMatrix s0;
};

struct FinalizeOutcome {
    bool aborted = false;
    BankTokenSecrets secrets;
    std::shared_ptr<const TokenOracles> oracles;
};

/// Bank side of the last mint step: reads the decrypted pads and index
/// outcome, folds the correction into z, and aborts when x lies in S.
FinalizeOutcome bank_finalize(uint64_t token_id, const BitMatrix &ms, const BitMatrix &px, KeyId fhek,
                              const BitVector &decrypted_xz_d);

/// Receiver keys for one token: the shift R and the current pad layer over
/// data and ancilla.
struct ReceiverTokenKeys {
    BitVector r;
    PauliPad pads;
};

ReceiverTokenKeys initial_receiver_keys(const BitVector &r);

/// Cloud step of one oracle test: evaluates the oracle under the sealed
/// receiver pads, measures the ancilla and resets it. Returns the physical
/// outcome mu.
bool cloud_oracle_round(TokenRegisters &token, const PublicKey &pk, OracleKind kind, SealedCiphertext &ct_pads,
                        const FheKey &reckey, Rng &rng);

/// Receiver step: opens the returned pads, recovers m from mu, and records
/// the reset ancilla.
bool receiver_open_round(ReceiverTokenKeys &keys, const FheContext &ctx, const FheKey &reckey,
                         const SealedCiphertext &ct_pads, bool mu);

/// Cloud measures the data register for a signature. A consumed token only
/// re-reads the collapsed register.
BitVector cloud_measure_data(TokenRegisters &token, Rng &rng);

/// Level budget of a receiver key: one opaque program per oracle test.
inline constexpr size_t kReceiverLevelBudget = 4;

struct VerifyReport {
    bool primal = false;
    bool dual = false;
    bool accepted() const {
        return primal && dual;
    }
};

/// Both oracle tests, run directly between one receiver and one cloud.
VerifyReport verify_token(FheContext &ctx, const PublicKey &pk, TokenRegisters &token, ReceiverTokenKeys &keys,
                          Rng &rec_rng, Rng &cloud_rng);

struct SignReport {
    BitVector sigma;
    size_t attempts = 0;  // primal attempts, 1 when the first one succeeds
};

SignReport sign_token(FheContext &ctx, const PublicKey &pk, TokenRegisters &token, ReceiverTokenKeys &keys, bool b,
                      Rng &rec_rng, Rng &cloud_rng);

bool check_signature(const PublicKey &pk, bool b, const BitVector &sigma);

/// Optional fixed inputs for a mint, used to replay the 4-qubit example.
struct MintFixtures {
    std::optional<BitMatrix> ms;
    std::optional<BitMatrix> px;
    std::optional<BitVector> r;
};

/// Everything observable about one mint run without message framing.
struct MintRun {
    BitMatrix padded;   // bank -> receiver, affine row first
    BitMatrix shifted;  // receiver -> cloud
    FinalizeOutcome bank;
    PublicKey pk;  // empty when the bank aborted
    TokenRegisters token;
    ReceiverTokenKeys keys;
    size_t toffolis = 0;
    size_t gadget_runs = 0;
    /// Audit copy of the logical data+index state before the index
    /// register is measured (only when requested).
    std::optional<StateVector> logical_before_index;
};

/// Samples the bank and receiver inputs (unless fixed) and runs the mint
/// steps in order between three in-process roles.
MintRun mint_direct(FheContext &ctx, size_t lambda, uint64_t token_id, const MintFixtures &fixtures,
                    Backend backend, size_t gadget_width, Rng &bank_rng, Rng &rec_rng, Rng &cloud_rng,
                    bool keep_audit = false);

/// Test-only decoder: removes both pad layers and returns the state the
/// bank believes the cloud holds, Z^z |S + x> (x) |0>, with the Z layer
/// optionally stripped too.
StateVector omniscient_decode(const TokenRegisters &token, const ReceiverTokenKeys &keys,
                              const BankTokenSecrets &secrets, bool strip_bank_z);

}  // namespace csqm

#endif
