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

#include "csqm/money.h"

#include <sodium.h>

#include <cstdio>

#include "csqm/errors.h"

namespace csqm {

namespace {

std::vector<size_t> range(size_t begin, size_t end) {
    std::vector<size_t> out;
    for (size_t q = begin; q < end; q++) {
        out.push_back(q);
    }
    return out;
}

std::string oracle_handle(const TokenOracles &o, uint64_t token_id, size_t lambda) {
    std::string text = std::to_string(token_id) + "|" + std::to_string(lambda) + "|" + o.primal0.basis.str_hex() +
                       "|" + o.primal0.offset.hex() + "|" + o.primal1.offset.hex() + "|" + o.dual.basis.str_hex() +
                       "|" + o.dual.offset.hex();
    uint8_t out[16];
    crypto_generichash(out, sizeof(out), reinterpret_cast<const uint8_t *>(text.data()), text.size(), nullptr, 0);
    char hex[33];
    for (size_t i = 0; i < 16; i++) {
        std::snprintf(hex + 2 * i, 3, "%02x", out[i]);
    }
    return std::string(hex, 32);
}

}  // namespace

void check_lambda(size_t lambda) {
    require(lambda >= kMinLambda && lambda % 2 == 0, ErrorCode::InvalidArgument, "lambda must be even and >= 4");
    require(lambda <= kMaxMintLambda, ErrorCode::Capacity, "lambda too large for the state-vector simulator");
}

size_t MintCircuit::toffoli_count() const {
    // One Toffoli per data qubit per index block, plus the parity block.
    return (blocks.size() + 1) * layout.lambda;
}

MintCircuit build_mint_circuit(size_t lambda) {
    check_lambda(lambda);
    MintCircuit c;
    c.layout.lambda = lambda;
    for (size_t i = 0; i < lambda / 2; i++) {
        c.blocks.push_back(MintBlock{i + 1, c.layout.index(i)});
    }
    return c;
}

size_t mint_level_budget(size_t lambda) {
    return 4 * build_mint_circuit(lambda).toffoli_count();
}

BitMatrix affine_rows(const BitMatrix &ms) {
    BitMatrix out(1, ms.cols());
    for (const auto &row : ms.row_list()) {
        out.push_row(row);
    }
    return out;
}

BitVector flatten(const BitMatrix &m) {
    BitVector out(m.rows() * m.cols());
    for (size_t r = 0; r < m.rows(); r++) {
        for (size_t c = 0; c < m.cols(); c++) {
            out.set(r * m.cols() + c, m.get(r, c));
        }
    }
    return out;
}

BitMatrix unflatten(const BitVector &bits, size_t rows, size_t cols) {
    require(bits.size() == rows * cols, ErrorCode::InvalidArgument, "flattened matrix has the wrong length");
    BitMatrix out(0, cols);
    for (size_t r = 0; r < rows; r++) {
        out.push_row(bits.slice(r * cols, cols));
    }
    return out;
}

CloudMintState execute_mint_circuit(const MintCircuit &circuit, const BitMatrix &shifted,
                                    const SealedCiphertext &ct_px, const FheKey &eval_key, Backend backend,
                                    size_t gadget_width, Rng &rng) {
    const MintLayout &L = circuit.layout;
    const size_t lambda = L.lambda;
    require(shifted.rows() == L.half() + 1 && shifted.cols() == lambda, ErrorCode::InvalidArgument,
            "transmitted matrix must be (lambda/2 + 1) x lambda");
    require(ct_px.size() == shifted.rows() * lambda, ErrorCode::InvalidArgument, "sealed pad does not fit the matrix");
    require(backend != Backend::Gadget || lambda <= kMaxGadgetLambda, ErrorCode::Capacity,
            "gadget backend supports lambda <= 8");

    CloudMintState out;
    out.state = StateVector({{"data", lambda}, {"index", L.half()}, {"parity", 1}, {"rowbit", 1}});
    const size_t n = L.total();
    out.pads = ct_px.derive("mint-registers", [n](const BitVector &) { return BitVector(2 * n); });

    HomomorphicEvaluator ev(out.state, out.pads, eval_key, backend, gadget_width, rng);
    auto gate = [&](GateKind kind, std::initializer_list<size_t> qs) {
        std::vector<size_t> t(qs);
        ev.apply(kind, t);
    };
    auto xor_row = [&](size_t row, std::optional<size_t> control) {
        for (size_t j = 0; j < lambda; j++) {
            ev.load_classical_bit(L.rowbit(), shifted.get(row, j), ct_px, row * lambda + j);
            if (control) {
                gate(GateKind::Toffoli, {*control, L.rowbit(), L.data(j)});
            } else {
                gate(GateKind::CNOT, {L.rowbit(), L.data(j)});
            }
            ev.discard(L.rowbit());
        }
    };

    for (size_t i = 0; i < L.half(); i++) {
        gate(GateKind::H, {L.index(i)});
    }
    xor_row(0, std::nullopt);
    for (const auto &block : circuit.blocks) {
        xor_row(block.row, block.control);
    }
    for (size_t i = 0; i < L.half(); i++) {
        gate(GateKind::CNOT, {L.index(i), L.parity()});
    }
    xor_row(0, L.parity());
    for (size_t i = 0; i < L.half(); i++) {
        gate(GateKind::CNOT, {L.index(i), L.parity()});
    }
    out.toffolis = ev.toffolis_used();
    out.gadget_runs = ev.gadget_runs();
    return out;
}

DisentangleResult disentangle_index(CloudMintState &&mint, uint64_t token_id, Rng &rng) {
    StateVector &s = mint.state;
    const Register index = s.reg("index");
    MintLayout L{s.reg("data").size};
    require(index.size == L.half() && s.num_qubits() == L.total(), ErrorCode::InvalidArgument,
            "state is not a mint-circuit output");

    std::vector<size_t> iq = index.qubits();
    MeasurementRecord d = s.measure(iq, Basis::X, rng);
    for (size_t i = 0; i < iq.size(); i++) {
        s.h(iq[i]);
        if (d.outcome.get(i)) {
            s.x(iq[i]);
        }
    }
    // Work qubits hold logical |0>; their physical value is a pad bit.
    for (size_t q : {L.parity(), L.rowbit()}) {
        size_t t[1] = {q};
        if (s.measure(t, Basis::Z, rng).outcome.get(0)) {
            s.x(q);
        }
    }
    s.drop_last_register("rowbit");
    s.drop_last_register("parity");
    s.drop_last_register("index");
    s.append_register("anc", 1);

    DisentangleResult out;
    out.d = d.outcome;
    out.ct_xz = std::move(mint.pads);
    const BitVector outcome = d.outcome;
    out.ct_xz.evaluate("index-outcome", [&](BitVector &bits) { bits = bits.concat(outcome); });
    out.token.token_id = token_id;
    out.token.lambda = L.lambda;
    out.token.state = std::move(s);
    return out;
}

TokenOracles build_oracles(const BitMatrix &ms, const BitVector &x, const BitVector &z) {
    require(ms.rows() >= 1 && x.size() == ms.cols() && z.size() == ms.cols(), ErrorCode::InvalidArgument,
            "oracle inputs have inconsistent sizes");
    BitMatrix s0 = ms.without_row(0);
    const BitVector &w = ms.row(0);
    return TokenOracles{Coset(s0, x), Coset(s0, x ^ w), Coset(perp(ms), z)};
}

const char *oracle_kind_name(OracleKind kind) {
    switch (kind) {
        case OracleKind::Primal0:
            return "primal0";
        case OracleKind::Primal1:
            return "primal1";
        case OracleKind::Primal:
            return "primal";
        case OracleKind::Dual:
            return "dual";
    }
    return "?";
}

PublicKey::PublicKey(std::shared_ptr<const TokenOracles> oracles, uint64_t token_id, size_t lambda)
    : oracles_(std::move(oracles)), token_id_(token_id), lambda_(lambda) {
    require(oracles_ != nullptr, ErrorCode::InvalidArgument, "public key needs oracles");
    handle_ = oracle_handle(*oracles_, token_id, lambda);
}

bool PublicKey::evaluate(OracleKind kind, const BitVector &v) const {
    require(valid(), ErrorCode::InvalidArgument, "empty public key");
    require(v.size() == lambda_, ErrorCode::InvalidArgument, "oracle input has the wrong length");
    switch (kind) {
        case OracleKind::Primal0:
            return coset_contains(oracles_->primal0, v);
        case OracleKind::Primal1:
            return coset_contains(oracles_->primal1, v);
        case OracleKind::Primal:
            return coset_contains(oracles_->primal0, v) || coset_contains(oracles_->primal1, v);
        case OracleKind::Dual:
            return coset_contains(oracles_->dual, v);
    }
    return false;
}

std::string PublicKey::serialize() const {
    return "PK/1:" + std::to_string(token_id_) + ":" + std::to_string(lambda_) + ":" + handle_;
}

FinalizeOutcome bank_finalize(uint64_t token_id, const BitMatrix &ms, const BitMatrix &px, KeyId fhek,
                              const BitVector &decrypted) {
    MintLayout L{ms.cols()};
    const size_t n = L.total();
    require(decrypted.size() == 2 * n + L.half(), ErrorCode::Protocol, "returned pad ciphertext has the wrong size");
    FinalizeOutcome out;
    BankTokenSecrets &sec = out.secrets;
    sec.token_id = token_id;
    sec.ms = ms;
    sec.px = px;
    sec.fhek = fhek;
    sec.x = decrypted.slice(0, L.lambda);
    BitVector z_data = decrypted.slice(n, L.lambda);
    BitVector z_index = decrypted.slice(n + L.lambda, L.half());
    BitVector d_phys = decrypted.slice(2 * n, L.half());
    sec.d_logical = d_phys ^ z_index;
    sec.e = solve_dual_shift(ms, sec.d_logical);
    sec.z = z_data ^ sec.e;
    sec.w = ms.row(0);
    sec.s0 = ms.without_row(0);
    out.aborted = coset_contains(Coset(ms, BitVector(L.lambda)), sec.x);
    if (!out.aborted) {
        out.oracles = std::make_shared<const TokenOracles>(build_oracles(ms, sec.x, sec.z));
    }
    return out;
}

ReceiverTokenKeys initial_receiver_keys(const BitVector &r) {
    ReceiverTokenKeys k;
    k.r = r;
    BitVector zero(1);
    k.pads = PauliPad(r.concat(zero), BitVector(r.size() + 1));
    return k;
}

bool cloud_oracle_round(TokenRegisters &token, const PublicKey &pk, OracleKind kind, SealedCiphertext &ct_pads,
                        const FheKey &reckey, Rng &rng) {
    require(!token.consumed, ErrorCode::Protocol, "token register has been consumed by signing");
    require(pk.lambda() == token.lambda, ErrorCode::InvalidArgument, "public key does not match the token");
    require(ct_pads.size() == 2 * (token.lambda + 1), ErrorCode::InvalidArgument,
            "receiver pads must cover data and ancilla");
    const std::vector<size_t> data = range(0, token.lambda);
    const size_t anc = token.ancilla();
    HomomorphicEvaluator ev(token.state, ct_pads, reckey, Backend::Semantic, kDefaultGadgetWidth, rng);
    auto hadamards = [&] {
        for (size_t q : data) {
            size_t t[1] = {q};
            ev.apply(GateKind::H, t);
        }
    };
    if (kind == OracleKind::Dual) {
        hadamards();
    }
    ev.apply_opaque([&](StateVector &s) {
        s.membership_unitary([&](const BitVector &v) { return pk.evaluate(kind, v); }, data, anc);
    });
    if (kind == OracleKind::Dual) {
        hadamards();
    }
    size_t a[1] = {anc};
    bool mu = token.state.measure(a, Basis::Z, rng).outcome.get(0);
    if (mu) {
        token.state.x(anc);
    }
    return mu;
}

bool receiver_open_round(ReceiverTokenKeys &keys, const FheContext &ctx, const FheKey &reckey,
                         const SealedCiphertext &ct_pads, bool mu) {
    PauliPad pads = bits_to_pad(ctx.dec(reckey, ct_pads));
    size_t anc = pads.size() - 1;
    bool m = mu != pads.x.get(anc);
    pads.x.set(anc, false);
    pads.z.set(anc, false);
    keys.pads = pads;
    return m;
}

BitVector cloud_measure_data(TokenRegisters &token, Rng &rng) {
    std::vector<size_t> data = range(0, token.lambda);
    BitVector out = token.state.measure(data, Basis::Z, rng).outcome;
    token.consumed = true;
    return out;
}

namespace {

bool direct_round(FheContext &ctx, const PublicKey &pk, TokenRegisters &token, ReceiverTokenKeys &keys,
                  OracleKind kind, Rng &rec_rng, Rng &cloud_rng) {
    FheKey reckey = ctx.keygen(token.lambda, kReceiverLevelBudget, rec_rng);
    SealedCiphertext ct = ctx.enc(reckey, pad_to_bits(keys.pads));
    bool mu = cloud_oracle_round(token, pk, kind, ct, reckey, cloud_rng);
    return receiver_open_round(keys, ctx, reckey, ct, mu);
}

}  // namespace

VerifyReport verify_token(FheContext &ctx, const PublicKey &pk, TokenRegisters &token, ReceiverTokenKeys &keys,
                          Rng &rec_rng, Rng &cloud_rng) {
    VerifyReport r;
    r.primal = direct_round(ctx, pk, token, keys, OracleKind::Primal, rec_rng, cloud_rng);
    r.dual = direct_round(ctx, pk, token, keys, OracleKind::Dual, rec_rng, cloud_rng);
    return r;
}

SignReport sign_token(FheContext &ctx, const PublicKey &pk, TokenRegisters &token, ReceiverTokenKeys &keys, bool b,
                      Rng &rec_rng, Rng &cloud_rng) {
    SignReport out;
    auto unmask = [&](const BitVector &measured) { return measured ^ keys.pads.x.slice(0, token.lambda); };
    if (token.consumed) {
        out.sigma = unmask(cloud_measure_data(token, cloud_rng));
        return out;
    }
    OracleKind half = b ? OracleKind::Primal1 : OracleKind::Primal0;
    for (size_t attempt = 1; attempt <= kMaxSignAttempts; attempt++) {
        if (direct_round(ctx, pk, token, keys, half, rec_rng, cloud_rng)) {
            out.sigma = unmask(cloud_measure_data(token, cloud_rng));
            out.attempts = attempt;
            return out;
        }
        // Dual test re-spreads the state over both halves.
        direct_round(ctx, pk, token, keys, OracleKind::Dual, rec_rng, cloud_rng);
    }
    fail(ErrorCode::Liveness, "signing did not succeed within 64 attempts");
}

bool check_signature(const PublicKey &pk, bool b, const BitVector &sigma) {
    if (sigma.size() != pk.lambda()) {
        return false;
    }
    return pk.evaluate(b ? OracleKind::Primal1 : OracleKind::Primal0, sigma);
}

MintRun mint_direct(FheContext &ctx, size_t lambda, uint64_t token_id, const MintFixtures &fixtures,
                    Backend backend, size_t gadget_width, Rng &bank_rng, Rng &rec_rng, Rng &cloud_rng,
                    bool keep_audit) {
    MintCircuit circuit = build_mint_circuit(lambda);
    const size_t half = lambda / 2;
    BitMatrix ms = fixtures.ms ? *fixtures.ms : sample_full_rank(half, lambda, bank_rng);
    BitMatrix px = fixtures.px ? *fixtures.px : BitMatrix::random(half + 1, lambda, bank_rng);
    require(ms.rows() == half && ms.cols() == lambda && rank(ms) == half, ErrorCode::InvalidArgument,
            "M_S must be a full-rank lambda/2 x lambda matrix");
    require(px.rows() == half + 1 && px.cols() == lambda, ErrorCode::InvalidArgument,
            "p_x must be (lambda/2 + 1) x lambda");
    FheKey fhek = ctx.keygen(lambda, mint_level_budget(lambda), bank_rng);
    SealedCiphertext ct_px = ctx.enc(fhek, flatten(px));

    MintRun run;
    run.padded = affine_rows(ms) ^ px;
    BitVector r = fixtures.r ? *fixtures.r : BitVector::random(lambda, rec_rng);
    require(r.size() == lambda, ErrorCode::InvalidArgument, "R must have lambda bits");
    run.shifted = xor_shift_rows(run.padded, r);

    CloudMintState cloud = execute_mint_circuit(circuit, run.shifted, ct_px, fhek, backend, gadget_width, cloud_rng);
    run.toffolis = cloud.toffolis;
    run.gadget_runs = cloud.gadget_runs;
    if (keep_audit) {
        run.logical_before_index = unpad(cloud.state, bits_to_pad(ctx.dec(fhek, cloud.pads)));
    }
    DisentangleResult dis = disentangle_index(std::move(cloud), token_id, cloud_rng);
    run.bank = bank_finalize(token_id, ms, px, fhek.id, ctx.dec(fhek, dis.ct_xz));
    run.token = std::move(dis.token);
    run.keys = initial_receiver_keys(r);
    if (!run.bank.aborted) {
        run.pk = PublicKey(run.bank.oracles, token_id, lambda);
    }
    return run;
}

StateVector omniscient_decode(const TokenRegisters &token, const ReceiverTokenKeys &keys,
                              const BankTokenSecrets &secrets, bool strip_bank_z) {
    StateVector out = token.state;
    std::vector<size_t> all = range(0, token.lambda + 1);
    out.remove_pauli_frame(keys.pads, all);
    if (strip_bank_z) {
        std::vector<size_t> data = range(0, token.lambda);
        out.apply_pauli_frame(PauliPad(BitVector(token.lambda), secrets.z), data);
    }
    return out;
}

}  // namespace csqm
