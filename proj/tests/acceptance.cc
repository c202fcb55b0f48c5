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

// Acceptance run: one PASS/FAIL line per criterion. Exit status 0 only when
// every line passes. Tolerances and run counts are fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <string>

#include "csqm/errors.h"
#include "csqm/scenario.h"
#include "oracles.h"

#ifndef CSQM_DEFAULT_GOLDEN
#define CSQM_DEFAULT_GOLDEN "data/demo_golden.txt"
#endif

using namespace csqm;

namespace {

constexpr double kTol = 1e-9;
constexpr double kSigmas = 3.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double band(double p, int n) {
    return kSigmas * std::sqrt(p * (1 - p) / n);
}

std::string fmt(const char *f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), f, a, b, c, d);
    return buf;
}

struct Roles {
    Rng bank, rec, cloud;
    explicit Roles(uint64_t seed)
        : bank(Rng::stream(seed, "bank")), rec(Rng::stream(seed, "rec")), cloud(Rng::stream(seed, "cloud")) {
    }
};

MintRun honest_mint(FheContext &ctx, size_t lambda, uint64_t &seed, Roles &roles) {
    while (true) {
        roles = Roles(seed++);
        MintRun run = mint_direct(ctx, lambda, seed, {}, Backend::Semantic, kDefaultGadgetWidth, roles.bank,
                                  roles.rec, roles.cloud);
        if (!run.bank.aborted) {
            return run;
        }
    }
}

// 1 ---------------------------------------------------------------------------
Outcome demo_reproduction() {
    std::ifstream f(CSQM_DEFAULT_GOLDEN, std::ios::binary);
    std::string golden((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    bool ok = !golden.empty();
    for (Backend b : {Backend::Gadget, Backend::Semantic}) {
        DemoReport d = run_demo(b, kDefaultGadgetWidth, {1, 2, 3});
        ok = ok && d.text() == golden;
        ok = ok && d.padded.without_row(0) == BitMatrix::from_strings({"1001", "1010"});
        ok = ok && d.shifted.without_row(0) == BitMatrix::from_strings({"0000", "0011"});
        std::vector<std::pair<std::string, std::string>> want = {
            {"00", "1001"}, {"01", "1000"}, {"10", "1011"}, {"11", "1010"}};
        ok = ok && d.support == want;
    }
    return {ok, "golden text, both backends"};
}

// 2 ---------------------------------------------------------------------------
Outcome toffoli_identity() {
    const size_t n = 3;
    oracle::Dense t = oracle::toffoli(0, 1, 2, n);
    auto pauli = [&](const BitVector &bits) {
        oracle::Dense m = oracle::identity(8);
        for (size_t q = 0; q < 3; q++) {
            if (bits.get(q)) {
                m = oracle::mul(oracle::pauli_x(q, n), m);
            }
            if (bits.get(3 + q)) {
                m = oracle::mul(oracle::pauli_z(q, n), m);
            }
        }
        return m;
    };
    double worst = 0;
    for (uint64_t v = 0; v < 64; v++) {
        BitVector bits(6);
        for (size_t i = 0; i < 6; i++) {
            bits.set(i, (v >> i) & 1);
        }
        oracle::Dense lhs = oracle::mul(oracle::mul(t, pauli(bits)), oracle::dagger(t));
        BitVector updated = bits;
        ToffoliExponents e = toffoli_pad_update(updated, 0, 1, 2);
        oracle::Dense rhs = pauli(updated);
        if (e.z3) {
            rhs = oracle::mul(oracle::cz(0, 1, n), rhs);
        }
        if (e.x1) {
            rhs = oracle::mul(oracle::cnot(1, 2, n), rhs);
        }
        if (e.x2) {
            rhs = oracle::mul(oracle::cnot(0, 2, n), rhs);
        }
        worst = std::max(worst, oracle::phase_deviation(lhs, rhs));
    }
    return {worst < kTol, fmt("64 pads, max deviation %.2e", worst)};
}

// 3 ---------------------------------------------------------------------------
Outcome encrypted_cnot_gadget() {
    Rng rng(3);
    double worst = 1;
    int runs = 0;
    bool equal = true;
    for (size_t k = 1; k <= 3; k++) {
        for (bool s : {false, true}) {
            for (int r = 0; r < 100; r++) {
                std::vector<Amplitude> amps(8);
                double norm = 0;
                for (auto &a : amps) {
                    a = Amplitude(rng.unit() - 0.5, rng.unit() - 0.5);
                    norm += std::norm(a);
                }
                for (auto &a : amps) {
                    a /= std::sqrt(norm);
                }
                StateVector logical = StateVector::from_amplitudes({{"q", 3}}, amps);
                FheContext ctx;
                FheKey key = ctx.keygen(4, 10, rng);
                PauliPad pad(BitVector::random(3, rng), BitVector::random(3, rng));
                StateVector phys = logical;
                size_t all[3] = {0, 1, 2};
                phys.apply_pauli_frame(pad, all);
                SealedCiphertext pads = ctx.enc(key, pad_to_bits(pad));
                SealedCiphertext ct_s = ctx.enc(key, BitVector::from_string(s ? "1" : "0"));
                size_t ctrl = rng.below(3), tgt = (ctrl + 1 + rng.below(2)) % 3;
                encrypted_cnot(phys, ctrl, tgt, ct_s, sample_injective_pair(s, k, rng), pads, rng);
                StateVector expect = logical;
                if (s) {
                    expect.cnot(ctrl, tgt);
                }
                StateVector got = unpad(phys, bits_to_pad(ctx.dec(key, pads)));
                equal = equal && states_equal(got, expect);
                worst = std::min(worst, overlap(got, expect));
                runs++;
            }
        }
    }
    // Claw property over every image, every k up to 4.
    bool claws = true;
    for (size_t k = 1; k <= 4; k++) {
        for (bool s : {false, true}) {
            for (int r = 0; r < 20; r++) {
                InjectivePair p = sample_injective_pair(s, k, rng);
                for (uint32_t y = 0; y < p.domain_size(); y++) {
                    uint32_t u0 = p.preimage(false, y), u1 = p.preimage(true, y);
                    claws = claws && ((u0 >> k) ^ (u1 >> k)) == uint32_t(s);
                }
            }
        }
    }
    return {equal && worst >= 1 - kTol && claws,
            fmt("%.0f runs, min overlap %.12f, claws exhaustive k<=4", runs, worst)};
}

// 4 ---------------------------------------------------------------------------
Outcome backend_equivalence() {
    int equal = 0, total = 0;
    for (size_t lambda : {4, 6}) {
        for (uint64_t seed = 0; seed < 50; seed++) {
            Rng inputs(seed * 31 + lambda);
            MintFixtures f;
            f.ms = sample_full_rank(lambda / 2, lambda, inputs);
            f.px = BitMatrix::random(lambda / 2 + 1, lambda, inputs);
            f.r = BitVector::random(lambda, inputs);
            std::optional<StateVector> out[2];
            for (int b = 0; b < 2; b++) {
                FheContext ctx;
                Roles roles(seed);
                MintRun run = mint_direct(ctx, lambda, 1, f, b ? Backend::Gadget : Backend::Semantic,
                                          kDefaultGadgetWidth, roles.bank, roles.rec, roles.cloud, true);
                out[b] = std::move(run.logical_before_index);
            }
            equal += states_equal(*out[0], *out[1]);
            total++;
        }
    }
    return {equal == total, fmt("%.0f/%.0f seeds equal (lambda 4, 6; k=3)", equal, total)};
}

// 5 ---------------------------------------------------------------------------
Outcome verification_completeness() {
    int accepted = 0, total = 0;
    double worst = 1;
    for (size_t lambda : {4, 8}) {
        FheContext ctx;
        uint64_t seed = 0;
        Roles roles(0);
        for (int i = 0; i < 1000; i++) {
            MintRun run = honest_mint(ctx, lambda, seed, roles);
            StateVector before = omniscient_decode(run.token, run.keys, run.bank.secrets, false);
            accepted += verify_token(ctx, run.pk, run.token, run.keys, roles.rec, roles.cloud).accepted();
            worst = std::min(worst, overlap(omniscient_decode(run.token, run.keys, run.bank.secrets, false), before));
            total++;
        }
    }
    return {accepted == total && worst >= 1 - kTol,
            fmt("%.0f/%.0f accepted, min post-state overlap %.12f", accepted, total, worst)};
}

// 6 ---------------------------------------------------------------------------
Outcome forgery_rejection() {
    const size_t lambda = 8;
    const int n = 2000;
    FheContext ctx;
    uint64_t seed = 0;
    Roles roles(0);
    int primal = 0, both = 0;
    for (int i = 0; i < n; i++) {
        MintRun run = honest_mint(ctx, lambda, seed, roles);
        BitVector fake = BitVector::random(lambda, roles.cloud);
        run.token.state = StateVector::basis_state(fake.concat(BitVector(1)));
        VerifyReport r = verify_token(ctx, run.pk, run.token, run.keys, roles.rec, roles.cloud);
        primal += r.primal;
        both += r.accepted();
    }
    double p = std::pow(2.0, -double(lambda / 2));
    double rate = primal / double(n), combined = both / double(n);
    bool ok = std::abs(rate - p) <= band(p, n) && combined < rate;
    return {ok, fmt("primal %.4f (expect %.4f +- %.4f), combined %.4f", rate, p, band(p, n), combined)};
}

// 7 ---------------------------------------------------------------------------
Outcome signing() {
    const int n = 2000;
    std::string detail;
    bool ok = true;
    for (size_t lambda : {4, 8}) {
        FheContext ctx;
        uint64_t seed = 0;
        Roles roles(0);
        int member = 0, first = 0, rejected = 0;
        size_t attempts = 0;
        for (int i = 0; i < n; i++) {
            MintRun run = honest_mint(ctx, lambda, seed, roles);
            bool b = roles.rec.next_bit();
            SignReport s = sign_token(ctx, run.pk, run.token, run.keys, b, roles.rec, roles.cloud);
            const BankTokenSecrets &sec = run.bank.secrets;
            member += coset_contains(Coset(sec.s0, b ? sec.x ^ sec.w : sec.x), s.sigma);
            first += s.attempts == 1;
            attempts += s.attempts;
            BitVector other = sign_token(ctx, run.pk, run.token, run.keys, !b, roles.rec, roles.cloud).sigma;
            rejected += !check_signature(run.pk, !b, other);
        }
        double first_rate = first / double(n), mean = attempts / double(n);
        ok = ok && member == n && std::abs(first_rate - 0.5) <= 0.05 && mean <= 2.2 && rejected == n;
        detail += fmt("lambda %.0f: member %.0f, first %.3f, mean %.3f; ", lambda, member, first_rate, mean);
        detail += fmt("opposite rejected %.0f; ", rejected);
    }
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

// 8 ---------------------------------------------------------------------------
Outcome abort_rate() {
    const int n = 2000;
    std::string detail;
    bool ok = true;
    for (size_t lambda : {4, 6, 8}) {
        FheContext ctx;
        int aborts = 0;
        for (int i = 0; i < n; i++) {
            Roles roles(7000 + i);
            aborts += mint_direct(ctx, lambda, i, {}, Backend::Semantic, kDefaultGadgetWidth, roles.bank, roles.rec,
                                  roles.cloud)
                          .bank.aborted;
        }
        double p = std::pow(2.0, -double(lambda / 2)), rate = aborts / double(n);
        ok = ok && std::abs(rate - p) <= band(p, n);
        detail += fmt("lambda %.0f: %.4f (expect %.4f +- %.4f); ", lambda, rate, p, band(p, n));
    }
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

// 9 ---------------------------------------------------------------------------
Outcome r_secrecy() {
    BitMatrix rows = affine_rows(BitMatrix::from_strings({"0001", "0010"}));
    std::map<std::string, int> reference;
    bool ok = true;
    for (uint64_t r = 0; r < 16; r++) {
        std::map<std::string, int> dist;
        for (uint64_t p = 0; p < 4096; p++) {
            BitVector bits(12);
            for (size_t i = 0; i < 12; i++) {
                bits.set(i, (p >> i) & 1);
            }
            dist[xor_shift_rows(rows ^ unflatten(bits, 3, 4), BitVector::from_index(r, 4)).str()]++;
        }
        bool uniform = dist.size() == 4096;
        for (const auto &[m, c] : dist) {
            uniform = uniform && c == 1;
        }
        if (r == 0) {
            reference = dist;
        }
        ok = ok && uniform && dist == reference;
    }
    return {ok, "16 shifts x 4096 pads, each 3x4 matrix exactly once"};
}

// 10 --------------------------------------------------------------------------
struct Scene {
    World world;
    Bank bank;
    Receiver a, b;
    Cloud cloud_a, cloud_b;
    explicit Scene(SeedTuple s)
        : world(s),
          bank(world.make_bank("central")),
          a(world.make_receiver("A")),
          b(world.make_receiver("B")),
          cloud_a(world.make_cloud("A", Backend::Semantic, kDefaultGadgetWidth)),
          cloud_b(world.make_cloud("B", Backend::Semantic, kDefaultGadgetWidth)) {
    }
    void fund(Receiver &rec, Cloud &cloud, size_t lambda, uint64_t value) {
        auto tokens = mint_tokens(world, bank, rec, cloud, lambda, lambda);
        std::vector<std::string> pks;
        for (uint64_t t : tokens) {
            pks.push_back(rec.pks.at(t));
        }
        rec.wallet = Wallet{bank_issue_certificate(world, bank, pks, value), tokens, cloud.addr.id, false};
    }
};

Outcome transfer_and_redeem() {
    const int n = 200;
    std::string detail;
    bool ok = true;
    for (size_t lambda : {4, 8}) {
        int honest = 0, forged_rejected = 0, reuse_rejected = 0;
        for (int i = 0; i < n; i++) {
            SeedTuple seeds{10000u + i, 20000u + i, 30000u + i};
            {
                Scene sc(seeds);
                sc.fund(sc.a, sc.cloud_a, lambda, 100);
                sc.fund(sc.b, sc.cloud_b, lambda, 0);
                bool t = run_transfer(sc.world, sc.a, sc.cloud_a, sc.b).accepted;
                RedeemResult r = redeem(sc.world, sc.b, sc.cloud_b, sc.bank);
                honest += t && r.accepted && r.payout == 100;
                reuse_rejected += !redeem(sc.world, sc.b, sc.cloud_b, sc.bank).accepted;
            }
            {
                Scene sc(seeds);
                sc.fund(sc.a, sc.cloud_a, lambda, 100);
                sc.fund(sc.b, sc.cloud_b, lambda, 0);
                TransferResult t = run_transfer(sc.world, sc.a, sc.cloud_a, sc.b, TransferOptions{i % lambda});
                forged_rejected += !t.accepted;
            }
        }
        ok = ok && honest == n && forged_rejected == n && reuse_rejected == n;
        detail += fmt("lambda %.0f: honest %.0f/%.0f, forged rejected %.0f, ", lambda, honest, n, forged_rejected);
        detail += fmt("reuse rejected %.0f; ", reuse_rejected);
    }
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

// 11 --------------------------------------------------------------------------
Outcome resource_estimate() {
    bool ok = true;
    for (size_t lambda = 2; lambda <= 512; lambda += 2) {
        ResourceEstimate e = estimate_resources(lambda);
        ok = ok && 2 * e.expansion == 5 * lambda && e.gadget == lambda && 2 * e.total == 7 * lambda;
    }
    ResourceEstimate e = estimate_resources(256);
    ok = ok && e.total == 896 && e.text().find("~900") != std::string::npos &&
         e.to_json().value("quoted", "") == "~900";
    return {ok, fmt("lambda 256 -> %.0f + %.0f = %.0f (~900)", e.expansion, e.gadget, e.total)};
}

// 12 --------------------------------------------------------------------------
Outcome determinism() {
    bool ok = true;
    size_t bytes = 0;
    for (size_t lambda : {4, 8}) {
        RunConfig cfg;
        cfg.lambda = lambda;
        cfg.seeds = {1, 2, 3};
        std::string first = run_roundtrip(cfg).transcript, second = run_roundtrip(cfg).transcript;
        ok = ok && !first.empty() && first == second;
        bytes += first.size();
    }
    return {ok, fmt("two runs per lambda 4 (gadget), 8 (semantic), %.0f transcript bytes", bytes)};
}

}  // namespace

int main() {
    struct Criterion {
        const char *name;
        double limit_s;  // 0 when no time bound applies
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"demo reproduction", 1, demo_reproduction},
        {"toffoli pad-update identity", 1, toffoli_identity},
        {"encrypted CNOT gadget", 10, encrypted_cnot_gadget},
        {"backend equivalence", 60, backend_equivalence},
        {"verification completeness", 0, verification_completeness},
        {"forgery rejection", 0, forgery_rejection},
        {"signing", 0, signing},
        {"bank abort rate", 0, abort_rate},
        {"R-secrecy", 0, r_secrecy},
        {"transfer and redeem", 0, transfer_and_redeem},
        {"resource estimate", 0, resource_estimate},
        {"determinism", 0, determinism},
    };
    int failed = 0, index = 0;
    for (const auto &c : criteria) {
        index++;
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool in_time = c.limit_s == 0 || secs < c.limit_s;
        bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("[%2d] %s  %-28s %7.2fs  %s%s\n", index, pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str(),
                    in_time ? "" : " (over time limit)");
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", index - failed, index);
    return failed == 0 ? 0 : 1;
}
