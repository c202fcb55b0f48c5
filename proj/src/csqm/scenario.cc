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


#include "csqm/scenario.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "csqm/errors.h"

namespace csqm {

Backend RunConfig::resolved_backend() const {
    if (backend) {
        return *backend;
    }
    return lambda <= 6 ? Backend::Gadget : Backend::Semantic;
}

void RunConfig::validate() const {
    check_lambda(lambda);
    require(lambda <= kMaxMintLambda, ErrorCode::InvalidArgument, "lambda must be at most 14");
    require(resolved_backend() != Backend::Gadget || lambda <= kMaxGadgetLambda, ErrorCode::InvalidArgument,
            "the gadget backend needs lambda <= 8");
    require(gadget_width >= 1 && gadget_width <= kMaxGadgetWidth, ErrorCode::InvalidArgument,
            "gadget width k must be between 1 and 4");
}

SeedTuple parse_seed_tuple(const std::string &text) {
    std::vector<uint64_t> parts;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        try {
            size_t used = 0;
            parts.push_back(std::stoull(item, &used));
            require(used == item.size(), ErrorCode::InvalidArgument, "bad seed");
        } catch (const std::logic_error &) {
            fail(ErrorCode::InvalidArgument, "seed tuple must be numbers separated by commas");
        }
    }
    if (parts.size() == 1) {
        return {parts[0], parts[0] + 1, parts[0] + 2};
    }
    require(parts.size() == 3, ErrorCode::InvalidArgument, "seed tuple needs one or three numbers");
    return {parts[0], parts[1], parts[2]};
}

// Demo -----------------------------------------------------------------------

std::string DemoReport::text() const {
    std::ostringstream o;
    o << "lambda      " << ms.cols() << "\n";
    o << "M_S         " << ms.str() << "\n";
    o << "p_x         " << px.row(0).str() << " on every row\n";
    o << "R           " << r.str() << "\n";
    o << "M_S^p_x     " << padded.without_row(0).str() << "\n";
    o << "M_S+R^p_x   " << shifted.without_row(0).str() << "\n";
    o << "affine row  " << padded.row(0).str() << " -> " << shifted.row(0).str() << "\n";
    o << "support    ";
    for (const auto &[index, data] : support) {
        o << " " << index << ":" << data;
    }
    o << "\n";
    return o.str();
}

DemoReport run_demo(Backend backend, size_t gadget_width, SeedTuple seeds) {
    MintFixtures f;
    f.ms = BitMatrix::from_strings({"0001", "0010"});
    f.px = BitMatrix::replicate_row(BitVector::from_string("1000"), 3);
    f.r = BitVector::from_string("1001");
    FheContext ctx;
    Rng bank = Rng::stream(seeds.bank, "bank"), rec = Rng::stream(seeds.rec, "rec"),
        cloud = Rng::stream(seeds.cloud, "cloud");
    MintRun run = mint_direct(ctx, 4, 1, f, backend, gadget_width, bank, rec, cloud, true);

    DemoReport d;
    d.ms = *f.ms;
    d.px = *f.px;
    d.r = *f.r;
    d.padded = run.padded;
    d.shifted = run.shifted;
    const StateVector &s = *run.logical_before_index;
    for (uint64_t i = 0; i < s.amplitudes().size(); i++) {
        if (std::abs(s.amplitude(i)) > 1e-9) {
            std::string data, index;
            for (size_t q = 0; q < 4; q++) {
                data += ((i >> q) & 1) ? '1' : '0';
            }
            for (size_t q = 0; q < 2; q++) {
                index.insert(index.begin(), ((i >> (4 + q)) & 1) ? '1' : '0');
            }
            d.support.emplace_back(index, data);
        }
    }
    std::sort(d.support.begin(), d.support.end());
    return d;
}

// Estimate -------------------------------------------------------------------

ResourceEstimate estimate_resources(size_t lambda) {
    require(lambda >= 2 && lambda % 2 == 0, ErrorCode::InvalidArgument, "lambda must be a positive even number");
    ResourceEstimate e;
    e.lambda = lambda;
    e.expansion = lambda * 5 / 2;
    e.gadget = lambda;
    e.total = e.expansion + e.gadget;
    return e;
}

std::string ResourceEstimate::text() const {
    std::ostringstream o;
    o << "lambda                 " << lambda << "\n";
    o << "expansion qubits       " << expansion << "  (2.5 lambda)\n";
    o << "toffoli gadget qubits  " << gadget << "  (lambda)\n";
    o << "total                  " << total << "  (3.5 lambda)";
    if (lambda == 256) {
        o << "  ~900 as quoted for lambda 256";
    }
    o << "\n";
    return o.str();
}

Json ResourceEstimate::to_json() const {
    Json j = {{"lambda", lambda}, {"expansion", expansion}, {"gadget", gadget}, {"total", total}};
    if (lambda == 256) {
        j["quoted"] = "~900";
    }
    return j;
}

// Sessions -------------------------------------------------------------------

namespace {

struct Scene {
    const RunConfig &cfg;
    World world;
    Bank bank;
    Receiver a, b;
    Cloud cloud_a, cloud_b;

    explicit Scene(const RunConfig &c)
        : cfg(c),
          world(c.seeds, c.ledger_path),
          bank(world.make_bank("central")),
          a(world.make_receiver("A")),
          b(world.make_receiver("B")),
          cloud_a(world.make_cloud("A", c.resolved_backend(), c.gadget_width)),
          cloud_b(world.make_cloud("B", c.resolved_backend(), c.gadget_width)) {
    }

    void fund(Receiver &rec, Cloud &cloud, uint64_t value) {
        std::vector<uint64_t> tokens = mint_tokens(world, bank, rec, cloud, cfg.lambda, cfg.lambda);
        std::vector<std::string> pks;
        for (uint64_t t : tokens) {
            pks.push_back(rec.pks.at(t));
        }
        TokenCertificate cert = bank_issue_certificate(world, bank, pks, value);
        uint64_t session = world.channel.open_session();
        Json got = world.channel.deliver(session, bank.addr, rec.addr, "cert.issue", {{"cert", cert.to_json()}});
        rec.wallet = Wallet{TokenCertificate::from_json(got.at("cert")), tokens, cloud.addr.id, false};
    }

    CommandResult finish(CommandResult r) {
        r.transcript = world.transcript.bytes();
        if (cfg.transcript_path) {
            world.transcript.write(*cfg.transcript_path);
            r.report["transcript"] = cfg.transcript_path->string();
        }
        r.report["ok"] = r.ok;
        if (!r.ok) {
            r.report["stage"] = r.stage;
        }
        return r;
    }
};

Json config_json(const RunConfig &c) {
    return {{"lambda", c.lambda},
            {"backend", backend_name(c.resolved_backend())},
            {"k", c.gadget_width},
            {"seeds", {c.seeds.bank, c.seeds.rec, c.seeds.cloud}}};
}

CommandResult fail_stage(CommandResult r, const std::string &stage, const std::string &why) {
    r.ok = false;
    r.stage = stage;
    r.text += "FAILED at " + stage + ": " + why + "\n";
    return r;
}

std::string sigma_text(const std::vector<BitVector> &sigmas) {
    std::string out;
    for (const auto &s : sigmas) {
        out += (out.empty() ? "" : " ") + s.str();
    }
    return out;
}

CommandResult cmd_mint(const RunConfig &cfg) {
    Scene sc(cfg);
    CommandResult r;
    MintSessionResult m = run_mint_session(sc.world, sc.bank, sc.a, sc.cloud_a, cfg.lambda);
    r.report = config_json(cfg);
    r.report["token"] = m.token_id;
    r.report["aborted"] = m.aborted;
    if (m.aborted) {
        r.text = "bank aborted the mint (x fell inside S)\n";
        return sc.finish(fail_stage(r, "mint", "bank abort"));
    }
    r.report["pk"] = m.pk;
    r.text = "minted token " + std::to_string(m.token_id) + "\npk " + m.pk + "\n";
    r.ok = true;
    return sc.finish(r);
}

CommandResult cmd_verify(const RunConfig &cfg) {
    Scene sc(cfg);
    CommandResult r;
    r.report = config_json(cfg);
    uint64_t t = mint_tokens(sc.world, sc.bank, sc.a, sc.cloud_a, cfg.lambda, 1).front();
    VerifyReport v = run_verify_session(sc.world, sc.a, sc.cloud_a, t);
    r.report["token"] = t;
    r.report["primal"] = v.primal;
    r.report["dual"] = v.dual;
    r.text = "token " + std::to_string(t) + " primal " + (v.primal ? "pass" : "fail") + " dual " +
             (v.dual ? "pass" : "fail") + "\n";
    if (!v.accepted()) {
        return sc.finish(fail_stage(r, "verify", "oracle test failed"));
    }
    r.ok = true;
    return sc.finish(r);
}

CommandResult cmd_sign(const RunConfig &cfg, bool bit) {
    Scene sc(cfg);
    CommandResult r;
    r.report = config_json(cfg);
    uint64_t t = mint_tokens(sc.world, sc.bank, sc.a, sc.cloud_a, cfg.lambda, 1).front();
    if (!run_verify_session(sc.world, sc.a, sc.cloud_a, t).accepted()) {
        return sc.finish(fail_stage(r, "verify", "token rejected before signing"));
    }
    SignReport s = run_sign_session(sc.world, sc.a, sc.cloud_a, t, bit);
    bool valid = check_signature(sc.world.oracles.resolve(sc.a.pks.at(t)), bit, s.sigma);
    r.report["token"] = t;
    r.report["bit"] = bit ? 1 : 0;
    r.report["sigma"] = s.sigma.str();
    r.report["attempts"] = s.attempts;
    r.report["valid"] = valid;
    r.text = "sigma_" + std::to_string(bit) + " " + s.sigma.str() + " after " + std::to_string(s.attempts) +
             " attempt(s), " + (valid ? "valid" : "INVALID") + "\n";
    if (!valid) {
        return sc.finish(fail_stage(r, "sign", "signature fails the public oracle"));
    }
    r.ok = true;
    return sc.finish(r);
}

CommandResult cmd_transfer(const RunConfig &cfg, const TransferOptions &opt) {
    Scene sc(cfg);
    CommandResult r;
    r.report = config_json(cfg);
    sc.fund(sc.a, sc.cloud_a, 100);
    sc.fund(sc.b, sc.cloud_b, 0);
    TransferResult t = run_transfer(sc.world, sc.a, sc.cloud_a, sc.b, opt);
    r.report["accepted"] = t.accepted;
    r.report["sigmas"] = sigma_text(t.sigmas);
    r.report["balance_b"] = sc.world.ledger.balance(sc.b.wallet->cert.serial);
    r.text = "serial s_B " + sc.b.wallet->cert.serial.str() + "\nsignatures " + sigma_text(t.sigmas) + "\n";
    if (!t.accepted) {
        r.report["first_failure"] = t.first_failure ? Json(*t.first_failure) : Json();
        return sc.finish(fail_stage(r, "transfer",
                                    t.first_failure ? "signature " + std::to_string(*t.first_failure) + " rejected"
                                                    : "rejected"));
    }
    r.text += "accepted, B credited " + std::to_string(sc.world.ledger.balance(sc.b.wallet->cert.serial)) + "\n";
    r.ok = true;
    return sc.finish(r);
}

CommandResult cmd_redeem(const RunConfig &cfg, bool twice, const TransferOptions &opt) {
    Scene sc(cfg);
    CommandResult r;
    r.report = config_json(cfg);
    sc.fund(sc.a, sc.cloud_a, 100);
    RedeemResult first = redeem(sc.world, sc.a, sc.cloud_a, sc.bank, opt);
    r.report["accepted"] = first.accepted;
    r.report["payout"] = first.payout;
    r.text = first.accepted ? "redeemed, payout " + std::to_string(first.payout) + "\n" : "";
    if (!first.accepted) {
        return sc.finish(fail_stage(r, "redeem", first.reason));
    }
    if (twice) {
        RedeemResult second = redeem(sc.world, sc.a, sc.cloud_a, sc.bank);
        r.report["second_accepted"] = second.accepted;
        if (second.accepted) {
            return sc.finish(fail_stage(r, "redeem", "second redeem of the same certificate was accepted"));
        }
        r.text += "second redeem rejected: " + second.reason + "\n";
    }
    r.ok = true;
    return sc.finish(r);
}

}  // namespace

CommandResult run_roundtrip(const RunConfig &cfg, const RoundtripOptions &opt) {
    cfg.validate();
    Scene sc(cfg);
    CommandResult r;
    r.report = config_json(cfg);
    World &w = sc.world;

    sc.fund(sc.a, sc.cloud_a, opt.value);
    r.text += "minted and certified " + std::to_string(cfg.lambda) + " tokens for A, serial " +
              sc.a.wallet->cert.serial.str() + "\n";
    if (!verify_certificate(w, sc.a.wallet->cert)) {
        return sc.finish(fail_stage(r, "certify", "bank signature does not verify"));
    }
    for (uint64_t t : sc.a.wallet->tokens) {
        if (!run_verify_session(w, sc.a, sc.cloud_a, t).accepted()) {
            return sc.finish(fail_stage(r, "verify", "token " + std::to_string(t) + " rejected"));
        }
    }
    r.text += "verified all tokens\n";

    sc.fund(sc.b, sc.cloud_b, 0);
    TransferOptions topt;
    topt.forge_index = opt.forge_index;
    TransferResult tr = run_transfer(w, sc.a, sc.cloud_a, sc.b, topt);
    r.report["sigmas"] = sigma_text(tr.sigmas);
    if (!tr.accepted) {
        return sc.finish(fail_stage(r, "transfer",
                                    tr.first_failure ? "signature " + std::to_string(*tr.first_failure) + " rejected"
                                                     : "rejected"));
    }
    r.text += "transfer A->B accepted with s_B " + sc.b.wallet->cert.serial.str() + "\n";

    RedeemResult rd = redeem(w, sc.b, sc.cloud_b, sc.bank);
    if (!rd.accepted) {
        return sc.finish(fail_stage(r, "redeem", rd.reason));
    }
    r.report["payout"] = rd.payout;
    r.text += "B redeemed at the bank, payout " + std::to_string(rd.payout) + "\n";

    bool conserved = w.ledger.total_issued() == w.ledger.outstanding() + w.ledger.total_redeemed() &&
                     rd.payout == opt.value;
    r.report["issued"] = w.ledger.total_issued();
    r.report["redeemed"] = w.ledger.total_redeemed();
    r.report["outstanding"] = w.ledger.outstanding();
    if (!conserved) {
        return sc.finish(fail_stage(r, "conservation", "ledger totals do not balance"));
    }
    r.ok = true;
    return sc.finish(r);
}

CommandResult run_command(const RunConfig &cfg, const std::string &command, const Json &options) {
    auto opt_index = [&](const char *key) -> std::optional<size_t> {
        if (options.contains(key) && !options.at(key).is_null()) {
            size_t i = options.at(key).get<size_t>();
            require(i < cfg.lambda, ErrorCode::InvalidArgument, "forge index must be below lambda");
            return i;
        }
        return std::nullopt;
    };
    if (command == "estimate") {
        ResourceEstimate e = estimate_resources(cfg.lambda);
        return {true, "", e.to_json(), e.text(), ""};
    }
    cfg.validate();
    if (command == "demo") {
        require(cfg.lambda == 4, ErrorCode::InvalidArgument, "the demo runs at lambda 4 only");
        DemoReport d = run_demo(cfg.resolved_backend(), cfg.gadget_width, cfg.seeds);
        CommandResult r;
        r.text = d.text();
        r.ok = true;
        r.report = {{"text", r.text}, {"backend", backend_name(cfg.resolved_backend())}};
        if (options.contains("golden")) {
            std::ifstream f(options.at("golden").get<std::string>(), std::ios::binary);
            require(f.good(), ErrorCode::InvalidArgument, "cannot read the golden file");
            std::string golden((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
            r.ok = golden == r.text;
            r.report["golden_match"] = r.ok;
            if (!r.ok) {
                r.stage = "golden";
                std::istringstream want(golden), got(r.text);
                std::string wl, gl;
                r.text += "golden mismatch:\n";
                while (true) {
                    bool has_w = static_cast<bool>(std::getline(want, wl));
                    bool has_g = static_cast<bool>(std::getline(got, gl));
                    if (!has_w && !has_g) {
                        break;
                    }
                    if (!has_w || !has_g || wl != gl) {
                        r.text += "- " + (has_w ? wl : std::string()) + "\n+ " + (has_g ? gl : std::string()) + "\n";
                    }
                }
            }
        }
        r.report["ok"] = r.ok;
        return r;
    }
    if (command == "mint") {
        return cmd_mint(cfg);
    }
    if (command == "verify") {
        return cmd_verify(cfg);
    }
    if (command == "sign") {
        return cmd_sign(cfg, options.value("bit", 0) != 0);
    }
    if (command == "transfer") {
        return cmd_transfer(cfg, TransferOptions{opt_index("forge")});
    }
    if (command == "redeem") {
        return cmd_redeem(cfg, options.value("twice", false), TransferOptions{opt_index("forge")});
    }
    if (command == "roundtrip") {
        RoundtripOptions ro;
        ro.forge_index = opt_index("forge");
        ro.value = options.value("value", uint64_t{100});
        return run_roundtrip(cfg, ro);
    }
    fail(ErrorCode::InvalidArgument, "unknown command '" + command + "'");
}

}  // namespace csqm
