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


// Command-line front end. Talks to the simulator only through the C API.

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "csqm/csqm.h"
#include "json.hpp"

#ifndef CSQM_DEFAULT_GOLDEN
#define CSQM_DEFAULT_GOLDEN "data/demo_golden.txt"
#endif

namespace {

enum Exit { kOk = 0, kMismatch = 1, kUsage = 2, kInternal = 3 };

struct Seeds {
    uint64_t bank = 1, rec = 2, cloud = 3;
};

// CSQM_SEED holds "n" or "bank,rec,cloud".
bool seeds_from_env(Seeds &s) {
    const char *env = std::getenv("CSQM_SEED");
    if (env == nullptr || *env == '\0') {
        return true;
    }
    unsigned long long a = 0, b = 0, c = 0;
    char tail = 0;
    if (std::sscanf(env, "%llu,%llu,%llu%c", &a, &b, &c, &tail) == 3) {
        s = {a, b, c};
        return true;
    }
    if (std::sscanf(env, "%llu%c", &a, &tail) == 1) {
        s = {a, a + 1, a + 2};
        return true;
    }
    return false;
}

int fail_status(csqm_status st) {
    std::fprintf(stderr, "error: %s\n", csqm_last_error());
    return st == CSQM_E_INVALID_ARGUMENT ? kUsage : kInternal;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Cloud-based semi-quantum money simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    uint32_t lambda = 4;
    std::optional<uint64_t> seed_bank, seed_rec, seed_cloud;
    std::string backend;
    uint32_t k = 3;
    std::string transcript, ledger;
    bool json = false;
    app.add_option("--lambda", lambda, "security parameter (even)");
    app.add_option("--seed-bank", seed_bank, "bank RNG seed");
    app.add_option("--seed-rec", seed_rec, "receiver RNG seed");
    app.add_option("--seed-cloud", seed_cloud, "cloud RNG seed");
    app.add_option("--backend", backend, "gadget or semantic (default: gadget for lambda <= 6)")
        ->check(CLI::IsMember({"gadget", "semantic"}));
    app.add_option("--k", k, "gadget randomness width")->check(CLI::Range(1, 4));
    app.add_option("--transcript", transcript, "write the session transcript here");
    app.add_option("--ledger", ledger, "append-only ledger file");
    app.add_flag("--json", json, "print the machine-readable report");

    nlohmann::json options = nlohmann::json::object();
    std::string golden = CSQM_DEFAULT_GOLDEN;
    int bit = 0;
    std::optional<uint32_t> forge;
    bool twice = false;
    uint64_t value = 100;

    auto *demo = app.add_subcommand("demo", "replay the 4-qubit example and compare with the golden file");
    demo->add_option("--golden", golden, "golden text file");
    app.add_subcommand("mint", "mint one token");
    app.add_subcommand("verify", "mint one token and run both oracle tests");
    auto *sign = app.add_subcommand("sign", "mint, verify and sign one token");
    sign->add_option("--bit", bit, "bit to sign")->check(CLI::Range(0, 1));
    auto *transfer = app.add_subcommand("transfer", "transfer a certified token sequence from A to B");
    transfer->add_option("--forge", forge, "sign this index with the wrong bit");
    auto *redeem = app.add_subcommand("redeem", "redeem a certified token sequence at the bank");
    redeem->add_flag("--twice", twice, "try to redeem the same certificate again");
    redeem->add_option("--forge", forge, "sign this index with the wrong bit");
    auto *roundtrip = app.add_subcommand("roundtrip", "mint, certify, verify, transfer and redeem");
    roundtrip->add_option("--forge", forge, "A signs this index with the wrong bit");
    roundtrip->add_option("--value", value, "certificate value");
    app.add_subcommand("estimate", "qubit estimate for the given lambda");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kUsage;
    }

    Seeds seeds;
    if (!seeds_from_env(seeds)) {
        std::fprintf(stderr, "error: CSQM_SEED must be 'n' or 'bank,rec,cloud'\n");
        return kUsage;
    }
    seeds.bank = seed_bank.value_or(seeds.bank);
    seeds.rec = seed_rec.value_or(seeds.rec);
    seeds.cloud = seed_cloud.value_or(seeds.cloud);

    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "demo") {
        options["golden"] = golden;
    } else if (command == "sign") {
        options["bit"] = bit;
    } else if (command == "transfer" || command == "redeem" || command == "roundtrip") {
        if (forge) {
            options["forge"] = *forge;
        }
        if (command == "redeem") {
            options["twice"] = twice;
        }
        if (command == "roundtrip") {
            options["value"] = value;
        }
    }

    csqm_run *run = nullptr;
    csqm_status st = csqm_run_new(lambda, seeds.bank, seeds.rec, seeds.cloud, backend.empty() ? nullptr : backend.c_str(),
                                  k, &run);
    if (st != CSQM_OK) {
        return fail_status(st);
    }
    if (!transcript.empty()) {
        csqm_run_set_transcript_path(run, transcript.c_str());
    }
    if (!ledger.empty()) {
        csqm_run_set_ledger_path(run, ledger.c_str());
    }
    int ok = 0;
    st = csqm_run_command(run, command.c_str(), options.dump().c_str(), &ok);
    if (st != CSQM_OK) {
        csqm_run_free(run);
        return fail_status(st);
    }
    if (json) {
        std::printf("%s\n", csqm_run_report_json(run));
    } else {
        std::fputs(csqm_run_text(run), stdout);
        if (!transcript.empty()) {
            std::printf("transcript %s\n", transcript.c_str());
        }
    }
    if (!ok && *csqm_run_stage(run) != '\0') {
        std::fprintf(stderr, "stage %s failed\n", csqm_run_stage(run));
    }
    csqm_run_free(run);
    return ok ? kOk : kMismatch;
}
