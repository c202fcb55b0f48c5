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


#ifndef CSQM_SCENARIO_H
#define CSQM_SCENARIO_H

#include <filesystem>
#include <optional>
#include <string>

#include "csqm/protocol.h"

namespace csqm {

struct RunConfig {
    size_t lambda = 4;
    SeedTuple seeds;
    std::optional<Backend> backend;  // default: gadget up to lambda 6, semantic above
    size_t gadget_width = kDefaultGadgetWidth;
    std::optional<std::filesystem::path> transcript_path;
    std::optional<std::filesystem::path> ledger_path;

    Backend resolved_backend() const;
    /// Throws InvalidArgument for odd or out-of-range lambda and for the
    /// gadget backend above lambda 8.
    void validate() const;
};

/// "a,b,c" or a single number n meaning (n, n+1, n+2).
SeedTuple parse_seed_tuple(const std::string &text);

struct CommandResult {
    bool ok = false;
    std::string stage;  // failing stage when !ok
    Json report;
    std::string text;
    std::string transcript;
};

/// Fixed 4-qubit example. The text block is what gets compared with the
/// golden file.
struct DemoReport {
    BitMatrix ms;
    BitMatrix px;
    BitVector r;
    BitMatrix padded;
    BitMatrix shifted;
    /// (index, data) pairs of the logical support, index printed with the
    /// first matrix row as the rightmost character.
    std::vector<std::pair<std::string, std::string>> support;
    std::string text() const;
};

DemoReport run_demo(Backend backend, size_t gadget_width, SeedTuple seeds);

struct ResourceEstimate {
    size_t lambda = 0;
    size_t expansion = 0;  // 2.5 lambda
    size_t gadget = 0;     // lambda
    size_t total = 0;
    std::string text() const;
    Json to_json() const;
};

ResourceEstimate estimate_resources(size_t lambda);

struct RoundtripOptions {
    std::optional<size_t> forge_index;
    uint64_t value = 100;
};

CommandResult run_roundtrip(const RunConfig &config, const RoundtripOptions &options = {});

/// Entry point shared by the CLI and the C API. Commands: demo, mint,
/// verify, sign, transfer, redeem, roundtrip, estimate. Options by command:
/// demo {"golden": path}, sign {"bit": 0|1}, transfer {"forge": index},
/// redeem {"twice": bool}, roundtrip {"forge": index, "value": n}.
CommandResult run_command(const RunConfig &config, const std::string &command, const Json &options);

}  // namespace csqm

#endif
