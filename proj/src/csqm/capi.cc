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


#include <new>
#include <string>

#include "csqm/csqm.h"
#include "csqm/errors.h"
#include "csqm/scenario.h"

struct csqm_run {
    csqm::RunConfig config;
    csqm::CommandResult last;
    std::string report;
};

namespace {

thread_local std::string g_last_error;

csqm_status to_status(csqm::ErrorCode code) {
    using csqm::ErrorCode;
    switch (code) {
        case ErrorCode::InvalidArgument:
            return CSQM_E_INVALID_ARGUMENT;
        case ErrorCode::Capacity:
            return CSQM_E_CAPACITY;
        case ErrorCode::AccessDenied:
            return CSQM_E_ACCESS_DENIED;
        case ErrorCode::Integrity:
            return CSQM_E_INTEGRITY;
        case ErrorCode::LevelExhausted:
            return CSQM_E_LEVEL_EXHAUSTED;
        case ErrorCode::Unsupported:
            return CSQM_E_UNSUPPORTED;
        case ErrorCode::Liveness:
            return CSQM_E_LIVENESS;
        case ErrorCode::Ordering:
            return CSQM_E_ORDERING;
        case ErrorCode::Protocol:
            return CSQM_E_PROTOCOL;
        case ErrorCode::Internal:
            return CSQM_E_INTERNAL;
    }
    return CSQM_E_INTERNAL;
}

template <typename F>
csqm_status guarded(F &&body) {
    try {
        body();
        g_last_error.clear();
        return CSQM_OK;
    } catch (const csqm::Error &e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const nlohmann::json::exception &e) {
        g_last_error = std::string("bad JSON: ") + e.what();
        return CSQM_E_INVALID_ARGUMENT;
    } catch (const std::bad_alloc &) {
        g_last_error = "out of memory";
        return CSQM_E_CAPACITY;
    } catch (const std::exception &e) {
        g_last_error = e.what();
        return CSQM_E_INTERNAL;
    }
}

}  // namespace

extern "C" {

const char *csqm_version(void) {
    return "0.1.0";
}

const char *csqm_status_name(csqm_status status) {
    switch (status) {
        case CSQM_OK:
            return "ok";
        case CSQM_E_INVALID_ARGUMENT:
            return "invalid-argument";
        case CSQM_E_CAPACITY:
            return "capacity";
        case CSQM_E_ACCESS_DENIED:
            return "access-denied";
        case CSQM_E_INTEGRITY:
            return "integrity";
        case CSQM_E_LEVEL_EXHAUSTED:
            return "level-exhausted";
        case CSQM_E_UNSUPPORTED:
            return "unsupported";
        case CSQM_E_LIVENESS:
            return "liveness";
        case CSQM_E_ORDERING:
            return "ordering";
        case CSQM_E_PROTOCOL:
            return "protocol";
        case CSQM_E_INTERNAL:
            return "internal";
    }
    return "unknown";
}

const char *csqm_last_error(void) {
    return g_last_error.c_str();
}

csqm_status csqm_run_new(uint32_t lambda, uint64_t seed_bank, uint64_t seed_rec, uint64_t seed_cloud,
                         const char *backend, uint32_t gadget_width, csqm_run **out) {
    return guarded([&] {
        csqm::require(out != nullptr, csqm::ErrorCode::InvalidArgument, "out pointer is null");
        auto run = std::make_unique<csqm_run>();
        run->config.lambda = lambda;
        run->config.seeds = {seed_bank, seed_rec, seed_cloud};
        if (backend != nullptr) {
            run->config.backend = csqm::parse_backend(backend);
        }
        run->config.gadget_width = gadget_width;
        *out = run.release();
    });
}

void csqm_run_free(csqm_run *run) {
    delete run;
}

csqm_status csqm_run_set_transcript_path(csqm_run *run, const char *path) {
    return guarded([&] {
        csqm::require(run != nullptr, csqm::ErrorCode::InvalidArgument, "null handle");
        run->config.transcript_path = path ? std::optional<std::filesystem::path>(path) : std::nullopt;
    });
}

csqm_status csqm_run_set_ledger_path(csqm_run *run, const char *path) {
    return guarded([&] {
        csqm::require(run != nullptr, csqm::ErrorCode::InvalidArgument, "null handle");
        run->config.ledger_path = path ? std::optional<std::filesystem::path>(path) : std::nullopt;
    });
}

csqm_status csqm_run_command(csqm_run *run, const char *command, const char *options_json, int *ok) {
    return guarded([&] {
        csqm::require(run != nullptr && command != nullptr, csqm::ErrorCode::InvalidArgument, "null argument");
        csqm::Json options = options_json ? csqm::Json::parse(options_json) : csqm::Json::object();
        csqm::require(options.is_object(), csqm::ErrorCode::InvalidArgument, "options must be a JSON object");
        run->last = csqm::CommandResult{};
        run->report.clear();
        run->last = csqm::run_command(run->config, command, options);
        run->report = run->last.report.dump();
        if (ok != nullptr) {
            *ok = run->last.ok ? 1 : 0;
        }
    });
}

const char *csqm_run_text(const csqm_run *run) {
    return run ? run->last.text.c_str() : "";
}

const char *csqm_run_report_json(const csqm_run *run) {
    return run ? run->report.c_str() : "";
}

const char *csqm_run_stage(const csqm_run *run) {
    return run ? run->last.stage.c_str() : "";
}

const char *csqm_run_transcript(const csqm_run *run, size_t *length) {
    if (length != nullptr) {
        *length = run ? run->last.transcript.size() : 0;
    }
    return run ? run->last.transcript.c_str() : "";
}

csqm_status csqm_estimate(uint32_t lambda, uint32_t *expansion, uint32_t *gadget, uint32_t *total) {
    return guarded([&] {
        csqm::ResourceEstimate e = csqm::estimate_resources(lambda);
        if (expansion) {
            *expansion = static_cast<uint32_t>(e.expansion);
        }
        if (gadget) {
            *gadget = static_cast<uint32_t>(e.gadget);
        }
        if (total) {
            *total = static_cast<uint32_t>(e.total);
        }
    });
}

}  // extern "C"
