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


/* C interface to the simulator. Every call returns a csqm_status; on failure
 * csqm_last_error() describes the problem for the calling thread. Strings
 * returned by accessors stay valid until the next call on the same handle. */

#ifndef CSQM_CSQM_H
#define CSQM_CSQM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CSQM_API __declspec(dllexport)
#else
#define CSQM_API __attribute__((visibility("default")))
#endif

typedef enum csqm_status {
    CSQM_OK = 0,
    CSQM_E_INVALID_ARGUMENT = 1,
    CSQM_E_CAPACITY = 2,
    CSQM_E_ACCESS_DENIED = 3,
    CSQM_E_INTEGRITY = 4,
    CSQM_E_LEVEL_EXHAUSTED = 5,
    CSQM_E_UNSUPPORTED = 6,
    CSQM_E_LIVENESS = 7,
    CSQM_E_ORDERING = 8,
    CSQM_E_PROTOCOL = 9,
    CSQM_E_INTERNAL = 10
} csqm_status;

typedef struct csqm_run csqm_run;

CSQM_API const char *csqm_version(void);
CSQM_API const char *csqm_status_name(csqm_status status);
CSQM_API const char *csqm_last_error(void);

/* backend: "gadget", "semantic" or NULL for the default by lambda. */
CSQM_API csqm_status csqm_run_new(uint32_t lambda, uint64_t seed_bank, uint64_t seed_rec, uint64_t seed_cloud,
                                  const char *backend, uint32_t gadget_width, csqm_run **out);
CSQM_API void csqm_run_free(csqm_run *run);

/* NULL clears the path. */
CSQM_API csqm_status csqm_run_set_transcript_path(csqm_run *run, const char *path);
CSQM_API csqm_status csqm_run_set_ledger_path(csqm_run *run, const char *path);

/* Runs one command (demo, mint, verify, sign, transfer, redeem, roundtrip,
 * estimate). options_json may be NULL. *ok receives 1 when every stage
 * passed and 0 on a verification or golden mismatch. */
CSQM_API csqm_status csqm_run_command(csqm_run *run, const char *command, const char *options_json, int *ok);

/* Results of the last command. */
CSQM_API const char *csqm_run_text(const csqm_run *run);
CSQM_API const char *csqm_run_report_json(const csqm_run *run);
CSQM_API const char *csqm_run_stage(const csqm_run *run);
CSQM_API const char *csqm_run_transcript(const csqm_run *run, size_t *length);

/* Qubit estimate for a given lambda: 2.5 lambda + lambda. */
CSQM_API csqm_status csqm_estimate(uint32_t lambda, uint32_t *expansion, uint32_t *gadget, uint32_t *total);

#ifdef __cplusplus
}
#endif

#endif
