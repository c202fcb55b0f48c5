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

#include "csqm/errors.h"

namespace csqm {

const char *error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument:
            return "invalid-argument";
        case ErrorCode::Capacity:
            return "capacity";
        case ErrorCode::AccessDenied:
            return "access-denied";
        case ErrorCode::Integrity:
            return "integrity";
        case ErrorCode::LevelExhausted:
            return "level-exhausted";
        case ErrorCode::Unsupported:
            return "unsupported";
        case ErrorCode::Liveness:
            return "liveness";
        case ErrorCode::Ordering:
            return "ordering";
        case ErrorCode::Protocol:
            return "protocol";
        case ErrorCode::Internal:
            return "internal";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {
}

void fail(ErrorCode code, const std::string &message) {
    throw Error(code, message);
}

}  // namespace csqm
