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

#ifndef CSQM_ERRORS_H
#define CSQM_ERRORS_H

#include <stdexcept>
#include <string>

namespace csqm {

enum class ErrorCode {
    InvalidArgument,
    Capacity,
    AccessDenied,
    Integrity,
    LevelExhausted,
    Unsupported,
    Liveness,
    Ordering,
    Protocol,
    Internal,
};

const char *error_code_name(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// C API can map it onto a stable status value.
class Error : public std::runtime_error {
   public:
    Error(ErrorCode code, const std::string &message);
    ErrorCode code() const noexcept {
        return code_;
    }

   private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string &message);

inline void require(bool condition, ErrorCode code, const char *message) {
    if (!condition) {
        fail(code, message);
    }
}

}  // namespace csqm

#endif
