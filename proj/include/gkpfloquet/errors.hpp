// Copyright 2026 The gkpfloquet Authors
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

#ifndef GKPFLOQUET_ERRORS_HPP
#define GKPFLOQUET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gkp {

/// Failure categories. The numeric values are shared with the C API status
/// codes in gkpfloquet.h.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kConfig = 2,
  kNumerical = 3,
  kTruncation = 5,
  kContractViolation = 6,
  kIo = 7,
  kIntegratorFailure = 8,
  kDecoderConsistency = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

/// Installs a sink for non-fatal diagnostics (truncation warnings, weak-drive
/// violations). The default sink writes to stderr. Passing nullptr silences
/// warnings.
using WarningSink = void (*)(const char* message, void* user);
void set_warning_sink(WarningSink sink, void* user);
void warn(const std::string& message);

}  // namespace gkp

#endif  // GKPFLOQUET_ERRORS_HPP
