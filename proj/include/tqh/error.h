// Copyright 2026 The TQ Harness Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TQH_ERROR_H_
#define TQH_ERROR_H_

#include <stdexcept>
#include <string>

namespace tqh {

// Classifies failures so front ends can map them onto exit codes and HTTP
// statuses without string matching.
enum class ErrorKind {
  kUsage,  // bad flags or arguments
  kData,   // malformed or inconsistent input data
  kIo,     // filesystem or network failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

Error UsageError(const std::string& message);
Error DataError(const std::string& message);
Error IoError(const std::string& message);

// Exit code used by the command-line front end for an error kind.
int ExitCodeFor(ErrorKind kind);

}  // namespace tqh

#endif  // TQH_ERROR_H_
