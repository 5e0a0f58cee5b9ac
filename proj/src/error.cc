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

#include "tqh/error.h"

namespace tqh {

Error UsageError(const std::string& message) {
  return Error(ErrorKind::kUsage, message);
}

Error DataError(const std::string& message) {
  return Error(ErrorKind::kData, message);
}

Error IoError(const std::string& message) {
  return Error(ErrorKind::kIo, message);
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return 1;
    case ErrorKind::kData:
      return 2;
    case ErrorKind::kIo:
      return 3;
  }
  return 2;
}

}  // namespace tqh
