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

#ifndef TQH_CLI_H_
#define TQH_CLI_H_

#include <ostream>
#include <string>
#include <vector>

#include "tqh/config.h"

namespace tqh {

// Runs one `tqh` invocation. `args` excludes the program name. Returns the
// process exit code: 0 success, 1 usage, 2 data, 3 I/O.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
           const EnvLookup& env = ProcessEnv());

}  // namespace tqh

#endif  // TQH_CLI_H_
