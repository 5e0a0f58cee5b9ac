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

#ifndef TQH_CONFIG_H_
#define TQH_CONFIG_H_

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "json.hpp"
#include "tqh/evaluator.h"
#include "tqh/report.h"

namespace tqh {

// One source of settings. Unset fields defer to the next layer.
struct ConfigLayer {
  std::optional<std::string> suite;
  std::optional<std::string> outputs;
  std::optional<std::string> annotations;
  std::optional<std::string> missing;
  std::optional<double> alpha;
  std::optional<std::string> format;
  std::optional<std::string> scope;
  std::optional<unsigned> workers;
};

struct Config {
  std::optional<std::filesystem::path> suite;
  std::optional<std::filesystem::path> outputs;
  std::optional<std::filesystem::path> annotations;
  MissingPolicy missing = MissingPolicy::kStrict;
  double alpha = 0.95;
  Format format = Format::kPlain;
  Scope scope = Scope::kCategory;
  unsigned workers = 1;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Reads TQH_SUITE, TQH_OUTPUTS, TQH_ANNOTATIONS, TQH_MISSING, TQH_ALPHA,
// TQH_FORMAT, TQH_SCOPE and TQH_WORKERS.
ConfigLayer LayerFromEnv(const EnvLookup& env);

// Same keys in lower case without the prefix.
ConfigLayer LayerFromJson(const nlohmann::json& doc);
ConfigLayer LayerFromFile(const std::filesystem::path& path);

// Flags override the environment, which overrides the file.
Config ResolveConfig(const ConfigLayer& flags, const ConfigLayer& env,
                     const ConfigLayer& file);

EnvLookup ProcessEnv();

}  // namespace tqh

#endif  // TQH_CONFIG_H_
