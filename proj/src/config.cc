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

#include "tqh/config.h"

#include <cstdlib>

#include "tqh/error.h"
#include "tqh/run_io.h"

namespace tqh {
namespace {

template <typename T>
std::optional<T> First(const std::optional<T>& a, const std::optional<T>& b,
                       const std::optional<T>& c) {
  if (a) return a;
  if (b) return b;
  return c;
}

double ParseAlpha(const std::string& text) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used == text.size()) return value;
  } catch (const std::exception&) {
  }
  throw UsageError("alpha must be a number, got '" + text + "'");
}

unsigned ParseWorkers(const std::string& text) {
  try {
    std::size_t used = 0;
    const unsigned long value = std::stoul(text, &used);
    if (used == text.size() && value > 0 && value <= 1024) {
      return static_cast<unsigned>(value);
    }
  } catch (const std::exception&) {
  }
  throw UsageError("workers must be a positive integer, got '" + text + "'");
}

}  // namespace

ConfigLayer LayerFromEnv(const EnvLookup& env) {
  ConfigLayer layer;
  layer.suite = env("TQH_SUITE");
  layer.outputs = env("TQH_OUTPUTS");
  layer.annotations = env("TQH_ANNOTATIONS");
  layer.missing = env("TQH_MISSING");
  layer.format = env("TQH_FORMAT");
  layer.scope = env("TQH_SCOPE");
  if (auto alpha = env("TQH_ALPHA")) layer.alpha = ParseAlpha(*alpha);
  if (auto workers = env("TQH_WORKERS")) layer.workers = ParseWorkers(*workers);
  return layer;
}

ConfigLayer LayerFromJson(const nlohmann::json& doc) {
  if (!doc.is_object()) throw DataError("config file must hold a JSON object");
  ConfigLayer layer;
  auto text = [&](const char* key) -> std::optional<std::string> {
    auto it = doc.find(key);
    if (it == doc.end()) return std::nullopt;
    if (!it->is_string()) throw DataError(std::string("config key '") + key + "' must be a string");
    return it->get<std::string>();
  };
  layer.suite = text("suite");
  layer.outputs = text("outputs");
  layer.annotations = text("annotations");
  layer.missing = text("missing");
  layer.format = text("format");
  layer.scope = text("scope");
  if (auto it = doc.find("alpha"); it != doc.end()) {
    if (!it->is_number()) throw DataError("config key 'alpha' must be a number");
    layer.alpha = it->get<double>();
  }
  if (auto it = doc.find("workers"); it != doc.end()) {
    if (!it->is_number_unsigned() || it->get<unsigned>() == 0) {
      throw DataError("config key 'workers' must be a positive integer");
    }
    layer.workers = it->get<unsigned>();
  }
  return layer;
}

ConfigLayer LayerFromFile(const std::filesystem::path& path) {
  try {
    return LayerFromJson(nlohmann::json::parse(ReadFile(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("malformed config file " + path.string() + ": " + e.what());
  }
}

Config ResolveConfig(const ConfigLayer& flags, const ConfigLayer& env,
                     const ConfigLayer& file) {
  Config config;
  if (auto v = First(flags.suite, env.suite, file.suite)) config.suite = *v;
  if (auto v = First(flags.outputs, env.outputs, file.outputs)) config.outputs = *v;
  if (auto v = First(flags.annotations, env.annotations, file.annotations)) {
    config.annotations = *v;
  }
  if (auto v = First(flags.missing, env.missing, file.missing)) {
    config.missing = ParseMissingPolicy(*v);
  }
  if (auto v = First(flags.alpha, env.alpha, file.alpha)) config.alpha = *v;
  if (auto v = First(flags.format, env.format, file.format)) config.format = ParseFormat(*v);
  if (auto v = First(flags.scope, env.scope, file.scope)) config.scope = ParseScope(*v);
  if (auto v = First(flags.workers, env.workers, file.workers)) config.workers = *v;
  return config;
}

EnvLookup ProcessEnv() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* value = std::getenv(name.c_str());
    if (value == nullptr) return std::nullopt;
    return std::string(value);
  };
}

}  // namespace tqh
