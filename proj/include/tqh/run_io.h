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

#ifndef TQH_RUN_IO_H_
#define TQH_RUN_IO_H_

#include <filesystem>
#include <string>

#include "json.hpp"
#include "tqh/evaluator.h"

namespace tqh {

// Lossless JSON form of a run. Contains no timestamps, so equal runs
// serialize to equal bytes.
nlohmann::json RunToJson(const EvaluationRun& run);

// Throws a data error when the stored tables disagree with the stored
// verdicts.
EvaluationRun RunFromJson(const nlohmann::json& doc);

// Writes run.json plus category.tsv and phenomenon.tsv into `dir`, creating
// it if needed. Throws a data error for a run without items or systems and
// an I/O error on write failure.
void ExportRun(const EvaluationRun& run, const std::filesystem::path& dir);

EvaluationRun ImportRun(const std::filesystem::path& dir);

// Compact cell codes used in run.json: "P", "F", "Wn" (no match), "Wc"
// (contradiction), an "m" suffix for manual provenance and ":i,j" for
// matched rule indices.
std::string EncodeVerdict(const Verdict& verdict);
Verdict DecodeVerdict(std::string_view code);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace tqh

#endif  // TQH_RUN_IO_H_
