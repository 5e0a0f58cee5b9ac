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

#ifndef TQH_EVALUATOR_H_
#define TQH_EVALUATOR_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tqh/annotation.h"
#include "tqh/suite.h"
#include "tqh/verdict.h"

namespace tqh {

enum class MissingPolicy {
  kStrict,  // an absent translation is an error
  kFail,    // an absent translation is scored as a fail
};

enum class DenominatorMode {
  kGlobal,     // an item with a warning for any system is dropped for all
  kPerSystem,  // non-canonical: each system keeps its own warning-free items
};

enum class Scope { kCategory, kPhenomenon };

std::string_view ToString(MissingPolicy policy);
std::string_view ToString(DenominatorMode mode);
std::string_view ToString(Scope scope);
MissingPolicy ParseMissingPolicy(std::string_view text);
DenominatorMode ParseDenominatorMode(std::string_view text);
Scope ParseScope(std::string_view text);

struct EvaluateOptions {
  MissingPolicy missing = MissingPolicy::kStrict;
  DenominatorMode denominator = DenominatorMode::kGlobal;
  unsigned workers = 1;
};

struct AccuracyCell {
  std::int64_t correct = 0;
  std::int64_t total = 0;

  bool defined() const { return total > 0; }
  std::optional<double> accuracy() const {
    if (total == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(total);
  }
  bool operator==(const AccuracyCell&) const = default;
};

// Rows are categories or phenomena, columns are systems. `row_items` is the
// number of valid items in each row (the "#" column).
struct AccuracyTable {
  std::vector<std::string> rows;
  std::vector<std::string> systems;
  std::vector<std::int64_t> row_items;
  std::vector<AccuracyCell> cells;

  const AccuracyCell& at(std::size_t row, std::size_t system) const {
    return cells[row * systems.size() + system];
  }
  AccuracyCell& at(std::size_t row, std::size_t system) {
    return cells[row * systems.size() + system];
  }
  std::optional<std::size_t> RowIndex(std::string_view label) const;
  std::optional<std::size_t> SystemIndex(std::string_view name) const;

  bool operator==(const AccuracyTable&) const = default;
};

struct ItemInfo {
  std::string id;
  std::string category;
  std::string phenomenon;

  bool operator==(const ItemInfo&) const = default;
};

// Everything needed to render reports without the suite or the outputs.
struct EvaluationRun {
  std::string suite_name;
  std::string suite_version;
  std::vector<std::string> systems;
  std::vector<ItemInfo> items;
  VerdictMatrix verdicts;
  std::vector<std::string> valid_items;  // in suite order
  DenominatorMode denominator = DenominatorMode::kGlobal;
  AccuracyTable phenomenon_table;
  AccuracyTable category_table;
  std::map<std::string, std::string> output_checksums;  // system -> sha256

  const AccuracyTable& table(Scope scope) const {
    return scope == Scope::kCategory ? category_table : phenomenon_table;
  }
  bool operator==(const EvaluationRun&) const = default;
};

// Classifies every (item, system) cell. Rows follow suite order, columns
// follow `outputs`. The result does not depend on `options.workers`.
VerdictMatrix ClassifyAll(const TestSuite& suite,
                          std::span<const SystemOutput> outputs,
                          const EvaluateOptions& options = {});

// Items whose row contains no warning, in matrix order.
std::vector<std::string> SelectValidItems(const VerdictMatrix& verdicts);

// Builds valid items and accuracy tables from a finished verdict matrix.
// `items` must list the matrix rows in order.
EvaluationRun Tabulate(std::string suite_name, std::string suite_version,
                       std::vector<ItemInfo> items, VerdictMatrix verdicts,
                       DenominatorMode mode = DenominatorMode::kGlobal);
EvaluationRun Tabulate(const TestSuite& suite, VerdictMatrix verdicts,
                       DenominatorMode mode = DenominatorMode::kGlobal);

std::vector<ItemInfo> ItemInfos(const TestSuite& suite);

// Full pipeline: refinements from the log are applied to the suite, every
// cell is classified, manual decisions are overlaid, and tables are built.
EvaluationRun Evaluate(const TestSuite& suite,
                       std::span<const SystemOutput> outputs,
                       const AnnotationLog& log,
                       const EvaluateOptions& options = {},
                       ApplyReport* report = nullptr);

// Throw a data error for an unknown phenomenon, category or system.
AccuracyCell PhenomenonAccuracy(const EvaluationRun& run,
                                std::string_view phenomenon,
                                std::string_view system);
AccuracyCell CategoryAccuracy(const EvaluationRun& run, std::string_view category,
                              std::string_view system);

// Pooled over all valid items.
AccuracyCell MicroAverage(const EvaluationRun& run, std::string_view system);
// Unweighted mean of the system's defined category accuracies; nullopt if
// none is defined.
std::optional<double> MacroAverage(const EvaluationRun& run,
                                   std::string_view system);

double WarningRate(const VerdictMatrix& verdicts);
std::vector<double> WarningRatePerSystem(const VerdictMatrix& verdicts);

// Hex SHA-256 of a byte string.
std::string Sha256Hex(std::string_view bytes);

}  // namespace tqh

#endif  // TQH_EVALUATOR_H_
