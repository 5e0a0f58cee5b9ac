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

#ifndef TQH_STATS_H_
#define TQH_STATS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tqh/evaluator.h"

namespace tqh {

inline constexpr std::string_view kItemsAverageLabel = "average (items)";
inline constexpr std::string_view kCategoriesAverageLabel = "average (categories)";

// `alpha` is the one-tailed confidence level; 0.95 gives a critical z of
// about 1.645.
struct SignificanceConfig {
  double alpha = 0.95;
  bool pooled = true;  // false selects the unpooled standard error

  // Throws a usage error unless 0.5 < alpha < 1.
  void Validate() const;
  double CriticalZ() const;
};

struct ZTestResult {
  double z = 0;
  bool significant = false;
};

// One-tailed two-proportion test of "system 1 is better than system 2".
// A zero standard error gives z = 0 and no significance. Throws a data
// error when a trial count is zero or a success count is out of range.
ZTestResult ZTest(std::int64_t x1, std::int64_t n1, std::int64_t x2,
                  std::int64_t n2, const SignificanceConfig& config = {});

struct RowEntry {
  std::string system;
  std::int64_t correct = 0;
  std::int64_t total = 0;

  bool operator==(const RowEntry&) const = default;
};

// Systems not significantly worse than the best system of the row, in row
// order. Every system tied at the maximum is included. Throws a data error
// for an empty row or unequal totals.
std::vector<std::string> BestCluster(std::span<const RowEntry> row,
                                     const SignificanceConfig& config = {});

struct ClusterRow {
  std::string label;
  std::vector<RowEntry> entries;
  std::vector<std::string> best_cluster;
};

// One cluster row per table row with at least one valid item, followed by
// the pooled "average (items)" row. Requires the global denominator mode.
std::vector<ClusterRow> ClusterRows(const EvaluationRun& run, Scope scope,
                                    const SignificanceConfig& config = {});

// Signed differences current - baseline, in percentage points.
struct DeltaRow {
  std::string label;
  std::int64_t items = 0;  // valid items of the row in the current run
  std::vector<std::optional<double>> deltas;  // per shared system
  std::optional<double> mean_delta;  // mean over all current systems minus
                                     // mean over all baseline systems
};

struct DeltaTable {
  std::vector<std::string> systems;  // shared systems, current-run order
  std::vector<DeltaRow> rows;
  std::vector<DeltaRow> footer;  // "average (items)", "average (categories)"
  std::vector<std::string> baseline_only_rows;
  std::vector<std::string> current_only_rows;
  std::vector<std::string> baseline_only_systems;
  std::vector<std::string> current_only_systems;
};

// Compares two runs on their shared row labels. Throws a data error when no
// label is shared.
DeltaTable CompareRuns(const EvaluationRun& baseline, const EvaluationRun& current,
                       Scope scope);

}  // namespace tqh

#endif  // TQH_STATS_H_
