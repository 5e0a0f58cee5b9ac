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

#ifndef TQH_REPORT_H_
#define TQH_REPORT_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "tqh/evaluator.h"
#include "tqh/stats.h"

namespace tqh {

enum class Format { kPlain, kTsv, kLatex, kMarkdown };

std::string_view ToString(Format format);
Format ParseFormat(std::string_view text);

struct ReportSpec {
  Scope scope = Scope::kCategory;
  Format format = Format::kPlain;
  bool emphasis = true;  // mark best-cluster cells
  int decimals = 1;

  // Throws a usage error unless 0 <= decimals <= 6.
  void Validate() const;
};

// Marker for a cell without valid items.
inline constexpr std::string_view kUndefinedCell = "\u2013";

// 100 * correct / total, rounded half up at `decimals`, computed on the
// exact counts.
std::string FormatPercent(std::int64_t correct, std::int64_t total, int decimals);

// Fixed-point rendering rounding half away from zero; never prints "-0.0".
std::string FormatFixed(double value, int decimals);

// One row per category or phenomenon with the "#" column, per-system
// accuracies x100 and an "avg" column, followed by the "average (items)"
// and "average (categories)" footers. Best-cluster cells are marked with
// \textbf{} (latex), ** (markdown) or a trailing * (plain, tsv).
std::string RenderAccuracyTable(const EvaluationRun& run,
                                std::span<const ClusterRow> clusters,
                                const ReportSpec& spec);

std::string RenderDeltaTable(const DeltaTable& deltas, const ReportSpec& spec);

}  // namespace tqh

#endif  // TQH_REPORT_H_
