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

#include "tqh/stats.h"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "tqh/error.h"

namespace tqh {
namespace {

std::optional<double> MeanOf(const std::vector<std::optional<double>>& values) {
  double sum = 0;
  std::size_t count = 0;
  for (const auto& v : values) {
    if (!v) continue;
    sum += *v;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

std::vector<std::optional<double>> RowAccuracies(const AccuracyTable& table,
                                                 std::size_t row) {
  std::vector<std::optional<double>> out;
  for (std::size_t s = 0; s < table.systems.size(); ++s) {
    out.push_back(table.at(row, s).accuracy());
  }
  return out;
}

std::optional<double> Difference(std::optional<double> current,
                                  std::optional<double> baseline) {
  if (!current || !baseline) return std::nullopt;
  return 100.0 * (*current - *baseline);
}

}  // namespace

void SignificanceConfig::Validate() const {
  if (!(alpha > 0.5 && alpha < 1.0)) {
    throw UsageError("significance alpha must lie in (0.5, 1)");
  }
}

double SignificanceConfig::CriticalZ() const {
  Validate();
  return boost::math::quantile(boost::math::normal_distribution<double>(), alpha);
}

ZTestResult ZTest(std::int64_t x1, std::int64_t n1, std::int64_t x2,
                  std::int64_t n2, const SignificanceConfig& config) {
  if (n1 <= 0 || n2 <= 0) throw DataError("z-test needs positive trial counts");
  if (x1 < 0 || x1 > n1 || x2 < 0 || x2 > n2) {
    throw DataError("z-test success count out of range");
  }
  const double p1 = static_cast<double>(x1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(x2) / static_cast<double>(n2);
  double variance;
  if (config.pooled) {
    const double pooled =
        static_cast<double>(x1 + x2) / static_cast<double>(n1 + n2);
    variance = pooled * (1 - pooled) *
               (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2));
  } else {
    variance = p1 * (1 - p1) / static_cast<double>(n1) +
               p2 * (1 - p2) / static_cast<double>(n2);
  }
  ZTestResult result;
  if (variance <= 0) return result;
  result.z = (p1 - p2) / std::sqrt(variance);
  result.significant = result.z > config.CriticalZ();
  return result;
}

std::vector<std::string> BestCluster(std::span<const RowEntry> row,
                                     const SignificanceConfig& config) {
  if (row.empty()) throw DataError("cannot cluster an empty row");
  for (const RowEntry& entry : row) {
    if (entry.total != row.front().total) {
      throw DataError("row totals differ ('" + entry.system + "' has " +
                      std::to_string(entry.total) + ", expected " +
                      std::to_string(row.front().total) + ")");
    }
  }
  const auto best = std::max_element(
      row.begin(), row.end(),
      [](const RowEntry& a, const RowEntry& b) { return a.correct < b.correct; });
  std::vector<std::string> cluster;
  for (const RowEntry& entry : row) {
    if (entry.correct == best->correct ||
        !ZTest(best->correct, best->total, entry.correct, entry.total, config)
             .significant) {
      cluster.push_back(entry.system);
    }
  }
  return cluster;
}

std::vector<ClusterRow> ClusterRows(const EvaluationRun& run, Scope scope,
                                    const SignificanceConfig& config) {
  if (run.denominator != DenominatorMode::kGlobal) {
    throw DataError("significance clusters need the global denominator mode");
  }
  const AccuracyTable& table = run.table(scope);
  std::vector<ClusterRow> rows;
  ClusterRow pooled{std::string(kItemsAverageLabel), {}, {}};
  for (std::size_t s = 0; s < table.systems.size(); ++s) {
    pooled.entries.push_back({table.systems[s], 0, 0});
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    ClusterRow row{table.rows[r], {}, {}};
    for (std::size_t s = 0; s < table.systems.size(); ++s) {
      const AccuracyCell& cell = table.at(r, s);
      row.entries.push_back({table.systems[s], cell.correct, cell.total});
      pooled.entries[s].correct += cell.correct;
      pooled.entries[s].total += cell.total;
    }
    if (table.row_items[r] == 0 || row.entries.empty()) continue;
    row.best_cluster = BestCluster(row.entries, config);
    rows.push_back(std::move(row));
  }
  if (!pooled.entries.empty() && pooled.entries.front().total > 0) {
    pooled.best_cluster = BestCluster(pooled.entries, config);
    rows.push_back(std::move(pooled));
  }
  return rows;
}

DeltaTable CompareRuns(const EvaluationRun& baseline, const EvaluationRun& current,
                       Scope scope) {
  const AccuracyTable& base = baseline.table(scope);
  const AccuracyTable& cur = current.table(scope);
  DeltaTable table;

  std::vector<std::pair<std::size_t, std::size_t>> shared_systems;
  for (std::size_t s = 0; s < cur.systems.size(); ++s) {
    if (auto b = base.SystemIndex(cur.systems[s])) {
      table.systems.push_back(cur.systems[s]);
      shared_systems.emplace_back(*b, s);
    } else {
      table.current_only_systems.push_back(cur.systems[s]);
    }
  }
  for (const auto& name : base.systems) {
    if (!cur.SystemIndex(name)) table.baseline_only_systems.push_back(name);
  }

  for (std::size_t r = 0; r < cur.rows.size(); ++r) {
    const auto b = base.RowIndex(cur.rows[r]);
    if (!b) {
      table.current_only_rows.push_back(cur.rows[r]);
      continue;
    }
    DeltaRow row{cur.rows[r], cur.row_items[r], {}, {}};
    for (const auto& [bs, cs] : shared_systems) {
      row.deltas.push_back(
          Difference(cur.at(r, cs).accuracy(), base.at(*b, bs).accuracy()));
    }
    row.mean_delta =
        Difference(MeanOf(RowAccuracies(cur, r)), MeanOf(RowAccuracies(base, *b)));
    table.rows.push_back(std::move(row));
  }
  for (const auto& label : base.rows) {
    if (!cur.RowIndex(label)) table.baseline_only_rows.push_back(label);
  }
  if (table.rows.empty()) {
    throw DataError("runs share no " + std::string(ToString(scope)) + " labels");
  }

  // Footers are emitted only when both runs cover the same labels.
  auto micro = [](const EvaluationRun& run) {
    std::vector<std::optional<double>> out;
    for (const auto& system : run.systems) out.push_back(MicroAverage(run, system).accuracy());
    return out;
  };
  auto macro = [](const EvaluationRun& run) {
    std::vector<std::optional<double>> out;
    for (const auto& system : run.systems) out.push_back(MacroAverage(run, system));
    return out;
  };
  const bool full_overlap =
      table.baseline_only_rows.empty() && table.current_only_rows.empty();
  if (full_overlap) {
    std::int64_t items = 0;
    for (const DeltaRow& row : table.rows) items += row.items;
    const auto base_micro = micro(baseline), cur_micro = micro(current);
    const auto base_macro = macro(baseline), cur_macro = macro(current);
    DeltaRow items_row{std::string(kItemsAverageLabel), items, {}, {}};
    DeltaRow categories_row{std::string(kCategoriesAverageLabel), items, {}, {}};
    for (const auto& [bs, cs] : shared_systems) {
      items_row.deltas.push_back(Difference(cur_micro[cs], base_micro[bs]));
      categories_row.deltas.push_back(Difference(cur_macro[cs], base_macro[bs]));
    }
    items_row.mean_delta = Difference(MeanOf(cur_micro), MeanOf(base_micro));
    categories_row.mean_delta = Difference(MeanOf(cur_macro), MeanOf(base_macro));
    table.footer.push_back(std::move(items_row));
    table.footer.push_back(std::move(categories_row));
  }
  return table;
}

}  // namespace tqh
