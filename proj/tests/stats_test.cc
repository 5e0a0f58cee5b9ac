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
#include <random>

#include "fixtures/fixture_runs.h"
#include "fixtures/test_util.h"
#include "gtest/gtest.h"

namespace tqh {
namespace {

using testing::ErrorKindOf;

// Reference values computed with scipy.stats and statsmodels.
constexpr double kCriticalZ95 = 1.6448536269514722;
constexpr double kZ60v57 = 1.7541160386140593;
constexpr double kZ60v56 = 2.0341905108624307;

SignificanceConfig Alpha(double alpha) {
  SignificanceConfig config;
  config.alpha = alpha;
  return config;
}

std::vector<std::string> ClusterOf(const std::vector<ClusterRow>& rows, std::string_view label) {
  for (const ClusterRow& row : rows) {
    if (row.label == label) return row.best_cluster;
  }
  ADD_FAILURE() << "no cluster row " << label;
  return {};
}

TEST(SignificanceConfigTest, CriticalZ) {
  EXPECT_NEAR(SignificanceConfig{}.CriticalZ(), kCriticalZ95, 1e-12);
  EXPECT_NEAR(Alpha(0.99).CriticalZ(), 2.3263478740408408, 1e-9);
  EXPECT_EQ(ErrorKindOf([] { Alpha(1.0).Validate(); }), ErrorKind::kUsage);
  EXPECT_EQ(ErrorKindOf([] { Alpha(0.4).Validate(); }), ErrorKind::kUsage);
}

TEST(ZTestTest, MatchesReferenceValues) {
  const ZTestResult a = ZTest(60, 60, 57, 60);
  EXPECT_NEAR(a.z, kZ60v57, 1e-12);
  EXPECT_TRUE(a.significant);
  EXPECT_NEAR(ZTest(60, 60, 56, 60).z, kZ60v56, 1e-12);
  const ZTestResult close = ZTest(60, 60, 58, 60);
  EXPECT_FALSE(close.significant);
}

TEST(ZTestTest, ZeroVarianceIsNotSignificant) {
  for (auto [x1, x2] : {std::pair{0, 0}, std::pair{10, 10}}) {
    const ZTestResult r = ZTest(x1, 10, x2, 10);
    EXPECT_EQ(r.z, 0.0);
    EXPECT_FALSE(r.significant);
  }
}

TEST(ZTestTest, UnpooledVariant) {
  SignificanceConfig config;
  config.pooled = false;
  const double p1 = 50.0 / 60, p2 = 40.0 / 60;
  const double expected = (p1 - p2) / std::sqrt(p1 * (1 - p1) / 60 + p2 * (1 - p2) / 60);
  EXPECT_NEAR(ZTest(50, 60, 40, 60, config).z, expected, 1e-12);
}

TEST(ZTestTest, RejectsBadCounts) {
  EXPECT_EQ(ErrorKindOf([] { ZTest(1, 0, 1, 1); }), ErrorKind::kData);
  EXPECT_EQ(ErrorKindOf([] { ZTest(5, 4, 1, 4); }), ErrorKind::kData);
}

TEST(BestClusterTest, IncludesTiesAndNonSignificant) {
  const std::vector<RowEntry> row = {{"a", 60, 60}, {"b", 57, 60}, {"c", 60, 60}, {"d", 58, 60}};
  EXPECT_EQ(BestCluster(row), (std::vector<std::string>{"a", "c", "d"}));
}

TEST(BestClusterTest, RejectsUnequalTotalsAndEmptyRows) {
  const std::vector<RowEntry> row = {{"a", 5, 10}, {"b", 5, 11}};
  EXPECT_EQ(ErrorKindOf([&] { BestCluster(row); }), ErrorKind::kData);
  EXPECT_EQ(ErrorKindOf([] { BestCluster({}); }), ErrorKind::kData);
}

TEST(BestClusterTest, RaisingAlphaNeverShrinksCluster) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const std::int64_t n = std::uniform_int_distribution<std::int64_t>(1, 200)(rng);
    const std::size_t systems = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    std::vector<RowEntry> row;
    for (std::size_t s = 0; s < systems; ++s) {
      row.push_back({"s" + std::to_string(s),
                     std::uniform_int_distribution<std::int64_t>(0, n)(rng), n});
    }
    std::vector<std::string> previous;
    for (double alpha : {0.6, 0.8, 0.9, 0.95, 0.99, 0.999}) {
      const auto cluster = BestCluster(row, Alpha(alpha));
      ASSERT_TRUE(std::includes(cluster.begin(), cluster.end(), previous.begin(), previous.end(),
                                [&](const std::string& a, const std::string& b) {
                                  return std::stoi(a.substr(1)) < std::stoi(b.substr(1));
                                }))
          << "trial " << trial << " alpha " << alpha;
      const auto best = std::max_element(row.begin(), row.end(), [](auto& a, auto& b) {
        return a.correct < b.correct;
      });
      ASSERT_NE(std::find(cluster.begin(), cluster.end(), best->system), cluster.end());
      previous = cluster;
    }
  }
}

TEST(ClusterRowsTest, ReferenceTable) {
  const EvaluationRun run = testing::AccuracyRun();
  const auto rows = ClusterRows(run, Scope::kCategory);
  ASSERT_EQ(rows.size(), 15u);
  EXPECT_EQ(rows.back().label, kItemsAverageLabel);
  EXPECT_EQ(ClusterOf(rows, "Punctuation"), (std::vector<std::string>{"NEU"}));
  EXPECT_EQ(ClusterOf(rows, "Verb tense/aspect/mood"), (std::vector<std::string>{"onlA", "RWTH"}));
  EXPECT_EQ(ClusterOf(rows, "Ambiguity"), (std::vector<std::string>{"FB"}));
  EXPECT_EQ(ClusterOf(rows, std::string(kItemsAverageLabel)),
            (std::vector<std::string>{"onlA", "RWTH"}));
  // With 20 items nobody is significantly below a perfect score.
  EXPECT_EQ(ClusterOf(rows, "Negation").size(), 16u);
}

TEST(ClusterRowsTest, NeedsGlobalDenominator) {
  EvaluationRun run = testing::AccuracyRun();
  run.denominator = DenominatorMode::kPerSystem;
  EXPECT_EQ(ErrorKindOf([&] { ClusterRows(run, Scope::kCategory); }), ErrorKind::kData);
}

EvaluationRun SmallRun(std::vector<std::string> labels, std::vector<std::string> systems,
                       std::vector<std::vector<int>> counts, int items = 10) {
  std::vector<testing::CountRow> rows;
  for (std::size_t r = 0; r < labels.size(); ++r) rows.push_back({labels[r], items, counts[r]});
  return testing::RunFromCounts(rows, systems);
}

TEST(CompareRunsTest, DeltasOnSharedRowsAndSystems) {
  const EvaluationRun base = SmallRun({"A", "B"}, {"x", "y"}, {{5, 6}, {2, 2}});
  const EvaluationRun cur = SmallRun({"A", "C"}, {"y", "z"}, {{7, 10}, {1, 1}});
  const DeltaTable table = CompareRuns(base, cur, Scope::kCategory);
  EXPECT_EQ(table.systems, (std::vector<std::string>{"y"}));
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_EQ(table.rows[0].label, "A");
  EXPECT_NEAR(*table.rows[0].deltas[0], 10.0, 1e-9);
  // mean over current (70, 100) minus mean over baseline (50, 60)
  EXPECT_NEAR(*table.rows[0].mean_delta, 30.0, 1e-9);
  EXPECT_EQ(table.baseline_only_rows, (std::vector<std::string>{"B"}));
  EXPECT_EQ(table.current_only_rows, (std::vector<std::string>{"C"}));
  EXPECT_EQ(table.baseline_only_systems, (std::vector<std::string>{"x"}));
  EXPECT_EQ(table.current_only_systems, (std::vector<std::string>{"z"}));
  EXPECT_TRUE(table.footer.empty());
}

TEST(CompareRunsTest, FootersWithFullOverlap) {
  const EvaluationRun base = SmallRun({"A", "B"}, {"x"}, {{5}, {2}});
  const EvaluationRun cur = SmallRun({"A", "B"}, {"x"}, {{6}, {6}});
  const DeltaTable table = CompareRuns(base, cur, Scope::kCategory);
  ASSERT_EQ(table.footer.size(), 2u);
  EXPECT_EQ(table.footer[0].label, kItemsAverageLabel);
  EXPECT_NEAR(*table.footer[0].deltas[0], 25.0, 1e-9);
  EXPECT_EQ(table.footer[1].label, kCategoriesAverageLabel);
  EXPECT_NEAR(*table.footer[1].deltas[0], 25.0, 1e-9);
}

TEST(CompareRunsTest, NoSharedLabelsIsAnError) {
  const EvaluationRun base = SmallRun({"A"}, {"x"}, {{5}});
  const EvaluationRun cur = SmallRun({"B"}, {"x"}, {{5}});
  EXPECT_EQ(ErrorKindOf([&] { CompareRuns(base, cur, Scope::kCategory); }), ErrorKind::kData);
}

TEST(CompareRunsTest, ReferenceYearDeltas) {
  const DeltaTable table =
      CompareRuns(testing::YearRun(false), testing::YearRun(true), Scope::kCategory);
  const auto column = [&](std::string_view system) {
    return static_cast<std::size_t>(
        std::find(table.systems.begin(), table.systems.end(), system) - table.systems.begin());
  };
  ASSERT_EQ(table.systems.size(), testing::kNumSharedSystems);
  const auto coordination = std::find_if(table.rows.begin(), table.rows.end(), [](auto& r) {
    return r.label == "Coordination & ellipsis";
  });
  ASSERT_NE(coordination, table.rows.end());
  EXPECT_NEAR(*coordination->deltas[column("UCAM")], -13.1, 0.1);
  const auto function_word = std::find_if(table.rows.begin(), table.rows.end(),
                                          [](auto& r) { return r.label == "Function word"; });
  EXPECT_NEAR(*function_word->mean_delta, 12.5, 0.1);
  ASSERT_EQ(table.footer.size(), 2u);
  EXPECT_NEAR(*table.footer[0].deltas[column("onlG")], 18.7, 0.1);
}

}  // namespace
}  // namespace tqh
