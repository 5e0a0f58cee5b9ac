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

#include "tqh/service.h"

#include <atomic>
#include <thread>

#include "fixtures/test_util.h"
#include "gtest/gtest.h"
#include "httplib.h"
#include "tqh/run_io.h"

namespace tqh {
namespace {

using nlohmann::json;
using testing::Item;
using testing::Neg;
using testing::Pos;
using testing::TempDir;

TestSuite ExampleSuite() { return LoadSuite(TQH_TEST_DATA_DIR "/examples/suite.jsonl"); }

std::vector<SystemOutput> ExampleOutputs(const TestSuite& suite) {
  return {LoadOutputs(TQH_TEST_DATA_DIR "/examples/outputs/failing.tsv", suite),
          LoadOutputs(TQH_TEST_DATA_DIR "/examples/outputs/passing.tsv", suite)};
}

// Examples plus three systems whose ambiguity output matches no rule, and
// two more no-match cells: five warnings in total.
std::vector<SystemOutput> WarningOutputs(const TestSuite& suite) {
  auto outputs = ExampleOutputs(suite);
  for (const char* name : {"vague1", "vague2", "vague3"}) {
    SystemOutput output = outputs[1];
    output.system_name = name;
    output.translations["amb-001"] = "The meal last night was delicious.";
    outputs.push_back(output);
  }
  outputs[3].translations["sub-001"] = "He went shopping.";
  outputs[4].translations["vtam-001"] = "People partied and danced a lot.";
  return outputs;
}

class TriageServiceTest : public ::testing::Test {
 protected:
  void Load(std::vector<SystemOutput> outputs, ServiceOptions options = {}) {
    service_.Load(ExampleSuite(), std::move(outputs), AnnotationLog::Open(LogPath()), options);
  }
  void LoadWarnings(ServiceOptions options = {}) {
    Load(WarningOutputs(ExampleSuite()), options);
  }
  std::filesystem::path LogPath() const { return dir_.path() / "log.jsonl"; }

  static std::string Verdict(const std::string& decision, const std::string& key = "") {
    json body = {{"decision", decision}, {"annotator", "ann"}};
    if (!key.empty()) body["idempotency_key"] = key;
    return body.dump();
  }

  TempDir dir_;
  TriageService service_;
};

TEST_F(TriageServiceTest, NotLoaded) {
  EXPECT_EQ(service_.ListWarnings({}, {}).status, 409);
  EXPECT_EQ(service_.Report({}).status, 409);
  EXPECT_EQ(service_.PostVerdict("amb-001", "vague1", Verdict("pass")).status, 409);
}

TEST_F(TriageServiceTest, EmptyQueue) {
  Load(ExampleOutputs(ExampleSuite()));
  const ServiceResponse r = service_.ListWarnings({}, {});
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["total"], 0);
  EXPECT_TRUE(r.body["items"].empty());
}

TEST_F(TriageServiceTest, PagingAndOrdering) {
  LoadWarnings();
  const ServiceResponse all = service_.ListWarnings({}, {});
  ASSERT_EQ(all.body["total"], 5);
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& item : all.body["items"]) keys.emplace_back(item["item_id"], item["system_name"]);
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  EXPECT_EQ(keys.front(), (std::pair<std::string, std::string>{"amb-001", "vague1"}));

  const ServiceResponse page = service_.ListWarnings("4", "1");
  ASSERT_EQ(page.body["items"].size(), 1u);
  EXPECT_EQ(page.body["items"][0]["item_id"], "vtam-001");
  EXPECT_EQ(page.body["total"], 5);
  EXPECT_TRUE(service_.ListWarnings("9", "3").body["items"].empty());

  EXPECT_EQ(service_.ListWarnings("-1", {}).status, 400);
  EXPECT_EQ(service_.ListWarnings({}, "0").status, 400);
  EXPECT_EQ(service_.ListWarnings({}, "abc").status, 400);
  EXPECT_EQ(service_.ListWarnings({}, "100000").status, 400);
}

TEST_F(TriageServiceTest, TriageItemCarriesContext) {
  LoadWarnings();
  const json item = service_.ListWarnings({}, "1").body["items"][0];
  EXPECT_EQ(item["source"], "Das Gericht gestern Abend war lecker.");
  EXPECT_EQ(item["output"], "The meal last night was delicious.");
  EXPECT_EQ(item["category"], "Ambiguity");
  EXPECT_EQ(item["verdict"]["status"], "warning");
  EXPECT_EQ(item["verdict"]["warning_reason"], "no-match");
  ASSERT_EQ(item["rules"].size(), 2u);
  EXPECT_EQ(item["rules"][0]["pattern"], "\\bdish\\b");
  EXPECT_EQ(item["rules"][1]["polarity"], "negative");
  EXPECT_FALSE(item["rules"][0]["matched"]);
}

TEST_F(TriageServiceTest, PassiveItemShowsSourceAndBothRules) {
  LoadWarnings();
  const json page = service_.ListWarnings({}, {}).body;
  const json& item = page["items"][4];
  EXPECT_EQ(item["source"], "Es wurde viel gefeiert und getanzt.");
  ASSERT_EQ(item["rules"].size(), 2u);
  EXPECT_EQ(item["rules"][0]["kind"], "literal");
  EXPECT_EQ(item["rules"][1]["pattern"], "was celebrated and danced");
}

TEST_F(TriageServiceTest, ResolveShrinksQueueAndLogsFirst) {
  LoadWarnings();
  const ServiceResponse r = service_.PostVerdict("amb-001", "vague1", Verdict("fail"));
  EXPECT_EQ(r.status, 201);
  EXPECT_EQ(r.body["queue_length"], 4);
  EXPECT_EQ(service_.QueueLength(), 4u);
  EXPECT_TRUE(service_.stale());
  const AnnotationLog reread = AnnotationLog::Open(LogPath());
  ASSERT_EQ(reread.size(), 1u);
  EXPECT_EQ(std::get<AnnotationRecord>(reread.entries()[0]).system_name, "vague1");
}

TEST_F(TriageServiceTest, VerdictErrors) {
  LoadWarnings();
  EXPECT_EQ(service_.PostVerdict("nope", "vague1", Verdict("pass")).status, 404);
  EXPECT_EQ(service_.PostVerdict("amb-001", "nobody", Verdict("pass")).status, 404);
  EXPECT_EQ(service_.PostVerdict("amb-001", "vague1", Verdict("maybe")).status, 422);
  EXPECT_EQ(service_.PostVerdict("amb-001", "vague1", R"({"decision":"pass"})").status, 422);
  EXPECT_EQ(service_.PostVerdict("amb-001", "vague1", "not json").status, 400);
  EXPECT_EQ(service_.PostVerdict("amb-001", "passing", Verdict("pass")).status, 409);
  EXPECT_EQ(service_.LogEntries().size(), 0u);
}

TEST_F(TriageServiceTest, SecondResolutionNeedsOverride) {
  LoadWarnings();
  EXPECT_EQ(service_.PostVerdict("amb-001", "vague1", Verdict("pass")).status, 201);
  EXPECT_EQ(service_.PostVerdict("amb-001", "vague1", Verdict("fail")).status, 409);

  TriageService overriding;
  ServiceOptions options;
  options.override_mode = true;
  overriding.Load(ExampleSuite(), WarningOutputs(ExampleSuite()), AnnotationLog::Open(LogPath()),
                  options);
  EXPECT_EQ(overriding.QueueLength(), 4u);
  EXPECT_EQ(overriding.PostVerdict("amb-001", "vague1", Verdict("fail")).status, 201);
  EXPECT_EQ(overriding.EffectiveVerdicts().at(0, 2).status, Status::kFail);
}

TEST_F(TriageServiceTest, IdempotencyKeyDeduplicates) {
  LoadWarnings();
  EXPECT_EQ(service_.PostVerdict("amb-001", "vague1", Verdict("pass", "k1")).status, 201);
  const ServiceResponse again = service_.PostVerdict("amb-001", "vague1", Verdict("pass", "k1"));
  EXPECT_EQ(again.status, 200);
  EXPECT_TRUE(again.body["duplicate"]);
  EXPECT_EQ(service_.LogEntries().size(), 1u);
  EXPECT_EQ(service_.QueueLength(), 4u);
}

TEST_F(TriageServiceTest, RuleRefinementDiff) {
  LoadWarnings();
  const ServiceResponse r = service_.PostRule(
      "amb-001", R"({"polarity":"positive","kind":"regex","pattern":"\\bmeal\\b","annotator":"ann"})");
  ASSERT_EQ(r.status, 201) << r.body.dump();
  ASSERT_EQ(r.body["diff"].size(), 3u);
  for (const auto& cell : r.body["diff"]) {
    EXPECT_EQ(cell["before"]["status"], "warning");
    EXPECT_EQ(cell["after"]["status"], "pass");
  }
  EXPECT_EQ(service_.QueueLength(), 2u);
  EXPECT_EQ(service_.LogEntries().size(), 1u);
}

TEST_F(TriageServiceTest, RuleMatchingNothingHasEmptyDiff) {
  LoadWarnings();
  const ServiceResponse r = service_.PostRule(
      "sub-001", R"({"polarity":"negative","pattern":"zebra","annotator":"ann"})");
  ASSERT_EQ(r.status, 201);
  EXPECT_TRUE(r.body["diff"].empty());
}

TEST_F(TriageServiceTest, OverlappingNegativeRuleCreatesContradiction) {
  LoadWarnings();
  const ServiceResponse r = service_.PostRule(
      "amb-001", R"({"polarity":"negative","pattern":"last night","annotator":"ann"})");
  ASSERT_EQ(r.status, 201);
  bool found = false;
  for (const auto& cell : r.body["diff"]) {
    if (cell["system_name"] == "passing") {
      found = true;
      EXPECT_EQ(cell["before"]["status"], "pass");
      EXPECT_EQ(cell["after"]["warning_reason"], "contradiction");
      EXPECT_TRUE(cell["contradiction"]);
    }
  }
  EXPECT_TRUE(found) << r.body.dump();
}

TEST_F(TriageServiceTest, RuleErrors) {
  LoadWarnings();
  const ServiceResponse bad = service_.PostRule(
      "amb-001", R"({"polarity":"positive","pattern":"(","annotator":"ann"})");
  EXPECT_EQ(bad.status, 422);
  EXPECT_NE(bad.body["error"].get<std::string>().find("cannot compile"), std::string::npos);
  EXPECT_EQ(service_.PostRule("nope", R"({"polarity":"positive","pattern":"x","annotator":"a"})")
                .status,
            404);
  EXPECT_EQ(service_.PostRule("amb-001", R"({"polarity":"up","pattern":"x","annotator":"a"})")
                .status,
            422);
  EXPECT_TRUE(service_.LogEntries().empty());
}

TEST_F(TriageServiceTest, RuleTestIsPure) {
  LoadWarnings();
  const std::string before = service_.StateHash();
  const ServiceResponse r = service_.TestRule(
      R"({"pattern":"dish","sample_texts":["The dish last night"]})");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["results"][0]["spans"], json::parse("[[4,8]]"));
  const ServiceResponse court = service_.TestRule(
      R"({"pattern":"\\bcourt\\b","sample_texts":["The court last night was delicious."]})");
  EXPECT_EQ(court.body["results"][0]["spans"], json::parse("[[4,9]]"));
  EXPECT_TRUE(service_.TestRule(R"({"pattern":"x","sample_texts":[]})").body["results"].empty());
  EXPECT_EQ(service_.TestRule(R"({"pattern":"(","sample_texts":["a"]})").status, 422);
  EXPECT_EQ(service_.StateHash(), before);
}

TEST_F(TriageServiceTest, ReportProgress) {
  LoadWarnings();
  json report = service_.Report({}).body;
  EXPECT_DOUBLE_EQ(report["warning_rate"].get<double>(), 5.0 / 15);
  EXPECT_EQ(report["progress"]["initial_warnings"], 5);
  EXPECT_EQ(report["valid_items"], 0);

  service_.PostVerdict("amb-001", "vague1", Verdict("pass"));
  service_.PostVerdict("amb-001", "vague2", Verdict("pass"));
  report = service_.Report("category").body;
  EXPECT_DOUBLE_EQ(report["progress"]["fraction"].get<double>(), 0.4);

  service_.PostVerdict("amb-001", "vague3", Verdict("fail"));
  service_.PostVerdict("vtam-001", "vague3", Verdict("pass"));
  EXPECT_EQ(service_.PostVerdict("sub-001", "vague1", Verdict("pass")).status, 409);
  const json page = service_.ListWarnings({}, {}).body;
  ASSERT_EQ(page["total"], 1);
  const json& last = page["items"][0];
  service_.PostVerdict(last["item_id"], last["system_name"], Verdict("pass"));
  report = service_.Report("phenomenon").body;
  EXPECT_EQ(report["valid_items"], 3);
  EXPECT_DOUBLE_EQ(report["warning_rate"].get<double>(), 0.0);
  EXPECT_DOUBLE_EQ(report["progress"]["fraction"].get<double>(), 1.0);
  EXPECT_EQ(report["scope"], "phenomenon");
  EXPECT_EQ(service_.Report("bogus").status, 400);
}

TEST_F(TriageServiceTest, ReportMatchesEvaluator) {
  LoadWarnings();
  service_.PostVerdict("amb-001", "vague1", Verdict("pass"));
  service_.PostRule("vtam-001", R"({"polarity":"positive","pattern":"partied","annotator":"a"})");
  const json report = service_.Report({}).body;
  const EvaluationRun run =
      Evaluate(ExampleSuite(), WarningOutputs(ExampleSuite()), AnnotationLog::Open(LogPath()));
  EXPECT_EQ(report["valid_items"], run.valid_items.size());
  EXPECT_EQ(service_.EffectiveVerdicts(), run.verdicts);
  for (std::size_t r = 0; r < run.category_table.rows.size(); ++r) {
    for (std::size_t s = 0; s < run.systems.size(); ++s) {
      EXPECT_EQ(report["rows"][r]["cells"][s]["correct"], run.category_table.at(r, s).correct);
      EXPECT_EQ(report["rows"][r]["cells"][s]["total"], run.category_table.at(r, s).total);
    }
  }
}

TEST_F(TriageServiceTest, StaleReportWithoutAutoRecompute) {
  ServiceOptions options;
  options.auto_recompute = false;
  LoadWarnings(options);
  EXPECT_EQ(service_.Report({}).status, 200);
  service_.PostVerdict("amb-001", "vague1", Verdict("pass"));
  EXPECT_EQ(service_.Report({}).status, 409);
  EXPECT_EQ(service_.Recompute().status, 200);
  EXPECT_EQ(service_.Report({}).status, 200);
}

TEST_F(TriageServiceTest, ReplaysExistingLogOnLoad) {
  LoadWarnings();
  service_.PostVerdict("amb-001", "vague1", Verdict("pass"));
  service_.PostRule("amb-001", R"({"polarity":"positive","pattern":"meal","annotator":"a"})");
  const VerdictMatrix expected = service_.EffectiveVerdicts();
  TriageService reloaded;
  reloaded.Load(ExampleSuite(), WarningOutputs(ExampleSuite()), AnnotationLog::Open(LogPath()));
  EXPECT_EQ(reloaded.EffectiveVerdicts(), expected);
  EXPECT_EQ(reloaded.QueueLength(), 2u);
}

TEST_F(TriageServiceTest, LargeQueueMatchesWarningRate) {
  constexpr int kItems = 5560, kSystems = 16;
  std::vector<TestItem> items;
  for (int i = 0; i < kItems; ++i) {
    items.push_back(Item("i" + std::to_string(i), "C" + std::to_string(i % 14),
                         "P" + std::to_string(i % 14), {Pos("yes"), Neg("no")}));
  }
  const TestSuite suite = TestSuite::Create("large", "1", std::move(items));
  std::vector<SystemOutput> outputs;
  for (int s = 0; s < kSystems; ++s) {
    SystemOutput output{"s" + std::to_string(s), {}};
    for (int i = 0; i < kItems; ++i) {
      const int cell = i * kSystems + s;
      output.translations["i" + std::to_string(i)] =
          cell % 10 == 0 ? "unclear" : (cell % 3 == 0 ? "no" : "yes");
    }
    outputs.push_back(std::move(output));
  }
  service_.Load(suite, outputs, AnnotationLog::Open(LogPath()));
  const json page = service_.ListWarnings({}, "1000").body;
  const json report = service_.Report({}).body;
  const double rate = report["warning_rate"].get<double>();
  EXPECT_NEAR(rate, 0.1, 1e-12);
  EXPECT_EQ(page["total"].get<double>(), rate * kItems * kSystems);

  // Resolve warnings in queue order until at most 3% remain.
  while (service_.QueueLength() > 0.03 * kItems * kSystems) {
    const json items = service_.ListWarnings({}, "1000").body["items"];
    for (const json& item : items) {
      if (service_.QueueLength() <= 0.03 * kItems * kSystems) break;
      ASSERT_EQ(service_.PostVerdict(item["item_id"], item["system_name"], Verdict("pass")).status,
                201);
    }
  }
  EXPECT_LE(service_.Report({}).body["warning_rate"].get<double>(), 0.03);
}

TEST_F(TriageServiceTest, ConcurrentReadersSeeConsistentState) {
  LoadWarnings();
  std::atomic<bool> done{false};
  std::atomic<int> inconsistent{0};
  std::vector<std::thread> readers;
  for (int t = 0; t < 4; ++t) {
    readers.emplace_back([&] {
      while (!done) {
        const json report = service_.Report({}).body;
        const json page = service_.ListWarnings({}, {}).body;
        if (report["progress"]["remaining"].get<int>() < 0 || page["total"].get<int>() > 5) {
          ++inconsistent;
        }
      }
    });
  }
  const std::vector<std::pair<std::string, std::string>> cells = {
      {"amb-001", "vague1"}, {"amb-001", "vague2"}, {"amb-001", "vague3"},
      {"sub-001", "vague2"}};
  for (const auto& [item, system] : cells) {
    EXPECT_EQ(service_.PostVerdict(item, system, Verdict("pass")).status, 201);
  }
  service_.PostRule("vtam-001", R"({"polarity":"positive","pattern":"partied","annotator":"a"})");
  done = true;
  for (auto& t : readers) t.join();
  EXPECT_EQ(inconsistent, 0);
  EXPECT_EQ(service_.QueueLength(), 0u);
  EXPECT_EQ(service_.ListWarnings({}, {}).body["total"], 0);
}

TEST_F(TriageServiceTest, ServesOverHttp) {
  LoadWarnings();
  httplib::Server server;
  WriteFile(dir_.path() / "index.html", "<html>triage</html>");
  RegisterRoutes(server, service_, dir_.path());
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto warnings = client.Get("/api/warnings?limit=2");
  ASSERT_TRUE(warnings);
  EXPECT_EQ(warnings->status, 200);
  EXPECT_EQ(json::parse(warnings->body)["items"].size(), 2u);
  EXPECT_EQ(client.Get("/api/warnings?limit=x")->status, 400);

  auto posted = client.Post("/api/warnings/amb-001/vague1/verdict", Verdict("pass", "h1"),
                            "application/json");
  ASSERT_TRUE(posted);
  EXPECT_EQ(posted->status, 201);
  EXPECT_EQ(client.Post("/api/warnings/amb-001/vague1/verdict", Verdict("pass", "h1"),
                        "application/json")->status,
            200);
  EXPECT_EQ(client.Post("/api/warnings/amb-001/vague1/verdict", Verdict("pass"),
                        "application/json")->status,
            409);
  EXPECT_EQ(client.Post("/api/warnings/x/y/verdict", Verdict("pass"), "application/json")->status,
            404);

  auto rule = client.Post("/api/items/amb-001/rules",
                          R"({"polarity":"positive","pattern":"meal","annotator":"a"})",
                          "application/json");
  ASSERT_TRUE(rule);
  EXPECT_EQ(rule->status, 201);
  EXPECT_EQ(json::parse(rule->body)["diff"].size(), 2u);

  auto test = client.Post("/api/rules/test", R"({"pattern":"(","sample_texts":[]})",
                          "application/json");
  EXPECT_EQ(test->status, 422);
  EXPECT_EQ(client.Post("/api/recompute", "", "application/json")->status, 200);
  auto report = client.Get("/api/report?scope=phenomenon");
  ASSERT_TRUE(report);
  EXPECT_EQ(json::parse(report->body)["progress"]["remaining"], 2);
  auto index = client.Get("/index.html");
  ASSERT_TRUE(index);
  EXPECT_EQ(index->body, "<html>triage</html>");

  server.stop();
  thread.join();
}

}  // namespace
}  // namespace tqh
