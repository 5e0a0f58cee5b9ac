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

#include <algorithm>
#include <charconv>
#include <mutex>
#include <thread>
#include <utility>

#include "httplib.h"
#include "tqh/error.h"
#include "tqh/run_io.h"

namespace tqh {
namespace {

using nlohmann::json;

constexpr std::size_t kDefaultPageSize = 50;
constexpr std::size_t kMaxPageSize = 1000;

ServiceResponse Fail(int status, std::string message) {
  return {status, json{{"error", std::move(message)}}};
}

std::optional<std::size_t> ParseCount(const std::string& text) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<json> ParseBody(std::string_view body) {
  try {
    json doc = json::parse(body);
    if (doc.is_object()) return doc;
  } catch (const json::parse_error&) {
  }
  return std::nullopt;
}

json VerdictJson(const Verdict& verdict) {
  return json{{"status", ToString(verdict.status)},
              {"warning_reason",
               verdict.reason ? json(ToString(*verdict.reason)) : json(nullptr)},
              {"provenance", ToString(verdict.provenance)},
              {"matched_rules", verdict.matched_rules}};
}

json SpansJson(const std::vector<MatchSpan>& spans) {
  json out = json::array();
  for (const MatchSpan& span : spans) out.push_back(json::array({span.begin, span.end}));
  return out;
}

json CellJson(const std::string& system, const AccuracyCell& cell) {
  auto accuracy = cell.accuracy();
  return json{{"system", system},
              {"correct", cell.correct},
              {"total", cell.total},
              {"accuracy", accuracy ? json(*accuracy) : json(nullptr)}};
}

bool SameOutcome(const Verdict& a, const Verdict& b) {
  return a.status == b.status && a.reason == b.reason;
}

std::optional<std::string> OptionalString(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

}  // namespace

void TriageService::Load(TestSuite suite, std::vector<SystemOutput> outputs,
                         AnnotationLog log, ServiceOptions options) {
  options.significance.Validate();
  const auto refinements = log.refinements();
  TestSuite refined = ApplyRefinements(suite, refinements);
  VerdictMatrix automatic = ClassifyAll(refined, outputs, options.evaluate);
  ApplyReport report;
  const auto annotations = log.annotations();
  VerdictMatrix effective = ApplyAnnotations(automatic, annotations, &report);
  std::vector<CompiledRuleSet> compiled;
  for (const TestItem& item : refined.items()) compiled.push_back(CompileRules(item));
  Timestamp latest{};
  for (const LogEntry& entry : log.entries()) {
    latest = std::max(latest, std::visit([](const auto& e) { return e.timestamp; }, entry));
  }

  auto lock = WriteLock();
  options_ = options;
  suite_ = std::move(refined);
  outputs_ = std::move(outputs);
  compiled_ = std::move(compiled);
  log_ = std::move(log);
  automatic_ = std::move(automatic);
  effective_ = std::move(effective);
  initial_warnings_ = effective_.WarningCount();
  last_timestamp_ = latest;
  loaded_ = true;
  RebuildTables();
}

std::shared_lock<std::shared_mutex> TriageService::ReadLock() const {
  while (pending_writers_.load() > 0) std::this_thread::yield();
  return std::shared_lock(mu_);
}

std::unique_lock<std::shared_mutex> TriageService::WriteLock() {
  ++pending_writers_;
  std::unique_lock lock(mu_);
  --pending_writers_;
  return lock;
}

Timestamp TriageService::NextTimestamp() {
  Timestamp now = Now();
  if (now <= last_timestamp_) now = last_timestamp_ + std::chrono::microseconds(1);
  last_timestamp_ = now;
  return now;
}

void TriageService::RebuildTables() {
  run_ = Tabulate(suite_, effective_, options_.evaluate.denominator);
  stale_ = false;
}

json TriageService::TriageItemJson(std::size_t item, std::size_t system) const {
  const TestItem& test_item = suite_.items()[item];
  const SystemOutput& output = outputs_[system];
  const auto text = output.translations.find(test_item.id);
  const std::string raw = text == output.translations.end() ? "" : text->second;
  json rules = json::array();
  for (std::size_t r = 0; r < compiled_[item].rules.size(); ++r) {
    const CompiledRule& rule = compiled_[item].rules[r];
    const auto spans = MatchSpans(rule.matcher, raw);
    rules.push_back(json{{"index", r},
                         {"polarity", ToString(rule.rule.polarity)},
                         {"kind", ToString(rule.rule.kind)},
                         {"pattern", rule.rule.pattern},
                         {"case_insensitive", rule.rule.case_insensitive},
                         {"matched", !spans.empty()},
                         {"spans", SpansJson(spans)}});
  }
  return json{{"item_id", test_item.id},
              {"system_name", output.system_name},
              {"category", test_item.category},
              {"phenomenon", test_item.phenomenon},
              {"source", test_item.source},
              {"output", raw},
              {"verdict", VerdictJson(effective_.at(item, system))},
              {"automatic_verdict", VerdictJson(automatic_.at(item, system))},
              {"rules", std::move(rules)}};
}

ServiceResponse TriageService::ListWarnings(
    const std::optional<std::string>& offset_text,
    const std::optional<std::string>& limit_text) const {
  std::size_t offset = 0;
  std::size_t limit = kDefaultPageSize;
  if (offset_text) {
    auto parsed = ParseCount(*offset_text);
    if (!parsed) return Fail(400, "offset must be a non-negative integer");
    offset = *parsed;
  }
  if (limit_text) {
    auto parsed = ParseCount(*limit_text);
    if (!parsed || *parsed == 0 || *parsed > kMaxPageSize) {
      return Fail(400, "limit must be an integer between 1 and " +
                           std::to_string(kMaxPageSize));
    }
    limit = *parsed;
  }
  auto lock = ReadLock();
  if (!loaded_) return Fail(409, "no run loaded");
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t i = 0; i < effective_.num_items(); ++i) {
    for (std::size_t s = 0; s < effective_.num_systems(); ++s) {
      if (effective_.at(i, s).is_warning()) cells.emplace_back(i, s);
    }
  }
  const auto& ids = effective_.item_ids();
  const auto& systems = effective_.systems();
  std::sort(cells.begin(), cells.end(), [&](const auto& a, const auto& b) {
    if (ids[a.first] != ids[b.first]) return ids[a.first] < ids[b.first];
    return systems[a.second] < systems[b.second];
  });
  json items = json::array();
  for (std::size_t k = offset; k < cells.size() && k < offset + limit; ++k) {
    items.push_back(TriageItemJson(cells[k].first, cells[k].second));
  }
  return {200, json{{"total", cells.size()},
                    {"offset", offset},
                    {"limit", limit},
                    {"items", std::move(items)}}};
}

ServiceResponse TriageService::PostVerdict(const std::string& item,
                                           const std::string& system,
                                           std::string_view body) {
  auto doc = ParseBody(body);
  if (!doc) return Fail(400, "request body must be a JSON object");
  auto lock = WriteLock();
  if (!loaded_) return Fail(409, "no run loaded");
  const auto key = OptionalString(*doc, "idempotency_key");
  if (key && log_.HasKey(*key)) {
    return {200, json{{"duplicate", true},
                      {"record", json::parse(SerializeEntry(*log_.FindByKey(*key)))},
                      {"queue_length", effective_.WarningCount()}}};
  }
  const auto i = effective_.ItemIndex(item);
  const auto s = effective_.SystemIndex(system);
  if (!i || !s) return Fail(404, "no cell for item '" + item + "' and system '" + system + "'");
  const auto decision_text = OptionalString(*doc, "decision");
  if (!decision_text || (*decision_text != "pass" && *decision_text != "fail")) {
    return Fail(422, "decision must be 'pass' or 'fail'");
  }
  const auto annotator = OptionalString(*doc, "annotator");
  if (!annotator || annotator->empty()) return Fail(422, "annotator is required");
  if (!effective_.at(*i, *s).is_warning() && !options_.override_mode) {
    return Fail(409, "cell is not a warning (start the service with --override to re-annotate)");
  }

  AnnotationRecord record;
  record.timestamp = NextTimestamp();
  record.item_id = item;
  record.system_name = system;
  record.decision = ParseDecision(*decision_text);
  record.annotator = *annotator;
  record.note = OptionalString(*doc, "note");
  record.key = key;
  try {
    log_.Append(record);
  } catch (const Error& e) {
    return Fail(e.kind() == ErrorKind::kIo ? 500 : 422, e.what());
  }
  effective_.at(*i, *s) = Verdict::Manual(
      record.decision == Decision::kPass ? Status::kPass : Status::kFail);
  stale_ = true;
  return {201, json{{"record", json::parse(SerializeEntry(record))},
                    {"queue_length", effective_.WarningCount()},
                    {"stale", true}}};
}

ServiceResponse TriageService::PostRule(const std::string& item, std::string_view body) {
  auto doc = ParseBody(body);
  if (!doc) return Fail(400, "request body must be a JSON object");
  auto lock = WriteLock();
  if (!loaded_) return Fail(409, "no run loaded");
  const auto key = OptionalString(*doc, "idempotency_key");
  if (key && log_.HasKey(*key)) {
    return {200, json{{"duplicate", true},
                      {"record", json::parse(SerializeEntry(*log_.FindByKey(*key)))},
                      {"diff", json::array()}}};
  }
  const auto index = suite_.IndexOf(item);
  if (!index) return Fail(404, "unknown item '" + item + "'");

  RuleRefinement refinement;
  try {
    refinement.added_rule.polarity =
        ParsePolarity(OptionalString(*doc, "polarity").value_or(""));
    refinement.added_rule.kind =
        ParseRuleKind(OptionalString(*doc, "kind").value_or("regex"));
    const auto pattern = OptionalString(*doc, "pattern");
    if (!pattern) return Fail(422, "pattern is required");
    refinement.added_rule.pattern = *pattern;
    refinement.added_rule.case_insensitive = doc->value("case_insensitive", false);
    Pattern::Compile(refinement.added_rule.kind, refinement.added_rule.pattern,
                     refinement.added_rule.case_insensitive);
  } catch (const Error& e) {
    return Fail(422, e.what());
  } catch (const json::exception& e) {
    return Fail(422, e.what());
  }
  const auto annotator = OptionalString(*doc, "annotator");
  if (!annotator || annotator->empty()) return Fail(422, "annotator is required");
  refinement.annotator = *annotator;
  refinement.item_id = item;
  refinement.key = key;
  refinement.timestamp = NextTimestamp();
  try {
    log_.Append(refinement);
  } catch (const Error& e) {
    return Fail(e.kind() == ErrorKind::kIo ? 500 : 422, e.what());
  }

  suite_ = ApplyRefinements(suite_, std::span(&refinement, 1));
  compiled_[*index] = CompileRules(suite_.items()[*index]);
  const auto annotations = log_.annotations();
  const VerdictMatrix before = effective_;
  for (std::size_t s = 0; s < outputs_.size(); ++s) {
    auto it = outputs_[s].translations.find(item);
    if (it != outputs_[s].translations.end()) {
      automatic_.at(*index, s) = Classify(it->second, compiled_[*index]);
    }
  }
  effective_ = ApplyAnnotations(automatic_, annotations);
  json diff = json::array();
  for (std::size_t s = 0; s < effective_.num_systems(); ++s) {
    const Verdict& old_verdict = before.at(*index, s);
    const Verdict& new_verdict = effective_.at(*index, s);
    if (SameOutcome(old_verdict, new_verdict)) continue;
    diff.push_back(json{{"item_id", item},
                        {"system_name", effective_.systems()[s]},
                        {"before", VerdictJson(old_verdict)},
                        {"after", VerdictJson(new_verdict)},
                        {"contradiction", new_verdict.reason == WarningReason::kContradiction}});
  }
  stale_ = true;
  return {201, json{{"record", json::parse(SerializeEntry(refinement))},
                    {"diff", std::move(diff)},
                    {"queue_length", effective_.WarningCount()}}};
}

ServiceResponse TriageService::TestRule(std::string_view body) const {
  auto doc = ParseBody(body);
  if (!doc) return Fail(400, "request body must be a JSON object");
  const auto pattern = OptionalString(*doc, "pattern");
  if (!pattern) return Fail(422, "pattern is required");
  auto samples = doc->find("sample_texts");
  if (samples != doc->end() && !samples->is_array()) {
    return Fail(400, "sample_texts must be an array of strings");
  }
  try {
    const Pattern compiled =
        Pattern::Compile(ParseRuleKind(OptionalString(*doc, "kind").value_or("regex")),
                         *pattern, doc->value("case_insensitive", false));
    json results = json::array();
    if (samples != doc->end()) {
      for (const auto& sample : *samples) {
        if (!sample.is_string()) return Fail(400, "sample_texts must be an array of strings");
        const std::string text = sample.get<std::string>();
        results.push_back(json{{"text", text}, {"spans", SpansJson(MatchSpans(compiled, text))}});
      }
    }
    return {200, json{{"results", std::move(results)}}};
  } catch (const Error& e) {
    return Fail(422, e.what());
  } catch (const json::exception& e) {
    return Fail(422, e.what());
  }
}

json TriageService::ReportBody(Scope scope) const {
  const AccuracyTable& table = run_.table(scope);
  std::vector<ClusterRow> clusters;
  if (run_.denominator == DenominatorMode::kGlobal) {
    clusters = ClusterRows(run_, scope, options_.significance);
  }
  auto cluster_of = [&](const std::string& label) {
    for (const ClusterRow& row : clusters) {
      if (row.label == label) return json(row.best_cluster);
    }
    return json::array();
  };
  json rows = json::array();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    json cells = json::array();
    double sum = 0;
    std::size_t defined = 0;
    for (std::size_t s = 0; s < table.systems.size(); ++s) {
      cells.push_back(CellJson(table.systems[s], table.at(r, s)));
      if (auto acc = table.at(r, s).accuracy()) {
        sum += *acc;
        ++defined;
      }
    }
    rows.push_back(json{{"label", table.rows[r]},
                        {"items", table.row_items[r]},
                        {"cells", std::move(cells)},
                        {"avg", defined ? json(sum / static_cast<double>(defined)) : json(nullptr)},
                        {"best_cluster", cluster_of(table.rows[r])}});
  }
  json micro = json::array(), macro = json::array(), per_system = json::object();
  const auto rates = WarningRatePerSystem(effective_);
  for (std::size_t s = 0; s < run_.systems.size(); ++s) {
    const std::string& system = run_.systems[s];
    micro.push_back(CellJson(system, MicroAverage(run_, system)));
    auto m = MacroAverage(run_, system);
    macro.push_back(json{{"system", system}, {"accuracy", m ? json(*m) : json(nullptr)}});
    per_system[system] = rates[s];
  }
  const std::size_t remaining = effective_.WarningCount();
  const std::size_t resolved =
      initial_warnings_ > remaining ? initial_warnings_ - remaining : 0;
  const double fraction =
      initial_warnings_ == 0
          ? 1.0
          : static_cast<double>(resolved) / static_cast<double>(initial_warnings_);
  return json{{"scope", ToString(scope)},
              {"suite", {{"name", run_.suite_name}, {"version", run_.suite_version}}},
              {"systems", run_.systems},
              {"rows", std::move(rows)},
              {"average_items", std::move(micro)},
              {"average_items_cluster", cluster_of(std::string(kItemsAverageLabel))},
              {"average_categories", std::move(macro)},
              {"valid_items", run_.valid_items.size()},
              {"total_items", run_.items.size()},
              {"warning_rate", WarningRate(effective_)},
              {"warning_rate_per_system", std::move(per_system)},
              {"progress",
               {{"initial_warnings", initial_warnings_},
                {"remaining", remaining},
                {"resolved", resolved},
                {"fraction", fraction}}},
              {"stale", stale_}};
}

ServiceResponse TriageService::Report(const std::optional<std::string>& scope_text) {
  Scope scope = Scope::kCategory;
  if (scope_text) {
    if (*scope_text == "category") {
      scope = Scope::kCategory;
    } else if (*scope_text == "phenomenon") {
      scope = Scope::kPhenomenon;
    } else {
      return Fail(400, "scope must be 'category' or 'phenomenon'");
    }
  }
  {
    auto lock = ReadLock();
    if (!loaded_) return Fail(409, "no run loaded");
    if (!stale_) return {200, ReportBody(scope)};
    if (!options_.auto_recompute) {
      return Fail(409, "accuracy tables are stale; POST /api/recompute first");
    }
  }
  auto lock = WriteLock();
  if (stale_) RebuildTables();
  return {200, ReportBody(scope)};
}

ServiceResponse TriageService::Recompute() {
  auto lock = WriteLock();
  if (!loaded_) return Fail(409, "no run loaded");
  RebuildTables();
  return {200, json{{"stale", false}, {"valid_items", run_.valid_items.size()}}};
}

bool TriageService::loaded() const {
  auto lock = ReadLock();
  return loaded_;
}

std::size_t TriageService::QueueLength() const {
  auto lock = ReadLock();
  return effective_.WarningCount();
}

bool TriageService::stale() const {
  auto lock = ReadLock();
  return stale_;
}

std::string TriageService::StateHash() const {
  auto lock = ReadLock();
  std::string state = SerializeSuite(suite_);
  for (const LogEntry& entry : log_.entries()) state += SerializeEntry(entry) + "\n";
  for (const VerdictMatrix* matrix : {&automatic_, &effective_}) {
    for (std::size_t i = 0; i < matrix->num_items(); ++i) {
      for (std::size_t s = 0; s < matrix->num_systems(); ++s) {
        state += EncodeVerdict(matrix->at(i, s)) + ";";
      }
    }
  }
  state += stale_ ? "stale" : "fresh";
  return Sha256Hex(state);
}

VerdictMatrix TriageService::EffectiveVerdicts() const {
  auto lock = ReadLock();
  return effective_;
}

std::vector<LogEntry> TriageService::LogEntries() const {
  auto lock = ReadLock();
  return log_.entries();
}

void RegisterRoutes(httplib::Server& server, TriageService& service,
                    const std::optional<std::filesystem::path>& static_dir) {
  auto send = [](httplib::Response& res, const ServiceResponse& response) {
    res.status = response.status;
    res.set_content(response.body.dump(), "application/json");
  };
  auto param = [](const httplib::Request& req,
                  const char* name) -> std::optional<std::string> {
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
  };
  server.Get("/api/warnings", [&service, send, param](const httplib::Request& req,
                                                      httplib::Response& res) {
    send(res, service.ListWarnings(param(req, "offset"), param(req, "limit")));
  });
  server.Post(R"(/api/warnings/([^/]+)/([^/]+)/verdict)",
              [&service, send](const httplib::Request& req, httplib::Response& res) {
                send(res, service.PostVerdict(req.matches[1], req.matches[2], req.body));
              });
  server.Post(R"(/api/items/([^/]+)/rules)",
              [&service, send](const httplib::Request& req, httplib::Response& res) {
                send(res, service.PostRule(req.matches[1], req.body));
              });
  server.Post("/api/rules/test", [&service, send](const httplib::Request& req,
                                                  httplib::Response& res) {
    send(res, service.TestRule(req.body));
  });
  server.Get("/api/report", [&service, send, param](const httplib::Request& req,
                                                    httplib::Response& res) {
    send(res, service.Report(param(req, "scope")));
  });
  server.Post("/api/recompute", [&service, send](const httplib::Request&,
                                                 httplib::Response& res) {
    send(res, service.Recompute());
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                                  std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(json{{"error", message}}.dump(), "application/json");
  });
  if (static_dir) server.set_mount_point("/", static_dir->string());
}

}  // namespace tqh
