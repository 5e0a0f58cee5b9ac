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

#ifndef TQH_SERVICE_H_
#define TQH_SERVICE_H_

#include <atomic>
#include <cstddef>
#include <mutex>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tqh/annotation.h"
#include "tqh/evaluator.h"
#include "tqh/rule_engine.h"
#include "tqh/stats.h"
#include "tqh/suite.h"

namespace httplib {
class Server;
}  // namespace httplib

namespace tqh {

struct ServiceOptions {
  bool override_mode = false;   // allow re-annotating resolved cells
  bool auto_recompute = true;   // rebuild stale tables on report reads
  EvaluateOptions evaluate;
  SignificanceConfig significance;
};

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

// State behind the warning-triage API. Every handler takes the request
// parameters as strings and returns an HTTP status with a JSON body, so the
// class can be exercised without a socket.
//
// Readers share a lock; every mutation takes it exclusively and is written
// to the annotation log before the in-memory state changes.
class TriageService {
 public:
  TriageService() = default;

  // Applies refinements and annotations already in `log`, classifies every
  // cell and starts the queue. Throws on inconsistent inputs.
  void Load(TestSuite suite, std::vector<SystemOutput> outputs, AnnotationLog log,
            ServiceOptions options = {});

  // GET /api/warnings?offset&limit
  ServiceResponse ListWarnings(const std::optional<std::string>& offset,
                               const std::optional<std::string>& limit) const;
  // POST /api/warnings/{item}/{system}/verdict
  ServiceResponse PostVerdict(const std::string& item, const std::string& system,
                              std::string_view body);
  // POST /api/items/{item}/rules
  ServiceResponse PostRule(const std::string& item, std::string_view body);
  // POST /api/rules/test
  ServiceResponse TestRule(std::string_view body) const;
  // GET /api/report?scope=...
  ServiceResponse Report(const std::optional<std::string>& scope);
  // POST /api/recompute
  ServiceResponse Recompute();

  bool loaded() const;
  std::size_t QueueLength() const;
  bool stale() const;
  std::string StateHash() const;
  VerdictMatrix EffectiveVerdicts() const;
  std::vector<LogEntry> LogEntries() const;

 private:
  // Readers back off while a writer waits, so a steady stream of report
  // reads cannot starve verdict posts.
  std::shared_lock<std::shared_mutex> ReadLock() const;
  std::unique_lock<std::shared_mutex> WriteLock();

  Timestamp NextTimestamp();
  void RebuildTables();
  nlohmann::json ReportBody(Scope scope) const;
  nlohmann::json TriageItemJson(std::size_t item, std::size_t system) const;

  mutable std::shared_mutex mu_;
  std::atomic<int> pending_writers_{0};
  bool loaded_ = false;
  ServiceOptions options_;
  TestSuite suite_;
  std::vector<SystemOutput> outputs_;
  std::vector<CompiledRuleSet> compiled_;
  AnnotationLog log_;
  VerdictMatrix automatic_;
  VerdictMatrix effective_;
  EvaluationRun run_;
  bool stale_ = false;
  std::size_t initial_warnings_ = 0;
  Timestamp last_timestamp_{};
};

// Registers the API routes on `server`, plus static files from `static_dir`
// at "/" when given.
void RegisterRoutes(httplib::Server& server, TriageService& service,
                    const std::optional<std::filesystem::path>& static_dir = {});

}  // namespace tqh

#endif  // TQH_SERVICE_H_
