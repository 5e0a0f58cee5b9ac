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

#ifndef TQH_ANNOTATION_H_
#define TQH_ANNOTATION_H_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include "tqh/rule.h"
#include "tqh/suite.h"
#include "tqh/verdict.h"

namespace tqh {

using Timestamp =
    std::chrono::time_point<std::chrono::system_clock, std::chrono::microseconds>;

// ISO-8601 UTC with microseconds, e.g. 2019-06-01T12:00:00.000000Z.
std::string FormatTimestamp(Timestamp ts);
Timestamp ParseTimestamp(std::string_view text);
Timestamp Now();

enum class Decision { kPass, kFail };

std::string_view ToString(Decision decision);
Decision ParseDecision(std::string_view text);

// A human resolution of one (item, system) cell. The latest record for a
// cell wins.
struct AnnotationRecord {
  Timestamp timestamp{};
  std::string item_id;
  std::string system_name;
  Decision decision = Decision::kFail;
  std::string annotator;
  std::optional<std::string> note;
  std::optional<std::string> key;  // idempotency key

  bool operator==(const AnnotationRecord&) const = default;
};

// A rule appended to an item after inspecting its warnings.
struct RuleRefinement {
  Timestamp timestamp{};
  std::string item_id;
  Rule added_rule;
  std::string annotator;
  std::optional<std::string> key;

  bool operator==(const RuleRefinement&) const = default;
};

using LogEntry = std::variant<AnnotationRecord, RuleRefinement>;

// One JSON line per entry, with a "type" discriminator of "verdict" or
// "refinement".
std::string SerializeEntry(const LogEntry& entry);
LogEntry ParseEntry(std::string_view line);

// Append-only annotation log. A log opened on a file writes every appended
// entry through to disk and fsyncs before Append returns; an in-memory log
// only keeps entries.
//
// Entries carrying an idempotency key that was already seen are dropped on
// load, so a retried write that reached the disk twice replays once.
class AnnotationLog {
 public:
  AnnotationLog() = default;

  // Loads `path` if it exists (creating it otherwise) and keeps it open for
  // appends.
  static AnnotationLog Open(const std::filesystem::path& path);
  static AnnotationLog Parse(std::istream& in, std::string_view source_name = "log");

  // Validates the entry and appends it. Throws a data error for an invalid
  // record and an I/O error when the write or fsync fails.
  void Append(const LogEntry& entry);

  bool HasKey(std::string_view key) const;
  const LogEntry* FindByKey(std::string_view key) const;

  const std::vector<LogEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::vector<AnnotationRecord> annotations() const;
  std::vector<RuleRefinement> refinements() const;
  const std::optional<std::filesystem::path>& path() const { return path_; }

 private:
  // Returns false when the entry's key is a duplicate.
  bool Admit(const LogEntry& entry);

  std::optional<std::filesystem::path> path_;
  std::vector<LogEntry> entries_;
  std::unordered_set<std::string> keys_;
};

// Throws a data error if the entry violates a record invariant.
void ValidateEntry(const LogEntry& entry);

struct ApplyReport {
  std::size_t applied = 0;
  std::size_t dangling = 0;
  std::vector<std::string> diagnostics;
};

// Overlays manual decisions on a verdict matrix. For each cell the record
// with the latest timestamp wins (ties go to the later record). Records
// naming an unknown item or system are skipped and counted in `report`.
VerdictMatrix ApplyAnnotations(const VerdictMatrix& verdicts,
                               std::span<const AnnotationRecord> records,
                               ApplyReport* report = nullptr);

// Appends each refinement's rule to its item, in order. Throws a data error
// for an unknown item or a pattern that does not compile.
TestSuite ApplyRefinements(const TestSuite& suite,
                           std::span<const RuleRefinement> refinements);

}  // namespace tqh

#endif  // TQH_ANNOTATION_H_
