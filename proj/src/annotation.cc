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

#include "tqh/annotation.h"

#include <fcntl.h>
#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <map>
#include <utility>

#include "json.hpp"
#include "tqh/error.h"
#include "tqh/pattern.h"

namespace tqh {
namespace {

using nlohmann::json;

// Closes the descriptor on scope exit.
class FileDescriptor {
 public:
  explicit FileDescriptor(int fd) : fd_(fd) {}
  FileDescriptor(const FileDescriptor&) = delete;
  FileDescriptor& operator=(const FileDescriptor&) = delete;
  ~FileDescriptor() {
    if (fd_ >= 0) ::close(fd_);
  }
  int get() const { return fd_; }

 private:
  int fd_;
};

std::string RequireString(const json& record, const char* field) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_string()) {
    throw DataError(std::string("missing string field '") + field + "'");
  }
  return it->get<std::string>();
}

std::optional<std::string> OptionalString(const json& record, const char* field) {
  auto it = record.find(field);
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw DataError(std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

const std::string* KeyOf(const LogEntry& entry) {
  return std::visit(
      [](const auto& e) -> const std::string* { return e.key ? &*e.key : nullptr; },
      entry);
}

}  // namespace

std::string FormatTimestamp(Timestamp ts) {
  using namespace std::chrono;
  const auto secs = floor<seconds>(ts);
  const auto micros = duration_cast<microseconds>(ts - secs).count();
  const std::time_t t = system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<long long>(micros));
  return buf;
}

Timestamp ParseTimestamp(std::string_view text) {
  std::tm tm{};
  int consumed = 0;
  const std::string s(text);
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &tm.tm_year, &tm.tm_mon,
                  &tm.tm_mday, &tm.tm_hour, &tm.tm_min, &tm.tm_sec,
                  &consumed) != 6) {
    throw DataError("malformed timestamp '" + s + "'");
  }
  long long micros = 0;
  std::size_t pos = static_cast<std::size_t>(consumed);
  if (pos < s.size() && s[pos] == '.') {
    int digits = 0;
    for (++pos; pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]));
         ++pos) {
      if (digits < 6) {
        micros = micros * 10 + (s[pos] - '0');
        ++digits;
      }
    }
    for (; digits < 6; ++digits) micros *= 10;
  }
  if (pos + 1 != s.size() || s[pos] != 'Z') {
    throw DataError("timestamp '" + s + "' must be UTC and end in 'Z'");
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  const std::time_t secs = timegm(&tm);
  return Timestamp(std::chrono::seconds(secs)) + std::chrono::microseconds(micros);
}

Timestamp Now() {
  return std::chrono::time_point_cast<std::chrono::microseconds>(
      std::chrono::system_clock::now());
}

std::string_view ToString(Decision decision) {
  return decision == Decision::kPass ? "pass" : "fail";
}

Decision ParseDecision(std::string_view text) {
  if (text == "pass") return Decision::kPass;
  if (text == "fail") return Decision::kFail;
  throw DataError("decision must be 'pass' or 'fail', got '" +
                  std::string(text) + "'");
}

std::string SerializeEntry(const LogEntry& entry) {
  json record;
  if (const auto* a = std::get_if<AnnotationRecord>(&entry)) {
    record = {{"type", "verdict"},
              {"timestamp", FormatTimestamp(a->timestamp)},
              {"item_id", a->item_id},
              {"system_name", a->system_name},
              {"decision", ToString(a->decision)},
              {"annotator", a->annotator}};
    if (a->note) record["note"] = *a->note;
    if (a->key) record["key"] = *a->key;
  } else {
    const auto& r = std::get<RuleRefinement>(entry);
    record = {{"type", "refinement"},
              {"timestamp", FormatTimestamp(r.timestamp)},
              {"item_id", r.item_id},
              {"rule",
               {{"polarity", ToString(r.added_rule.polarity)},
                {"kind", ToString(r.added_rule.kind)},
                {"pattern", r.added_rule.pattern},
                {"case_insensitive", r.added_rule.case_insensitive}}},
              {"annotator", r.annotator}};
    if (r.key) record["key"] = *r.key;
  }
  return record.dump();
}

LogEntry ParseEntry(std::string_view line) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed log record: ") + e.what());
  }
  if (!record.is_object()) throw DataError("log record is not an object");
  const std::string type = RequireString(record, "type");
  if (type == "verdict") {
    AnnotationRecord a;
    a.timestamp = ParseTimestamp(RequireString(record, "timestamp"));
    a.item_id = RequireString(record, "item_id");
    a.system_name = RequireString(record, "system_name");
    a.decision = ParseDecision(RequireString(record, "decision"));
    a.annotator = RequireString(record, "annotator");
    a.note = OptionalString(record, "note");
    a.key = OptionalString(record, "key");
    return a;
  }
  if (type == "refinement") {
    RuleRefinement r;
    r.timestamp = ParseTimestamp(RequireString(record, "timestamp"));
    r.item_id = RequireString(record, "item_id");
    auto rule = record.find("rule");
    if (rule == record.end() || !rule->is_object()) {
      throw DataError("refinement record needs a rule object");
    }
    r.added_rule.polarity = ParsePolarity(RequireString(*rule, "polarity"));
    r.added_rule.kind = ParseRuleKind(RequireString(*rule, "kind"));
    r.added_rule.pattern = RequireString(*rule, "pattern");
    r.added_rule.case_insensitive = rule->value("case_insensitive", false);
    r.annotator = RequireString(record, "annotator");
    r.key = OptionalString(record, "key");
    return r;
  }
  throw DataError("unknown log record type '" + type + "'");
}

void ValidateEntry(const LogEntry& entry) {
  if (const auto* a = std::get_if<AnnotationRecord>(&entry)) {
    if (a->item_id.empty() || a->system_name.empty()) {
      throw DataError("annotation needs an item id and a system name");
    }
    return;
  }
  const auto& r = std::get<RuleRefinement>(entry);
  if (r.item_id.empty()) throw DataError("refinement needs an item id");
  Pattern::Compile(r.added_rule.kind, r.added_rule.pattern,
                   r.added_rule.case_insensitive);
}

AnnotationLog AnnotationLog::Parse(std::istream& in, std::string_view source_name) {
  AnnotationLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      LogEntry entry = ParseEntry(line);
      ValidateEntry(entry);
      if (log.Admit(entry)) log.entries_.push_back(std::move(entry));
    } catch (const Error& e) {
      throw DataError(std::string(source_name) + ":" + std::to_string(line_no) +
                      ": " + e.what());
    }
  }
  return log;
}

AnnotationLog AnnotationLog::Open(const std::filesystem::path& path) {
  AnnotationLog log;
  if (std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read annotation log " + path.string());
    log = Parse(in, path.string());
  } else {
    FileDescriptor fd(::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644));
    if (fd.get() < 0) {
      throw IoError("cannot create annotation log " + path.string() + ": " +
                    std::strerror(errno));
    }
  }
  log.path_ = path;
  return log;
}

bool AnnotationLog::Admit(const LogEntry& entry) {
  const std::string* key = KeyOf(entry);
  return key == nullptr || keys_.insert(*key).second;
}

bool AnnotationLog::HasKey(std::string_view key) const {
  return keys_.count(std::string(key)) > 0;
}

const LogEntry* AnnotationLog::FindByKey(std::string_view key) const {
  for (const LogEntry& entry : entries_) {
    const std::string* k = KeyOf(entry);
    if (k != nullptr && *k == key) return &entry;
  }
  return nullptr;
}

void AnnotationLog::Append(const LogEntry& entry) {
  ValidateEntry(entry);
  if (const std::string* key = KeyOf(entry); key != nullptr && HasKey(*key)) {
    throw DataError("duplicate idempotency key '" + *key + "'");
  }
  if (path_) {
    const std::string line = SerializeEntry(entry) + "\n";
    FileDescriptor fd(::open(path_->c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644));
    if (fd.get() < 0) {
      throw IoError("cannot open annotation log " + path_->string() + ": " +
                    std::strerror(errno));
    }
    std::size_t written = 0;
    while (written < line.size()) {
      const ssize_t n = ::write(fd.get(), line.data() + written, line.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw IoError("write to annotation log failed: " +
                      std::string(std::strerror(errno)));
      }
      written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd.get()) != 0) {
      throw IoError("fsync of annotation log failed: " +
                    std::string(std::strerror(errno)));
    }
  }
  Admit(entry);
  entries_.push_back(entry);
}

std::vector<AnnotationRecord> AnnotationLog::annotations() const {
  std::vector<AnnotationRecord> out;
  for (const LogEntry& entry : entries_) {
    if (const auto* a = std::get_if<AnnotationRecord>(&entry)) out.push_back(*a);
  }
  return out;
}

std::vector<RuleRefinement> AnnotationLog::refinements() const {
  std::vector<RuleRefinement> out;
  for (const LogEntry& entry : entries_) {
    if (const auto* r = std::get_if<RuleRefinement>(&entry)) out.push_back(*r);
  }
  return out;
}

VerdictMatrix ApplyAnnotations(const VerdictMatrix& verdicts,
                               std::span<const AnnotationRecord> records,
                               ApplyReport* report) {
  ApplyReport local;
  ApplyReport& out = report != nullptr ? *report : local;
  // Winning record per cell: (timestamp, position) is the sort key.
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> winner;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const AnnotationRecord& record = records[i];
    const auto item = verdicts.ItemIndex(record.item_id);
    const auto system = verdicts.SystemIndex(record.system_name);
    if (!item || !system) {
      ++out.dangling;
      out.diagnostics.push_back("skipping annotation for unknown " +
                                std::string(item ? "system '" + record.system_name
                                                 : "item '" + record.item_id) +
                                "'");
      continue;
    }
    auto [it, inserted] = winner.emplace(std::make_pair(*item, *system), i);
    if (!inserted && records[it->second].timestamp <= record.timestamp) {
      it->second = i;
    }
  }
  VerdictMatrix resolved = verdicts;
  for (const auto& [cell, index] : winner) {
    resolved.at(cell.first, cell.second) = Verdict::Manual(
        records[index].decision == Decision::kPass ? Status::kPass : Status::kFail);
    ++out.applied;
  }
  return resolved;
}

TestSuite ApplyRefinements(const TestSuite& suite,
                           std::span<const RuleRefinement> refinements) {
  if (refinements.empty()) return suite;
  std::vector<TestItem> items = suite.items();
  for (const RuleRefinement& refinement : refinements) {
    const auto index = suite.IndexOf(refinement.item_id);
    if (!index) {
      throw DataError("refinement names unknown item '" + refinement.item_id + "'");
    }
    try {
      Pattern::Compile(refinement.added_rule.kind, refinement.added_rule.pattern,
                       refinement.added_rule.case_insensitive);
    } catch (const Error& e) {
      throw DataError("refinement for item '" + refinement.item_id + "': " + e.what());
    }
    items[*index].rules.push_back(refinement.added_rule);
  }
  return TestSuite::Create(suite.name(), suite.version(), std::move(items));
}

}  // namespace tqh
