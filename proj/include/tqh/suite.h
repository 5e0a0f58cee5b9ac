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

#ifndef TQH_SUITE_H_
#define TQH_SUITE_H_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tqh/rule.h"

namespace tqh {

// One source sentence with the rules that adjudicate its translations.
struct TestItem {
  std::string id;
  std::string category;
  std::string phenomenon;
  std::string source;
  std::vector<Rule> rules;

  bool operator==(const TestItem&) const = default;
};

struct PhenomenonGroup {
  std::string name;
  std::vector<std::string> item_ids;
};

struct CategoryGroup {
  std::string name;
  std::vector<PhenomenonGroup> phenomena;
};

// An immutable, validated test suite. Categories and phenomena are kept in
// order of first appearance in the item list.
class TestSuite {
 public:
  TestSuite() = default;

  // Validates every invariant (unique non-empty ids, one category per
  // phenomenon, non-empty source, at least one rule, compilable patterns)
  // and throws a data error naming the offending item otherwise.
  static TestSuite Create(std::string name, std::string version,
                          std::vector<TestItem> items);

  const std::string& name() const { return name_; }
  const std::string& version() const { return version_; }
  const std::vector<TestItem>& items() const { return items_; }
  const std::vector<CategoryGroup>& categories() const { return categories_; }

  const TestItem* Find(std::string_view id) const;
  std::optional<std::size_t> IndexOf(std::string_view id) const;

  bool operator==(const TestSuite& other) const {
    return name_ == other.name_ && version_ == other.version_ &&
           items_ == other.items_;
  }

 private:
  std::string name_;
  std::string version_;
  std::vector<TestItem> items_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<CategoryGroup> categories_;
};

// Translations produced by one system, keyed by item id. Text is stored
// exactly as read.
struct SystemOutput {
  std::string system_name;
  std::map<std::string, std::string> translations;

  bool operator==(const SystemOutput&) const = default;
};

struct PhenomenonCount {
  std::string name;
  std::size_t items = 0;
};

struct CategoryCount {
  std::string name;
  std::size_t items = 0;
  std::vector<PhenomenonCount> phenomena;
};

struct SuiteStats {
  std::size_t total = 0;
  std::vector<CategoryCount> categories;
};

// Suite files are JSON lines: an optional header record
//   {"type":"suite","name":...,"version":...}
// followed by one item record per line
//   {"id":...,"category":...,"phenomenon":...,"source":...,
//    "rules":[{"polarity":...,"kind":...,"pattern":...,
//              "case_insensitive":false}]}
// Blank lines are ignored. Errors carry the 1-based line number.
TestSuite ParseSuite(std::istream& in, std::string_view source_name = "suite");
TestSuite LoadSuite(const std::filesystem::path& path);
std::string SerializeSuite(const TestSuite& suite);

// Outputs files are TSV: item_id<TAB>text, with \t, \n, \r and \\ escaped
// inside the text. An optional first line "#system<TAB>NAME" names the
// system; otherwise `default_name` is used.
SystemOutput ParseOutputs(std::istream& in, const TestSuite& suite,
                          std::string_view default_name,
                          std::string_view source_name = "outputs");
SystemOutput LoadOutputs(const std::filesystem::path& path,
                         const TestSuite& suite,
                         std::optional<std::string> system_name = {});
std::string SerializeOutputs(const SystemOutput& output);

std::string EscapeField(std::string_view text);
std::string UnescapeField(std::string_view text);

SuiteStats ComputeSuiteStats(const TestSuite& suite);

}  // namespace tqh

#endif  // TQH_SUITE_H_
