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

#include "tqh/suite.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tqh/error.h"
#include "tqh/pattern.h"

namespace tqh {
namespace {

using nlohmann::json;

bool IsBlank(std::string_view text) {
  return text.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

std::string RequireString(const json& record, const char* field,
                          const std::string& where) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_string()) {
    throw DataError(where + ": missing string field '" + field + "'");
  }
  return it->get<std::string>();
}

Rule ParseRule(const json& record, const std::string& where) {
  if (!record.is_object()) throw DataError(where + ": rule is not an object");
  Rule rule;
  rule.polarity = ParsePolarity(RequireString(record, "polarity", where));
  rule.kind = ParseRuleKind(RequireString(record, "kind", where));
  rule.pattern = RequireString(record, "pattern", where);
  if (auto it = record.find("case_insensitive"); it != record.end()) {
    if (!it->is_boolean()) {
      throw DataError(where + ": case_insensitive must be a boolean");
    }
    rule.case_insensitive = it->get<bool>();
  }
  return rule;
}

json RuleToJson(const Rule& rule) {
  return json{{"polarity", ToString(rule.polarity)},
              {"kind", ToString(rule.kind)},
              {"pattern", rule.pattern},
              {"case_insensitive", rule.case_insensitive}};
}

std::string Trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

}  // namespace

TestSuite TestSuite::Create(std::string name, std::string version,
                            std::vector<TestItem> items) {
  TestSuite suite;
  suite.name_ = std::move(name);
  suite.version_ = std::move(version);
  std::unordered_map<std::string, std::string> category_of;
  std::map<std::string, std::size_t> category_pos;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const TestItem& item = items[i];
    if (item.id.empty()) {
      throw DataError("item #" + std::to_string(i + 1) + " has an empty id");
    }
    if (!suite.index_.emplace(item.id, i).second) {
      throw DataError("duplicate item id '" + item.id + "'");
    }
    if (Trim(item.source).empty()) {
      throw DataError("item '" + item.id + "' has an empty source sentence");
    }
    if (item.category.empty() || item.phenomenon.empty()) {
      throw DataError("item '" + item.id +
                      "' needs a category and a phenomenon");
    }
    if (item.rules.empty()) {
      throw DataError("item '" + item.id + "' has no rules");
    }
    for (std::size_t r = 0; r < item.rules.size(); ++r) {
      const Rule& rule = item.rules[r];
      try {
        Pattern::Compile(rule.kind, rule.pattern, rule.case_insensitive);
      } catch (const Error& e) {
        throw DataError("item '" + item.id + "' rule " + std::to_string(r) +
                        ": " + e.what());
      }
    }
    auto [known, inserted] = category_of.emplace(item.phenomenon, item.category);
    if (!inserted && known->second != item.category) {
      throw DataError("phenomenon '" + item.phenomenon +
                      "' appears under categories '" + known->second +
                      "' and '" + item.category + "' (item '" + item.id + "')");
    }

    auto [cat_it, new_category] =
        category_pos.emplace(item.category, suite.categories_.size());
    if (new_category) suite.categories_.push_back({item.category, {}});
    auto& phenomena = suite.categories_[cat_it->second].phenomena;
    auto phen = std::find_if(phenomena.begin(), phenomena.end(),
                             [&](const PhenomenonGroup& g) {
                               return g.name == item.phenomenon;
                             });
    if (phen == phenomena.end()) {
      phenomena.push_back({item.phenomenon, {}});
      phen = std::prev(phenomena.end());
    }
    phen->item_ids.push_back(item.id);
  }
  suite.items_ = std::move(items);
  return suite;
}

const TestItem* TestSuite::Find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &items_[it->second];
}

std::optional<std::size_t> TestSuite::IndexOf(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TestSuite ParseSuite(std::istream& in, std::string_view source_name) {
  std::string name(source_name);
  std::string version;
  std::vector<TestItem> items;
  std::string line;
  std::size_t line_no = 0;
  bool seen_item = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    const std::string where =
        std::string(source_name) + ":" + std::to_string(line_no);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": malformed record: " + e.what());
    }
    if (!record.is_object()) throw DataError(where + ": record is not an object");
    const std::string type = record.value("type", std::string("item"));
    if (type == "suite") {
      if (seen_item) {
        throw DataError(where + ": suite header must precede all items");
      }
      name = RequireString(record, "name", where);
      version = record.value("version", std::string());
      continue;
    }
    if (type != "item") throw DataError(where + ": unknown record type '" + type + "'");
    seen_item = true;
    TestItem item;
    item.id = RequireString(record, "id", where);
    item.category = RequireString(record, "category", where);
    item.phenomenon = RequireString(record, "phenomenon", where);
    item.source = RequireString(record, "source", where);
    auto rules = record.find("rules");
    if (rules == record.end() || !rules->is_array()) {
      throw DataError(where + ": missing rules array");
    }
    for (const auto& rule : *rules) item.rules.push_back(ParseRule(rule, where));
    items.push_back(std::move(item));
  }
  try {
    return TestSuite::Create(std::move(name), std::move(version),
                             std::move(items));
  } catch (const Error& e) {
    throw DataError(std::string(source_name) + ": " + e.what());
  }
}

TestSuite LoadSuite(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open suite file " + path.string());
  return ParseSuite(in, path.string());
}

std::string SerializeSuite(const TestSuite& suite) {
  std::ostringstream out;
  out << json{{"type", "suite"}, {"name", suite.name()}, {"version", suite.version()}}
             .dump()
      << '\n';
  for (const TestItem& item : suite.items()) {
    json rules = json::array();
    for (const Rule& rule : item.rules) rules.push_back(RuleToJson(rule));
    out << json{{"id", item.id},
                {"category", item.category},
                {"phenomenon", item.phenomenon},
                {"source", item.source},
                {"rules", std::move(rules)}}
               .dump()
        << '\n';
  }
  return out.str();
}

std::string EscapeField(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string UnescapeField(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\' || i + 1 == text.size()) {
      out += text[i];
      continue;
    }
    switch (text[++i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case '\\': out += '\\'; break;
      default:
        // Unknown escapes are kept verbatim.
        out += '\\';
        out += text[i];
    }
  }
  return out;
}

SystemOutput ParseOutputs(std::istream& in, const TestSuite& suite,
                          std::string_view default_name,
                          std::string_view source_name) {
  SystemOutput output;
  output.system_name = std::string(default_name);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where =
        std::string(source_name) + ":" + std::to_string(line_no);
    if (line_no == 1 && line.rfind("#system\t", 0) == 0) {
      output.system_name = line.substr(8);
      continue;
    }
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(where + ": expected item_id<TAB>output_text");
    }
    std::string id = line.substr(0, tab);
    if (suite.Find(id) == nullptr) {
      throw DataError(where + ": unknown item id '" + id + "'");
    }
    std::string text = UnescapeField(std::string_view(line).substr(tab + 1));
    if (!output.translations.emplace(id, std::move(text)).second) {
      throw DataError(where + ": duplicate item id '" + id + "'");
    }
  }
  if (output.system_name.empty()) {
    throw DataError(std::string(source_name) + ": empty system name");
  }
  return output;
}

SystemOutput LoadOutputs(const std::filesystem::path& path,
                         const TestSuite& suite,
                         std::optional<std::string> system_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open outputs file " + path.string());
  SystemOutput output =
      ParseOutputs(in, suite, path.stem().string(), path.string());
  if (system_name) {
    if (system_name->empty()) throw DataError("empty system name");
    output.system_name = *system_name;
  }
  return output;
}

std::string SerializeOutputs(const SystemOutput& output) {
  std::string out = "#system\t" + output.system_name + "\n";
  for (const auto& [id, text] : output.translations) {
    out += id;
    out += '\t';
    out += EscapeField(text);
    out += '\n';
  }
  return out;
}

SuiteStats ComputeSuiteStats(const TestSuite& suite) {
  SuiteStats stats;
  for (const CategoryGroup& category : suite.categories()) {
    CategoryCount count{category.name, 0, {}};
    for (const PhenomenonGroup& phenomenon : category.phenomena) {
      count.phenomena.push_back({phenomenon.name, phenomenon.item_ids.size()});
      count.items += phenomenon.item_ids.size();
    }
    stats.total += count.items;
    stats.categories.push_back(std::move(count));
  }
  return stats;
}

}  // namespace tqh
