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

#ifndef TQH_TESTS_FIXTURES_RANDOM_SUITE_H_
#define TQH_TESTS_FIXTURES_RANDOM_SUITE_H_

#include <cctype>
#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tqh/suite.h"

namespace tqh::testing {

// Rule shapes the generator emits. Each has a plain-string meaning that an
// independent matcher can evaluate without a regex engine.
enum class Shape { kWord, kAlternation, kPrefix, kLiteral };

struct RuleSpec {
  bool positive = true;
  Shape shape = Shape::kWord;
  std::vector<std::string> words;  // one sentence for kLiteral
  bool case_insensitive = false;
};

struct ItemSpec {
  std::string id;
  std::string category;
  std::string phenomenon;
  std::vector<RuleSpec> rules;
};

struct RandomCase {
  std::vector<ItemSpec> items;
  std::vector<std::string> systems;
  // system -> item id -> raw output; absent ids are missing outputs
  std::map<std::string, std::map<std::string, std::string>> outputs;
};

inline const std::vector<std::string>& Vocabulary() {
  static const std::vector<std::string> words = {"cat", "dog", "house", "tree",
                                                 "red", "blue", "runs", "sleeps"};
  return words;
}

inline std::string RenderPattern(const RuleSpec& rule) {
  switch (rule.shape) {
    case Shape::kWord:
      return "\\b" + rule.words[0] + "\\b";
    case Shape::kAlternation: {
      std::string out;
      for (const std::string& word : rule.words) out += (out.empty() ? "" : "|") + word;
      return out;
    }
    case Shape::kPrefix:
      return "^" + rule.words[0];
    case Shape::kLiteral:
      return rule.words[0];
  }
  return {};
}

class CaseGenerator {
 public:
  explicit CaseGenerator(unsigned seed) : rng_(seed) {}

  RandomCase Next(std::size_t max_items = 50, std::size_t max_systems = 5,
                  double missing_rate = 0.0) {
    RandomCase out;
    const std::size_t num_items = Uniform(1, max_items);
    const std::size_t num_systems = Uniform(1, max_systems);
    for (std::size_t s = 0; s < num_systems; ++s) out.systems.push_back("sys" + std::to_string(s));
    std::vector<std::string> sentences;
    for (std::size_t i = 0; i < num_items; ++i) {
      ItemSpec item;
      item.id = "it" + std::to_string(i);
      const std::size_t phenomenon = Uniform(0, 5);
      item.phenomenon = "phen" + std::to_string(phenomenon);
      item.category = "cat" + std::to_string(phenomenon % 3);
      const std::size_t num_rules = Uniform(1, 3);
      for (std::size_t r = 0; r < num_rules; ++r) item.rules.push_back(RandomRule());
      out.items.push_back(std::move(item));
    }
    for (const std::string& system : out.systems) {
      for (const ItemSpec& item : out.items) {
        if (Chance(missing_rate)) continue;
        out.outputs[system][item.id] = RandomOutput(item);
      }
    }
    return out;
  }

  std::size_t Uniform(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool Chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  std::mt19937& rng() { return rng_; }

 private:
  std::string Word() { return Vocabulary()[Uniform(0, Vocabulary().size() - 1)]; }

  std::string Sentence() {
    std::string out;
    const std::size_t n = Uniform(1, 4);
    for (std::size_t i = 0; i < n; ++i) {
      std::string word = Word();
      if (Chance(0.2)) word[0] = static_cast<char>(word[0] - 'a' + 'A');
      if (Chance(0.1)) word += "s";
      out += (i ? " " : "") + word;
    }
    return out;
  }

  RuleSpec RandomRule() {
    RuleSpec rule;
    rule.positive = Chance(0.5);
    rule.case_insensitive = Chance(0.3);
    switch (Uniform(0, 3)) {
      case 0:
        rule.shape = Shape::kWord;
        rule.words = {Word()};
        break;
      case 1:
        rule.shape = Shape::kAlternation;
        rule.words = {Word(), Word()};
        break;
      case 2:
        rule.shape = Shape::kPrefix;
        rule.words = {Word()};
        break;
      default:
        rule.shape = Shape::kLiteral;
        rule.words = {Sentence()};
        break;
    }
    return rule;
  }

  std::string RandomOutput(const ItemSpec& item) {
    std::string text;
    const RuleSpec& rule = item.rules[Uniform(0, item.rules.size() - 1)];
    if (rule.shape == Shape::kLiteral && Chance(0.4)) {
      text = rule.words[0];
      if (Chance(0.3)) {
        for (char& c : text) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      }
    } else {
      text = Sentence();
    }
    if (Chance(0.2)) text = " \t" + text;
    if (Chance(0.2)) text += "\n";
    return text;
  }

  std::mt19937 rng_;
};

inline TestSuite BuildSuite(const RandomCase& c) {
  std::vector<TestItem> items;
  for (const ItemSpec& spec : c.items) {
    TestItem item;
    item.id = spec.id;
    item.category = spec.category;
    item.phenomenon = spec.phenomenon;
    item.source = "source " + spec.id;
    for (const RuleSpec& rule : spec.rules) {
      item.rules.push_back({rule.positive ? Polarity::kPositive : Polarity::kNegative,
                            rule.shape == Shape::kLiteral ? RuleKind::kLiteral : RuleKind::kRegex,
                            RenderPattern(rule), rule.case_insensitive});
    }
    items.push_back(std::move(item));
  }
  return TestSuite::Create("random", "1", std::move(items));
}

inline std::vector<SystemOutput> BuildOutputs(const RandomCase& c) {
  std::vector<SystemOutput> outputs;
  for (const std::string& system : c.systems) {
    SystemOutput output{system, {}};
    auto it = c.outputs.find(system);
    if (it != c.outputs.end()) {
      for (const auto& [id, text] : it->second) output.translations.emplace(id, text);
    }
    outputs.push_back(std::move(output));
  }
  return outputs;
}

}  // namespace tqh::testing

#endif  // TQH_TESTS_FIXTURES_RANDOM_SUITE_H_
