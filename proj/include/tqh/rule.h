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

#ifndef TQH_RULE_H_
#define TQH_RULE_H_

#include <string>
#include <string_view>

namespace tqh {

enum class Polarity { kPositive, kNegative };
enum class RuleKind { kRegex, kLiteral };

// A control rule attached to a test item. A positive rule that matches
// signals a correct translation of the phenomenon, a negative one an
// incorrect translation.
struct Rule {
  Polarity polarity = Polarity::kPositive;
  RuleKind kind = RuleKind::kRegex;
  std::string pattern;
  bool case_insensitive = false;

  bool operator==(const Rule&) const = default;
};

std::string_view ToString(Polarity polarity);
std::string_view ToString(RuleKind kind);

// Parse the on-disk spellings ("positive"/"negative", "regex"/"literal").
// Throw a data error on anything else.
Polarity ParsePolarity(std::string_view text);
RuleKind ParseRuleKind(std::string_view text);

}  // namespace tqh

#endif  // TQH_RULE_H_
