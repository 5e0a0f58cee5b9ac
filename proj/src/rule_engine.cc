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

#include "tqh/rule_engine.h"

#include "tqh/error.h"

namespace tqh {
namespace {

constexpr std::string_view kWhitespace = " \t\n\r\f\v";

}  // namespace

std::string NormalizeOutput(std::string_view text) {
  const auto first = text.find_first_not_of(kWhitespace);
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(kWhitespace);
  return std::string(text.substr(first, last - first + 1));
}

CompiledRuleSet CompileRules(const TestItem& item) {
  CompiledRuleSet compiled;
  compiled.item_id = item.id;
  compiled.rules.reserve(item.rules.size());
  for (std::size_t i = 0; i < item.rules.size(); ++i) {
    const Rule& rule = item.rules[i];
    try {
      compiled.rules.push_back(
          {rule, Pattern::Compile(rule.kind, rule.pattern, rule.case_insensitive)});
    } catch (const Error& e) {
      throw DataError("item '" + item.id + "' rule " + std::to_string(i) +
                      " (" + rule.pattern + "): " + e.what());
    }
  }
  return compiled;
}

Verdict Classify(std::string_view output, const CompiledRuleSet& rules) {
  const std::string normalized = NormalizeOutput(output);
  bool positive = false;
  bool negative = false;
  Verdict verdict;
  for (std::size_t i = 0; i < rules.rules.size(); ++i) {
    const CompiledRule& rule = rules.rules[i];
    if (!rule.matcher.Matches(normalized)) continue;
    verdict.matched_rules.push_back(static_cast<int>(i));
    (rule.rule.polarity == Polarity::kPositive ? positive : negative) = true;
  }
  if (positive && !negative) {
    verdict.status = Status::kPass;
    verdict.reason.reset();
  } else if (negative && !positive) {
    verdict.status = Status::kFail;
    verdict.reason.reset();
  } else {
    verdict.status = Status::kWarning;
    verdict.reason =
        positive ? WarningReason::kContradiction : WarningReason::kNoMatch;
  }
  return verdict;
}

std::vector<MatchSpan> MatchSpans(const Pattern& pattern, std::string_view raw) {
  const auto first = raw.find_first_not_of(kWhitespace);
  const std::size_t offset = first == std::string_view::npos ? 0 : first;
  std::vector<MatchSpan> spans = pattern.FindAll(NormalizeOutput(raw));
  for (MatchSpan& span : spans) {
    span.begin += offset;
    span.end += offset;
  }
  return spans;
}

}  // namespace tqh
