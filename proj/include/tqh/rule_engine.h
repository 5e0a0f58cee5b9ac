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

#ifndef TQH_RULE_ENGINE_H_
#define TQH_RULE_ENGINE_H_

#include <string>
#include <string_view>
#include <vector>

#include "tqh/pattern.h"
#include "tqh/rule.h"
#include "tqh/suite.h"
#include "tqh/verdict.h"

namespace tqh {

// Trims leading and trailing ASCII whitespace. Internal characters are left
// untouched, so double spaces and typographic quotes survive.
std::string NormalizeOutput(std::string_view text);

struct CompiledRule {
  Rule rule;
  Pattern matcher;
};

// Matchers for one item, in the same order as the item's rules.
struct CompiledRuleSet {
  std::string item_id;
  std::vector<CompiledRule> rules;
};

// Throws a data error naming the item id, rule index and pattern when a
// rule does not compile.
CompiledRuleSet CompileRules(const TestItem& item);

// Adjudicates one raw output against an item's rules:
//   positive only -> pass, negative only -> fail,
//   both -> warning(contradiction), neither -> warning(no-match).
Verdict Classify(std::string_view output, const CompiledRuleSet& rules);

// Matches of `pattern` in `raw`, evaluated on the normalized text and
// reported as byte offsets into `raw`.
std::vector<MatchSpan> MatchSpans(const Pattern& pattern, std::string_view raw);

}  // namespace tqh

#endif  // TQH_RULE_ENGINE_H_
