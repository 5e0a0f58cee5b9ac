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

#ifndef TQH_PATTERN_H_
#define TQH_PATTERN_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "tqh/rule.h"

namespace tqh {

// Half-open byte range [begin, end) into a UTF-8 string.
struct MatchSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const MatchSpan&) const = default;
};

// Returns a description of the first construct outside the supported regex
// dialect (backreferences, lookaround, named groups), or nullopt.
std::optional<std::string> FindUnsupportedConstruct(std::string_view pattern);

// A compiled matcher for one rule pattern. Regex patterns match as an
// unanchored search; literal patterns match only the whole text.
//
// Instances are immutable and cheap to copy; the compiled automaton is
// shared.
class Pattern {
 public:
  // Throws a data error whose message carries the compiler diagnostic.
  static Pattern Compile(RuleKind kind, std::string_view pattern,
                         bool case_insensitive);

  bool Matches(std::string_view text) const;

  // All non-overlapping matches, left to right. Empty matches are skipped.
  std::vector<MatchSpan> FindAll(std::string_view text) const;

  RuleKind kind() const { return kind_; }
  const std::string& source() const { return source_; }
  bool case_insensitive() const { return case_insensitive_; }

 private:
  Pattern(RuleKind kind, std::string source, bool case_insensitive,
          std::shared_ptr<const std::regex> regex)
      : kind_(kind),
        source_(std::move(source)),
        case_insensitive_(case_insensitive),
        regex_(std::move(regex)) {}

  bool LiteralEquals(std::string_view text) const;

  RuleKind kind_;
  std::string source_;
  bool case_insensitive_;
  std::shared_ptr<const std::regex> regex_;
};

}  // namespace tqh

#endif  // TQH_PATTERN_H_
