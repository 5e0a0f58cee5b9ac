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

#include "tqh/pattern.h"

#include <algorithm>
#include <cctype>

#include "tqh/error.h"

namespace tqh {
namespace {

std::string DescribeRegexError(std::regex_constants::error_type code) {
  using namespace std::regex_constants;
  switch (code) {
    case error_paren:
      return "unbalanced parenthesis group";
    case error_brack:
      return "unbalanced bracket expression";
    case error_brace:
      return "unbalanced brace in repetition";
    case error_badbrace:
      return "invalid repetition bounds";
    case error_badrepeat:
      return "repetition operator without operand";
    case error_escape:
      return "invalid escape sequence";
    case error_range:
      return "invalid character range";
    case error_ctype:
      return "invalid character class name";
    case error_collate:
      return "invalid collating element";
    case error_backref:
      return "invalid back reference";
    case error_complexity:
    case error_stack:
    case error_space:
      return "pattern too complex";
    default:
      return "invalid pattern";
  }
}

char FoldAscii(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

}  // namespace

std::string_view ToString(Polarity polarity) {
  return polarity == Polarity::kPositive ? "positive" : "negative";
}

std::string_view ToString(RuleKind kind) {
  return kind == RuleKind::kRegex ? "regex" : "literal";
}

Polarity ParsePolarity(std::string_view text) {
  if (text == "positive") return Polarity::kPositive;
  if (text == "negative") return Polarity::kNegative;
  throw DataError("unknown rule polarity '" + std::string(text) +
                  "' (expected positive or negative)");
}

RuleKind ParseRuleKind(std::string_view text) {
  if (text == "regex") return RuleKind::kRegex;
  if (text == "literal") return RuleKind::kLiteral;
  throw DataError("unknown rule kind '" + std::string(text) +
                  "' (expected regex or literal)");
}

std::optional<std::string> FindUnsupportedConstruct(std::string_view pattern) {
  bool in_class = false;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const char c = pattern[i];
    if (c == '\\') {
      if (i + 1 >= pattern.size()) return std::nullopt;  // compiler reports it
      const char next = pattern[i + 1];
      if (next >= '1' && next <= '9') {
        return "backreference \\" + std::string(1, next) + " at offset " +
               std::to_string(i) + " is not supported";
      }
      if (next == 'k' && i + 2 < pattern.size() && pattern[i + 2] == '<') {
        return "named backreference at offset " + std::to_string(i) +
               " is not supported";
      }
      ++i;
      continue;
    }
    if (in_class) {
      if (c == ']') in_class = false;
      continue;
    }
    if (c == '[') {
      in_class = true;
      // A ']' directly after '[' or '[^' is a literal member.
      if (i + 1 < pattern.size() && pattern[i + 1] == '^') ++i;
      if (i + 1 < pattern.size() && pattern[i + 1] == ']') ++i;
      continue;
    }
    if (c == '(' && i + 1 < pattern.size() && pattern[i + 1] == '?') {
      const char kind = i + 2 < pattern.size() ? pattern[i + 2] : '\0';
      if (kind == ':') continue;
      if (kind == '=' || kind == '!') {
        return "lookahead at offset " + std::to_string(i) +
               " is not supported";
      }
      if (kind == '<') {
        return "lookbehind or named group at offset " + std::to_string(i) +
               " is not supported";
      }
      return "group modifier at offset " + std::to_string(i) +
             " is not supported";
    }
  }
  return std::nullopt;
}

Pattern Pattern::Compile(RuleKind kind, std::string_view pattern,
                         bool case_insensitive) {
  if (kind == RuleKind::kLiteral) {
    if (pattern.empty()) throw DataError("literal pattern is empty");
    return Pattern(kind, std::string(pattern), case_insensitive, nullptr);
  }
  if (auto unsupported = FindUnsupportedConstruct(pattern)) {
    throw DataError("cannot compile /" + std::string(pattern) +
                    "/: " + *unsupported);
  }
  auto flags = std::regex_constants::ECMAScript;
  if (case_insensitive) flags |= std::regex_constants::icase;
  try {
    auto regex = std::make_shared<const std::regex>(pattern.begin(),
                                                    pattern.end(), flags);
    return Pattern(kind, std::string(pattern), case_insensitive,
                   std::move(regex));
  } catch (const std::regex_error& e) {
    throw DataError("cannot compile /" + std::string(pattern) +
                    "/: " + DescribeRegexError(e.code()));
  }
}

bool Pattern::LiteralEquals(std::string_view text) const {
  if (!case_insensitive_) return text == source_;
  return std::equal(text.begin(), text.end(), source_.begin(), source_.end(),
                    [](char a, char b) { return FoldAscii(a) == FoldAscii(b); });
}

bool Pattern::Matches(std::string_view text) const {
  if (kind_ == RuleKind::kLiteral) return LiteralEquals(text);
  const char* begin = text.empty() ? "" : text.data();
  return std::regex_search(begin, begin + text.size(), *regex_);
}

std::vector<MatchSpan> Pattern::FindAll(std::string_view text) const {
  std::vector<MatchSpan> spans;
  if (kind_ == RuleKind::kLiteral) {
    if (LiteralEquals(text)) spans.push_back({0, text.size()});
    return spans;
  }
  const char* begin = text.empty() ? "" : text.data();
  for (std::cregex_iterator it(begin, begin + text.size(), *regex_), end;
       it != end; ++it) {
    if (it->length(0) == 0) continue;
    const auto offset = static_cast<std::size_t>(it->position(0));
    spans.push_back({offset, offset + static_cast<std::size_t>(it->length(0))});
  }
  return spans;
}

}  // namespace tqh
