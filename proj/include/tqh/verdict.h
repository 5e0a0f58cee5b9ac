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

#ifndef TQH_VERDICT_H_
#define TQH_VERDICT_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tqh {

enum class Status { kPass, kFail, kWarning };
enum class WarningReason { kNoMatch, kContradiction };
enum class Provenance { kAutomatic, kManual };

// The outcome for one (item, system) cell. `reason` is set exactly when
// status is kWarning; `matched_rules` lists indices into the item's rules.
struct Verdict {
  Status status = Status::kWarning;
  std::optional<WarningReason> reason = WarningReason::kNoMatch;
  std::vector<int> matched_rules;
  Provenance provenance = Provenance::kAutomatic;

  static Verdict Manual(Status status);

  bool is_warning() const { return status == Status::kWarning; }
  bool operator==(const Verdict&) const = default;
};

std::string_view ToString(Status status);
std::string_view ToString(WarningReason reason);
std::string_view ToString(Provenance provenance);
Status ParseStatus(std::string_view text);
WarningReason ParseWarningReason(std::string_view text);
Provenance ParseProvenance(std::string_view text);

// Short human label: "pass", "fail", "warning(no-match)", ...
std::string Describe(const Verdict& verdict);

// Dense item x system grid of verdicts. Rows follow suite order, columns
// follow the order systems were given in.
class VerdictMatrix {
 public:
  VerdictMatrix() = default;
  VerdictMatrix(std::vector<std::string> item_ids,
                std::vector<std::string> systems);

  const std::vector<std::string>& item_ids() const { return item_ids_; }
  const std::vector<std::string>& systems() const { return systems_; }
  std::size_t num_items() const { return item_ids_.size(); }
  std::size_t num_systems() const { return systems_.size(); }
  std::size_t num_cells() const { return cells_.size(); }

  const Verdict& at(std::size_t item, std::size_t system) const {
    return cells_[item * systems_.size() + system];
  }
  Verdict& at(std::size_t item, std::size_t system) {
    return cells_[item * systems_.size() + system];
  }

  std::optional<std::size_t> ItemIndex(std::string_view id) const;
  std::optional<std::size_t> SystemIndex(std::string_view name) const;

  std::size_t WarningCount() const;
  std::size_t WarningCount(std::size_t system) const;

  bool operator==(const VerdictMatrix& other) const {
    return item_ids_ == other.item_ids_ && systems_ == other.systems_ &&
           cells_ == other.cells_;
  }

 private:
  std::vector<std::string> item_ids_;
  std::vector<std::string> systems_;
  std::unordered_map<std::string, std::size_t> item_index_;
  std::unordered_map<std::string, std::size_t> system_index_;
  std::vector<Verdict> cells_;
};

}  // namespace tqh

#endif  // TQH_VERDICT_H_
