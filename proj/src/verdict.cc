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

#include "tqh/verdict.h"

#include "tqh/error.h"

namespace tqh {

Verdict Verdict::Manual(Status status) {
  Verdict verdict;
  verdict.status = status;
  verdict.reason.reset();
  verdict.provenance = Provenance::kManual;
  return verdict;
}

std::string_view ToString(Status status) {
  switch (status) {
    case Status::kPass: return "pass";
    case Status::kFail: return "fail";
    case Status::kWarning: return "warning";
  }
  return "warning";
}

std::string_view ToString(WarningReason reason) {
  return reason == WarningReason::kNoMatch ? "no-match" : "contradiction";
}

std::string_view ToString(Provenance provenance) {
  return provenance == Provenance::kAutomatic ? "automatic" : "manual";
}

Status ParseStatus(std::string_view text) {
  if (text == "pass") return Status::kPass;
  if (text == "fail") return Status::kFail;
  if (text == "warning") return Status::kWarning;
  throw DataError("unknown verdict status '" + std::string(text) + "'");
}

WarningReason ParseWarningReason(std::string_view text) {
  if (text == "no-match") return WarningReason::kNoMatch;
  if (text == "contradiction") return WarningReason::kContradiction;
  throw DataError("unknown warning reason '" + std::string(text) + "'");
}

Provenance ParseProvenance(std::string_view text) {
  if (text == "automatic") return Provenance::kAutomatic;
  if (text == "manual") return Provenance::kManual;
  throw DataError("unknown provenance '" + std::string(text) + "'");
}

std::string Describe(const Verdict& verdict) {
  std::string out(ToString(verdict.status));
  if (verdict.reason) {
    out += "(";
    out += ToString(*verdict.reason);
    out += ")";
  }
  return out;
}

VerdictMatrix::VerdictMatrix(std::vector<std::string> item_ids,
                             std::vector<std::string> systems)
    : item_ids_(std::move(item_ids)), systems_(std::move(systems)) {
  for (std::size_t i = 0; i < item_ids_.size(); ++i) {
    if (!item_index_.emplace(item_ids_[i], i).second) {
      throw DataError("duplicate item id '" + item_ids_[i] + "' in matrix");
    }
  }
  for (std::size_t s = 0; s < systems_.size(); ++s) {
    if (!system_index_.emplace(systems_[s], s).second) {
      throw DataError("duplicate system name '" + systems_[s] + "'");
    }
  }
  cells_.resize(item_ids_.size() * systems_.size());
}

std::optional<std::size_t> VerdictMatrix::ItemIndex(std::string_view id) const {
  auto it = item_index_.find(std::string(id));
  if (it == item_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> VerdictMatrix::SystemIndex(
    std::string_view name) const {
  auto it = system_index_.find(std::string(name));
  if (it == system_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t VerdictMatrix::WarningCount() const {
  std::size_t count = 0;
  for (const Verdict& v : cells_) count += v.is_warning() ? 1 : 0;
  return count;
}

std::size_t VerdictMatrix::WarningCount(std::size_t system) const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < item_ids_.size(); ++i) {
    count += at(i, system).is_warning() ? 1 : 0;
  }
  return count;
}

}  // namespace tqh
