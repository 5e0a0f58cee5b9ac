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

#include "tqh/evaluator.h"

#include <openssl/evp.h>

#include <algorithm>
#include <exception>
#include <thread>

#include "tqh/error.h"
#include "tqh/rule_engine.h"

namespace tqh {
namespace {

template <typename Labels>
std::optional<std::size_t> Position(const Labels& labels, std::string_view label) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

AccuracyTable BuildTable(const std::vector<std::string>& row_of_item,
                         const VerdictMatrix& verdicts,
                         const std::vector<bool>& valid, DenominatorMode mode) {
  AccuracyTable table;
  table.systems = verdicts.systems();
  std::vector<std::size_t> row_index(row_of_item.size());
  for (std::size_t i = 0; i < row_of_item.size(); ++i) {
    auto pos = Position(table.rows, row_of_item[i]);
    if (!pos) {
      pos = table.rows.size();
      table.rows.push_back(row_of_item[i]);
    }
    row_index[i] = *pos;
  }
  table.cells.assign(table.rows.size() * table.systems.size(), {});
  table.row_items.assign(table.rows.size(), 0);
  for (std::size_t i = 0; i < row_of_item.size(); ++i) {
    for (std::size_t s = 0; s < table.systems.size(); ++s) {
      const Verdict& v = verdicts.at(i, s);
      const bool counted = mode == DenominatorMode::kGlobal ? valid[i] : !v.is_warning();
      if (!counted) continue;
      AccuracyCell& cell = table.at(row_index[i], s);
      ++cell.total;
      if (v.status == Status::kPass) ++cell.correct;
    }
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t s = 0; s < table.systems.size(); ++s) {
      table.row_items[r] = std::max(table.row_items[r], table.at(r, s).total);
    }
  }
  if (mode == DenominatorMode::kGlobal) {
    std::fill(table.row_items.begin(), table.row_items.end(), 0);
    for (std::size_t i = 0; i < row_of_item.size(); ++i) {
      if (valid[i]) ++table.row_items[row_index[i]];
    }
  }
  return table;
}

std::size_t RequireSystem(const EvaluationRun& run, std::string_view system) {
  auto pos = Position(run.systems, system);
  if (!pos) throw DataError("unknown system '" + std::string(system) + "'");
  return *pos;
}

}  // namespace

std::string_view ToString(MissingPolicy policy) {
  return policy == MissingPolicy::kStrict ? "strict" : "fail";
}

std::string_view ToString(DenominatorMode mode) {
  return mode == DenominatorMode::kGlobal ? "global" : "per-system";
}

std::string_view ToString(Scope scope) {
  return scope == Scope::kCategory ? "category" : "phenomenon";
}

MissingPolicy ParseMissingPolicy(std::string_view text) {
  if (text == "strict") return MissingPolicy::kStrict;
  if (text == "fail") return MissingPolicy::kFail;
  throw UsageError("missing-output policy must be 'strict' or 'fail'");
}

DenominatorMode ParseDenominatorMode(std::string_view text) {
  if (text == "global") return DenominatorMode::kGlobal;
  if (text == "per-system") return DenominatorMode::kPerSystem;
  throw DataError("unknown denominator mode '" + std::string(text) + "'");
}

Scope ParseScope(std::string_view text) {
  if (text == "category") return Scope::kCategory;
  if (text == "phenomenon") return Scope::kPhenomenon;
  throw UsageError("scope must be 'category' or 'phenomenon'");
}

std::optional<std::size_t> AccuracyTable::RowIndex(std::string_view label) const {
  return Position(rows, label);
}

std::optional<std::size_t> AccuracyTable::SystemIndex(std::string_view name) const {
  return Position(systems, name);
}

VerdictMatrix ClassifyAll(const TestSuite& suite,
                          std::span<const SystemOutput> outputs,
                          const EvaluateOptions& options) {
  std::vector<std::string> ids;
  ids.reserve(suite.items().size());
  for (const TestItem& item : suite.items()) ids.push_back(item.id);
  std::vector<std::string> systems;
  for (const SystemOutput& output : outputs) {
    if (output.system_name.empty()) throw DataError("empty system name");
    systems.push_back(output.system_name);
  }
  VerdictMatrix verdicts(std::move(ids), std::move(systems));

  if (options.missing == MissingPolicy::kStrict) {
    for (const SystemOutput& output : outputs) {
      for (const TestItem& item : suite.items()) {
        if (!output.translations.count(item.id)) {
          throw DataError("system '" + output.system_name +
                          "' has no translation for item '" + item.id + "'");
        }
      }
    }
  }

  std::vector<CompiledRuleSet> compiled;
  compiled.reserve(suite.items().size());
  for (const TestItem& item : suite.items()) compiled.push_back(CompileRules(item));

  const std::size_t num_items = suite.items().size();
  auto classify_rows = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < num_items; i += stride) {
      for (std::size_t s = 0; s < outputs.size(); ++s) {
        auto it = outputs[s].translations.find(suite.items()[i].id);
        if (it == outputs[s].translations.end()) {
          Verdict missing;
          missing.status = Status::kFail;
          missing.reason.reset();
          verdicts.at(i, s) = missing;
        } else {
          verdicts.at(i, s) = Classify(it->second, compiled[i]);
        }
      }
    }
  };

  const std::size_t workers =
      std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(num_items, 1));
  if (workers == 1) {
    classify_rows(0, 1);
    return verdicts;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          classify_rows(w, workers);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  return verdicts;
}

std::vector<std::string> SelectValidItems(const VerdictMatrix& verdicts) {
  std::vector<std::string> valid;
  for (std::size_t i = 0; i < verdicts.num_items(); ++i) {
    bool clean = true;
    for (std::size_t s = 0; s < verdicts.num_systems() && clean; ++s) {
      clean = !verdicts.at(i, s).is_warning();
    }
    if (clean) valid.push_back(verdicts.item_ids()[i]);
  }
  return valid;
}

std::vector<ItemInfo> ItemInfos(const TestSuite& suite) {
  std::vector<ItemInfo> infos;
  infos.reserve(suite.items().size());
  for (const TestItem& item : suite.items()) {
    infos.push_back({item.id, item.category, item.phenomenon});
  }
  return infos;
}

EvaluationRun Tabulate(std::string suite_name, std::string suite_version,
                       std::vector<ItemInfo> items, VerdictMatrix verdicts,
                       DenominatorMode mode) {
  if (items.size() != verdicts.num_items()) {
    throw DataError("item list does not match the verdict matrix");
  }
  EvaluationRun run;
  run.suite_name = std::move(suite_name);
  run.suite_version = std::move(suite_version);
  run.systems = verdicts.systems();
  run.denominator = mode;
  run.valid_items = SelectValidItems(verdicts);

  std::vector<bool> valid(items.size(), false);
  {
    std::size_t next = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i].id != verdicts.item_ids()[i]) {
        throw DataError("item '" + items[i].id + "' is out of matrix order");
      }
      if (next < run.valid_items.size() && run.valid_items[next] == items[i].id) {
        valid[i] = true;
        ++next;
      }
    }
  }
  std::vector<std::string> phenomena, categories;
  for (const ItemInfo& item : items) {
    phenomena.push_back(item.phenomenon);
    categories.push_back(item.category);
  }
  run.phenomenon_table = BuildTable(phenomena, verdicts, valid, mode);
  run.category_table = BuildTable(categories, verdicts, valid, mode);
  run.items = std::move(items);
  run.verdicts = std::move(verdicts);
  return run;
}

EvaluationRun Tabulate(const TestSuite& suite, VerdictMatrix verdicts,
                       DenominatorMode mode) {
  return Tabulate(suite.name(), suite.version(), ItemInfos(suite),
                  std::move(verdicts), mode);
}

EvaluationRun Evaluate(const TestSuite& suite,
                       std::span<const SystemOutput> outputs,
                       const AnnotationLog& log, const EvaluateOptions& options,
                       ApplyReport* report) {
  const auto refinements = log.refinements();
  const TestSuite refined = ApplyRefinements(suite, refinements);
  VerdictMatrix automatic = ClassifyAll(refined, outputs, options);
  const auto annotations = log.annotations();
  VerdictMatrix resolved = ApplyAnnotations(automatic, annotations, report);
  EvaluationRun run = Tabulate(refined, std::move(resolved), options.denominator);
  for (const SystemOutput& output : outputs) {
    run.output_checksums[output.system_name] = Sha256Hex(SerializeOutputs(output));
  }
  return run;
}

AccuracyCell PhenomenonAccuracy(const EvaluationRun& run,
                                std::string_view phenomenon,
                                std::string_view system) {
  const auto row = run.phenomenon_table.RowIndex(phenomenon);
  if (!row) throw DataError("unknown phenomenon '" + std::string(phenomenon) + "'");
  return run.phenomenon_table.at(*row, RequireSystem(run, system));
}

AccuracyCell CategoryAccuracy(const EvaluationRun& run, std::string_view category,
                              std::string_view system) {
  const auto row = run.category_table.RowIndex(category);
  if (!row) throw DataError("unknown category '" + std::string(category) + "'");
  return run.category_table.at(*row, RequireSystem(run, system));
}

AccuracyCell MicroAverage(const EvaluationRun& run, std::string_view system) {
  const std::size_t s = RequireSystem(run, system);
  AccuracyCell pooled;
  for (std::size_t r = 0; r < run.category_table.rows.size(); ++r) {
    pooled.correct += run.category_table.at(r, s).correct;
    pooled.total += run.category_table.at(r, s).total;
  }
  return pooled;
}

std::optional<double> MacroAverage(const EvaluationRun& run,
                                   std::string_view system) {
  const std::size_t s = RequireSystem(run, system);
  double sum = 0;
  std::size_t defined = 0;
  for (std::size_t r = 0; r < run.category_table.rows.size(); ++r) {
    if (auto acc = run.category_table.at(r, s).accuracy()) {
      sum += *acc;
      ++defined;
    }
  }
  if (defined == 0) return std::nullopt;
  return sum / static_cast<double>(defined);
}

double WarningRate(const VerdictMatrix& verdicts) {
  if (verdicts.num_cells() == 0) return 0.0;
  return static_cast<double>(verdicts.WarningCount()) /
         static_cast<double>(verdicts.num_cells());
}

std::vector<double> WarningRatePerSystem(const VerdictMatrix& verdicts) {
  std::vector<double> rates;
  for (std::size_t s = 0; s < verdicts.num_systems(); ++s) {
    rates.push_back(verdicts.num_items() == 0
                        ? 0.0
                        : static_cast<double>(verdicts.WarningCount(s)) /
                              static_cast<double>(verdicts.num_items()));
  }
  return rates;
}

std::string Sha256Hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorKind::kData, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xf];
  }
  return hex;
}

}  // namespace tqh
