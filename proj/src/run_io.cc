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

#include "tqh/run_io.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tqh/error.h"
#include "tqh/report.h"

namespace tqh {
namespace {

using nlohmann::json;

constexpr std::string_view kRunFormat = "tqh-run/1";

json TableToJson(const AccuracyTable& table) {
  json correct = json::array(), total = json::array();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    json c = json::array(), t = json::array();
    for (std::size_t s = 0; s < table.systems.size(); ++s) {
      c.push_back(table.at(r, s).correct);
      t.push_back(table.at(r, s).total);
    }
    correct.push_back(std::move(c));
    total.push_back(std::move(t));
  }
  return json{{"rows", table.rows},
              {"systems", table.systems},
              {"row_items", table.row_items},
              {"correct", std::move(correct)},
              {"total", std::move(total)}};
}

AccuracyTable TableFromJson(const json& doc) {
  AccuracyTable table;
  table.rows = doc.at("rows").get<std::vector<std::string>>();
  table.systems = doc.at("systems").get<std::vector<std::string>>();
  table.row_items = doc.at("row_items").get<std::vector<std::int64_t>>();
  const auto& correct = doc.at("correct");
  const auto& total = doc.at("total");
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t s = 0; s < table.systems.size(); ++s) {
      table.cells.push_back({correct.at(r).at(s).get<std::int64_t>(),
                             total.at(r).at(s).get<std::int64_t>()});
    }
  }
  return table;
}

}  // namespace

std::string EncodeVerdict(const Verdict& verdict) {
  std::string code;
  switch (verdict.status) {
    case Status::kPass: code = "P"; break;
    case Status::kFail: code = "F"; break;
    case Status::kWarning:
      code = verdict.reason == WarningReason::kContradiction ? "Wc" : "Wn";
      break;
  }
  if (verdict.provenance == Provenance::kManual) code += 'm';
  for (std::size_t i = 0; i < verdict.matched_rules.size(); ++i) {
    code += i == 0 ? ':' : ',';
    code += std::to_string(verdict.matched_rules[i]);
  }
  return code;
}

Verdict DecodeVerdict(std::string_view code) {
  Verdict verdict;
  const auto colon = code.find(':');
  std::string_view head = code.substr(0, colon);
  if (!head.empty() && head.back() == 'm') {
    verdict.provenance = Provenance::kManual;
    head.remove_suffix(1);
  }
  if (head == "P") {
    verdict.status = Status::kPass;
    verdict.reason.reset();
  } else if (head == "F") {
    verdict.status = Status::kFail;
    verdict.reason.reset();
  } else if (head == "Wn") {
    verdict.status = Status::kWarning;
    verdict.reason = WarningReason::kNoMatch;
  } else if (head == "Wc") {
    verdict.status = Status::kWarning;
    verdict.reason = WarningReason::kContradiction;
  } else {
    throw DataError("bad verdict code '" + std::string(code) + "'");
  }
  if (colon != std::string_view::npos) {
    std::string_view rest = code.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view number = rest.substr(0, comma);
      int index = 0;
      auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), index);
      if (ec != std::errc() || ptr != number.data() + number.size()) {
        throw DataError("bad verdict code '" + std::string(code) + "'");
      }
      verdict.matched_rules.push_back(index);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }
  return verdict;
}

json RunToJson(const EvaluationRun& run) {
  json items = json::array();
  for (const ItemInfo& item : run.items) {
    items.push_back(json::array({item.id, item.category, item.phenomenon}));
  }
  json verdicts = json::array();
  for (std::size_t i = 0; i < run.verdicts.num_items(); ++i) {
    json row = json::array();
    for (std::size_t s = 0; s < run.verdicts.num_systems(); ++s) {
      row.push_back(EncodeVerdict(run.verdicts.at(i, s)));
    }
    verdicts.push_back(std::move(row));
  }
  return json{{"format", kRunFormat},
              {"suite", {{"name", run.suite_name}, {"version", run.suite_version}}},
              {"denominator", ToString(run.denominator)},
              {"systems", run.systems},
              {"items", std::move(items)},
              {"verdicts", std::move(verdicts)},
              {"valid_items", run.valid_items},
              {"tables",
               {{"category", TableToJson(run.category_table)},
                {"phenomenon", TableToJson(run.phenomenon_table)}}},
              {"output_checksums", run.output_checksums}};
}

EvaluationRun RunFromJson(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kRunFormat) {
      throw DataError("unsupported run format '" +
                      doc.at("format").get<std::string>() + "'");
    }
    std::vector<ItemInfo> items;
    std::vector<std::string> ids;
    for (const auto& item : doc.at("items")) {
      items.push_back({item.at(0).get<std::string>(), item.at(1).get<std::string>(),
                       item.at(2).get<std::string>()});
      ids.push_back(items.back().id);
    }
    const auto systems = doc.at("systems").get<std::vector<std::string>>();
    VerdictMatrix verdicts(ids, systems);
    const auto& rows = doc.at("verdicts");
    if (rows.size() != ids.size()) throw DataError("verdict rows do not match items");
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (rows.at(i).size() != systems.size()) {
        throw DataError("verdict row for '" + ids[i] + "' has the wrong width");
      }
      for (std::size_t s = 0; s < systems.size(); ++s) {
        verdicts.at(i, s) = DecodeVerdict(rows.at(i).at(s).get<std::string>());
      }
    }
    EvaluationRun run = Tabulate(doc.at("suite").at("name").get<std::string>(),
                                 doc.at("suite").at("version").get<std::string>(),
                                 std::move(items), std::move(verdicts),
                                 ParseDenominatorMode(doc.at("denominator").get<std::string>()));
    run.output_checksums =
        doc.at("output_checksums").get<std::map<std::string, std::string>>();
    if (run.valid_items != doc.at("valid_items").get<std::vector<std::string>>() ||
        !(run.category_table == TableFromJson(doc.at("tables").at("category"))) ||
        !(run.phenomenon_table == TableFromJson(doc.at("tables").at("phenomenon")))) {
      throw DataError("run artifact tables disagree with its verdicts");
    }
    return run;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed run artifact: ") + e.what());
  }
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

void ExportRun(const EvaluationRun& run, const std::filesystem::path& dir) {
  if (run.items.empty() || run.systems.empty()) {
    throw DataError("nothing to export: the run has no items or no systems");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory " + dir.string() + ": " + ec.message());
  WriteFile(dir / "run.json", RunToJson(run).dump(1) + "\n");
  for (Scope scope : {Scope::kCategory, Scope::kPhenomenon}) {
    ReportSpec spec;
    spec.scope = scope;
    spec.format = Format::kTsv;
    spec.emphasis = false;
    WriteFile(dir / (std::string(ToString(scope)) + ".tsv"),
              RenderAccuracyTable(run, {}, spec));
  }
}

EvaluationRun ImportRun(const std::filesystem::path& dir) {
  const auto path = dir / "run.json";
  if (!std::filesystem::exists(path)) {
    throw IoError("no run artifact at " + path.string());
  }
  json doc;
  try {
    doc = json::parse(ReadFile(path));
  } catch (const json::parse_error& e) {
    throw DataError("malformed run artifact " + path.string() + ": " + e.what());
  }
  return RunFromJson(doc);
}

}  // namespace tqh
