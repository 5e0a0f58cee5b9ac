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

#include "tqh/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <vector>

#include "tqh/error.h"

namespace tqh {
namespace {

struct Cell {
  std::string text;
  bool emphasized = false;
  bool undefined = false;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> body;
  std::vector<std::vector<Cell>> footer;
};

std::int64_t Pow10(int exponent) {
  std::int64_t value = 1;
  for (int i = 0; i < exponent; ++i) value *= 10;
  return value;
}

std::string EscapeLatex(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': case '%': case '$': case '#': case '_': case '{': case '}':
        out += '\\';
        out += c;
        break;
      case '~': out += "\\textasciitilde{}"; break;
      case '^': out += "\\textasciicircum{}"; break;
      case '\\': out += "\\textbackslash{}"; break;
      default: out += c;
    }
  }
  return out;
}

std::string EscapeMarkdown(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

std::size_t DisplayWidth(std::string_view text) {
  std::size_t width = 0;
  for (unsigned char c : text) width += (c & 0xC0) != 0x80 ? 1 : 0;
  return width;
}

std::string CellText(const Cell& cell, Format format) {
  if (cell.undefined) {
    return format == Format::kLatex ? "--" : std::string(kUndefinedCell);
  }
  if (!cell.emphasized) {
    return format == Format::kLatex ? EscapeLatex(cell.text) : cell.text;
  }
  switch (format) {
    case Format::kLatex: return "\\textbf{" + EscapeLatex(cell.text) + "}";
    case Format::kMarkdown: return "**" + cell.text + "**";
    case Format::kPlain:
    case Format::kTsv: return cell.text + "*";
  }
  return cell.text;
}

std::string RenderPlain(const Table& table) {
  std::vector<std::vector<std::string>> lines;
  lines.push_back(table.header);
  auto add = [&](const std::vector<std::vector<Cell>>& rows) {
    for (const auto& row : rows) {
      std::vector<std::string> line;
      for (const Cell& cell : row) line.push_back(CellText(cell, Format::kPlain));
      lines.push_back(std::move(line));
    }
  };
  add(table.body);
  add(table.footer);
  std::vector<std::size_t> widths(table.header.size(), 0);
  for (const auto& line : lines) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      widths[c] = std::max(widths[c], DisplayWidth(line[c]));
    }
  }
  std::size_t total_width = 0;
  for (std::size_t w : widths) total_width += w;
  total_width += 2 * (widths.size() - 1);

  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& line) {
    std::string text;
    for (std::size_t c = 0; c < line.size(); ++c) {
      const std::string pad(widths[c] - DisplayWidth(line[c]), ' ');
      if (c > 0) text += "  ";
      text += c == 0 ? line[c] + pad : pad + line[c];
    }
    text.erase(text.find_last_not_of(' ') + 1);
    out << text << '\n';
  };
  const std::string rule(total_width, '-');
  emit(lines[0]);
  out << rule << '\n';
  for (std::size_t i = 1; i <= table.body.size(); ++i) emit(lines[i]);
  if (!table.footer.empty()) {
    out << rule << '\n';
    for (std::size_t i = table.body.size() + 1; i < lines.size(); ++i) emit(lines[i]);
  }
  return out.str();
}

std::string RenderTsv(const Table& table) {
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) out << (c ? "\t" : "") << line[c];
    out << '\n';
  };
  emit(table.header);
  for (const auto* rows : {&table.body, &table.footer}) {
    for (const auto& row : *rows) {
      std::vector<std::string> line;
      for (const Cell& cell : row) line.push_back(CellText(cell, Format::kTsv));
      emit(line);
    }
  }
  return out.str();
}

std::string RenderMarkdown(const Table& table) {
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& line) {
    out << '|';
    for (const auto& cell : line) out << ' ' << cell << " |";
    out << '\n';
  };
  std::vector<std::string> header;
  for (const auto& h : table.header) header.push_back(EscapeMarkdown(h));
  emit(header);
  out << "|---|";
  for (std::size_t c = 1; c < table.header.size(); ++c) out << "---:|";
  out << '\n';
  for (const auto* rows : {&table.body, &table.footer}) {
    for (const auto& row : *rows) {
      std::vector<std::string> line;
      for (std::size_t c = 0; c < row.size(); ++c) {
        line.push_back(c == 0 ? EscapeMarkdown(row[c].text)
                              : CellText(row[c], Format::kMarkdown));
      }
      emit(line);
    }
  }
  return out.str();
}

std::string RenderLatex(const Table& table) {
  std::ostringstream out;
  out << "\\begin{tabular}{l" << std::string(table.header.size() - 1, 'r') << "}\n";
  out << "\\toprule\n";
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) out << (c ? " & " : "") << line[c];
    out << " \\\\\n";
  };
  std::vector<std::string> header;
  for (const auto& h : table.header) header.push_back(EscapeLatex(h));
  emit(header);
  out << "\\midrule\n";
  auto rows_of = [&](const std::vector<std::vector<Cell>>& rows) {
    for (const auto& row : rows) {
      std::vector<std::string> line;
      for (const Cell& cell : row) line.push_back(CellText(cell, Format::kLatex));
      emit(line);
    }
  };
  rows_of(table.body);
  if (!table.footer.empty()) {
    out << "\\midrule\n";
    rows_of(table.footer);
  }
  out << "\\bottomrule\n\\end{tabular}\n";
  return out.str();
}

std::string Render(const Table& table, Format format) {
  switch (format) {
    case Format::kPlain: return RenderPlain(table);
    case Format::kTsv: return RenderTsv(table);
    case Format::kLatex: return RenderLatex(table);
    case Format::kMarkdown: return RenderMarkdown(table);
  }
  return RenderPlain(table);
}

Cell Label(std::string text) { return Cell{std::move(text), false, false}; }

Cell Fixed(std::optional<double> value, int decimals) {
  if (!value) return Cell{"", false, true};
  return Cell{FormatFixed(*value, decimals), false, false};
}

std::optional<double> Mean(const std::vector<std::optional<double>>& values) {
  double sum = 0;
  std::size_t count = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

std::optional<double> Percent(std::optional<double> ratio) {
  if (!ratio) return std::nullopt;
  return 100.0 * *ratio;
}

}  // namespace

std::string_view ToString(Format format) {
  switch (format) {
    case Format::kPlain: return "plain";
    case Format::kTsv: return "tsv";
    case Format::kLatex: return "latex";
    case Format::kMarkdown: return "markdown";
  }
  return "plain";
}

Format ParseFormat(std::string_view text) {
  if (text == "plain") return Format::kPlain;
  if (text == "tsv") return Format::kTsv;
  if (text == "latex") return Format::kLatex;
  if (text == "markdown") return Format::kMarkdown;
  throw UsageError("format must be one of plain, tsv, latex, markdown");
}

void ReportSpec::Validate() const {
  if (decimals < 0 || decimals > 6) {
    throw UsageError("decimals must lie between 0 and 6");
  }
}

std::string FormatPercent(std::int64_t correct, std::int64_t total, int decimals) {
  if (total <= 0) return std::string(kUndefinedCell);
  const std::int64_t scale = Pow10(decimals);
  const std::int64_t numerator = correct * 100 * scale;
  const std::int64_t rounded = (2 * numerator + total) / (2 * total);
  std::string text = std::to_string(rounded / scale);
  if (decimals > 0) {
    std::string fraction = std::to_string(rounded % scale);
    text += '.' + std::string(decimals - fraction.size(), '0') + fraction;
  }
  return text;
}

std::string FormatFixed(double value, int decimals) {
  const double scale = static_cast<double>(Pow10(decimals));
  double magnitude = std::floor(std::fabs(value) * scale + 0.5 + 1e-9) / scale;
  const bool negative = value < 0 && magnitude > 0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, magnitude);
  return negative ? "-" + std::string(buf) : std::string(buf);
}

std::string RenderAccuracyTable(const EvaluationRun& run,
                                std::span<const ClusterRow> clusters,
                                const ReportSpec& spec) {
  spec.Validate();
  const AccuracyTable& table = run.table(spec.scope);
  const std::size_t num_systems = table.systems.size();
  auto cluster_for = [&](std::string_view label) -> const ClusterRow* {
    for (const ClusterRow& row : clusters) {
      if (row.label == label) return &row;
    }
    return nullptr;
  };
  auto emphasized = [&](const ClusterRow* cluster, std::size_t s) {
    if (!spec.emphasis || cluster == nullptr) return false;
    const auto& members = cluster->best_cluster;
    return std::find(members.begin(), members.end(), table.systems[s]) !=
           members.end();
  };

  Table out;
  out.header.push_back(std::string(ToString(spec.scope)));
  out.header.push_back("#");
  for (const auto& system : table.systems) out.header.push_back(system);
  out.header.push_back("avg");

  std::int64_t valid_total = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    valid_total += table.row_items[r];
    const ClusterRow* cluster = cluster_for(table.rows[r]);
    if (spec.emphasis && cluster == nullptr && table.row_items[r] > 0) {
      throw DataError("missing cluster row for '" + table.rows[r] + "'");
    }
    std::vector<Cell> row{Label(table.rows[r]), Label(std::to_string(table.row_items[r]))};
    std::vector<std::optional<double>> accuracies;
    for (std::size_t s = 0; s < num_systems; ++s) {
      const AccuracyCell& cell = table.at(r, s);
      accuracies.push_back(Percent(cell.accuracy()));
      row.push_back(cell.defined()
                        ? Cell{FormatPercent(cell.correct, cell.total, spec.decimals),
                               emphasized(cluster, s), false}
                        : Cell{"", false, true});
    }
    row.push_back(Fixed(Mean(accuracies), spec.decimals));
    out.body.push_back(std::move(row));
  }

  std::vector<Cell> items_row{Label(std::string(kItemsAverageLabel)),
                              Label(std::to_string(valid_total))};
  std::vector<Cell> categories_row{Label(std::string(kCategoriesAverageLabel)),
                                   Label(std::to_string(valid_total))};
  const ClusterRow* pooled_cluster = cluster_for(kItemsAverageLabel);
  if (spec.emphasis && pooled_cluster == nullptr && valid_total > 0) {
    throw DataError("missing cluster row for '" + std::string(kItemsAverageLabel) + "'");
  }
  std::vector<std::optional<double>> micros, macros;
  for (std::size_t s = 0; s < num_systems; ++s) {
    const AccuracyCell micro = MicroAverage(run, table.systems[s]);
    micros.push_back(Percent(micro.accuracy()));
    items_row.push_back(
        micro.defined()
            ? Cell{FormatPercent(micro.correct, micro.total, spec.decimals),
                   emphasized(pooled_cluster, s), false}
            : Cell{"", false, true});
    macros.push_back(Percent(MacroAverage(run, table.systems[s])));
    categories_row.push_back(Fixed(macros.back(), spec.decimals));
  }
  items_row.push_back(Fixed(Mean(micros), spec.decimals));
  categories_row.push_back(Fixed(Mean(macros), spec.decimals));
  out.footer.push_back(std::move(items_row));
  out.footer.push_back(std::move(categories_row));
  return Render(out, spec.format);
}

std::string RenderDeltaTable(const DeltaTable& deltas, const ReportSpec& spec) {
  spec.Validate();
  Table out;
  out.header.push_back(std::string(ToString(spec.scope)));
  out.header.push_back("#");
  for (const auto& system : deltas.systems) out.header.push_back(system);
  out.header.push_back("avg");
  auto convert = [&](const DeltaRow& row) {
    std::vector<Cell> cells{Label(row.label), Label(std::to_string(row.items))};
    for (const auto& delta : row.deltas) cells.push_back(Fixed(delta, spec.decimals));
    cells.push_back(Fixed(row.mean_delta, spec.decimals));
    return cells;
  };
  for (const DeltaRow& row : deltas.rows) out.body.push_back(convert(row));
  for (const DeltaRow& row : deltas.footer) {
    auto cells = convert(row);
    if (row.label == kCategoriesAverageLabel) cells[1] = Label("");
    out.footer.push_back(std::move(cells));
  }
  return Render(out, spec.format);
}

}  // namespace tqh
