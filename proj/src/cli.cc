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

#include "tqh/cli.h"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"
#include "tqh/annotation.h"
#include "tqh/error.h"
#include "tqh/evaluator.h"
#include "tqh/report.h"
#include "tqh/run_io.h"
#include "tqh/service.h"
#include "tqh/stats.h"
#include "tqh/suite.h"

namespace tqh {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr char kConfigFileName[] = "tqh.json";
constexpr char kMetaFileName[] = "meta.json";

struct EvaluateArgs {
  std::string suite, outputs, annotations, out, missing, config;
  unsigned workers = 0;
  bool per_system = false;
};

struct ReportArgs {
  std::string run, scope, format, config;
  std::optional<double> alpha;
  int decimals = 1;
  bool no_emphasis = false;
};

struct CompareArgs {
  std::string baseline, current, scope, format, config;
  int decimals = 1;
};

struct TriageArgs {
  std::string run, listen, annotations, static_dir, config;
  std::optional<double> alpha;
  bool override_mode = false;
  bool no_auto_recompute = false;
};

struct ValidateArgs {
  std::string suite;
};

std::optional<std::string> NonEmpty(const std::string& value) {
  if (value.empty()) return std::nullopt;
  return value;
}

// The explicit --config wins; otherwise tqh.json in the run directory is
// used when present.
ConfigLayer FileLayer(const std::string& explicit_path, const std::string& run_dir) {
  if (!explicit_path.empty()) return LayerFromFile(explicit_path);
  if (!run_dir.empty()) {
    const fs::path candidate = fs::path(run_dir) / kConfigFileName;
    if (fs::exists(candidate)) return LayerFromFile(candidate);
  }
  return {};
}

AnnotationLog ReadLog(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open annotation log " + path.string());
  return AnnotationLog::Parse(in, path.string());
}

std::vector<SystemOutput> LoadOutputDir(const fs::path& dir, const TestSuite& suite) {
  if (!fs::is_directory(dir)) throw IoError("outputs directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".tsv") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw DataError("no .tsv output files in " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<SystemOutput> outputs;
  for (const fs::path& file : files) outputs.push_back(LoadOutputs(file, suite));
  return outputs;
}

json ReadMeta(const fs::path& run_dir) {
  const fs::path path = run_dir / kMetaFileName;
  if (!fs::exists(path)) return json::object();
  try {
    return json::parse(ReadFile(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

int Evaluate(const EvaluateArgs& args, const EnvLookup& env, std::ostream& out) {
  ConfigLayer flags;
  flags.suite = NonEmpty(args.suite);
  flags.outputs = NonEmpty(args.outputs);
  flags.annotations = NonEmpty(args.annotations);
  flags.missing = NonEmpty(args.missing);
  if (args.workers > 0) flags.workers = args.workers;
  const Config config =
      ResolveConfig(flags, LayerFromEnv(env), FileLayer(args.config, args.out));
  if (!config.suite) throw UsageError("no suite given (--suite or TQH_SUITE)");
  if (!config.outputs) throw UsageError("no outputs directory given (--outputs or TQH_OUTPUTS)");

  const TestSuite suite = LoadSuite(*config.suite);
  const std::vector<SystemOutput> outputs = LoadOutputDir(*config.outputs, suite);
  AnnotationLog log;
  if (config.annotations) log = ReadLog(*config.annotations);

  EvaluateOptions options;
  options.missing = config.missing;
  options.workers = config.workers;
  options.denominator =
      args.per_system ? DenominatorMode::kPerSystem : DenominatorMode::kGlobal;
  ApplyReport applied;
  const EvaluationRun run = Evaluate(suite, outputs, log, options, &applied);

  const fs::path dir = args.out;
  ExportRun(run, dir);
  fs::create_directories(dir / "inputs" / "outputs");
  WriteFile(dir / "inputs" / "suite.jsonl", SerializeSuite(suite));
  for (const SystemOutput& output : outputs) {
    WriteFile(dir / "inputs" / "outputs" / (output.system_name + ".tsv"),
              SerializeOutputs(output));
  }
  json meta = {{"created", FormatTimestamp(Now())},
               {"missing", ToString(options.missing)},
               {"annotations", config.annotations
                                   ? json(fs::absolute(*config.annotations).string())
                                   : json(nullptr)}};
  WriteFile(dir / kMetaFileName, meta.dump(1) + "\n");

  out << "evaluated " << run.items.size() << " items x " << run.systems.size()
      << " systems: " << run.valid_items.size() << " valid, "
      << run.verdicts.WarningCount() << " warning cells";
  if (!log.entries().empty()) {
    out << ", " << applied.applied << " manual verdicts applied";
  }
  out << "\nrun written to " << dir.string() << "\n";
  return 0;
}

int Report(const ReportArgs& args, const EnvLookup& env, std::ostream& out) {
  ConfigLayer flags;
  flags.scope = NonEmpty(args.scope);
  flags.format = NonEmpty(args.format);
  flags.alpha = args.alpha;
  const Config config =
      ResolveConfig(flags, LayerFromEnv(env), FileLayer(args.config, args.run));
  const EvaluationRun run = ImportRun(args.run);

  ReportSpec spec;
  spec.scope = config.scope;
  spec.format = config.format;
  spec.decimals = args.decimals;
  spec.emphasis = !args.no_emphasis && run.denominator == DenominatorMode::kGlobal;
  spec.Validate();
  std::vector<ClusterRow> clusters;
  if (spec.emphasis) {
    SignificanceConfig significance;
    significance.alpha = config.alpha;
    significance.Validate();
    clusters = ClusterRows(run, spec.scope, significance);
  }
  out << RenderAccuracyTable(run, clusters, spec);
  return 0;
}

int Compare(const CompareArgs& args, const EnvLookup& env, std::ostream& out) {
  ConfigLayer flags;
  flags.scope = NonEmpty(args.scope);
  flags.format = NonEmpty(args.format);
  const Config config =
      ResolveConfig(flags, LayerFromEnv(env), FileLayer(args.config, args.current));
  const EvaluationRun baseline = ImportRun(args.baseline);
  const EvaluationRun current = ImportRun(args.current);
  ReportSpec spec;
  spec.scope = config.scope;
  spec.format = config.format;
  spec.decimals = args.decimals;
  spec.emphasis = false;
  spec.Validate();
  out << RenderDeltaTable(CompareRuns(baseline, current, config.scope), spec);
  return 0;
}

std::pair<std::string, int> ParseListen(const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw UsageError("--listen expects HOST:PORT, got '" + listen + "'");
  }
  int port = 0;
  const char* begin = listen.data() + colon + 1;
  const char* end = listen.data() + listen.size();
  auto [ptr, ec] = std::from_chars(begin, end, port);
  if (ec != std::errc() || ptr != end || port < 0 || port > 65535) {
    throw UsageError("invalid port in --listen '" + listen + "'");
  }
  return {listen.substr(0, colon), port};
}

int Triage(const TriageArgs& args, const EnvLookup& env, std::ostream& out) {
  const auto [host, port] = ParseListen(args.listen);
  ConfigLayer flags;
  flags.annotations = NonEmpty(args.annotations);
  flags.alpha = args.alpha;
  const Config config =
      ResolveConfig(flags, LayerFromEnv(env), FileLayer(args.config, args.run));
  const fs::path run_dir = args.run;
  const EvaluationRun run = ImportRun(run_dir);
  const json meta = ReadMeta(run_dir);

  std::optional<fs::path> log_path = config.annotations;
  if (!log_path && meta.contains("annotations") && meta["annotations"].is_string()) {
    log_path = meta["annotations"].get<std::string>();
  }
  if (!log_path) throw UsageError("no annotation log given (--annotations or TQH_ANNOTATIONS)");

  const fs::path inputs = run_dir / "inputs";
  const TestSuite suite = LoadSuite(inputs / "suite.jsonl");
  std::vector<SystemOutput> outputs;
  for (const std::string& system : run.systems) {
    outputs.push_back(LoadOutputs(inputs / "outputs" / (system + ".tsv"), suite, system));
  }

  ServiceOptions options;
  options.override_mode = args.override_mode;
  options.auto_recompute = !args.no_auto_recompute;
  options.evaluate.denominator = run.denominator;
  options.evaluate.missing = meta.contains("missing")
                                 ? ParseMissingPolicy(meta["missing"].get<std::string>())
                                 : config.missing;
  options.evaluate.workers = config.workers;
  options.significance.alpha = config.alpha;

  TriageService service;
  service.Load(suite, std::move(outputs), AnnotationLog::Open(*log_path), options);

  httplib::Server server;
  std::optional<fs::path> static_dir;
  if (!args.static_dir.empty()) {
    if (!fs::is_directory(args.static_dir)) {
      throw IoError("static directory not found: " + args.static_dir);
    }
    static_dir = args.static_dir;
  }
  RegisterRoutes(server, service, static_dir);
  if (!server.bind_to_port(host, port)) {
    throw IoError("cannot listen on " + args.listen);
  }
  out << "triage service on http://" << host << ":" << port << " ("
      << service.QueueLength() << " warnings queued, log " << log_path->string() << ")\n";
  out.flush();
  if (!server.listen_after_bind()) throw IoError("server on " + args.listen + " failed");
  return 0;
}

int Validate(const ValidateArgs& args, std::ostream& out) {
  const TestSuite suite = LoadSuite(args.suite);
  const SuiteStats stats = ComputeSuiteStats(suite);
  std::size_t phenomena = 0;
  std::size_t rules = 0;
  for (const CategoryCount& category : stats.categories) phenomena += category.phenomena.size();
  for (const TestItem& item : suite.items()) rules += item.rules.size();
  out << "suite " << suite.name() << " " << suite.version() << ": " << stats.total
      << " items, " << stats.categories.size() << " categories, " << phenomena
      << " phenomena, " << rules << " rules\n";
  for (const CategoryCount& category : stats.categories) {
    out << "  " << category.name << "\t" << category.items << "\n";
  }
  return 0;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
           const EnvLookup& env) {
  CLI::App app{"Challenge-set evaluation harness for machine translation", "tqh"};
  app.require_subcommand(1);

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Classify outputs and write a run");
  evaluate_cmd->add_option("--suite", evaluate.suite, "Suite file (JSON lines)");
  evaluate_cmd->add_option("--outputs", evaluate.outputs, "Directory of <system>.tsv files");
  evaluate_cmd->add_option("--annotations", evaluate.annotations, "Annotation log");
  evaluate_cmd->add_option("--out", evaluate.out, "Run directory")->required();
  evaluate_cmd->add_option("--missing", evaluate.missing, "strict|fail");
  evaluate_cmd->add_option("--workers", evaluate.workers, "Classification threads");
  evaluate_cmd->add_flag("--per-system-denominator", evaluate.per_system,
                         "Drop warnings per system instead of per item");
  evaluate_cmd->add_option("--config", evaluate.config, "Config file");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Render the accuracy table of a run");
  report_cmd->add_option("--run", report.run, "Run directory")->required();
  report_cmd->add_option("--scope", report.scope, "category|phenomenon");
  report_cmd->add_option("--format", report.format, "plain|tsv|latex|markdown");
  report_cmd->add_flag("--no-emphasis", report.no_emphasis, "Do not mark best clusters");
  report_cmd->add_option("--decimals", report.decimals, "Decimal places");
  report_cmd->add_option("--alpha", report.alpha, "Significance level");
  report_cmd->add_option("--config", report.config, "Config file");

  CompareArgs compare;
  auto* compare_cmd = app.add_subcommand("compare", "Per-row accuracy deltas between runs");
  compare_cmd->add_option("--baseline", compare.baseline, "Baseline run")->required();
  compare_cmd->add_option("--current", compare.current, "Current run")->required();
  compare_cmd->add_option("--scope", compare.scope, "category|phenomenon");
  compare_cmd->add_option("--format", compare.format, "plain|tsv|latex|markdown");
  compare_cmd->add_option("--decimals", compare.decimals, "Decimal places");
  compare_cmd->add_option("--config", compare.config, "Config file");

  TriageArgs triage;
  auto* triage_cmd = app.add_subcommand("triage", "Serve the warning triage API");
  triage_cmd->add_option("--run", triage.run, "Run directory")->required();
  triage_cmd->add_option("--listen", triage.listen, "HOST:PORT")->required();
  triage_cmd->add_option("--annotations", triage.annotations, "Annotation log");
  triage_cmd->add_option("--alpha", triage.alpha, "Significance level");
  triage_cmd->add_flag("--override", triage.override_mode, "Allow re-annotating cells");
  triage_cmd->add_flag("--no-auto-recompute", triage.no_auto_recompute,
                       "Require POST /api/recompute after changes");
  triage_cmd->add_option("--static", triage.static_dir, "UI bundle directory");
  triage_cmd->add_option("--config", triage.config, "Config file");

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "Check a suite file");
  validate_cmd->add_option("--suite", validate.suite, "Suite file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "tqh: " << e.what() << "\n" << app.help();
    return ExitCodeFor(ErrorKind::kUsage);
  }

  try {
    if (*evaluate_cmd) return Evaluate(evaluate, env, out);
    if (*report_cmd) return Report(report, env, out);
    if (*compare_cmd) return Compare(compare, env, out);
    if (*triage_cmd) return Triage(triage, env, out);
    return Validate(validate, out);
  } catch (const Error& e) {
    err << "tqh: " << e.what() << "\n";
    if (e.kind() == ErrorKind::kUsage) err << app.help();
    return ExitCodeFor(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "tqh: " << e.what() << "\n";
    return ExitCodeFor(ErrorKind::kIo);
  }
}

}  // namespace tqh
