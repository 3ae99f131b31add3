// facecap: sphere-capacity and MasterFace-coverage toolkit.
//
// Subcommands: capacity, coverage, fit, effectiveness, eval, synth, rerun.
// Every run with --out also writes <out>.manifest.json with the fully
// resolved configuration, so published results can be reproduced with
// `facecap rerun <manifest>`.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "facecap/biometric.hpp"
#include "facecap/capacity.hpp"
#include "facecap/coverage.hpp"
#include "facecap/effectiveness.hpp"
#include "facecap/io.hpp"
#include "facecap/model_fit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace facecap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- list parsing: "3,4,5" or "3..10"; "0.4,0.5" or "0.65:1.35:0.05" ----

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    if (hi < lo) throw UsageError("empty range: " + text);
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t pos = text.find(',', start);
    const std::string tok = text.substr(start, pos - start);
    if (!tok.empty()) out.push_back(std::stoi(tok));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (out.empty()) throw UsageError("empty list: '" + text + "'");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  const auto c1 = text.find(':');
  if (c1 != std::string::npos) {
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw UsageError("range needs lo:hi:step, got " + text);
    const double lo = std::stod(text.substr(0, c1));
    const double hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = std::stod(text.substr(c2 + 1));
    if (step <= 0.0) throw UsageError("range step must be positive: " + text);
    for (double v = lo; v <= hi + step * 1e-9; v += step) out.push_back(v);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t pos = text.find(',', start);
    const std::string tok = text.substr(start, pos - start);
    if (!tok.empty()) out.push_back(std::stod(tok));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (out.empty()) throw UsageError("empty list: '" + text + "'");
  return out;
}

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

void write_manifest(const std::string& out_path, const std::string& command,
                    const json& options, const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = "facecap";
  m["command"] = command;
  m["options"] = options;
  m["outputs"] = outputs;
  m["created"] = timestamp_now();  // informational; not part of the run identity
  write_text_file(out_path + ".manifest.json", m.dump(2) + "\n");
}

void emit(const std::optional<std::string>& out, const std::string& text,
          const std::string& command, const json& options) {
  if (out) {
    write_text_file(*out, text);
    write_manifest(*out, command, options, {*out});
  } else {
    std::cout << text;
  }
}

// ---- capacity ----

struct CapacityArgs {
  std::vector<int> dims;
  std::vector<double> radii;
  int n_max = 128;
  int restarts = 16;
  int max_iters = 4000;
  std::uint64_t seed = 0;
  double feasibility_tol = 1e-6;
  std::string convention = "exclusive";
  int threads = 0;
  std::string format = "csv";
  std::optional<std::string> out;
};

json capacity_args_json(const CapacityArgs& a) {
  json j;
  j["dims"] = a.dims;
  j["radii"] = a.radii;
  j["n_max"] = a.n_max;
  j["restarts"] = a.restarts;
  j["max_iters"] = a.max_iters;
  j["seed"] = a.seed;
  j["feasibility_tol"] = a.feasibility_tol;
  j["convention"] = a.convention;
  j["threads"] = a.threads;
  j["format"] = a.format;
  if (a.out) j["out"] = *a.out;
  return j;
}

CapacityArgs capacity_args_from_json(const json& j) {
  CapacityArgs a;
  a.dims = j.at("dims").get<std::vector<int>>();
  a.radii = j.at("radii").get<std::vector<double>>();
  a.n_max = j.at("n_max");
  a.restarts = j.at("restarts");
  a.max_iters = j.at("max_iters");
  a.seed = j.at("seed");
  a.feasibility_tol = j.at("feasibility_tol");
  a.convention = j.at("convention");
  a.threads = j.at("threads");
  a.format = j.at("format");
  if (j.contains("out")) a.out = j["out"].get<std::string>();
  return a;
}

int run_capacity(const CapacityArgs& args) {
  CapacityConfig cfg;
  cfg.n_max = args.n_max;
  cfg.restarts = args.restarts;
  cfg.max_iters = args.max_iters;
  cfg.seed = args.seed;
  cfg.feasibility_tol = args.feasibility_tol;
  cfg.threads = args.threads;
  if (args.convention == "exclusive")
    cfg.convention = CapacityConvention::exclusive;
  else if (args.convention == "inclusive")
    cfg.convention = CapacityConvention::inclusive;
  else
    throw UsageError("--convention must be exclusive or inclusive");

  const CapacitySweep sweep = capacity_sweep(args.dims, args.radii, cfg);

  bool all_failed = true;
  std::string first_error;
  for (const auto& cell : sweep.cells) {
    if (cell.failed && first_error.empty()) first_error = cell.error;
    all_failed = all_failed && cell.failed;
  }
  if (all_failed) throw std::runtime_error("all cells failed: " + first_error);

  const std::string text = args.format == "json" ? capacity_sweep_json(sweep)
                                                 : capacity_sweep_csv(sweep);
  emit(args.out, text, "capacity", capacity_args_json(args));
  return kExitOk;
}

// ---- coverage ----

struct CoverageArgs {
  std::vector<int> dims;
  std::vector<double> radii;
  int n_max = 64;
  int restarts = 32;
  int max_iters = 1500;
  std::uint64_t seed = 0;
  double feasibility_tol = 1e-6;
  double match_slack = 1e-6;
  double separation_margin = 1e-4;
  int threads = 0;
  std::string format = "csv";
  std::optional<std::string> out;
};

json coverage_args_json(const CoverageArgs& a) {
  json j;
  j["dims"] = a.dims;
  j["radii"] = a.radii;
  j["n_max"] = a.n_max;
  j["restarts"] = a.restarts;
  j["max_iters"] = a.max_iters;
  j["seed"] = a.seed;
  j["feasibility_tol"] = a.feasibility_tol;
  j["match_slack"] = a.match_slack;
  j["separation_margin"] = a.separation_margin;
  j["threads"] = a.threads;
  j["format"] = a.format;
  if (a.out) j["out"] = *a.out;
  return j;
}

CoverageArgs coverage_args_from_json(const json& j) {
  CoverageArgs a;
  a.dims = j.at("dims").get<std::vector<int>>();
  a.radii = j.at("radii").get<std::vector<double>>();
  a.n_max = j.at("n_max");
  a.restarts = j.at("restarts");
  a.max_iters = j.at("max_iters");
  a.seed = j.at("seed");
  a.feasibility_tol = j.at("feasibility_tol");
  a.match_slack = j.at("match_slack");
  a.separation_margin = j.at("separation_margin");
  a.threads = j.at("threads");
  a.format = j.at("format");
  if (j.contains("out")) a.out = j["out"].get<std::string>();
  return a;
}

int run_coverage(const CoverageArgs& args) {
  CoverageConfig cfg;
  cfg.n_max = args.n_max;
  cfg.restarts = args.restarts;
  cfg.max_iters = args.max_iters;
  cfg.seed = args.seed;
  cfg.feasibility_tol = args.feasibility_tol;
  cfg.match_slack = args.match_slack;
  cfg.separation_margin = args.separation_margin;
  cfg.threads = args.threads;

  const CoverageSweep sweep = coverage_sweep(args.dims, args.radii, cfg);

  bool all_failed = true;
  std::string first_error;
  for (const auto& cell : sweep.cells) {
    if (cell.failed && first_error.empty()) first_error = cell.error;
    all_failed = all_failed && cell.failed;
  }
  if (all_failed) throw std::runtime_error("all cells failed: " + first_error);

  const std::string text = args.format == "json" ? coverage_sweep_json(sweep)
                                                 : coverage_sweep_csv(sweep);
  emit(args.out, text, "coverage", coverage_args_json(args));
  return kExitOk;
}

// ---- fit ----

struct FitArgs {
  std::string model;
  std::string input;
  std::optional<std::string> out;
};

json fit_args_json(const FitArgs& a) {
  json j{{"model", a.model}, {"input", a.input}};
  if (a.out) j["out"] = *a.out;
  return j;
}

FitArgs fit_args_from_json(const json& j) {
  FitArgs a;
  a.model = j.at("model");
  a.input = j.at("input");
  if (j.contains("out")) a.out = j["out"].get<std::string>();
  return a;
}

int run_fit(const FitArgs& args) {
  if (args.model != "capacity" && args.model != "coverage")
    throw UsageError("--model must be capacity or coverage");
  const std::vector<SweepRow> rows = read_sweep_rows(args.input, args.model);
  const FitReport report = args.model == "capacity" ? fit_capacity_model(rows)
                                                    : fit_coverage_model(rows);
  emit(args.out, fit_report_json(report, args.model), "fit", fit_args_json(args));
  return kExitOk;
}

// ---- effectiveness ----

struct EffArgs {
  std::vector<std::string> params_files;
  std::vector<int> dims;
  std::vector<double> radii;
  bool preset_paper_fmr = false;
  std::string format = "csv";
  std::optional<std::string> out;
};

json eff_args_json(const EffArgs& a) {
  json j;
  j["params_files"] = a.params_files;
  j["dims"] = a.dims;
  j["radii"] = a.radii;
  j["preset_paper_fmr"] = a.preset_paper_fmr;
  j["format"] = a.format;
  if (a.out) j["out"] = *a.out;
  return j;
}

EffArgs eff_args_from_json(const json& j) {
  EffArgs a;
  a.params_files = j.at("params_files").get<std::vector<std::string>>();
  a.dims = j.at("dims").get<std::vector<int>>();
  a.radii = j.at("radii").get<std::vector<double>>();
  a.preset_paper_fmr = j.at("preset_paper_fmr");
  a.format = j.at("format");
  if (j.contains("out")) a.out = j["out"].get<std::string>();
  return a;
}

int run_effectiveness(const EffArgs& args) {
  if (args.dims.empty()) throw UsageError("effectiveness: --dims is required");
  if (args.radii.empty() && !args.preset_paper_fmr)
    throw UsageError("effectiveness: give --radii or --preset paper-fmr");

  std::vector<fs::path> paths(args.params_files.begin(), args.params_files.end());
  const FitParams params = read_params_files(paths);
  if (!params.capacity)
    throw std::runtime_error("params files miss the capacity section");
  if (!params.coverage)
    throw std::runtime_error("params files miss the coverage section");

  const EffectivenessGrid grid =
      args.preset_paper_fmr ? effectiveness_paper_preset(params, args.dims)
                            : effectiveness_grid(params, args.dims, args.radii);

  const std::string text = args.format == "json" ? effectiveness_json(grid)
                                                 : effectiveness_csv(grid);
  emit(args.out, text, "effectiveness", eff_args_json(args));
  return kExitOk;
}

// ---- eval ----

struct EvalArgs {
  std::string db;
  std::vector<std::string> attacks;
  std::vector<double> fmr = {1e-1, 1e-2, 1e-3, 1e-4};
  std::size_t pair_cap = 0;
  int bins = 100;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
};

json eval_args_json(const EvalArgs& a) {
  json j;
  j["db"] = a.db;
  j["attacks"] = a.attacks;
  j["fmr"] = a.fmr;
  j["pair_cap"] = a.pair_cap;
  j["bins"] = a.bins;
  j["seed"] = a.seed;
  if (a.out) j["out"] = *a.out;
  return j;
}

EvalArgs eval_args_from_json(const json& j) {
  EvalArgs a;
  a.db = j.at("db");
  a.attacks = j.at("attacks").get<std::vector<std::string>>();
  a.fmr = j.at("fmr").get<std::vector<double>>();
  a.pair_cap = j.at("pair_cap");
  a.bins = j.at("bins");
  a.seed = j.at("seed");
  if (j.contains("out")) a.out = j["out"].get<std::string>();
  return a;
}

int run_eval(const EvalArgs& args) {
  if (args.attacks.empty()) throw UsageError("eval: at least one --attacks file");

  const EmbeddingDataset db = read_dataset(args.db);

  EvalReport report;
  report.db_path = args.db;
  report.db_records = static_cast<std::size_t>(db.size());
  report.db_identities = db.identity_count();
  report.dim = db.dim;
  report.histogram_bins = args.bins;

  const ScoreSet scores = score_sets(db, args.pair_cap, args.seed);
  report.sampling = scores.meta;
  report.thresholds = thresholds(scores, args.fmr);
  report.histograms["genuine"] = make_histogram(scores.genuine, args.bins);
  report.histograms["imposter"] = make_histogram(scores.imposter, args.bins);

  for (const auto& attack_path : args.attacks) {
    const EmbeddingDataset attacks = read_dataset(attack_path);
    const std::string label = fs::path(attack_path).stem().string();
    report.attack_sets.emplace_back(label, static_cast<std::size_t>(attacks.size()));
    const CoverageReport cov = attack_coverage(db, attacks, report.thresholds, label);
    report.coverage.per_attack.insert(report.coverage.per_attack.end(),
                                      cov.per_attack.begin(), cov.per_attack.end());
    report.coverage.aggregate.insert(report.coverage.aggregate.end(),
                                     cov.aggregate.begin(), cov.aggregate.end());
    const AttackScores dist = attack_score_distribution(db, attacks, args.bins);
    report.histograms["attack:" + label] = dist.histogram;
  }

  const std::string report_text = eval_report_json(report);
  if (args.out) {
    const fs::path out_path(*args.out);
    fs::path base = out_path;
    base.replace_extension();
    const std::string table_path = base.string() + "_table.csv";
    const std::string hist_path = base.string() + "_hist.csv";
    write_text_file(out_path, report_text);
    write_text_file(table_path, eval_coverage_table_csv(report));
    write_text_file(hist_path, eval_histograms_csv(report));
    write_manifest(*args.out, "eval", eval_args_json(args),
                   {*args.out, table_path, hist_path});
  } else {
    std::cout << report_text;
  }
  return kExitOk;
}

// ---- synth ----

struct SynthArgs {
  int identities = 0;
  int images = 0;
  int dim = 0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

json synth_args_json(const SynthArgs& a) {
  return json{{"identities", a.identities}, {"images", a.images},
              {"dim", a.dim},               {"noise", a.noise},
              {"seed", a.seed},             {"out", a.out}};
}

SynthArgs synth_args_from_json(const json& j) {
  SynthArgs a;
  a.identities = j.at("identities");
  a.images = j.at("images");
  a.dim = j.at("dim");
  a.noise = j.at("noise");
  a.seed = j.at("seed");
  a.out = j.at("out");
  return a;
}

int run_synth(const SynthArgs& args) {
  const EmbeddingDataset db = synth_dataset(args.identities, args.images,
                                            args.dim, args.noise, args.seed);
  write_dataset(args.out, db);
  write_manifest(args.out, "synth", synth_args_json(args), {args.out});
  return kExitOk;
}

// ---- rerun ----

int dispatch_manifest(const json& manifest, const std::optional<std::string>& out) {
  const std::string command = manifest.at("command");
  json options = manifest.at("options");
  if (out) options["out"] = *out;
  if (command == "capacity") return run_capacity(capacity_args_from_json(options));
  if (command == "coverage") return run_coverage(coverage_args_from_json(options));
  if (command == "fit") return run_fit(fit_args_from_json(options));
  if (command == "effectiveness")
    return run_effectiveness(eff_args_from_json(options));
  if (command == "eval") return run_eval(eval_args_from_json(options));
  if (command == "synth") {
    SynthArgs a = synth_args_from_json(options);
    if (out) a.out = *out;
    return run_synth(a);
  }
  throw std::runtime_error("manifest names unknown command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical face-space capacity, MasterFace coverage, and "
               "biometric coverage evaluation"};
  app.require_subcommand(1);
  // Global flags (--seed, --out, ...) may appear after the subcommand.
  app.fallthrough();

  std::uint64_t seed = 0;
  int threads = 0;
  std::string format = "csv";
  std::string out;
  app.add_option("--seed", seed, "master RNG seed")->capture_default_str();
  app.add_option("--threads", threads, "worker cap (0 = hardware)")
      ->capture_default_str();
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--out", out, "output path (stdout when omitted)");

  // capacity
  auto* cap_cmd = app.add_subcommand("capacity", "face capacity N(r, d)");
  int cap_dim = 0;
  double cap_radius = 0.0;
  std::string cap_sweep_dims, cap_sweep_radii;
  CapacityArgs cap_args;
  cap_cmd->add_option("--dim", cap_dim, "embedding dimension");
  cap_cmd->add_option("--radius", cap_radius, "decision distance (chord)");
  cap_cmd->add_option("--sweep-dims", cap_sweep_dims, "dimension grid, e.g. 3..10");
  cap_cmd->add_option("--sweep-radii", cap_sweep_radii,
                      "radius grid, e.g. 0.65:1.35:0.05");
  cap_cmd->add_option("--n-max", cap_args.n_max, "search ceiling")
      ->capture_default_str();
  cap_cmd->add_option("--restarts", cap_args.restarts, "restarts per n")
      ->capture_default_str();
  cap_cmd->add_option("--max-iters", cap_args.max_iters, "solver iteration cap")
      ->capture_default_str();
  cap_cmd->add_option("--feasibility-tol", cap_args.feasibility_tol,
                      "radius slack for counting")
      ->capture_default_str();
  cap_cmd->add_option("--convention", cap_args.convention,
                      "boundary convention (exclusive | inclusive)")
      ->check(CLI::IsMember({"exclusive", "inclusive"}))
      ->capture_default_str();

  // coverage
  auto* cov_cmd = app.add_subcommand("coverage", "MasterFace coverage N-bar(r, d)");
  int cov_dim = 0;
  double cov_radius = 0.0;
  std::string cov_sweep_dims, cov_sweep_radii;
  CoverageArgs cov_args;
  cov_cmd->add_option("--dim", cov_dim, "embedding dimension");
  cov_cmd->add_option("--radius", cov_radius, "decision distance (chord)");
  cov_cmd->add_option("--sweep-dims", cov_sweep_dims, "dimension grid");
  cov_cmd->add_option("--sweep-radii", cov_sweep_radii, "radius grid");
  cov_cmd->add_option("--n-max", cov_args.n_max, "search ceiling")
      ->capture_default_str();
  cov_cmd->add_option("--restarts", cov_args.restarts, "restarts per n")
      ->capture_default_str();
  cov_cmd->add_option("--max-iters", cov_args.max_iters,
                      "iterations per penalty round")
      ->capture_default_str();
  cov_cmd->add_option("--feasibility-tol", cov_args.feasibility_tol,
                      "downward separation slack reported in results")
      ->capture_default_str();
  cov_cmd->add_option("--match-slack", cov_args.match_slack, "match-side slack")
      ->capture_default_str();
  cov_cmd->add_option("--separation-margin", cov_args.separation_margin,
                      "strict separation margin for the feasibility verdict")
      ->capture_default_str();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "two-stage model fit from a sweep table");
  FitArgs fit_args;
  fit_cmd->add_option("--model", fit_args.model, "capacity | coverage")->required();
  fit_cmd->add_option("--in", fit_args.input, "sweep CSV/JSON file")->required();

  // effectiveness
  auto* eff_cmd = app.add_subcommand("effectiveness",
                                     "eta(r, d) grids from fitted parameters");
  EffArgs eff_args;
  std::string eff_dims, eff_radii, eff_preset;
  eff_cmd->add_option("--params", eff_args.params_files,
                      "params JSON (repeat to merge capacity + coverage)")
      ->required();
  eff_cmd->add_option("--dims", eff_dims, "dimension list, e.g. 3..10 or 128,512");
  eff_cmd->add_option("--radii", eff_radii, "radius list");
  eff_cmd->add_option("--preset", eff_preset, "named radius preset (paper-fmr)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "biometric coverage evaluation");
  EvalArgs eval_args;
  eval_cmd->add_option("--db", eval_args.db, "database embeddings (EMB1 or CSV)")
      ->required();
  eval_cmd->add_option("--attacks", eval_args.attacks,
                       "attack embeddings (repeatable)")
      ->required();
  std::string eval_fmr;
  eval_cmd->add_option("--fmr", eval_fmr, "target FMR list")->capture_default_str();
  eval_cmd->add_option("--pair-cap", eval_args.pair_cap,
                       "subsample cap per score set (0 = all pairs)")
      ->capture_default_str();
  eval_cmd->add_option("--bins", eval_args.bins, "histogram bins")
      ->capture_default_str();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "synthetic embedding database");
  SynthArgs synth_args;
  synth_cmd->add_option("--identities", synth_args.identities, "identity count")
      ->required();
  synth_cmd->add_option("--images", synth_args.images, "images per identity")
      ->required();
  synth_cmd->add_option("--dim", synth_args.dim, "embedding dimension")->required();
  synth_cmd->add_option("--noise", synth_args.noise, "within-identity noise sigma")
      ->capture_default_str();

  // rerun
  auto* rerun_cmd = app.add_subcommand("rerun", "re-execute a run from its manifest");
  std::string manifest_path;
  rerun_cmd->add_option("manifest", manifest_path, "manifest JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::optional<std::string> out_opt =
      out.empty() ? std::nullopt : std::make_optional(out);

  try {
    if (cap_cmd->parsed()) {
      if (cap_dim > 0) cap_args.dims.push_back(cap_dim);
      if (!cap_sweep_dims.empty()) {
        const auto more = parse_int_list(cap_sweep_dims);
        cap_args.dims.insert(cap_args.dims.end(), more.begin(), more.end());
      }
      if (cap_cmd->count("--radius")) cap_args.radii.push_back(cap_radius);
      if (!cap_sweep_radii.empty()) {
        const auto more = parse_double_list(cap_sweep_radii);
        cap_args.radii.insert(cap_args.radii.end(), more.begin(), more.end());
      }
      if (cap_args.dims.empty())
        throw UsageError("capacity: give --dim or --sweep-dims");
      if (cap_args.radii.empty())
        throw UsageError("capacity: give --radius or --sweep-radii");
      cap_args.seed = seed;
      cap_args.threads = threads;
      cap_args.format = format;
      cap_args.out = out_opt;
      return run_capacity(cap_args);
    }
    if (cov_cmd->parsed()) {
      if (cov_dim > 0) cov_args.dims.push_back(cov_dim);
      if (!cov_sweep_dims.empty()) {
        const auto more = parse_int_list(cov_sweep_dims);
        cov_args.dims.insert(cov_args.dims.end(), more.begin(), more.end());
      }
      if (cov_cmd->count("--radius")) cov_args.radii.push_back(cov_radius);
      if (!cov_sweep_radii.empty()) {
        const auto more = parse_double_list(cov_sweep_radii);
        cov_args.radii.insert(cov_args.radii.end(), more.begin(), more.end());
      }
      if (cov_args.dims.empty())
        throw UsageError("coverage: give --dim or --sweep-dims");
      if (cov_args.radii.empty())
        throw UsageError("coverage: give --radius or --sweep-radii");
      cov_args.seed = seed;
      cov_args.threads = threads;
      cov_args.format = format;
      cov_args.out = out_opt;
      return run_coverage(cov_args);
    }
    if (fit_cmd->parsed()) {
      fit_args.out = out_opt;
      return run_fit(fit_args);
    }
    if (eff_cmd->parsed()) {
      if (!eff_preset.empty()) {
        if (eff_preset != "paper-fmr")
          throw UsageError("unknown preset '" + eff_preset + "'");
        eff_args.preset_paper_fmr = true;
      }
      if (!eff_dims.empty()) eff_args.dims = parse_int_list(eff_dims);
      if (!eff_radii.empty()) eff_args.radii = parse_double_list(eff_radii);
      eff_args.format = format;
      eff_args.out = out_opt;
      return run_effectiveness(eff_args);
    }
    if (eval_cmd->parsed()) {
      if (!eval_fmr.empty()) eval_args.fmr = parse_double_list(eval_fmr);
      eval_args.seed = seed;
      eval_args.out = out_opt;
      return run_eval(eval_args);
    }
    if (synth_cmd->parsed()) {
      if (!out_opt) throw UsageError("synth: --out is required");
      synth_args.seed = seed;
      synth_args.out = *out_opt;
      return run_synth(synth_args);
    }
    if (rerun_cmd->parsed()) {
      const json manifest = json::parse(read_text_file(manifest_path));
      return dispatch_manifest(manifest, out_opt);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
