// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. Criteria that specify CLI invocations shell out to the facecap binary
// (path in FACECAP_CLI); numeric checks use the library directly.

#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <json.hpp>

#include "facecap/biometric.hpp"
#include "facecap/capacity.hpp"
#include "facecap/coverage.hpp"
#include "facecap/effectiveness.hpp"
#include "facecap/geometry.hpp"
#include "facecap/io.hpp"
#include "facecap/model_fit.hpp"

using namespace facecap;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

std::string cli_binary() {
  if (const char* env = std::getenv("FACECAP_CLI")) return env;
  for (const char* guess : {"tools/facecap", "../tools/facecap", "./facecap"})
    if (fs::exists(guess)) return guess;
  FAIL("FACECAP_CLI is not set and no facecap binary was found");
  return "";
}

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = cli_binary() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult res;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe))
    res.output.append(buf, got);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "facecap_acceptance";
  fs::create_directories(dir);
  return dir;
}

// Aggregates this criterion's checks so the PASS/FAIL line is accurate.
class Criterion {
 public:
  Criterion(int number, std::string label)
      : number_(number), label_(std::move(label)) {}

  void expect(bool condition, const char* what) {
    ok_ = ok_ && condition;
    CHECK_MESSAGE(condition, "criterion ", number_, ": ", what);
  }

  ~Criterion() {
    std::printf("[acceptance] criterion %d (%s): %s\n", number_, label_.c_str(),
                ok_ ? "PASS" : "FAIL");
    std::fflush(stdout);
  }

 private:
  int number_;
  std::string label_;
  bool ok_ = true;
};

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sem(const std::vector<double>& v) {
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1) /
                   static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("criterion 1: 2D analytic ground truth") {
  Criterion crit(1, "2D analytic ground truth");
  const auto start = clock_type::now();

  const fs::path cap_out = work_dir() / "crit1_capacity.json";
  const CliResult cap = run_cli(
      "capacity --dim 2 --radius 0.4 --n-max 32 --restarts 16 --seed 7 "
      "--format json --out " + cap_out.string());
  crit.expect(cap.exit_code == 0, "capacity run succeeds");
  const json cap_json = json::parse(read_text_file(cap_out));
  const json& cap_cell = cap_json.at("cells").at(0);
  crit.expect(cap_cell.at("N") == 15, "N(0.4, 2) = 15 under the default convention");
  crit.expect(std::abs(cap_cell.at("r_prime").get<double>() -
                       2.0 * std::sin(M_PI / 15.0)) < 1e-3,
              "r' within 1e-3 of 2 sin(pi/15)");

  const fs::path cov_out = work_dir() / "crit1_coverage.json";
  const CliResult cov = run_cli(
      "coverage --dim 2 --radius 0.4 --n-max 8 --seed 7 --format json --out " +
      cov_out.string());
  crit.expect(cov.exit_code == 0, "coverage run succeeds");
  crit.expect(json::parse(read_text_file(cov_out)).at("cells").at(0).at("N_bar") == 2,
              "N-bar(0.4, 2) = 2");

  // The figure-caption reading (2/16 = 12.5%) corresponds to the inclusive
  // convention: the first n that fails the separability bound.
  const fs::path incl_out = work_dir() / "crit1_inclusive.json";
  const CliResult incl = run_cli(
      "capacity --dim 2 --radius 0.4 --n-max 32 --restarts 16 --seed 7 "
      "--convention inclusive --format json --out " + incl_out.string());
  crit.expect(incl.exit_code == 0, "inclusive-convention run succeeds");
  crit.expect(json::parse(read_text_file(incl_out)).at("cells").at(0).at("N") == 16,
              "inclusive convention reports 16");

  crit.expect(seconds_since(start) < 10.0, "runtime under 10 s");
}

TEST_CASE("criterion 2: known spherical codes") {
  Criterion crit(2, "known spherical codes");
  const auto start = clock_type::now();

  const fs::path oct = work_dir() / "crit2_oct.json";
  crit.expect(run_cli("capacity --dim 3 --radius 1.414214 --n-max 16 --restarts 32 "
                      "--seed 7 --format json --out " + oct.string()).exit_code == 0,
              "octahedron run succeeds");
  crit.expect(json::parse(read_text_file(oct)).at("cells").at(0).at("N") == 6,
              "N(sqrt2, 3) = 6 (octahedron)");

  const fs::path cross = work_dir() / "crit2_cross.json";
  crit.expect(run_cli("capacity --dim 4 --radius 1.414214 --n-max 16 --restarts 32 "
                      "--seed 7 --format json --out " + cross.string()).exit_code == 0,
              "cross-polytope run succeeds");
  crit.expect(json::parse(read_text_file(cross)).at("cells").at(0).at("N") == 8,
              "N(sqrt2, 4) = 8 (cross-polytope)");

  const fs::path tetra = work_dir() / "crit2_tetra.json";
  crit.expect(run_cli("capacity --dim 3 --radius 1.63 --n-max 16 --restarts 32 "
                      "--seed 7 --format json --out " + tetra.string()).exit_code == 0,
              "tetrahedron run succeeds");
  crit.expect(json::parse(read_text_file(tetra)).at("cells").at(0).at("N") == 4,
              "N(1.63, 3) = 4 (tetrahedron)");

  crit.expect(seconds_since(start) < 60.0, "runtime under 60 s");
}

TEST_CASE("criterion 3: fit round-trip and reduced re-solve") {
  Criterion crit(3, "fit round-trip and reduced re-solve");
  const auto round_trip_start = clock_type::now();
  const FitParams table1 = table1_params();

  std::vector<SweepRow> cap_rows, cov_rows;
  for (int d = 3; d <= 10; ++d) {
    for (double r = 0.65; r < 1.3501; r += 0.05) {
      cap_rows.push_back({d, r, eval_capacity(*table1.capacity, r, d), true});
      cov_rows.push_back(
          {d, r, eval_coverage(*table1.coverage, table1.fixed, r, d), true});
    }
  }
  const fs::path cap_table = work_dir() / "crit3_capacity_table.csv";
  const fs::path cov_table = work_dir() / "crit3_coverage_table.csv";
  write_text_file(cap_table, sweep_rows_csv(cap_rows, "capacity"));
  write_text_file(cov_table, sweep_rows_csv(cov_rows, "coverage"));

  const fs::path cap_params = work_dir() / "crit3_capacity_params.json";
  const fs::path cov_params = work_dir() / "crit3_coverage_params.json";
  crit.expect(run_cli("fit --model capacity --in " + cap_table.string() +
                      " --out " + cap_params.string()).exit_code == 0,
              "capacity fit succeeds");
  crit.expect(run_cli("fit --model coverage --in " + cov_table.string() +
                      " --out " + cov_params.string()).exit_code == 0,
              "coverage fit succeeds");

  const FitParams fitted = read_params_files({cap_params, cov_params});
  auto close = [](double got, double want) {
    return std::abs(got - want) <= 1e-6 * std::max(1.0, std::abs(want));
  };
  crit.expect(close(fitted.capacity->alpha, 0.993), "alpha recovered");
  crit.expect(close(fitted.capacity->beta, 3.701), "beta recovered");
  crit.expect(close(fitted.capacity->gamma, -0.436), "gamma recovered");
  crit.expect(close(fitted.capacity->delta, -3.706), "delta recovered");
  crit.expect(close(fitted.coverage->alpha_bar, -0.172), "alpha-bar recovered");
  crit.expect(close(fitted.coverage->beta_bar, 8.258), "beta-bar recovered");
  crit.expect(close(fitted.coverage->gamma_bar, 0.153), "gamma-bar recovered");
  crit.expect(close(fitted.coverage->delta_bar, 0.315), "delta-bar recovered");
  crit.expect(seconds_since(round_trip_start) < 5.0,
              "round-trip runtime under 5 s");

  // Reduced re-solve, d = 3..6. Only ballpark agreement with Table 1 is
  // attainable (the sweep grid and restart counts behind Table 1 are not
  // published): same parameter signs, alpha within +/- 0.3. Radii stay below
  // the plateaus where small-d counts stick to the polytope values (12, 2d)
  // and the log-linear model cannot follow; the solve dominates the suite's
  // runtime (a few minutes single-core).
  CapacityConfig cfg;
  cfg.n_max = 300;
  cfg.restarts = 2;
  cfg.max_iters = 4000;
  cfg.seed = 11;
  std::vector<double> resolve_radii;
  for (double r = 0.65; r < 0.9001; r += 0.05) resolve_radii.push_back(r);
  const CapacitySweep sweep = capacity_sweep({3, 4, 5, 6}, resolve_radii, cfg);
  std::vector<SweepRow> solved;
  for (std::size_t di = 0; di < sweep.dims.size(); ++di) {
    for (std::size_t ri = 0; ri < sweep.radii.size(); ++ri) {
      const CapacityCell& cell = sweep.cell(di, ri);
      if (cell.failed) continue;
      solved.push_back({sweep.dims[di], sweep.radii[ri],
                        static_cast<double>(cell.result.capacity),
                        cell.result.converged && !cell.result.ceiling_reached});
    }
  }
  const FitReport resolve_fit = fit_capacity_model(solved);
  const CapacityParams& p = *resolve_fit.params.capacity;
  crit.expect(p.alpha > 0.0, "re-solved alpha positive");
  crit.expect(p.beta > 0.0, "re-solved beta positive");
  crit.expect(p.gamma < 0.0, "re-solved gamma negative");
  crit.expect(p.delta < 0.0, "re-solved delta negative");
  crit.expect(std::abs(p.alpha - 0.993) <= 0.3, "re-solved alpha within 0.3");
}

TEST_CASE("criterion 4: zero-effort equivalence on synthetic data") {
  Criterion crit(4, "zero-effort equivalence on synthetic data");
  const auto start = clock_type::now();

  const fs::path db_path = work_dir() / "crit4_db.emb1";
  const fs::path attack_path = work_dir() / "crit4_attacks.emb1";
  crit.expect(run_cli("synth --identities 100 --images 10 --dim 32 --noise 0.05 "
                      "--seed 1 --out " + db_path.string()).exit_code == 0,
              "database synthesis succeeds");
  crit.expect(run_cli("synth --identities 20 --images 1 --dim 32 --noise 0.05 "
                      "--seed 2 --out " + attack_path.string()).exit_code == 0,
              "attack synthesis succeeds");

  const fs::path report_path = work_dir() / "crit4_report.json";
  crit.expect(run_cli("eval --db " + db_path.string() + " --attacks " +
                      attack_path.string() + " --fmr 1e-1,1e-2 --out " +
                      report_path.string()).exit_code == 0,
              "evaluation succeeds");

  const json report = json::parse(read_text_file(report_path));
  for (const auto& agg : report.at("coverage").at("aggregate")) {
    const double f = agg.at("target_fmr").get<double>();
    const double cov = agg.at("sample_coverage").get<double>();
    crit.expect(cov >= 0.5 * f && cov <= 2.0 * f,
                "sample coverage within a factor of 2 of the target FMR");
  }

  // Mean comparison: fresh-identity attacks are zero-effort imposters. The
  // attack-side standard error treats each attack as the sampling unit (its
  // 1000 scores against one database are strongly correlated).
  const EmbeddingDataset db = read_dataset(db_path);
  const EmbeddingDataset attacks = read_dataset(attack_path);
  const ScoreSet scores = score_sets(db);
  std::vector<double> per_attack_means;
  for (Eigen::Index a = 0; a < attacks.size(); ++a) {
    const Eigen::VectorXd sims = db.vectors * attacks.vectors.row(a).transpose();
    per_attack_means.push_back(sims.mean());
  }
  const double gap = std::abs(mean(per_attack_means) - mean(scores.imposter));
  const double combined_sem =
      std::hypot(sem(per_attack_means), sem(scores.imposter));
  crit.expect(gap < 3.0 * combined_sem,
              "attack mean within 3 standard errors of the imposter mean");

  crit.expect(seconds_since(start) < 30.0, "runtime under 30 s");
}

TEST_CASE("criterion 5: high-dimensional effectiveness collapse") {
  Criterion crit(5, "high-dimensional effectiveness collapse");
  const auto start = clock_type::now();
  const FitParams table1 = table1_params();

  crit.expect(effectiveness(table1, 1.18, 128.0).eta < 1e-10,
              "eta(1.18, 128) below 1e-10");

  const std::vector<int> pow2{8, 16, 32, 64, 128, 256, 512};
  const EffectivenessGrid grid = effectiveness_paper_preset(table1, pow2);
  bool decreasing = true;
  for (Eigen::Index ri = 0; ri < 3; ++ri)
    for (std::size_t di = 0; di + 1 < pow2.size(); ++di)
      decreasing = decreasing &&
                   grid.eta(static_cast<Eigen::Index>(di) + 1, ri) <
                       grid.eta(static_cast<Eigen::Index>(di), ri);
  crit.expect(decreasing, "eta strictly decreasing over d = 8..512 per preset radius");

  // Exponential-vs-polynomial growth, checked on an equally spaced d grid.
  std::vector<int> dense;
  for (int d = 8; d <= 512; d += 8) dense.push_back(d);
  const EffectivenessGrid fine = effectiveness_paper_preset(table1, dense);
  bool linear_log_capacity = true;
  bool cubic_coverage = true;
  for (Eigen::Index ri = 0; ri < 3; ++ri) {
    for (std::size_t di = 0; di + 2 < dense.size(); ++di) {
      const auto i = static_cast<Eigen::Index>(di);
      const double l0 = std::log(fine.capacity(i, ri));
      const double l1 = std::log(fine.capacity(i + 1, ri));
      const double l2 = std::log(fine.capacity(i + 2, ri));
      linear_log_capacity =
          linear_log_capacity && std::abs((l2 - l1) - (l1 - l0)) < 1e-9;
    }
    std::vector<double> third;
    for (std::size_t di = 0; di + 3 < dense.size(); ++di) {
      const auto i = static_cast<Eigen::Index>(di);
      third.push_back(fine.coverage(i + 3, ri) - 3.0 * fine.coverage(i + 2, ri) +
                      3.0 * fine.coverage(i + 1, ri) - fine.coverage(i, ri));
    }
    for (std::size_t k = 0; k + 1 < third.size(); ++k)
      cubic_coverage = cubic_coverage && std::abs(third[k + 1] - third[k]) < 1e-6;
  }
  crit.expect(linear_log_capacity, "log-capacity linear in d within 1e-9");
  crit.expect(cubic_coverage, "coverage third differences constant within 1e-6");

  crit.expect(seconds_since(start) < 1.0, "runtime under 1 s");
}

TEST_CASE("criterion 6: metric correctness and invariant suites") {
  Criterion crit(6, "metric correctness and invariant suites");
  const auto start = clock_type::now();

  // Threshold order statistics, hand-enumerated.
  ScoreSet hand;
  for (int i = 0; i <= 9; ++i) hand.imposter.push_back(0.1 * i);
  hand.genuine = {0.95};
  const ThresholdTable hand_table = thresholds(hand, {0.1});
  crit.expect(std::abs(hand_table.rows[0].threshold - 0.9) < 1e-12,
              "10-score threshold is the top order statistic");
  crit.expect(hand_table.rows[0].achieved_fmr == 0.1,
              "achieved FMR exactly 0.1");

  // Coverage definition example: 2/3 samples, 1/2 identities.
  Eigen::MatrixXd raw(3, 4);
  raw << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0;
  const EmbeddingDataset db =
      make_dataset(4, {{"A", "1"}, {"A", "2"}, {"B", "1"}}, raw);
  Eigen::MatrixXd attack_raw(1, 4);
  attack_raw << 1, 1, 0, 0;
  ThresholdTable fixed;
  fixed.rows.push_back({0.1, 0.5, 0.1, 0.0, false, false});
  const CoverageReport cov = attack_coverage(
      db, make_dataset(4, {{"mf", "0"}}, attack_raw), fixed, "mf");
  crit.expect(std::abs(cov.per_attack[0].sample_fraction - 2.0 / 3.0) < 1e-12,
              "sample fraction 2/3");
  crit.expect(cov.per_attack[0].identity_fraction == 0.5, "identity fraction 1/2");

  // Norms and conversion identity on solver output.
  const DistributeResult dist = distribute(10, 4, 8, 3000, 3);
  bool norms_ok = true;
  for (Eigen::Index i = 0; i < dist.points.rows(); ++i)
    norms_ok = norms_ok && std::abs(dist.points.row(i).norm() - 1.0) < 1e-9;
  crit.expect(norms_ok, "solver output lies on the unit sphere within 1e-9");
  bool identity_ok = true;
  for (Eigen::Index i = 0; i < dist.points.rows(); ++i)
    for (Eigen::Index j = i + 1; j < dist.points.rows(); ++j) {
      const double cos_ij = dist.points.row(i).dot(dist.points.row(j));
      const double d2 = (dist.points.row(i) - dist.points.row(j)).squaredNorm();
      identity_ok = identity_ok && std::abs((2.0 - 2.0 * cos_ij) - d2) < 1e-9;
    }
  crit.expect(identity_ok, "D^2 = 2 - 2 cos holds on solver output");

  // Determinism under the seed.
  const DistributeResult again = distribute(10, 4, 8, 3000, 3);
  crit.expect(again.energy == dist.energy &&
                  (again.points - dist.points).cwiseAbs().maxCoeff() == 0.0,
              "distribute is bit-deterministic");

  // Monotonicity of N in r and d.
  CapacityConfig mono;
  mono.dim = 2;
  mono.n_max = 48;
  mono.restarts = 8;
  mono.seed = 7;
  mono.radius = 0.4;
  const int n_wide = capacity(mono).capacity;
  mono.radius = 0.6;
  const int n_narrow = capacity(mono).capacity;
  crit.expect(n_wide >= n_narrow, "N non-increasing in r");

  CapacityConfig dims;
  dims.radius = 1.414214;
  dims.n_max = 12;
  dims.restarts = 16;
  dims.seed = 7;
  dims.dim = 3;
  const int n3 = capacity(dims).capacity;
  dims.dim = 4;
  const int n4 = capacity(dims).capacity;
  crit.expect(n4 >= n3, "N non-decreasing in d");

  crit.expect(seconds_since(start) < 60.0, "runtime under 60 s");
}

TEST_CASE("criterion 7: external-embedding path and format round-trip") {
  Criterion crit(7, "EMB1 format round-trip");

  // Absolute coverage tables and exact score distributions of external
  // recognition systems require the original models, datasets, and attack
  // images; they are not reproducible at desk scale. The harness instead
  // ingests externally produced EMB1/CSV embedding dumps, and this exchange
  // path is what the round-trip below gates.
  std::printf("[acceptance] note: absolute coverage numbers from external "
              "recognition systems are out of scope; the embedding exchange "
              "path is verified instead.\n");

  Eigen::MatrixXd exact(3, 4);
  exact << 1, 0, 0, 0, 0, -1, 0, 0, 0.5, 0.5, 0.5, 0.5;
  const EmbeddingDataset db =
      make_dataset(4, {{"alpha", "a"}, {"beta", "b"}, {"gamma", "c"}}, exact);
  const EmbeddingDataset back = decode_emb1(encode_emb1(db));
  bool identical = back.dim == db.dim && back.size() == db.size() &&
                   (back.vectors - db.vectors).cwiseAbs().maxCoeff() == 0.0;
  for (std::size_t i = 0; i < db.records.size(); ++i)
    identical = identical && back.records[i].identity == db.records[i].identity &&
                back.records[i].image_id == db.records[i].image_id;
  crit.expect(identical, "write -> read is bit-identical for f32-exact vectors");

  const EmbeddingDataset canonical =
      decode_emb1(encode_emb1(synth_dataset(20, 4, 16, 0.08, 12)));
  const std::string bytes = encode_emb1(canonical);
  const EmbeddingDataset once = decode_emb1(bytes);
  crit.expect((once.vectors - canonical.vectors).cwiseAbs().maxCoeff() == 0.0 &&
                  encode_emb1(once) == bytes,
              "canonicalized datasets are a byte-level fixed point");
}
