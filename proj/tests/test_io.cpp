#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "facecap/capacity.hpp"
#include "facecap/coverage.hpp"
#include "facecap/io.hpp"
#include "facecap/rng.hpp"

using namespace facecap;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "facecap_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

// A dataset whose coordinates are exactly representable in binary32 and whose
// rows are exactly unit length, so the EMB1 float quantization is lossless.
EmbeddingDataset exact_dataset() {
  Eigen::MatrixXd raw(3, 4);
  raw << 1, 0, 0, 0, 0, -1, 0, 0, 0.5, 0.5, 0.5, 0.5;
  return make_dataset(4, {{"alpha", "a"}, {"beta", "b"}, {"gamma", "c"}}, raw);
}

bool datasets_bit_identical(const EmbeddingDataset& a, const EmbeddingDataset& b) {
  if (a.dim != b.dim || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i)
    if (a.records[i].identity != b.records[i].identity ||
        a.records[i].image_id != b.records[i].image_id)
      return false;
  return (a.vectors - b.vectors).cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

TEST_CASE("EMB1 round trip is bit-identical for exactly representable vectors") {
  const EmbeddingDataset db = exact_dataset();
  const EmbeddingDataset back = decode_emb1(encode_emb1(db));
  CHECK(datasets_bit_identical(db, back));
}

TEST_CASE("EMB1 reaches a fixed point after one canonicalization pass") {
  const EmbeddingDataset raw = synth_dataset(12, 3, 24, 0.07, 31);
  const EmbeddingDataset d1 = decode_emb1(encode_emb1(raw));
  const std::string f2 = encode_emb1(d1);
  const EmbeddingDataset d2 = decode_emb1(f2);
  CHECK(datasets_bit_identical(d1, d2));
  CHECK(encode_emb1(d2) == f2);
}

TEST_CASE("EMB1 rejects malformed payloads") {
  const std::string bytes = encode_emb1(exact_dataset());
  CHECK_THROWS_WITH_AS(decode_emb1(bytes.substr(0, bytes.size() - 3)),
                       "EMB1: truncated payload", std::runtime_error);
  CHECK_THROWS_WITH_AS(decode_emb1(bytes.substr(0, 10)),
                       "EMB1: truncated payload", std::runtime_error);
  std::string garbled = bytes;
  garbled[0] = 'X';
  CHECK_THROWS_WITH_AS(decode_emb1(garbled), "EMB1: bad magic bytes",
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(decode_emb1(bytes + "zz"),
                       "EMB1: trailing bytes after declared records",
                       std::runtime_error);
}

TEST_CASE("EMB1 preserves non-ASCII labels") {
  Eigen::MatrixXd raw(1, 2);
  raw << 1, 0;
  const EmbeddingDataset db =
      make_dataset(2, {{"pr\xc3\xbc""fling", "bild\xe2\x84\x96""1"}}, raw);
  const EmbeddingDataset back = decode_emb1(encode_emb1(db));
  CHECK(back.records[0].identity == "pr\xc3\xbc""fling");
  CHECK(back.records[0].image_id == "bild\xe2\x84\x96""1");
}

TEST_CASE("dataset files round trip through both formats") {
  const EmbeddingDataset db = synth_dataset(5, 2, 6, 0.1, 77);

  const fs::path emb = temp_file("roundtrip.emb1");
  write_dataset(emb, db);
  const EmbeddingDataset from_emb = read_dataset(emb);
  CHECK(from_emb.size() == db.size());

  // CSV carries full double precision, so this round trip is exact.
  const fs::path csv = temp_file("roundtrip.csv");
  write_dataset(csv, db);
  const EmbeddingDataset from_csv = read_dataset(csv);
  CHECK(datasets_bit_identical(db, from_csv));
}

TEST_CASE("dataset CSV reader names the offending line") {
  const fs::path path = temp_file("broken.csv");
  write_text_file(path, "identity,image_id,v0,v1\na,1,1.0\n");
  CHECK_THROWS_AS(read_dataset(path), std::runtime_error);
  write_text_file(path, "identity,image,v0,v1\na,1,1.0,0.0\n");
  CHECK_THROWS_AS(read_dataset(path), std::runtime_error);
  write_text_file(path, "identity,image_id,v0,v1\na,1,1.0,oops\n");
  CHECK_THROWS_AS(read_dataset(path), std::runtime_error);
}

TEST_CASE("sweep tables round trip through CSV and JSON") {
  CapacityConfig defaults;
  defaults.n_max = 24;
  defaults.restarts = 4;
  defaults.seed = 3;
  const CapacitySweep sweep = capacity_sweep({2}, {0.4, 0.7}, defaults);

  const fs::path csv = temp_file("sweep.csv");
  write_text_file(csv, capacity_sweep_csv(sweep));
  const std::vector<SweepRow> rows = read_sweep_rows(csv, "capacity");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].dim == 2);
  CHECK(rows[0].radius == 0.4);
  CHECK(rows[0].count == sweep.cell(0, 0).result.capacity);
  CHECK(rows[0].usable);

  const fs::path json_path = temp_file("sweep.json");
  write_text_file(json_path, capacity_sweep_json(sweep));
  const std::vector<SweepRow> json_rows = read_sweep_rows(json_path, "capacity");
  REQUIRE(json_rows.size() == 2);
  CHECK(json_rows[1].count == rows[1].count);

  // Reading with the wrong model is a schema error.
  CHECK_THROWS_AS(read_sweep_rows(csv, "coverage"), std::runtime_error);
  CHECK_THROWS_AS(read_sweep_rows(json_path, "coverage"), std::runtime_error);
}

TEST_CASE("coverage sweep serialization carries the N_bar column") {
  CoverageConfig defaults;
  defaults.n_max = 4;
  defaults.restarts = 8;
  defaults.seed = 3;
  const CoverageSweep sweep = coverage_sweep({2}, {0.4}, defaults);
  const fs::path csv = temp_file("covsweep.csv");
  write_text_file(csv, coverage_sweep_csv(sweep));
  const std::vector<SweepRow> rows = read_sweep_rows(csv, "coverage");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].count == 2);
  CHECK_THROWS_AS(read_sweep_rows(csv, "capacity"), std::runtime_error);
}

TEST_CASE("model-generated sweep rows survive the CSV round trip exactly") {
  const FitParams table1 = table1_params();
  std::vector<SweepRow> rows;
  for (int d = 3; d <= 10; ++d)
    for (double r = 0.65; r < 1.3501; r += 0.05)
      rows.push_back({d, r, eval_capacity(*table1.capacity, r, d), true});
  const fs::path path = temp_file("model_rows.csv");
  write_text_file(path, sweep_rows_csv(rows, "capacity"));
  const std::vector<SweepRow> back = read_sweep_rows(path, "capacity");
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].dim == rows[i].dim);
    CHECK(back[i].radius == rows[i].radius);
    CHECK(back[i].count == rows[i].count);
  }
}

TEST_CASE("params JSON round trips bit-exactly") {
  const FitParams table1 = table1_params();
  const fs::path path = temp_file("params.json");
  write_text_file(path, params_json(table1));
  const FitParams back = read_params_files({path});
  REQUIRE(back.capacity);
  REQUIRE(back.coverage);
  CHECK(back.capacity->alpha == table1.capacity->alpha);
  CHECK(back.capacity->delta == table1.capacity->delta);
  CHECK(back.coverage->beta_bar == table1.coverage->beta_bar);
  CHECK(back.fixed.phi == table1.fixed.phi);
  CHECK(back.fixed.epsilon == table1.fixed.epsilon);
}

TEST_CASE("params files merge by section and reject duplicates") {
  const FitParams table1 = table1_params();
  FitParams cap_only;
  cap_only.capacity = table1.capacity;
  FitParams cov_only;
  cov_only.coverage = table1.coverage;
  const fs::path cap_path = temp_file("cap.json");
  const fs::path cov_path = temp_file("cov.json");
  write_text_file(cap_path, params_json(cap_only));
  write_text_file(cov_path, params_json(cov_only));

  const FitParams merged = read_params_files({cap_path, cov_path});
  CHECK(merged.capacity);
  CHECK(merged.coverage);
  CHECK_THROWS_AS(read_params_files({cap_path, cap_path}), std::runtime_error);
}

TEST_CASE("format_double survives a parse round trip") {
  Rng rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.below(40)) *
                     (trial % 2 ? 1e-20 : 1.0);
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}
