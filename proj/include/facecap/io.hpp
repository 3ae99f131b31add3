#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "facecap/biometric.hpp"
#include "facecap/capacity.hpp"
#include "facecap/coverage.hpp"
#include "facecap/effectiveness.hpp"
#include "facecap/model_fit.hpp"

namespace facecap {

// ---- solver sweep tables ----
// Capacity CSV columns: d,r,N,r_prime,energy,converged. The converged column
// means "usable for fitting": 1 only when the backing solves converged and
// the search did not hit its n ceiling. Errored cells appear only in JSON.
std::string capacity_sweep_csv(const CapacitySweep& sweep);
std::string capacity_sweep_json(const CapacitySweep& sweep);
// Coverage CSV columns: d,r,N_bar,min_separation,objective,converged.
std::string coverage_sweep_csv(const CoverageSweep& sweep);
std::string coverage_sweep_json(const CoverageSweep& sweep);

// Reads sweep rows for fitting from CSV or JSON (by extension). `model` is
// "capacity" or "coverage"; a file with the other schema is a schema error.
std::vector<SweepRow> read_sweep_rows(const std::filesystem::path& path,
                                      const std::string& model);

// Minimal table writer for model-generated sweeps (columns d,r,<count>).
std::string sweep_rows_csv(const std::vector<SweepRow>& rows,
                           const std::string& model);

// ---- fitted parameters ----
std::string fit_report_json(const FitReport& report, const std::string& model);
// Merges parameter sections from one or more params JSON files; duplicate
// sections across files are an error.
FitParams read_params_files(const std::vector<std::filesystem::path>& paths);
std::string params_json(const FitParams& params);

// ---- effectiveness grids ----
// Long-format CSV: d,r,fmr_label,capacity,coverage,eta,flags.
std::string effectiveness_csv(const EffectivenessGrid& grid);
std::string effectiveness_json(const EffectivenessGrid& grid);

// ---- embedding datasets ----
enum class DatasetFormat { emb1, csv, auto_detect };

EmbeddingDataset read_dataset(const std::filesystem::path& path,
                              DatasetFormat format = DatasetFormat::auto_detect);
void write_dataset(const std::filesystem::path& path,
                   const EmbeddingDataset& db,
                   DatasetFormat format = DatasetFormat::auto_detect);
// In-memory codecs (exposed for round-trip tests).
std::string encode_emb1(const EmbeddingDataset& db);
EmbeddingDataset decode_emb1(const std::string& bytes);

// ---- evaluation reports ----
struct EvalReport {
  std::string db_path;
  std::size_t db_records = 0;
  std::size_t db_identities = 0;
  int dim = 0;
  ScoreSampling sampling;
  ThresholdTable thresholds;
  std::vector<std::pair<std::string, std::size_t>> attack_sets;  // label, count
  CoverageReport coverage;
  int histogram_bins = 100;
  std::map<std::string, Histogram> histograms;  // "genuine", "imposter", "attack:<label>"
};

std::string eval_report_json(const EvalReport& report);
// Table-layout CSV: one row per attack set, sample-coverage block then
// identity-coverage block over the FMR targets.
std::string eval_coverage_table_csv(const EvalReport& report);
std::string eval_histograms_csv(const EvalReport& report);

// ---- misc ----
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);
std::string format_double(double v);  // shortest round-trip decimal

}  // namespace facecap
