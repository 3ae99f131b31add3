#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace facecap {

struct EmbeddingRecord {
  std::string identity;
  std::string image_id;
};

// Labeled unit embeddings; vectors are the rows of an n x d matrix, unit
// normalized on construction.
struct EmbeddingDataset {
  int dim = 0;
  std::vector<EmbeddingRecord> records;
  Eigen::MatrixXd vectors;

  Eigen::Index size() const { return vectors.rows(); }
  std::size_t identity_count() const;
};

// Validates labels (nonempty identity, unique (identity, image_id)),
// normalizes rows, rejects zero vectors. Error messages name the record.
EmbeddingDataset make_dataset(int dim, std::vector<EmbeddingRecord> records,
                              Eigen::MatrixXd raw_vectors);

// Synthetic database: identity centers uniform on the sphere, images are
// normalize(center + noise * gaussian). Deterministic under the seed.
EmbeddingDataset synth_dataset(int identities, int images_per_identity,
                               int dim, double noise, std::uint64_t seed);

struct ScoreSampling {
  std::uint64_t seed = 0;
  std::size_t pair_cap = 0;  // 0 = all pairs
  std::size_t genuine_total = 0;
  std::size_t imposter_total = 0;
  bool genuine_subsampled = false;
  bool imposter_subsampled = false;
};

struct ScoreSet {
  std::vector<double> genuine;   // within-identity cross-image similarities
  std::vector<double> imposter;  // cross-identity similarities
  ScoreSampling meta;
  bool no_genuine_warning = false;
  bool no_imposter_warning = false;
};

// All within-identity and cross-identity unordered pairs (cosine similarity).
// If a set exceeds pair_cap (> 0), a uniform random subsample of exactly
// pair_cap pairs is taken with the given seed.
ScoreSet score_sets(const EmbeddingDataset& db, std::size_t pair_cap = 0,
                    std::uint64_t seed = 0);

struct ThresholdRow {
  double target_fmr = 0.0;
  double threshold = 0.0;
  double achieved_fmr = 0.0;
  double fnmr = 0.0;  // NaN when no genuine scores exist
  bool insufficient_imposters = false;
  bool fnmr_undefined = false;
};

struct ThresholdTable {
  std::vector<ThresholdRow> rows;
};

// For each target f: the smallest imposter score t with
// |{s in imposter : s >= t}| / |imposter| <= f (next representable value
// above the maximum when even that fails). Match rule is s >= t throughout;
// fnmr is the fraction of genuine scores below t.
ThresholdTable thresholds(const ScoreSet& scores,
                          const std::vector<double>& targets = {1e-1, 1e-2,
                                                                1e-3, 1e-4});

struct AttackCoverageRow {
  std::string attack_set;
  std::string attack_image;
  double target_fmr = 0.0;
  double threshold = 0.0;
  double sample_fraction = 0.0;
  double identity_fraction = 0.0;
};

struct AggregateCoverageRow {
  std::string attack_set;
  double target_fmr = 0.0;
  double threshold = 0.0;
  double sample_coverage = 0.0;    // mean sample fraction over attack images
  double identity_coverage = 0.0;  // mean identity fraction over attack images
};

struct CoverageReport {
  std::vector<AttackCoverageRow> per_attack;
  std::vector<AggregateCoverageRow> aggregate;
};

// Per attack vector and FMR threshold: fraction of database images matched
// (similarity >= t) and fraction of identities with at least one matched
// image; aggregates are arithmetic means over the attack vectors.
CoverageReport attack_coverage(const EmbeddingDataset& db,
                               const EmbeddingDataset& attacks,
                               const ThresholdTable& table,
                               const std::string& attack_label = "attack");

struct Histogram {
  double lo = -1.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;
};

Histogram make_histogram(const std::vector<double>& scores, int bins = 100,
                         double lo = -1.0, double hi = 1.0);

struct AttackScores {
  std::vector<double> scores;  // all attack-vs-database similarities
  Histogram histogram;
};

AttackScores attack_score_distribution(const EmbeddingDataset& db,
                                       const EmbeddingDataset& attacks,
                                       int bins = 100);

}  // namespace facecap
