#include "facecap/biometric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "facecap/rng.hpp"

namespace facecap {

namespace {

std::string record_name(const EmbeddingRecord& rec, std::size_t index) {
  return "record " + std::to_string(index) + " (identity '" + rec.identity +
         "', image '" + rec.image_id + "')";
}

double clamp_score(double s) { return std::clamp(s, -1.0, 1.0); }

// Identity index per record, in order of first appearance.
std::vector<int> identity_indices(const EmbeddingDataset& db, int* count) {
  std::unordered_map<std::string, int> ids;
  std::vector<int> idx(db.records.size());
  for (std::size_t i = 0; i < db.records.size(); ++i) {
    auto [it, inserted] =
        ids.try_emplace(db.records[i].identity, static_cast<int>(ids.size()));
    idx[i] = it->second;
  }
  if (count) *count = static_cast<int>(ids.size());
  return idx;
}

// Floyd's algorithm: k distinct ranks uniformly from [0, total), sorted.
std::vector<std::uint64_t> sample_ranks(std::uint64_t total, std::uint64_t k,
                                        std::uint64_t seed) {
  std::unordered_set<std::uint64_t> chosen;
  Rng rng(seed);
  for (std::uint64_t j = total - k; j < total; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> ranks(chosen.begin(), chosen.end());
  std::sort(ranks.begin(), ranks.end());
  return ranks;
}

}  // namespace

std::size_t EmbeddingDataset::identity_count() const {
  std::unordered_set<std::string> ids;
  for (const auto& rec : records) ids.insert(rec.identity);
  return ids.size();
}

EmbeddingDataset make_dataset(int dim, std::vector<EmbeddingRecord> records,
                              Eigen::MatrixXd raw_vectors) {
  if (dim < 2) throw std::invalid_argument("dataset: dimension must be >= 2");
  if (records.empty()) throw std::invalid_argument("dataset: no records");
  if (raw_vectors.rows() != static_cast<Eigen::Index>(records.size()) ||
      raw_vectors.cols() != dim)
    throw std::invalid_argument("dataset: vector matrix shape mismatch");

  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].identity.empty())
      throw std::invalid_argument(record_name(records[i], i) + ": empty identity label");
    if (!seen.insert(records[i].identity + "\x1f" + records[i].image_id).second)
      throw std::invalid_argument(record_name(records[i], i) +
                                  ": duplicate (identity, image_id)");
    const double n = raw_vectors.row(static_cast<Eigen::Index>(i)).norm();
    if (n < 1e-12)
      throw std::invalid_argument(record_name(records[i], i) + ": degenerate embedding");
    // Skip the division for already-unit rows so re-ingestion is bit-stable.
    if (std::abs(n - 1.0) > 1e-12)
      raw_vectors.row(static_cast<Eigen::Index>(i)) /= n;
  }

  EmbeddingDataset db;
  db.dim = dim;
  db.records = std::move(records);
  db.vectors = std::move(raw_vectors);
  return db;
}

EmbeddingDataset synth_dataset(int identities, int images_per_identity,
                               int dim, double noise, std::uint64_t seed) {
  if (identities < 1 || images_per_identity < 1)
    throw std::invalid_argument("synth: counts must be positive");
  if (dim < 2) throw std::invalid_argument("synth: dimension must be >= 2");
  if (noise < 0.0) throw std::invalid_argument("synth: noise must be >= 0");

  Rng rng(seed);
  const Eigen::Index total =
      static_cast<Eigen::Index>(identities) * images_per_identity;
  std::vector<EmbeddingRecord> records;
  records.reserve(static_cast<std::size_t>(total));
  Eigen::MatrixXd raw(total, dim);

  char label[32];
  Eigen::Index row = 0;
  for (int id = 0; id < identities; ++id) {
    const Eigen::VectorXd center = random_unit_vector(rng, dim);
    std::snprintf(label, sizeof(label), "id%05d", id);
    const std::string identity(label);
    for (int im = 0; im < images_per_identity; ++im, ++row) {
      std::snprintf(label, sizeof(label), "im%04d", im);
      records.push_back({identity, label});
      Eigen::VectorXd v = center;
      if (noise > 0.0) v += noise * random_gaussian_vector(rng, dim);
      raw.row(row) = v.transpose();
    }
  }
  return make_dataset(dim, std::move(records), std::move(raw));
}

ScoreSet score_sets(const EmbeddingDataset& db, std::size_t pair_cap,
                    std::uint64_t seed) {
  const Eigen::Index n = db.size();
  int id_count = 0;
  const std::vector<int> ids = identity_indices(db, &id_count);

  std::vector<Eigen::Index> per_identity(static_cast<std::size_t>(id_count), 0);
  for (int id : ids) ++per_identity[static_cast<std::size_t>(id)];

  std::uint64_t genuine_total = 0;
  for (Eigen::Index k : per_identity)
    genuine_total += static_cast<std::uint64_t>(k) * (k - 1) / 2;
  const std::uint64_t all_pairs =
      static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t imposter_total = all_pairs - genuine_total;

  ScoreSet out;
  out.meta.seed = seed;
  out.meta.pair_cap = pair_cap;
  out.meta.genuine_total = genuine_total;
  out.meta.imposter_total = imposter_total;
  out.meta.genuine_subsampled = pair_cap > 0 && genuine_total > pair_cap;
  out.meta.imposter_subsampled = pair_cap > 0 && imposter_total > pair_cap;
  out.no_genuine_warning = genuine_total == 0;
  out.no_imposter_warning = imposter_total == 0;

  std::vector<std::uint64_t> genuine_ranks, imposter_ranks;
  if (out.meta.genuine_subsampled)
    genuine_ranks = sample_ranks(genuine_total, pair_cap,
                                 derive_seed(seed, genuine_total, 1, 0));
  if (out.meta.imposter_subsampled)
    imposter_ranks = sample_ranks(imposter_total, pair_cap,
                                  derive_seed(seed, imposter_total, 2, 0));

  out.genuine.reserve(out.meta.genuine_subsampled ? pair_cap
                                                  : static_cast<std::size_t>(genuine_total));
  out.imposter.reserve(out.meta.imposter_subsampled ? pair_cap
                                                    : static_cast<std::size_t>(imposter_total));

  std::uint64_t grank = 0, irank = 0;
  std::size_t gpick = 0, ipick = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const bool genuine = ids[static_cast<std::size_t>(i)] ==
                           ids[static_cast<std::size_t>(j)];
      if (genuine) {
        if (out.meta.genuine_subsampled) {
          if (gpick < genuine_ranks.size() && genuine_ranks[gpick] == grank) {
            out.genuine.push_back(clamp_score(db.vectors.row(i).dot(db.vectors.row(j))));
            ++gpick;
          }
        } else {
          out.genuine.push_back(clamp_score(db.vectors.row(i).dot(db.vectors.row(j))));
        }
        ++grank;
      } else {
        if (out.meta.imposter_subsampled) {
          if (ipick < imposter_ranks.size() && imposter_ranks[ipick] == irank) {
            out.imposter.push_back(clamp_score(db.vectors.row(i).dot(db.vectors.row(j))));
            ++ipick;
          }
        } else {
          out.imposter.push_back(clamp_score(db.vectors.row(i).dot(db.vectors.row(j))));
        }
        ++irank;
      }
    }
  }
  return out;
}

ThresholdTable thresholds(const ScoreSet& scores,
                          const std::vector<double>& targets) {
  if (scores.imposter.empty())
    throw std::invalid_argument("thresholds: empty imposter set");
  if (targets.empty())
    throw std::invalid_argument("thresholds: no target FMRs");

  std::vector<double> imp = scores.imposter;
  std::sort(imp.begin(), imp.end());
  const std::size_t m = imp.size();

  std::vector<double> gen = scores.genuine;
  std::sort(gen.begin(), gen.end());

  ThresholdTable table;
  for (double f : targets) {
    if (!(f > 0.0 && f <= 1.0))
      throw std::invalid_argument("thresholds: FMR targets must lie in (0, 1]");
    ThresholdRow row;
    row.target_fmr = f;

    // Smallest distinct imposter value whose >=-count is within the budget;
    // scanning ascending, the count for imp[i] is m - first_occurrence(i).
    double t = std::numeric_limits<double>::quiet_NaN();
    std::size_t count_ge = 0;
    std::size_t i = 0;
    while (i < m) {
      std::size_t first = i;
      while (i < m && imp[i] == imp[first]) ++i;
      const std::size_t cnt = m - first;
      if (static_cast<double>(cnt) / static_cast<double>(m) <= f) {
        t = imp[first];
        count_ge = cnt;
        break;
      }
    }
    if (std::isnan(t)) {
      // Even the maximum value matches too often; threshold just above it.
      t = std::nextafter(imp.back(), std::numeric_limits<double>::infinity());
      count_ge = 0;
    }
    row.threshold = t;
    row.achieved_fmr = static_cast<double>(count_ge) / static_cast<double>(m);
    row.insufficient_imposters = static_cast<double>(m) * f < 1.0;

    if (gen.empty()) {
      row.fnmr = std::numeric_limits<double>::quiet_NaN();
      row.fnmr_undefined = true;
    } else {
      const auto below = std::lower_bound(gen.begin(), gen.end(), t);
      row.fnmr = static_cast<double>(below - gen.begin()) /
                 static_cast<double>(gen.size());
    }
    table.rows.push_back(row);
  }
  return table;
}

CoverageReport attack_coverage(const EmbeddingDataset& db,
                               const EmbeddingDataset& attacks,
                               const ThresholdTable& table,
                               const std::string& attack_label) {
  if (db.dim != attacks.dim)
    throw std::invalid_argument("attack_coverage: dimension mismatch");
  if (attacks.size() == 0)
    throw std::invalid_argument("attack_coverage: no attack vectors");

  int id_count = 0;
  const std::vector<int> ids = identity_indices(db, &id_count);
  const Eigen::Index n = db.size();

  CoverageReport report;
  std::vector<double> sample_sum(table.rows.size(), 0.0);
  std::vector<double> identity_sum(table.rows.size(), 0.0);

  std::vector<char> id_hit(static_cast<std::size_t>(id_count));
  Eigen::VectorXd sims(n);
  for (Eigen::Index a = 0; a < attacks.size(); ++a) {
    sims.noalias() = db.vectors * attacks.vectors.row(a).transpose();
    for (std::size_t ti = 0; ti < table.rows.size(); ++ti) {
      const double t = table.rows[ti].threshold;
      std::fill(id_hit.begin(), id_hit.end(), 0);
      Eigen::Index matched = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (clamp_score(sims[i]) >= t) {
          ++matched;
          id_hit[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])] = 1;
        }
      }
      const double sample_frac =
          static_cast<double>(matched) / static_cast<double>(n);
      const double id_frac =
          static_cast<double>(std::count(id_hit.begin(), id_hit.end(), 1)) /
          static_cast<double>(id_count);
      report.per_attack.push_back({attack_label, attacks.records[a].image_id,
                                   table.rows[ti].target_fmr, t, sample_frac,
                                   id_frac});
      sample_sum[ti] += sample_frac;
      identity_sum[ti] += id_frac;
    }
  }

  const double na = static_cast<double>(attacks.size());
  for (std::size_t ti = 0; ti < table.rows.size(); ++ti)
    report.aggregate.push_back({attack_label, table.rows[ti].target_fmr,
                                table.rows[ti].threshold, sample_sum[ti] / na,
                                identity_sum[ti] / na});
  return report;
}

Histogram make_histogram(const std::vector<double>& scores, int bins,
                         double lo, double hi) {
  if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");
  if (!(hi > lo)) throw std::invalid_argument("histogram: hi must exceed lo");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  const double w = (hi - lo) / bins;
  for (double s : scores) {
    auto idx = static_cast<long>(std::floor((s - lo) / w));
    idx = std::clamp(idx, 0L, static_cast<long>(bins - 1));
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

AttackScores attack_score_distribution(const EmbeddingDataset& db,
                                       const EmbeddingDataset& attacks,
                                       int bins) {
  if (db.dim != attacks.dim)
    throw std::invalid_argument("attack_score_distribution: dimension mismatch");
  AttackScores out;
  out.scores.reserve(static_cast<std::size_t>(db.size()) *
                     static_cast<std::size_t>(attacks.size()));
  for (Eigen::Index a = 0; a < attacks.size(); ++a) {
    const Eigen::VectorXd sims = db.vectors * attacks.vectors.row(a).transpose();
    for (Eigen::Index i = 0; i < db.size(); ++i)
      out.scores.push_back(clamp_score(sims[i]));
  }
  out.histogram = make_histogram(out.scores, bins);
  return out;
}

}  // namespace facecap
