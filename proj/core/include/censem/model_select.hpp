#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "censem/components.hpp"
#include "censem/em.hpp"
#include "censem/sample_data.hpp"

namespace censem {

/// Log-likelihood per event (negative Shannon entropy per event).
double avg_loglik(double loglik, std::uint64_t n);

/// -2 log L + d ln N.
double bic(double loglik, int d, std::uint64_t n);

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  bool significant = false;
  /// Both sample variances are zero. t and dof are then reported as 0 and
  /// significance follows the sign of the mean difference.
  bool degenerate = false;
};

/// Welch's unequal-variance t-test of mean(a) against mean(b). One-sided
/// (H1: mean(a) < mean(b)) unless `two_sided`.
WelchResult welch_t(std::span<const double> a, std::span<const double> b,
                    double alpha_level = 0.05, bool two_sided = false);

struct SelectionConfig {
  std::vector<ModelShape> shapes{{1, 1}, {0, 2}, {3, 0}, {2, 1}};
  std::size_t n_boot = 999;
  std::size_t subsample_size = 200;
  std::size_t ensembles = 1;
  std::uint64_t seed = 20100601;
  double alpha_level = 0.05;
  bool two_sided = false;
  ModelShape baseline{1, 1};
  EmConfig em;
  std::vector<CensoringInterval> censor_spec = default_censor_spec();
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;

  void validate() const;
};

struct ShapeStats {
  ModelShape shape;
  /// Original-sample BIC followed by the bootstrap replicas, per ensemble.
  std::vector<std::vector<double>> bic_samples;
  double mean_bic = 0.0;  ///< over all finite BICs of all ensembles
  double sd_bic = 0.0;
  std::size_t skipped = 0;  ///< replicas whose fit failed
  std::size_t flagged = 0;  ///< replicas with a component below the weight floor
  double tally = 0.0;       ///< share of ensembles won
};

struct WelchRecord {
  std::size_t ensemble = 0;
  ModelShape shape_a;  ///< alternative
  ModelShape shape_b;  ///< baseline
  WelchResult result;
};

struct SelectionReport {
  ModelShape baseline;
  std::vector<ShapeStats> shapes;
  std::vector<WelchRecord> tests;
  std::vector<ModelShape> winners;  ///< per ensemble

  const ShapeStats& stats(const ModelShape& shape) const;
  double tally(const ModelShape& shape) const { return stats(shape).tally; }
};

/// Bootstrap-ensemble BIC comparison. For each ensemble: random-start
/// subsample of the diffs, fit of every shape on it, `n_boot` bootstrap
/// replicas refitted from that fit, Welch test of every alternative against
/// the baseline, one winner.
SelectionReport run_selection(std::span<const std::int64_t> diffs,
                              const SelectionConfig& config);

struct ProfileBucket {
  std::size_t bucket_id = 0;
  std::int64_t start_ms = 0;
  /// Mean fitted parameters in canonical component order.
  std::vector<double> mean_weights;
  std::vector<double> mean_alphas;
  std::vector<double> mean_betas;
  std::size_t days = 0;          ///< fits averaged
  std::size_t sample_count = 0;  ///< observations summed over those days
};

struct IntradayProfile {
  ModelShape shape;
  BucketSpec spec;
  std::vector<ProfileBucket> buckets;
  /// Buckets with no day meeting the minimum sample size.
  std::vector<std::size_t> omitted;
  std::size_t failed_fits = 0;
};

/// Fits `shape` per (day, bucket) and averages the parameters across days.
/// A (day, bucket) cell needs at least `min_obs` differences.
IntradayProfile profile_intraday(std::span<const TimestampSeries> days,
                                 const BucketSpec& spec, const ModelShape& shape,
                                 const EmConfig& config,
                                 std::span<const CensoringInterval> censor_spec,
                                 std::size_t min_obs = 10);

}  // namespace censem
