#include "censem/model_select.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <thread>

#include "censem/errors.hpp"
#include "censem/rng.hpp"

namespace censem {

double avg_loglik(double loglik, std::uint64_t n) {
  if (n == 0) throw DomainError("avg_loglik: N must be >= 1");
  return loglik / static_cast<double>(n);
}

double bic(double loglik, int d, std::uint64_t n) {
  if (d < 1) throw DomainError("bic: d must be >= 1");
  if (n == 0) throw DomainError("bic: N must be >= 1");
  return -2.0 * loglik + d * std::log(static_cast<double>(n));
}

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments(std::span<const double> v) {
  Moments m;
  const double n = static_cast<double>(v.size());
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.var = v.size() > 1 ? ss / (n - 1.0) : 0.0;
  return m;
}

}  // namespace

WelchResult welch_t(std::span<const double> a, std::span<const double> b,
                    double alpha_level, bool two_sided) {
  if (a.size() < 2 || b.size() < 2) {
    throw DomainError("welch_t: both samples need at least two values");
  }
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) {
    throw DomainError("welch_t: alpha_level must lie in (0, 1)");
  }
  const auto ma = moments(a), mb = moments(b);
  if (!std::isfinite(ma.var) || !std::isfinite(mb.var)) {
    throw DomainError("welch_t: non-finite sample variance");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double qa = ma.var / na, qb = mb.var / nb;
  const double diff = ma.mean - mb.mean;

  WelchResult out;
  if (qa + qb == 0.0) {
    out.degenerate = true;
    const bool shifted = two_sided ? diff != 0.0 : diff < 0.0;
    out.p_value = shifted ? 0.0 : 1.0;
    out.significant = shifted;
    return out;
  }
  out.t = diff / std::sqrt(qa + qb);
  out.dof = (qa + qb) * (qa + qb) /
            (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  boost::math::students_t dist(out.dof);
  out.p_value = two_sided ? 2.0 * boost::math::cdf(dist, -std::abs(out.t))
                          : boost::math::cdf(dist, out.t);
  out.significant = out.p_value < alpha_level;
  return out;
}

void SelectionConfig::validate() const {
  if (shapes.empty()) throw DomainError("selection needs at least one shape");
  for (const auto& s : shapes) s.validate();
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    for (std::size_t j = i + 1; j < shapes.size(); ++j) {
      if (shapes[i] == shapes[j]) {
        throw DomainError("duplicate shape " + shapes[i].label());
      }
    }
  }
  if (subsample_size < 2) throw DomainError("subsample size must be >= 2");
  if (ensembles < 1) throw DomainError("need at least one ensemble");
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) {
    throw DomainError("alpha level must lie in (0, 1)");
  }
}

const ShapeStats& SelectionReport::stats(const ModelShape& shape) const {
  for (const auto& s : shapes) {
    if (s.shape == shape) return s;
  }
  throw DomainError("shape " + shape.label() + " not in report");
}

namespace {

struct ReplicaOutcome {
  double bic = 0.0;
  bool ok = false;
  bool flagged = false;
};

ReplicaOutcome score(const CensoredSample& s, const ModelShape& shape,
                     const EmConfig& em, MixtureModel* fitted = nullptr) {
  ReplicaOutcome out;
  try {
    const auto fr = fit(s, shape, em);
    if (fr.error || !std::isfinite(fr.loglik())) return out;
    out.bic = bic(fr.loglik(), dof(shape), s.total());
    out.ok = true;
    out.flagged = !fr.degenerate_components.empty();
    if (fitted) *fitted = fr.model;
  } catch (const std::exception&) {
    // counted as skipped
  }
  return out;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& body) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t k = 0; k < n; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) body(k);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

SelectionReport run_selection(std::span<const std::int64_t> diffs,
                              const SelectionConfig& config) {
  config.validate();
  if (diffs.size() < config.subsample_size) {
    throw InputError("run_selection: " + std::to_string(diffs.size()) +
                     " differences, subsample size " +
                     std::to_string(config.subsample_size));
  }
  const auto& shapes = config.shapes;
  const std::size_t n_shapes = shapes.size();
  const auto base_it = std::find(shapes.begin(), shapes.end(), config.baseline);
  const std::size_t base = base_it == shapes.end()
                               ? 0
                               : static_cast<std::size_t>(base_it - shapes.begin());
  unsigned threads = config.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

  SelectionReport report;
  report.baseline = shapes[base];
  report.shapes.resize(n_shapes);
  for (std::size_t i = 0; i < n_shapes; ++i) report.shapes[i].shape = shapes[i];
  std::vector<std::size_t> wins(n_shapes, 0);

  for (std::size_t e = 0; e < config.ensembles; ++e) {
    const auto start = random_subsample_start(
        diffs.size(), config.subsample_size, derive_seed(config.seed, {e, 0xd15cULL}));
    const auto slice = subsample(diffs, start, config.subsample_size);
    const auto original = build_sample(slice, config.censor_spec);

    // replica 0 is the original sample
    const std::size_t n_rep = config.n_boot + 1;
    std::vector<CensoredSample> replicas(n_rep);
    replicas[0] = original;
    for (std::size_t b = 1; b < n_rep; ++b) {
      replicas[b] = bootstrap_resample(original, derive_seed(config.seed, {e, b}));
    }

    std::vector<EmConfig> warm(n_shapes, config.em);
    std::vector<ReplicaOutcome> outcomes(n_rep * n_shapes);
    for (std::size_t i = 0; i < n_shapes; ++i) {
      MixtureModel fitted;
      outcomes[i] = score(original, shapes[i], config.em, &fitted);
      if (outcomes[i].ok) warm[i].init = InitSpec::from_model(fitted);
    }
    parallel_for((n_rep - 1) * n_shapes, threads, [&](std::size_t k) {
      const std::size_t b = 1 + k / n_shapes, i = k % n_shapes;
      outcomes[b * n_shapes + i] = score(replicas[b], shapes[i], warm[i]);
    });

    std::vector<std::vector<double>> samples(n_shapes);
    for (std::size_t b = 0; b < n_rep; ++b) {
      for (std::size_t i = 0; i < n_shapes; ++i) {
        const auto& o = outcomes[b * n_shapes + i];
        auto& st = report.shapes[i];
        if (!o.ok) {
          ++st.skipped;
          continue;
        }
        if (o.flagged) ++st.flagged;
        samples[i].push_back(o.bic);
      }
    }

    std::size_t winner = base;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_shapes; ++i) {
      if (i == base || samples[i].size() < 2 || samples[base].size() < 2) continue;
      WelchRecord rec{e, shapes[i], shapes[base],
                      welch_t(samples[i], samples[base], config.alpha_level,
                              config.two_sided)};
      const double mean_i = moments(samples[i]).mean;
      const bool beats = rec.result.significant &&
                         mean_i < moments(samples[base]).mean;
      if (beats && mean_i < best) {
        best = mean_i;
        winner = i;
      }
      report.tests.push_back(rec);
    }
    ++wins[winner];
    report.winners.push_back(shapes[winner]);
    for (std::size_t i = 0; i < n_shapes; ++i) {
      report.shapes[i].bic_samples.push_back(std::move(samples[i]));
    }
  }

  for (std::size_t i = 0; i < n_shapes; ++i) {
    auto& st = report.shapes[i];
    std::vector<double> all;
    for (const auto& v : st.bic_samples) all.insert(all.end(), v.begin(), v.end());
    if (!all.empty()) {
      const auto m = moments(all);
      st.mean_bic = m.mean;
      st.sd_bic = std::sqrt(m.var);
    }
    st.tally = static_cast<double>(wins[i]) / static_cast<double>(config.ensembles);
  }
  return report;
}

IntradayProfile profile_intraday(std::span<const TimestampSeries> days,
                                 const BucketSpec& spec, const ModelShape& shape,
                                 const EmConfig& config,
                                 std::span<const CensoringInterval> censor_spec,
                                 std::size_t min_obs) {
  spec.validate();
  shape.validate();
  const std::size_t n_buckets = spec.bucket_count();
  const std::size_t m = static_cast<std::size_t>(shape.size());

  IntradayProfile prof;
  prof.shape = shape;
  prof.spec = spec;
  std::vector<ProfileBucket> acc(n_buckets);
  for (std::size_t b = 0; b < n_buckets; ++b) {
    acc[b].bucket_id = b;
    acc[b].start_ms = spec.bucket_start(b);
    acc[b].mean_weights.assign(m, 0.0);
    acc[b].mean_alphas.assign(m, 0.0);
    acc[b].mean_betas.assign(m, 0.0);
  }

  for (const auto& day : days) {
    day.validate();
    for (const auto& [b, series] : bucket_by_time(day, spec)) {
      if (series.stamps.size() < 2 || series.stamps.size() - 1 < min_obs) continue;
      const auto diffs = diff_and_round(series);
      FitResult fr;
      try {
        fr = fit(build_sample(diffs, censor_spec), shape, config);
      } catch (const std::exception&) {
        ++prof.failed_fits;
        continue;
      }
      if (fr.error) {
        ++prof.failed_fits;
        continue;
      }
      const auto model = canonical_order(fr.model);
      auto& cell = acc[b];
      for (std::size_t i = 0; i < m; ++i) {
        cell.mean_weights[i] += model.weights[i];
        cell.mean_alphas[i] += model.components[i].alpha;
        cell.mean_betas[i] += model.components[i].beta;
      }
      ++cell.days;
      cell.sample_count += diffs.size();
    }
  }

  for (auto& cell : acc) {
    if (cell.days == 0) {
      prof.omitted.push_back(cell.bucket_id);
      continue;
    }
    const double d = static_cast<double>(cell.days);
    for (std::size_t i = 0; i < m; ++i) {
      cell.mean_weights[i] /= d;
      cell.mean_alphas[i] /= d;
      cell.mean_betas[i] /= d;
    }
    prof.buckets.push_back(std::move(cell));
  }
  return prof;
}

}  // namespace censem
