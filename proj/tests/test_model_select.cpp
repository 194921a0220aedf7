#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "censem/errors.hpp"
#include "censem/model_select.hpp"
#include "censem/rng.hpp"

using namespace censem;

namespace {

const MixtureModel kTruth{{0.2, 0.8},
                          {ComponentSpec::exponential(17), ComponentSpec::weibull(2500, 0.57)}};

std::vector<double> normals(double mu, double sd, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) {
    // Box-Muller on the portable uniform stream
    const double u1 = rng.uniform01(), u2 = rng.uniform01();
    x = mu + sd * std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
  }
  return v;
}

bool same_report(const SelectionReport& a, const SelectionReport& b) {
  if (a.winners != b.winners || a.tests.size() != b.tests.size()) return false;
  for (std::size_t i = 0; i < a.shapes.size(); ++i) {
    const auto &x = a.shapes[i], &y = b.shapes[i];
    if (x.bic_samples != y.bic_samples || x.tally != y.tally || x.skipped != y.skipped ||
        x.mean_bic != y.mean_bic || x.sd_bic != y.sd_bic)
      return false;
  }
  for (std::size_t k = 0; k < a.tests.size(); ++k) {
    if (a.tests[k].result.t != b.tests[k].result.t) return false;
  }
  return true;
}

}  // namespace

TEST(AvgLoglik, Values) {
  EXPECT_NEAR(avg_loglik(-1671.4, 200), -8.357, 1e-12);
  EXPECT_EQ(avg_loglik(0.0, 5), 0.0);
  EXPECT_THROW(avg_loglik(1.0, 0), DomainError);
  const auto s = build_sample(generate_synthetic(kTruth, 800, 3));
  const auto fr = fit(s, {1, 1});
  EXPECT_NEAR(avg_loglik(fr.loglik(), s.total()),
              censored_log_likelihood(fr.model, s) / 800.0, 1e-12);
}

TEST(Bic, Values) {
  EXPECT_NEAR(bic(-8.357 * 200, 4, 200), 3363.99, 0.05);
  EXPECT_EQ(bic(0.0, 1, 1), 0.0);
  EXPECT_DOUBLE_EQ(bic(-1006.3, 9, 100), 2012.6 + 9 * std::log(100.0));
  for (int d = 1; d < 20; ++d) EXPECT_LT(bic(-50.0, d, 30), bic(-50.0, d + 1, 30));
  EXPECT_THROW(bic(0.0, 0, 10), DomainError);
}

TEST(Welch, IdenticalSamples) {
  const auto a = normals(0, 1, 50, 1);
  const auto r = welch_t(a, a);
  EXPECT_EQ(r.t, 0.0);
  EXPECT_FALSE(r.significant);
}

TEST(Welch, SeparatedMeans) {
  const auto b = normals(3000, 60, 1000, 2);
  auto a = b;
  for (auto& x : a) x += 100;
  EXPECT_GT(std::abs(welch_t(a, b).t), 10.0);
  EXPECT_TRUE(welch_t(b, a).significant);   // b lower than a
  EXPECT_FALSE(welch_t(a, b).significant);  // one-sided: a is not lower
  EXPECT_TRUE(welch_t(a, b, 0.05, true).significant);
}

TEST(Welch, TextbookFormula) {
  const auto a = normals(10, 2, 40, 3);
  const auto b = normals(11, 5, 25, 4);
  auto stats = [](const std::vector<double>& v) {
    double m = 0, ss = 0;
    for (double x : v) m += x;
    m /= v.size();
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair{m, ss / (v.size() - 1)};
  };
  const auto [ma, va] = stats(a);
  const auto [mb, vb] = stats(b);
  const double na = a.size(), nb = b.size();
  const double t = (ma - mb) / std::sqrt(va / na + vb / nb);
  const double nu = std::pow(va / na + vb / nb, 2) /
                    (std::pow(va / na, 2) / (na - 1) + std::pow(vb / nb, 2) / (nb - 1));
  const auto r = welch_t(a, b);
  EXPECT_NEAR(r.t, t, 1e-12 * std::abs(t));
  EXPECT_NEAR(r.dof, nu, 1e-10 * nu);
  EXPECT_EQ(r.significant, r.p_value < 0.05);
}

TEST(Welch, Antisymmetric) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = normals(0, 1, 30, seed), b = normals(0.3, 2, 45, seed + 100);
    EXPECT_EQ(welch_t(a, b).t, -welch_t(b, a).t);
    EXPECT_EQ(welch_t(a, b).dof, welch_t(b, a).dof);
  }
}

TEST(Welch, ZeroVariance) {
  const std::vector<double> a(10, 5.0), b(10, 7.0);
  const auto r = welch_t(a, b);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.t, 0.0);
  EXPECT_TRUE(r.significant);
  EXPECT_FALSE(welch_t(b, a).significant);
  EXPECT_FALSE(welch_t(a, a).significant);
  EXPECT_THROW(welch_t(std::vector<double>{1.0}, b), DomainError);
}

TEST(RunSelection, SingleShapeIsUnopposed) {
  const auto d = generate_synthetic(kTruth, 2000, 1);
  SelectionConfig c;
  c.shapes = {{1, 1}};
  c.n_boot = 10;
  c.ensembles = 2;
  const auto r = run_selection(d, c);
  EXPECT_EQ(r.tally({1, 1}), 1.0);
  EXPECT_TRUE(r.tests.empty());
}

TEST(RunSelection, BootstrapCount) {
  const auto d = generate_synthetic(kTruth, 2000, 2);
  SelectionConfig c;
  c.shapes = {{1, 1}};
  const auto r = run_selection(d, c);
  ASSERT_EQ(c.n_boot, 999u);
  EXPECT_EQ(r.shapes[0].bic_samples[0].size() + r.shapes[0].skipped, 1000u);
  EXPECT_EQ(r.shapes[0].skipped, 0u);
}

TEST(RunSelection, DeterministicAcrossThreadCounts) {
  const auto d = generate_synthetic(kTruth, 3000, 3);
  SelectionConfig c;
  c.n_boot = 15;
  c.ensembles = 3;
  c.threads = 1;
  const auto r1 = run_selection(d, c);
  const auto r2 = run_selection(d, c);
  c.threads = 4;
  const auto r3 = run_selection(d, c);
  EXPECT_TRUE(same_report(r1, r2));
  EXPECT_TRUE(same_report(r1, r3));
  double total = 0;
  for (const auto& s : r1.shapes) {
    EXPECT_GE(s.tally, 0.0);
    total += s.tally;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(r1.tests.size(), 3u * 3u);
  c.seed += 1;
  EXPECT_FALSE(same_report(r1, run_selection(d, c)));
}

TEST(RunSelection, InputChecks) {
  const auto d = generate_synthetic(kTruth, 100, 3);
  SelectionConfig c;
  EXPECT_THROW(run_selection(d, c), InputError);
  c.shapes = {{1, 1}, {1, 1}};
  EXPECT_THROW(run_selection(generate_synthetic(kTruth, 500, 3), c), DomainError);
}

namespace {

// Time stamps for one day; the Weibull scale follows `alpha2(bucket)`.
TimestampSeries synthetic_day(const BucketSpec& spec, double (*alpha2)(std::size_t),
                              std::uint64_t seed) {
  TimestampSeries ts;
  for (std::size_t b = 0; b < spec.bucket_count(); ++b) {
    const MixtureModel m{{0.2, 0.8},
                         {ComponentSpec::exponential(17), ComponentSpec::weibull(alpha2(b), 0.57)}};
    const auto d = generate_synthetic(m, 5000, derive_seed(seed, {b}));
    std::int64_t t = spec.bucket_start(b);
    const std::int64_t end = t + spec.width;
    for (auto step : d) {
      if (t >= end) break;
      ts.stamps.push_back(t);
      t += step;
    }
  }
  return ts;
}

double u_shape(std::size_t b) {
  const double x = (static_cast<double>(b) - 8.0) / 8.0;
  return 1200.0 + 2400.0 * (1 - x * x);
}

double flat(std::size_t) { return 2500.0; }

}  // namespace

TEST(ProfileIntraday, SingleDaySingleBucket) {
  BucketSpec spec;
  spec.session_end = spec.session_start + spec.width;
  const auto day = synthetic_day(spec, flat, 7);
  const std::vector<TimestampSeries> days{day};
  const auto prof = profile_intraday(days, spec, {1, 1}, {}, default_censor_spec());
  ASSERT_EQ(prof.buckets.size(), 1u);
  const auto direct = canonical_order(fit(build_sample(diff_and_round(day)), {1, 1}).model);
  EXPECT_EQ(prof.buckets[0].mean_alphas[1], direct.components[1].alpha);
  EXPECT_EQ(prof.buckets[0].mean_betas[1], direct.components[1].beta);
  EXPECT_EQ(prof.buckets[0].mean_weights[0], direct.weights[0]);
  EXPECT_EQ(prof.buckets[0].days, 1u);
}

TEST(ProfileIntraday, TracksProgrammedScale) {
  BucketSpec spec;
  spec.width = 30 * kMsPerMinute;
  std::vector<TimestampSeries> days;
  for (std::uint64_t d = 0; d < 5; ++d) days.push_back(synthetic_day(spec, u_shape, 100 + d));
  const auto prof = profile_intraday(days, spec, {1, 1}, {}, default_censor_spec());
  ASSERT_EQ(prof.buckets.size(), 17u);
  for (const auto& b : prof.buckets) {
    EXPECT_NEAR(b.mean_alphas[1] / u_shape(b.bucket_id), 1.0, 0.15) << b.bucket_id;
    EXPECT_NEAR(b.mean_betas[1], 0.57, 0.05) << b.bucket_id;
    EXPECT_GE(b.sample_count, 10u);
  }
}

TEST(ProfileIntraday, SparseBucketsOmitted) {
  BucketSpec spec;
  spec.width = 30 * kMsPerMinute;
  const TimestampSeries day{{spec.session_start + 1, spec.session_start + 50,
                             spec.session_start + 90}};
  const std::vector<TimestampSeries> days{day};
  const auto prof = profile_intraday(days, spec, {1, 1}, {}, default_censor_spec());
  EXPECT_TRUE(prof.buckets.empty());
  EXPECT_EQ(prof.omitted.size(), 17u);
}
