#include "censem/components.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "censem/errors.hpp"
#include "censem/rng.hpp"

namespace censem {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (mx == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double a : v) acc += std::exp(a - mx);
  return mx + std::log(acc);
}

void require_positive_x(double x, const char* op) {
  if (!(x > 0.0)) {
    throw DomainError(std::string(op) + ": x must be > 0");
  }
}

}  // namespace

// --- CensoredSample ---------------------------------------------------------

std::uint64_t CensoredSample::censored_count() const noexcept {
  std::uint64_t c = 0;
  for (const auto& iv : intervals) c += iv.count;
  return c;
}

std::uint64_t CensoredSample::total() const noexcept {
  return uncensored.size() + censored_count();
}

void CensoredSample::validate(bool require_nonempty) const {
  for (std::size_t l = 0; l < intervals.size(); ++l) {
    const auto& iv = intervals[l];
    if (!(iv.lo >= 0.0) || !(iv.hi > iv.lo)) {
      throw InputError("censoring interval " + std::to_string(l) +
                       " must satisfy 0 <= lo < hi");
    }
    if (l > 0 && iv.lo < intervals[l - 1].hi) {
      throw InputError("censoring intervals must be sorted and disjoint");
    }
  }
  for (std::size_t j = 0; j < uncensored.size(); ++j) {
    const double x = uncensored[j];
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw InputError("exact observation " + std::to_string(j) +
                       " must be positive and finite");
    }
    // intervals are sorted, so binary search on hi
    auto it = std::upper_bound(
        intervals.begin(), intervals.end(), x,
        [](double v, const CensoringInterval& iv) { return v < iv.hi; });
    if (it != intervals.end() && it->contains(x)) {
      throw InputError("exact observation " + std::to_string(j) +
                       " lies inside a censoring interval");
    }
  }
  if (require_nonempty && total() == 0) {
    throw InputError("sample is empty (N = 0)");
  }
}

// --- ComponentSpec / ModelShape / MixtureModel --------------------------------

std::string to_string(ComponentKind kind) {
  return kind == ComponentKind::Exponential ? "exponential" : "weibull";
}

ComponentSpec ComponentSpec::exponential(double alpha) {
  ComponentSpec c{ComponentKind::Exponential, alpha, 1.0};
  c.validate();
  return c;
}

ComponentSpec ComponentSpec::weibull(double alpha, double beta) {
  ComponentSpec c{ComponentKind::Weibull, alpha, beta};
  c.validate();
  return c;
}

void ComponentSpec::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("component alpha must be positive and finite");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw DomainError("component beta must be positive and finite");
  }
  if (kind == ComponentKind::Exponential && beta != 1.0) {
    throw DomainError("exponential component must have beta == 1");
  }
}

void ModelShape::validate() const {
  if (p < 0 || r < 0 || p + r < 1) {
    throw DomainError("model shape requires p, r >= 0 and p + r >= 1");
  }
}

std::string ModelShape::label() const {
  return std::to_string(p) + " exp + " + std::to_string(r) + " wbl";
}

ModelShape MixtureModel::shape() const {
  ModelShape s{0, 0};
  for (const auto& c : components) {
    (c.kind == ComponentKind::Exponential ? s.p : s.r) += 1;
  }
  return s;
}

void MixtureModel::validate() const {
  if (components.empty()) throw DomainError("mixture needs M >= 1 components");
  if (weights.size() != components.size()) {
    throw DomainError("mixture weights and components differ in length");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("mixture weights must be >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("mixture weights must sum to 1");
  }
  for (const auto& c : components) c.validate();
}

MixtureModel canonical_order(const MixtureModel& m) {
  std::vector<std::size_t> idx(m.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = m.components[a];
    const auto& cb = m.components[b];
    if (ca.kind != cb.kind) return ca.kind == ComponentKind::Exponential;
    return ca.alpha < cb.alpha;
  });
  MixtureModel out;
  for (auto i : idx) {
    out.weights.push_back(m.weights[i]);
    out.components.push_back(m.components[i]);
  }
  return out;
}

// --- densities ----------------------------------------------------------------

double log_pdf(const ComponentSpec& c, double x) {
  require_positive_x(x, "log_pdf");
  const double log_ratio = std::log(x) - std::log(c.alpha);
  return std::log(c.beta) - std::log(c.alpha) + (c.beta - 1.0) * log_ratio -
         std::exp(c.beta * log_ratio);
}

double pdf(const ComponentSpec& c, double x) { return std::exp(log_pdf(c, x)); }

double survival(const ComponentSpec& c, double x) {
  if (!(x >= 0.0)) throw DomainError("survival: x must be >= 0");
  return std::exp(-std::pow(x / c.alpha, c.beta));
}

double log_interval_prob(const ComponentSpec& c, const CensoringInterval& iv) {
  const double z_lo = std::pow(iv.lo / c.alpha, c.beta);
  const double z_hi = std::pow(iv.hi / c.alpha, c.beta);
  // e^{-z_lo} - e^{-z_hi} = e^{-z_lo} (1 - e^{-(z_hi - z_lo)})
  return -z_lo + std::log(-std::expm1(-(z_hi - z_lo)));
}

double interval_prob(const ComponentSpec& c, const CensoringInterval& iv) {
  const double z_lo = std::pow(iv.lo / c.alpha, c.beta);
  const double z_hi = std::pow(iv.hi / c.alpha, c.beta);
  return std::exp(-z_lo) * -std::expm1(-(z_hi - z_lo));
}

double mixture_log_pdf(const MixtureModel& m, double x) {
  require_positive_x(x, "mixture_pdf");
  std::vector<double> terms(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    terms[i] = std::log(m.weights[i]) + log_pdf(m.components[i], x);
  }
  return log_sum_exp(terms);
}

double mixture_pdf(const MixtureModel& m, double x) {
  require_positive_x(x, "mixture_pdf");
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    acc += m.weights[i] * pdf(m.components[i], x);
  }
  return acc;
}

double censored_log_likelihood(const MixtureModel& m, const CensoredSample& s) {
  const std::size_t M = m.size();
  std::vector<double> log_w(M);
  for (std::size_t i = 0; i < M; ++i) log_w[i] = std::log(m.weights[i]);

  std::vector<double> terms(M);
  double ll = 0.0;
  for (double x : s.uncensored) {
    if (!(x > 0.0)) return kNegInf;
    for (std::size_t i = 0; i < M; ++i) {
      terms[i] = log_w[i] + log_pdf(m.components[i], x);
    }
    ll += log_sum_exp(terms);
  }
  for (const auto& iv : s.intervals) {
    if (iv.count == 0) continue;
    for (std::size_t i = 0; i < M; ++i) {
      terms[i] = log_w[i] + log_interval_prob(m.components[i], iv);
    }
    const double lp = log_sum_exp(terms);
    if (lp == kNegInf) return kNegInf;
    ll += static_cast<double>(iv.count) * lp;
  }
  return ll;
}

// --- sampling / dof -------------------------------------------------------------

std::vector<double> sample(const MixtureModel& m, std::size_t n,
                           std::uint64_t seed) {
  m.validate();
  std::vector<double> cumulative(m.size());
  std::partial_sum(m.weights.begin(), m.weights.end(), cumulative.begin());

  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double pick = rng.uniform01() * cumulative.back();
    std::size_t i = 0;
    while (i + 1 < m.size() &&
           (pick >= cumulative[i] || m.weights[i] == 0.0)) {
      ++i;
    }
    const auto& c = m.components[i];
    const double e = -std::log(rng.uniform01());
    out.push_back(c.alpha * std::pow(e, 1.0 / c.beta));
  }
  return out;
}

int dof(int p, int r) {
  ModelShape{p, r}.validate();
  return 2 * p + 3 * r - 1;
}

}  // namespace censem
