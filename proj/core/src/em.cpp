#include "censem/em.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "censem/errors.hpp"

namespace censem {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kHuge = 1e300;
constexpr double kMinMass = 1e-300;

double clamp_finite(double v) {
  if (std::isnan(v)) return v;
  return std::clamp(v, -kHuge, kHuge);
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Weight N_ℓ z̃_iℓ carried by interval ℓ for component i.
double censored_weight(const Responsibilities& r, const CensoredSample& s,
                       std::size_t l, std::size_t i) {
  return static_cast<double>(s.intervals[l].count) * r.censored(l, i);
}

void check_component(const Responsibilities& r, const CensoredSample& s,
                     std::size_t comp) {
  if (comp >= r.components) {
    throw DomainError("component index out of range");
  }
  if (r.uncensored_rows() != s.uncensored.size() ||
      r.censored_rows() != s.intervals.size()) {
    throw DomainError("responsibilities do not match the sample");
  }
}

// Sufficient statistics of one Weibull component for the β search.
struct WeibullStats {
  double w_exact = 0.0;     // Σ_j z_j
  double w_censored = 0.0;  // Σ_ℓ W_ℓ
  double sum_z_logx = 0.0;  // Σ_j z_j log x_j
  std::vector<double> z;     // nonzero z_j
  std::vector<double> log_x;
  // usable intervals only
  std::vector<double> iv_weight;
  std::vector<ZetaInterval> iv_zeta;
  std::vector<double> iv_mass;
  std::vector<double> iv_log_moment;

  WeibullStats(const Responsibilities& r, const CensoredSample& s,
               std::size_t comp, const ComponentSpec& prev, bool need_log_moment) {
    for (std::size_t j = 0; j < s.uncensored.size(); ++j) {
      const double zj = r.uncensored(j, comp);
      if (zj == 0.0) continue;
      const double lx = std::log(s.uncensored[j]);
      z.push_back(zj);
      log_x.push_back(lx);
      w_exact += zj;
      sum_z_logx += zj * lx;
    }
    for (std::size_t l = 0; l < s.intervals.size(); ++l) {
      const double w = censored_weight(r, s, l, comp);
      if (w == 0.0) continue;
      const auto zeta = zeta_transform(s.intervals[l], prev.alpha, prev.beta);
      const double mass = unit_exp_mass(zeta);
      if (!(mass > kMinMass)) continue;
      iv_weight.push_back(w);
      iv_zeta.push_back(zeta);
      iv_mass.push_back(mass);
      iv_log_moment.push_back(need_log_moment ? log_moment(zeta) : 0.0);
      w_censored += w;
    }
  }

  double total() const { return w_exact + w_censored; }
};

}  // namespace

// --- init / config ----------------------------------------------------------

InitSpec InitSpec::from_model(const MixtureModel& m) {
  InitSpec init;
  init.weights = m.weights;
  std::vector<double> a, b;
  for (const auto& c : m.components) {
    a.push_back(c.alpha);
    b.push_back(c.beta);
  }
  init.alphas = std::move(a);
  init.betas = std::move(b);
  return init;
}

void EmConfig::validate(std::size_t components) const {
  if (!(epsilon > 0.0)) throw DomainError("EmConfig: epsilon must be > 0");
  if (max_iter < 1) throw DomainError("EmConfig: max_iter must be >= 1");
  if (!(weight_floor >= 0.0) ||
      (components > 0 && !(weight_floor < 1.0 / static_cast<double>(components)))) {
    throw DomainError("EmConfig: weight_floor must lie in [0, 1/M)");
  }
  if (!(beta_bracket.first > 0.0) || !(beta_bracket.first < beta_bracket.second)) {
    throw DomainError("EmConfig: beta_bracket must satisfy 0 < lo < hi");
  }
  if (!(root_tol > 0.0)) throw DomainError("EmConfig: root_tol must be > 0");
}

MixtureModel initial_model(const CensoredSample& s, const ModelShape& shape,
                           const InitSpec& init) {
  shape.validate();
  const auto M = static_cast<std::size_t>(shape.size());

  std::vector<double> xs = s.uncensored;
  if (xs.empty()) {
    for (const auto& iv : s.intervals) {
      if (iv.count > 0) xs.push_back(std::isinf(iv.hi) ? iv.lo + 1.0 : 0.5 * (iv.lo + iv.hi));
    }
  }
  std::sort(xs.begin(), xs.end());
  double m_all = 1.0, m_low = 1.0, m_high = 1.0;
  if (!xs.empty()) {
    const std::size_t k = std::max<std::size_t>(1, (xs.size() + 9) / 10);
    m_all = mean_of(xs);
    m_low = mean_of(std::span<const double>(xs).first(k));
    m_high = mean_of(std::span<const double>(xs).last(k));
    m_low = std::max(m_low, 1e-3 * m_all);
  } else if (!init.alphas) {
    throw InputError("cannot initialize: sample has no observations");
  }

  MixtureModel m;
  m.weights.assign(M, 1.0 / static_cast<double>(M));
  for (int i = 0; i < shape.p; ++i) {
    double alpha;
    if (shape.r == 0 && shape.p > 1) {
      alpha = m_low * std::pow(m_high / m_low, double(i) / (shape.p - 1));
    } else {
      alpha = m_low * std::pow(m_all / m_low, double(i) / shape.p);
    }
    m.components.push_back({ComponentKind::Exponential, alpha, 1.0});
  }
  for (int j = 0; j < shape.r; ++j) {
    const double alpha = m_all * std::pow(m_high / m_all, double(j) / shape.r);
    m.components.push_back({ComponentKind::Weibull, alpha, 1.0});
  }

  if (init.weights) {
    if (init.weights->size() != M) throw DomainError("InitSpec: weights length != M");
    const double total = std::accumulate(init.weights->begin(), init.weights->end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("InitSpec: weights not on simplex");
    for (std::size_t i = 0; i < M; ++i) m.weights[i] = (*init.weights)[i] / total;
  }
  if (init.alphas) {
    if (init.alphas->size() != M) throw DomainError("InitSpec: alphas length != M");
    for (std::size_t i = 0; i < M; ++i) m.components[i].alpha = (*init.alphas)[i];
  }
  if (init.betas) {
    if (init.betas->size() != M) throw DomainError("InitSpec: betas length != M");
    for (std::size_t i = 0; i < M; ++i) {
      if (m.components[i].kind == ComponentKind::Weibull) {
        m.components[i].beta = (*init.betas)[i];
      }
    }
  }
  m.validate();
  return m;
}

// --- E-step / weights --------------------------------------------------------

Responsibilities e_step(const MixtureModel& m, const CensoredSample& s) {
  const std::size_t M = m.size();
  Responsibilities r;
  r.components = M;
  r.z.resize(s.uncensored.size() * M);
  r.z_tilde.resize(s.intervals.size() * M);

  std::vector<double> log_w(M), a(M);
  for (std::size_t i = 0; i < M; ++i) log_w[i] = std::log(m.weights[i]);

  // log-space with max subtraction; β < 1 densities overflow near zero
  auto normalize = [&](double* row) {
    const double mx = *std::max_element(a.begin(), a.end());
    if (mx == kNegInf || std::isnan(mx)) return false;
    double total = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      row[i] = std::exp(a[i] - mx);
      total += row[i];
    }
    for (std::size_t i = 0; i < M; ++i) row[i] /= total;
    return true;
  };

  for (std::size_t j = 0; j < s.uncensored.size(); ++j) {
    const double x = s.uncensored[j];
    for (std::size_t i = 0; i < M; ++i) a[i] = log_w[i] + log_pdf(m.components[i], x);
    if (!normalize(&r.z[j * M])) {
      throw DegenerateError("e_step: mixture density vanishes at observation " +
                                std::to_string(j), j);
    }
  }
  for (std::size_t l = 0; l < s.intervals.size(); ++l) {
    for (std::size_t i = 0; i < M; ++i) {
      a[i] = log_w[i] + log_interval_prob(m.components[i], s.intervals[l]);
    }
    if (!normalize(&r.z_tilde[l * M])) {
      std::fill_n(&r.z_tilde[l * M], M, 1.0 / static_cast<double>(M));
      r.uniform_rows.push_back(l);
    }
  }
  return r;
}

double effective_mass(const Responsibilities& r, const CensoredSample& s,
                      std::size_t comp) {
  check_component(r, s, comp);
  double mass = 0.0;
  for (std::size_t j = 0; j < s.uncensored.size(); ++j) mass += r.uncensored(j, comp);
  for (std::size_t l = 0; l < s.intervals.size(); ++l) {
    mass += censored_weight(r, s, l, comp);
  }
  return mass;
}

std::vector<double> update_weights(const Responsibilities& r,
                                   const CensoredSample& s) {
  std::vector<double> w(r.components);
  double total = 0.0;
  for (std::size_t i = 0; i < r.components; ++i) {
    w[i] = effective_mass(r, s, i);
    total += w[i];
  }
  if (!(total > 0.0)) throw DegenerateError("update_weights: empty sample", 0);
  // total equals N up to rounding; dividing by it keeps the simplex exact
  for (double& v : w) v /= total;
  return w;
}

// --- M-step: self-consistent ----------------------------------------------------

double m_step_exponential(const Responsibilities& r, const CensoredSample& s,
                          std::size_t comp, double alpha_prev,
                          double weight_floor) {
  check_component(r, s, comp);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < s.uncensored.size(); ++j) {
    const double zj = r.uncensored(j, comp);
    num += zj * s.uncensored[j];
    den += zj;
  }
  for (std::size_t l = 0; l < s.intervals.size(); ++l) {
    const double w = censored_weight(r, s, l, comp);
    if (w == 0.0) continue;
    num += w * truncated_mean_exp(alpha_prev, s.intervals[l]);
    den += w;
  }
  if (!(den > weight_floor * static_cast<double>(s.total()))) {
    throw DegenerateError("m_step_exponential: component " + std::to_string(comp) +
                              " has no effective mass", comp);
  }
  return num / den;
}

double m_step_weibull_alpha(const Responsibilities& r, const CensoredSample& s,
                            std::size_t comp, const ComponentSpec& prev,
                            double weight_floor) {
  check_component(r, s, comp);
  const WeibullStats st(r, s, comp, prev, false);
  const double w = st.total();
  if (!(w > weight_floor * static_cast<double>(s.total()))) {
    throw DegenerateError("m_step_weibull_alpha: component " + std::to_string(comp) +
                              " has no effective mass", comp);
  }
  const double beta = prev.beta;
  const double log_a_prev = std::log(prev.alpha);
  // Σ_j z (x_j/α')^β + Σ_ℓ W_ℓ G_ℓ with G_ℓ = E[u | ζ-interval]
  double acc = 0.0;
  for (std::size_t j = 0; j < st.z.size(); ++j) {
    acc += st.z[j] * std::exp(beta * (st.log_x[j] - log_a_prev));
  }
  for (std::size_t l = 0; l < st.iv_weight.size(); ++l) {
    acc += st.iv_weight[l] * unit_truncated_mean(st.iv_zeta[l]);
  }
  return prev.alpha * std::pow(acc / w, 1.0 / beta);
}

namespace {

// Σ_j z_j [1/β + L_j - e^{βL_j} L_j] + Σ_ℓ W_ℓ [1/β + K_ℓ], L_j = log(x_j/α),
// K_ℓ = (∫ log u e^{-u} - ∫ u log u e^{-u}) / (β' · mass).
struct SelfConsistentBeta {
  std::vector<double> z, l;
  double w_exact = 0.0, w_censored = 0.0, censored_const = 0.0;

  SelfConsistentBeta(const Responsibilities& r, const CensoredSample& s,
                     std::size_t comp, const ComponentSpec& prev, double alpha_new) {
    const WeibullStats st(r, s, comp, prev, true);
    z = st.z;
    const double log_a = std::log(alpha_new);
    l.reserve(st.log_x.size());
    for (double lx : st.log_x) l.push_back(lx - log_a);
    w_exact = st.w_exact;
    w_censored = st.w_censored;
    for (std::size_t k = 0; k < st.iv_weight.size(); ++k) {
      const double k_l = (st.iv_log_moment[k] - power_log_moment(1.0, st.iv_zeta[k])) /
                         (prev.beta * st.iv_mass[k]);
      censored_const += st.iv_weight[k] * k_l;
    }
  }

  double operator()(double beta) const {
    double acc = (w_exact + w_censored) / beta + censored_const;
    for (std::size_t j = 0; j < z.size(); ++j) {
      acc += z[j] * l[j] * (1.0 - std::exp(beta * l[j]));
    }
    return acc;
  }
};

}  // namespace

double weibull_beta_equation(const Responsibilities& r, const CensoredSample& s,
                             std::size_t comp, const ComponentSpec& prev,
                             double alpha_new, double beta) {
  check_component(r, s, comp);
  return SelfConsistentBeta(r, s, comp, prev, alpha_new)(beta);
}

double m_step_weibull_beta(const Responsibilities& r, const CensoredSample& s,
                           std::size_t comp, const ComponentSpec& prev,
                           double alpha_new, std::pair<double, double> beta_bracket,
                           double root_tol) {
  check_component(r, s, comp);
  const SelfConsistentBeta eq(r, s, comp, prev, alpha_new);
  auto f = [&](double b) { return clamp_finite(eq(b)); };

  const auto [lo, hi] = beta_bracket;
  const double f_lo = f(lo), f_hi = f(hi);
  if (std::isnan(f_lo) || std::isnan(f_hi) || f_lo * f_hi > 0.0) {
    throw BracketError("m_step_weibull_beta: root not bracketed in [" +
                           std::to_string(lo) + ", " + std::to_string(hi) +
                           "] (f=" + std::to_string(f_lo) + ", " +
                           std::to_string(f_hi) + ")",
                       lo, hi, f_lo, f_hi);
  }
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  std::uintmax_t iters = 200;
  auto tol = [root_tol](double a, double b) { return std::abs(b - a) <= root_tol; };
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, iters);
  if (iters >= 200) throw ConvergenceError("m_step_weibull_beta: root search exhausted");
  return 0.5 * (a + b);
}

// --- objective / direct M-step ----------------------------------------------------

double q_component(const ComponentSpec& candidate, const Responsibilities& r,
                   const CensoredSample& s, std::size_t comp,
                   const ComponentSpec& prev) {
  check_component(r, s, comp);
  double q = 0.0;
  for (std::size_t j = 0; j < s.uncensored.size(); ++j) {
    const double zj = r.uncensored(j, comp);
    if (zj != 0.0) q += zj * log_pdf(candidate, s.uncensored[j]);
  }
  for (std::size_t l = 0; l < s.intervals.size(); ++l) {
    const double w = censored_weight(r, s, l, comp);
    if (w != 0.0) q += w * censored_log_density_term(candidate, prev, s.intervals[l]);
  }
  return q;
}

double q_objective(const MixtureModel& candidate, const Responsibilities& r,
                   const CensoredSample& s, const MixtureModel& prev) {
  if (candidate.size() != prev.size() || candidate.size() != r.components) {
    throw DomainError("q_objective: component count mismatch");
  }
  double q = 0.0;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    q += q_component(candidate.components[i], r, s, i, prev.components[i]);
  }
  return q;
}

namespace {

constexpr int kBrentBits = std::numeric_limits<double>::digits / 2;
constexpr std::uintmax_t kBrentMaxIter = 300;

// maximize over log α: -W log α - S/α
double direct_exponential(const Responsibilities& r, const CensoredSample& s,
                          std::size_t comp, double alpha_prev) {
  double w = 0.0, total = 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t j = 0; j < s.uncensored.size(); ++j) {
    const double zj = r.uncensored(j, comp);
    if (zj == 0.0) continue;
    w += zj;
    total += zj * s.uncensored[j];
    lo = std::min(lo, s.uncensored[j]);
    hi = std::max(hi, s.uncensored[j]);
  }
  for (std::size_t l = 0; l < s.intervals.size(); ++l) {
    const double wl = censored_weight(r, s, l, comp);
    if (wl == 0.0) continue;
    const double c = truncated_mean_exp(alpha_prev, s.intervals[l]);
    w += wl;
    total += wl * c;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  auto neg_q = [&](double log_a) {
    return clamp_finite(w * log_a + total * std::exp(-log_a));
  };
  std::uintmax_t iters = kBrentMaxIter;
  const auto best = boost::math::tools::brent_find_minima(
      neg_q, std::log(lo) - 1.0, std::log(hi) + 1.0, kBrentBits, iters);
  if (iters >= kBrentMaxIter) {
    throw ConvergenceError("m_step_direct: exponential search did not converge");
  }
  return std::exp(best.first);
}

// Profile maximization: for each β the α-stationarity condition has the
// closed form α^β = [Σ z x^β + Σ W_ℓ α'^β Γ-diff(β/β'+1)/mass] / W, so the
// search is one-dimensional in β.
ComponentSpec direct_weibull(const Responsibilities& r, const CensoredSample& s,
                             std::size_t comp, const ComponentSpec& prev,
                             const EmConfig& config) {
  const WeibullStats st(r, s, comp, prev, true);
  const double w = st.total();
  const double log_a_prev = std::log(prev.alpha);

  struct Eval {
    double q;
    double alpha;
  };
  auto evaluate = [&](double beta) -> Eval {
    double t = 0.0;  // Σ z (x/α')^β
    for (std::size_t j = 0; j < st.z.size(); ++j) {
      t += st.z[j] * std::exp(beta * (st.log_x[j] - log_a_prev));
    }
    const double s_ratio = beta / prev.beta;
    std::vector<double> pm(st.iv_weight.size());
    double c = 0.0;
    for (std::size_t l = 0; l < pm.size(); ++l) {
      pm[l] = power_moment(s_ratio, st.iv_zeta[l]) / st.iv_mass[l];
      c += st.iv_weight[l] * pm[l];
    }
    const double scale_pow = w / (t + c);  // (α'/α*)^β
    const double log_ratio = std::log(scale_pow) / beta;  // log(α'/α*)
    const double log_alpha = log_a_prev - log_ratio;
    double q = st.w_exact * (std::log(beta) - beta * log_alpha) +
               (beta - 1.0) * st.sum_z_logx - scale_pow * t;
    for (std::size_t l = 0; l < pm.size(); ++l) {
      q += st.iv_weight[l] *
           (std::log(beta) - log_alpha + (beta - 1.0) * log_ratio +
            (beta - 1.0) / prev.beta * st.iv_log_moment[l] / st.iv_mass[l] -
            scale_pow * pm[l]);
    }
    return {q, std::exp(log_alpha)};
  };

  auto neg_q = [&](double log_b) {
    const double q = evaluate(std::exp(log_b)).q;
    return std::isfinite(q) ? -q : kHuge;
  };
  std::uintmax_t iters = kBrentMaxIter;
  const auto best = boost::math::tools::brent_find_minima(
      neg_q, std::log(config.beta_bracket.first), std::log(config.beta_bracket.second),
      kBrentBits, iters);
  if (iters >= kBrentMaxIter) {
    throw ConvergenceError("m_step_direct: Weibull search did not converge");
  }
  const double beta = std::exp(best.first);
  return {ComponentKind::Weibull, evaluate(beta).alpha, beta};
}

}  // namespace

std::vector<ComponentSpec> m_step_direct(const Responsibilities& r,
                                         const CensoredSample& s,
                                         const MixtureModel& prev,
                                         const EmConfig& config) {
  std::vector<ComponentSpec> out = prev.components;
  const double floor_mass = config.weight_floor * static_cast<double>(s.total());
  for (std::size_t i = 0; i < prev.size(); ++i) {
    if (!(effective_mass(r, s, i) > floor_mass)) continue;  // kept, fit flags it
    const auto& c = prev.components[i];
    if (c.kind == ComponentKind::Exponential) {
      out[i].alpha = direct_exponential(r, s, i, c.alpha);
    } else {
      out[i] = direct_weibull(r, s, i, c, config);
    }
  }
  return out;
}

// --- driver ------------------------------------------------------------------

FitResult fit(const CensoredSample& s, const ModelShape& shape,
              const EmConfig& config) {
  shape.validate();
  const auto M = static_cast<std::size_t>(shape.size());
  config.validate(M);
  s.validate();
  const auto n_total = s.total();
  if (n_total < static_cast<std::uint64_t>(dof(shape)) + 1) {
    throw InputError("fit: sample size N=" + std::to_string(n_total) +
                     " is below dof+1=" + std::to_string(dof(shape) + 1));
  }

  FitResult result;
  result.model = initial_model(s, shape, config.init);
  double ll = censored_log_likelihood(result.model, s);
  result.loglik_trace.push_back(ll);
  if (!std::isfinite(ll)) {
    result.error = "initial model has zero likelihood";
    return result;
  }

  auto flag = [&](std::size_t i) {
    auto& d = result.degenerate_components;
    if (std::find(d.begin(), d.end(), i) == d.end()) {
      d.push_back(i);
      result.warnings.push_back("component " + std::to_string(i) +
                                " weight fell below the floor");
    }
  };

  for (int k = 1; k <= config.max_iter; ++k) {
    MixtureModel next = result.model;
    double next_ll;
    try {
      const Responsibilities r = e_step(result.model, s);
      if (!r.uniform_rows.empty()) {
        result.warnings.push_back("iteration " + std::to_string(k) +
                                  ": interval mass underflow, uniform responsibilities used");
      }
      next.weights = update_weights(r, s);
      std::vector<bool> active(M, true);
      for (std::size_t i = 0; i < M; ++i) {
        if (!(next.weights[i] > config.weight_floor)) {
          flag(i);
          active[i] = false;
        }
      }
      if (config.m_step_variant == MStepVariant::SelfConsistentMLE) {
        for (std::size_t i = 0; i < M; ++i) {
          if (!active[i]) continue;
          const ComponentSpec& prev = result.model.components[i];
          if (prev.kind == ComponentKind::Exponential) {
            next.components[i].alpha =
                m_step_exponential(r, s, i, prev.alpha, config.weight_floor);
          } else {
            const double alpha = m_step_weibull_alpha(r, s, i, prev, config.weight_floor);
            const double beta = m_step_weibull_beta(r, s, i, prev, alpha,
                                                    config.beta_bracket, config.root_tol);
            next.components[i].alpha = alpha;
            next.components[i].beta = beta;
          }
        }
      } else {
        next.components = m_step_direct(r, s, result.model, config);
      }
      for (const auto& c : next.components) c.validate();
      next_ll = censored_log_likelihood(next, s);
      if (!std::isfinite(next_ll)) {
        throw DegenerateError("log-likelihood is not finite", 0);
      }
    } catch (const std::exception& e) {
      result.error = "iteration " + std::to_string(k) + ": " + e.what();
      break;
    }
    result.model = std::move(next);
    result.loglik_trace.push_back(next_ll);
    result.iterations = k;
    const double delta = next_ll - ll;
    ll = next_ll;
    if (std::abs(delta) <= config.epsilon) {
      result.converged = true;
      break;
    }
  }

  try {
    result.final_responsibilities = e_step(result.model, s);
  } catch (const std::exception& e) {
    if (!result.error) result.error = std::string("final e_step: ") + e.what();
  }
  std::sort(result.degenerate_components.begin(), result.degenerate_components.end());
  return result;
}

}  // namespace censem
