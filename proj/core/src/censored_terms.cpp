#include "censem/censored_terms.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "censem/errors.hpp"
#include "censem/special_fn.hpp"

namespace censem {

namespace {

// Below this ζ the alternating d_series keeps at least ~13 digits.
constexpr double kSeriesLimit = 5.0;
constexpr double kMinMass = 1e-300;

double mass_or_throw(const ZetaInterval& z) {
  const double mass = unit_exp_mass(z);
  if (!(mass > kMinMass)) {
    throw DegenerateError("censoring interval carries no mass under the "
                          "previous parameters", 0);
  }
  return mass;
}

// ∫_0^ζ u^s log u e^{-u} du = γ(s+1, ζ) log ζ - d_series(s, ζ)
double lower_power_log_moment(double s, double zeta) {
  if (zeta == 0.0) return 0.0;
  return special::gamma_lower(s + 1.0, zeta) * std::log(zeta) -
         special::d_series(s, zeta);
}

double quadrature_power_log_moment(double s, double a, double b) {
  auto f = [s](double u) {
    if (u <= 0.0) return 0.0;
    const double lu = std::log(u);
    return std::exp(s * lu - u) * lu;
  };
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-14);
}

}  // namespace

ZetaInterval zeta_transform(const CensoringInterval& iv, double alpha,
                            double beta) {
  return {std::pow(iv.lo / alpha, beta), std::pow(iv.hi / alpha, beta)};
}

double unit_exp_mass(const ZetaInterval& z) {
  return std::exp(-z.lo) * -std::expm1(-(z.hi - z.lo));
}

double log_moment(const ZetaInterval& z) {
  if (z.hi <= z.lo) return 0.0;
  const double tail_hi = std::isinf(z.hi) ? 0.0 : std::exp(-z.hi) * std::log(z.hi);
  if (z.lo == 0.0) {
    // lower bound ζ_0 = 0: -(γ + e^{-ζ} log ζ + Γ(0, ζ)), written through
    // Ein so the γ + log ζ + E1(ζ) cancellation happens analytically.
    if (std::isinf(z.hi)) return -special::euler_gamma();
    return -(special::ein(z.hi) + std::expm1(-z.hi) * std::log(z.hi));
  }
  if (z.hi <= 1.0) {
    return std::expm1(-z.lo) * std::log(z.lo) -
           std::expm1(-z.hi) * std::log(z.hi) + special::ein(z.lo) -
           special::ein(z.hi);
  }
  const double e1_hi = std::isinf(z.hi) ? 0.0 : special::gamma_upper(0.0, z.hi);
  return std::exp(-z.lo) * std::log(z.lo) - tail_hi +
         special::gamma_upper(0.0, z.lo) - e1_hi;
}

double power_moment(double s, const ZetaInterval& z) {
  if (z.hi <= z.lo) return 0.0;
  return special::gamma_interval(s + 1.0, z.lo, z.hi);
}

double power_log_moment(double s, const ZetaInterval& z) {
  if (!(s > 0.0)) throw DomainError("power_log_moment: s must be > 0");
  if (z.hi <= z.lo) return 0.0;
  if (z.hi <= kSeriesLimit) {
    return lower_power_log_moment(s, z.hi) - lower_power_log_moment(s, z.lo);
  }
  double acc = 0.0;
  double start = z.lo;
  if (z.lo < kSeriesLimit) {
    acc += lower_power_log_moment(s, kSeriesLimit) -
           lower_power_log_moment(s, z.lo);
    start = kSeriesLimit;
  }
  return acc + quadrature_power_log_moment(s, start, z.hi);
}

double unit_truncated_mean(const ZetaInterval& z) {
  if (std::isinf(z.hi)) return 1.0 + z.lo;
  const double width = z.hi - z.lo;
  if (width == 0.0) return z.lo;
  return 1.0 + z.lo - width / std::expm1(width);
}

double truncated_mean_exp(double alpha_prev, const CensoringInterval& iv) {
  if (!(alpha_prev > 0.0)) {
    throw DomainError("truncated_mean_exp: alpha must be > 0");
  }
  if (std::isinf(iv.hi)) return alpha_prev + iv.lo;
  const double width = iv.hi - iv.lo;
  const double c = alpha_prev + iv.lo - width / std::expm1(width / alpha_prev);
  if (!std::isfinite(c)) {
    throw DegenerateError("truncated_mean_exp: non-finite conditional mean", 0);
  }
  return c;
}

double censored_log_density_term(const ComponentSpec& candidate,
                                 const ComponentSpec& prev,
                                 const CensoringInterval& iv) {
  if (candidate.kind == ComponentKind::Exponential) {
    const double c = truncated_mean_exp(prev.alpha, iv);
    return -std::log(candidate.alpha) - c / candidate.alpha;
  }
  const auto z = zeta_transform(iv, prev.alpha, prev.beta);
  const double mass = mass_or_throw(z);
  const double a = candidate.alpha, b = candidate.beta;
  const double ratio = prev.alpha / a;
  const double s = b / prev.beta;
  return std::log(b / a) + (b - 1.0) * std::log(ratio) +
         (b - 1.0) / prev.beta * log_moment(z) / mass -
         std::pow(ratio, b) * power_moment(s, z) / mass;
}

double weibull_d_term(const ComponentSpec& candidate, const ComponentSpec& prev,
                      const CensoringInterval& iv) {
  const auto z = zeta_transform(iv, prev.alpha, prev.beta);
  const double b = candidate.beta;
  const double ratio = prev.alpha / candidate.alpha;
  const double s = b / prev.beta;
  const double scale = std::pow(ratio, b);
  return log_moment(z) / prev.beta -
         scale * power_log_moment(s, z) / prev.beta -
         std::log(ratio) * scale * power_moment(s, z);
}

double censored_dbeta_term(const ComponentSpec& candidate,
                           const ComponentSpec& prev,
                           const CensoringInterval& iv) {
  const auto z = zeta_transform(iv, prev.alpha, prev.beta);
  const double mass = mass_or_throw(z);
  return 1.0 / candidate.beta + std::log(prev.alpha / candidate.alpha) +
         weibull_d_term(candidate, prev, iv) / mass;
}

double censored_dalpha_term(const ComponentSpec& candidate,
                            const ComponentSpec& prev,
                            const CensoringInterval& iv) {
  const auto z = zeta_transform(iv, prev.alpha, prev.beta);
  const double mass = mass_or_throw(z);
  const double a = candidate.alpha, b = candidate.beta;
  const double s = b / prev.beta;
  return b / a * (-1.0 + std::pow(prev.alpha / a, b) * power_moment(s, z) / mass);
}

}  // namespace censem
