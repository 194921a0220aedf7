#pragma once

// Gamma-family special functions used by the censored M-step.
//
// All functions are pure; they throw censem::DomainError outside their
// domain and censem::ConvergenceError when a series exhausts its term budget.

namespace censem::special {

struct SpecialFnConfig {
  double rel_tol = 1e-12;  ///< series / continued-fraction termination
  int max_terms = 200;

  /// Throws DomainError unless 0 < rel_tol < 1e-6 and max_terms >= 50.
  void validate() const;
};

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

/// Euler-Mascheroni constant.
constexpr double euler_gamma() noexcept { return kEulerGamma; }

/// Complete gamma function, s > 0.
double gamma_complete(double s);

/// Upper incomplete gamma Γ(s, x) for s >= 0, x >= 0 (not both zero).
/// Γ(0, x) is the exponential integral E1(x).
double gamma_upper(double s, double x, const SpecialFnConfig& cfg = {});

/// Lower incomplete gamma γ(s, x) = Γ(s) - Γ(s, x), s > 0, x >= 0.
double gamma_lower(double s, double x, const SpecialFnConfig& cfg = {});

/// ∫_a^b t^{s-1} e^{-t} dt for 0 <= a <= b <= +inf. Evaluated without
/// differencing two nearly equal incomplete gammas when both ends are small.
/// s = 0 requires a > 0.
double gamma_interval(double s, double a, double b,
                      const SpecialFnConfig& cfg = {});

/// Entire exponential integral Ein(x) = E1(x) + log x + γ, x >= 0.
double ein(double x, const SpecialFnConfig& cfg = {});

/// Σ_{p>=0} (-1)^p / p! · z^{a+1+p} / (a+1+p)^2 for a > 0, z >= 0.
///
/// This is -∂/∂a of the lower incomplete gamma series with the log z part
/// removed. Loses roughly log10(e^z) digits to cancellation, so callers
/// should keep z below ~5 for full accuracy.
double d_series(double a, double z, const SpecialFnConfig& cfg = {});

}  // namespace censem::special
