#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "censem/censored_sample.hpp"

namespace censem {

enum class ComponentKind { Exponential, Weibull };

std::string to_string(ComponentKind kind);

/// One mixture component. Exponential components always carry beta == 1.
struct ComponentSpec {
  ComponentKind kind = ComponentKind::Weibull;
  double alpha = 1.0;  ///< scale, ms
  double beta = 1.0;   ///< shape

  static ComponentSpec exponential(double alpha);
  static ComponentSpec weibull(double alpha, double beta);

  /// Throws DomainError if alpha/beta are not positive and finite, or an
  /// exponential carries beta != 1.
  void validate() const;

  friend bool operator==(const ComponentSpec&, const ComponentSpec&) = default;
};

/// Number of exponential (p) and Weibull (r) components of a mixture.
struct ModelShape {
  int p = 1;
  int r = 1;

  int size() const noexcept { return p + r; }
  void validate() const;
  std::string label() const;  ///< "1 exp + 1 wbl"

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
  friend auto operator<=>(const ModelShape&, const ModelShape&) = default;
};

struct MixtureModel {
  std::vector<double> weights;
  std::vector<ComponentSpec> components;

  std::size_t size() const noexcept { return components.size(); }
  /// Exponentials counted as p, Weibulls as r.
  ModelShape shape() const;
  /// Throws DomainError unless M >= 1, weights are non-negative, sum to one
  /// within 1e-12, and every component is valid.
  void validate() const;
};

/// Components of the same kind sorted by increasing alpha, exponentials
/// first. Fixes label switching when averaging fits.
MixtureModel canonical_order(const MixtureModel& m);

double pdf(const ComponentSpec& c, double x);
double log_pdf(const ComponentSpec& c, double x);

/// Survival function exp(-(x/α)^β).
double survival(const ComponentSpec& c, double x);

/// P(X ∈ [lo, hi)) via the survival-function difference.
double interval_prob(const ComponentSpec& c, const CensoringInterval& iv);
double log_interval_prob(const ComponentSpec& c, const CensoringInterval& iv);

double mixture_pdf(const MixtureModel& m, double x);
double mixture_log_pdf(const MixtureModel& m, double x);

/// log of the censored likelihood: Σ_j log f(x_j) + Σ_ℓ N_ℓ log ∫_{I_ℓ} f.
/// Returns -infinity if an exact observation is non-positive or an interval
/// carries zero mixture mass.
double censored_log_likelihood(const MixtureModel& m, const CensoredSample& s);

/// n i.i.d. mixture draws by inverse-CDF. Deterministic in `seed`.
std::vector<double> sample(const MixtureModel& m, std::size_t n,
                           std::uint64_t seed);

/// Free parameters of a (p exponential + r Weibull) mixture: 2p + 3r - 1.
int dof(int p, int r);
inline int dof(const ModelShape& s) { return dof(s.p, s.r); }

}  // namespace censem
