#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "censem/censored_sample.hpp"
#include "censem/censored_terms.hpp"
#include "censem/components.hpp"

namespace censem {

enum class MStepVariant {
  /// Closed-form exponential update, closed-form Weibull α at β = β', and the
  /// Weibull β equation with the α'/α and β/β' ratios set to one inside the
  /// censored terms.
  SelfConsistentMLE,
  /// Numerical maximization of the expected complete-data log-likelihood.
  DirectObjective,
};

/// Starting values. Unset fields fall back to the data-driven defaults
/// (uniform weights, β = 1, α from sample deciles).
struct InitSpec {
  std::optional<std::vector<double>> weights;
  std::optional<std::vector<double>> betas;
  std::optional<std::vector<double>> alphas;

  /// Warm start from a fitted model.
  static InitSpec from_model(const MixtureModel& m);
};

struct EmConfig {
  double epsilon = 1e-5;
  int max_iter = 500;
  MStepVariant m_step_variant = MStepVariant::SelfConsistentMLE;
  double weight_floor = 1e-8;
  std::pair<double, double> beta_bracket{0.05, 20.0};
  double root_tol = 1e-10;
  InitSpec init;

  /// Throws DomainError on invalid settings; `components` is M.
  void validate(std::size_t components) const;
};

/// Posterior membership probabilities: z is n x M, z_tilde is L x M
/// (row-major).
struct Responsibilities {
  std::size_t components = 0;
  std::vector<double> z;
  std::vector<double> z_tilde;
  /// Censoring intervals whose mixture mass underflowed for every component;
  /// their z_tilde rows were set uniform.
  std::vector<std::size_t> uniform_rows;

  std::size_t uncensored_rows() const { return components ? z.size() / components : 0; }
  std::size_t censored_rows() const { return components ? z_tilde.size() / components : 0; }
  double uncensored(std::size_t j, std::size_t i) const { return z[j * components + i]; }
  double censored(std::size_t l, std::size_t i) const { return z_tilde[l * components + i]; }
};

struct FitResult {
  MixtureModel model;
  std::vector<double> loglik_trace;  ///< index 0 is the initial model
  int iterations = 0;
  bool converged = false;
  Responsibilities final_responsibilities;
  /// Components whose weight fell below the floor at some iteration.
  std::vector<std::size_t> degenerate_components;
  /// Set when the fit stopped on a numerical failure; `model` then holds the
  /// last valid state.
  std::optional<std::string> error;
  std::vector<std::string> warnings;

  double loglik() const { return loglik_trace.back(); }
  bool degenerate() const { return error.has_value() || !degenerate_components.empty(); }
};

/// Mixture with p exponentials followed by r Weibulls, initialized from
/// `init` or the data-driven defaults.
MixtureModel initial_model(const CensoredSample& s, const ModelShape& shape,
                           const InitSpec& init = {});

Responsibilities e_step(const MixtureModel& m, const CensoredSample& s);

std::vector<double> update_weights(const Responsibilities& r,
                                   const CensoredSample& s);

/// Σ_j z_ij + Σ_ℓ N_ℓ z̃_iℓ.
double effective_mass(const Responsibilities& r, const CensoredSample& s,
                      std::size_t comp);

double m_step_exponential(const Responsibilities& r, const CensoredSample& s,
                          std::size_t comp, double alpha_prev,
                          double weight_floor = 1e-8);

/// Weibull scale update with β held at the previous value.
double m_step_weibull_alpha(const Responsibilities& r, const CensoredSample& s,
                            std::size_t comp, const ComponentSpec& prev,
                            double weight_floor = 1e-8);

/// Weibull shape update (self-consistent form). Throws BracketError when the
/// root is not inside `beta_bracket`.
double m_step_weibull_beta(const Responsibilities& r, const CensoredSample& s,
                           std::size_t comp, const ComponentSpec& prev,
                           double alpha_new,
                           std::pair<double, double> beta_bracket = {0.05, 20.0},
                           double root_tol = 1e-10);

/// Residual of the self-consistent β equation at `beta` (zero at the update).
double weibull_beta_equation(const Responsibilities& r, const CensoredSample& s,
                             std::size_t comp, const ComponentSpec& prev,
                             double alpha_new, double beta);

/// Component i's share of the M-step objective:
/// Σ_j z_ij log f_i(x_j) + Σ_ℓ N_ℓ z̃_iℓ E_h[log f_i].
double q_component(const ComponentSpec& candidate, const Responsibilities& r,
                   const CensoredSample& s, std::size_t comp,
                   const ComponentSpec& prev);

/// Full M-step objective over all components (weights terms excluded).
double q_objective(const MixtureModel& candidate, const Responsibilities& r,
                   const CensoredSample& s, const MixtureModel& prev);

/// DirectObjective M-step: per-component maximization of q_component.
std::vector<ComponentSpec> m_step_direct(const Responsibilities& r,
                                         const CensoredSample& s,
                                         const MixtureModel& prev,
                                         const EmConfig& config);

/// Censored EM for a (p exp + r wbl) mixture. Stops when
/// |Δ log L| <= epsilon or after max_iter iterations. Numerical failures are
/// reported through FitResult::error rather than thrown.
FitResult fit(const CensoredSample& s, const ModelShape& shape,
              const EmConfig& config = {});

}  // namespace censem
