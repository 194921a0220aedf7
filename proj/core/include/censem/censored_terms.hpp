#pragma once

// Conditional expectations over a censoring interval for Weibull components.
//
// With the previous-iteration parameters (α', β'), the substitution
// u = (y/α')^{β'} maps y ∈ [ξ_lo, ξ_hi) onto u ∈ [ζ_lo, ζ_hi) with
// f(y|α',β') dy = e^{-u} du. Every censored M-step quantity is then an
// integral of the form ∫ g(u) e^{-u} du over [ζ_lo, ζ_hi).

#include "censem/censored_sample.hpp"
#include "censem/components.hpp"

namespace censem {

struct ZetaInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// ζ = (ξ/α)^β applied to both interval ends.
ZetaInterval zeta_transform(const CensoringInterval& iv, double alpha,
                            double beta);

/// e^{-ζ_lo} - e^{-ζ_hi}: the interval probability at the previous parameters.
double unit_exp_mass(const ZetaInterval& z);

/// ∫ log u · e^{-u} du over [ζ_lo, ζ_hi).
/// Equals e^{-ζ_lo} log ζ_lo - e^{-ζ_hi} log ζ_hi + Γ(0,ζ_lo) - Γ(0,ζ_hi), with
/// the ζ_lo = 0 limit -(γ + e^{-ζ_hi} log ζ_hi + Γ(0, ζ_hi)).
double log_moment(const ZetaInterval& z);

/// ∫ u^s e^{-u} du = Γ(s+1, ζ_lo) - Γ(s+1, ζ_hi), s >= 0.
double power_moment(double s, const ZetaInterval& z);

/// ∫ u^s log u · e^{-u} du = ∂/∂s [Γ(s+1, ζ_lo) - Γ(s+1, ζ_hi)], s > 0.
/// Uses the alternating d_series form when ζ_hi <= 5 and adaptive quadrature
/// for the part of the interval beyond 5.
double power_log_moment(double s, const ZetaInterval& z);

/// E[u | u ∈ [ζ_lo, ζ_hi)] for a unit exponential; G_ℓ of the α-update at
/// β = β'. Stable when the interval mass underflows.
double unit_truncated_mean(const ZetaInterval& z);

/// Conditional mean of Exp(α') on [lo, hi):
/// α' + (lo e^{-lo/α'} - hi e^{-hi/α'}) / (e^{-lo/α'} - e^{-hi/α'}).
double truncated_mean_exp(double alpha_prev, const CensoringInterval& iv);

/// E_h[log f(y | candidate)] where h is the previous-parameter density
/// restricted to the interval (one censored summand of the M-step objective).
double censored_log_density_term(const ComponentSpec& candidate,
                                 const ComponentSpec& prev,
                                 const CensoringInterval& iv);

/// D_{2ℓ}: the interval-mass-weighted part of ∂/∂β of the censored Weibull
/// summand. ∂/∂β E_h[log f] = 1/β + log(α'/α) + D / (e^{-ζ_lo} - e^{-ζ_hi}).
double weibull_d_term(const ComponentSpec& candidate, const ComponentSpec& prev,
                      const CensoringInterval& iv);

/// ∂/∂β of censored_log_density_term for a Weibull candidate.
double censored_dbeta_term(const ComponentSpec& candidate,
                           const ComponentSpec& prev,
                           const CensoringInterval& iv);

/// ∂/∂α of censored_log_density_term:
/// (β/α) [-1 + (α'/α)^β (Γ(s+1,ζ_lo) - Γ(s+1,ζ_hi)) / mass], s = β/β'.
double censored_dalpha_term(const ComponentSpec& candidate,
                            const ComponentSpec& prev,
                            const CensoringInterval& iv);

}  // namespace censem
