#pragma once

#include <cstdint>
#include <vector>

namespace censem {

/// Half-open censoring interval [lo, hi) in milliseconds with the number of
/// observations known only to lie inside it. `hi` may be +infinity.
struct CensoringInterval {
  double lo = 0.0;
  double hi = 0.5;
  std::uint64_t count = 0;

  bool contains(double x) const noexcept { return x >= lo && x < hi; }

  friend bool operator==(const CensoringInterval&,
                         const CensoringInterval&) = default;
};

/// n exact observations followed by L censoring intervals with counts.
struct CensoredSample {
  std::vector<double> uncensored;
  std::vector<CensoringInterval> intervals;

  std::uint64_t censored_count() const noexcept;
  /// N = n + Σ N_ℓ.
  std::uint64_t total() const noexcept;

  /// Throws InputError when intervals are malformed, overlapping or unsorted,
  /// when an exact observation is non-positive or falls inside an interval,
  /// or (if `require_nonempty`) when N = 0.
  void validate(bool require_nonempty = true) const;

  friend bool operator==(const CensoredSample&, const CensoredSample&) = default;
};

}  // namespace censem
