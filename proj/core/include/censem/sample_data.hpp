#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "censem/censored_sample.hpp"
#include "censem/components.hpp"

namespace censem {

/// Millisecond time stamps, non-decreasing. For intraday work the values are
/// milliseconds since midnight of the trading day.
struct TimestampSeries {
  std::vector<std::int64_t> stamps;

  void validate() const;  ///< throws InputError if negative or decreasing
};

inline constexpr std::int64_t kMsPerMinute = 60'000;

/// Trading session split into equal-width buckets (all in ms of day).
struct BucketSpec {
  std::int64_t session_start = 9 * 60 * kMsPerMinute;
  std::int64_t session_end = 17 * 60 * kMsPerMinute + 30 * kMsPerMinute;
  std::int64_t width = 10 * kMsPerMinute;

  /// Throws DomainError unless width > 0, start < end and width divides the
  /// session length.
  void validate() const;
  std::size_t bucket_count() const;
  std::int64_t bucket_start(std::size_t id) const { return session_start + static_cast<std::int64_t>(id) * width; }
};

/// Parses "HH:MM" into milliseconds since midnight.
std::int64_t parse_time_of_day(const std::string& hhmm);
std::string format_time_of_day(std::int64_t ms);

/// The single zero-bin interval [0, 0.5).
std::vector<CensoringInterval> default_censor_spec();

/// One interval [c - 0.5, c + 0.5) per distinct value c in `diffs`, with
/// [0, 0.5) for c = 0. Censors every rounded observation.
std::vector<CensoringInterval> rounding_censor_spec(std::span<const std::int64_t> diffs);

/// Consecutive differences of the time stamps; requires at least two stamps.
std::vector<std::int64_t> diff_and_round(const TimestampSeries& ts);

/// Counts each diff into the censoring interval containing it; the rest
/// become exact observations. Throws InputError if a zero diff is not
/// covered (exact observations must be positive).
CensoredSample build_sample(std::span<const std::int64_t> diffs,
                            std::span<const CensoringInterval> censor_spec);
inline CensoredSample build_sample(std::span<const std::int64_t> diffs) {
  return build_sample(diffs, default_censor_spec());
}

/// Contiguous slice [start, start + size).
std::vector<std::int64_t> subsample(std::span<const std::int64_t> diffs,
                                    std::size_t start, std::size_t size);

/// Uniform start index for a slice of `size` out of `length` values.
std::size_t random_subsample_start(std::size_t length, std::size_t size,
                                   std::uint64_t seed);

/// Resamples the N observation atoms (exact values and interval labels)
/// with replacement.
CensoredSample bootstrap_resample(const CensoredSample& s, std::uint64_t seed);

/// Partitions the stamps by session bucket; returns one entry per bucket
/// (possibly empty), in order. Throws InputError for stamps outside the
/// session.
std::vector<std::pair<std::size_t, TimestampSeries>> bucket_by_time(
    const TimestampSeries& ts, const BucketSpec& spec);

/// Mixture draws rounded to the nearest integer millisecond.
std::vector<std::int64_t> generate_synthetic(const MixtureModel& m, std::size_t n,
                                             std::uint64_t seed);

/// Integer-per-line text. Blank lines and lines starting with '#' are
/// skipped. Throws InputError with the 1-based line number on bad input.
std::vector<std::int64_t> read_integer_lines(std::istream& in);
void write_integer_lines(std::ostream& out, std::span<const std::int64_t> values);

}  // namespace censem
