#include "censem/sample_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "censem/errors.hpp"
#include "censem/rng.hpp"

namespace censem {

void TimestampSeries::validate() const {
  for (std::size_t k = 0; k < stamps.size(); ++k) {
    if (stamps[k] < 0) {
      throw InputError("time stamp " + std::to_string(k) + " is negative");
    }
    if (k > 0 && stamps[k] < stamps[k - 1]) {
      throw InputError("time stamps are not sorted at index " + std::to_string(k));
    }
  }
}

void BucketSpec::validate() const {
  if (width <= 0) throw DomainError("bucket width must be > 0");
  if (session_end <= session_start) throw DomainError("session end must follow start");
  if ((session_end - session_start) % width != 0) {
    throw DomainError("bucket width must divide the session length");
  }
}

std::size_t BucketSpec::bucket_count() const {
  validate();
  return static_cast<std::size_t>((session_end - session_start) / width);
}

std::int64_t parse_time_of_day(const std::string& hhmm) {
  int h = 0, m = 0;
  char tail = 0;
  if (std::sscanf(hhmm.c_str(), "%d:%d%c", &h, &m, &tail) != 2 || h < 0 || h > 24 ||
      m < 0 || m > 59) {
    throw InputError("invalid time of day '" + hhmm + "' (expected HH:MM)");
  }
  return (static_cast<std::int64_t>(h) * 60 + m) * kMsPerMinute;
}

std::string format_time_of_day(std::int64_t ms) {
  const auto minutes = ms / kMsPerMinute;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld", static_cast<long long>(minutes / 60),
                static_cast<long long>(minutes % 60));
  return buf;
}

std::vector<CensoringInterval> default_censor_spec() { return {{0.0, 0.5, 0}}; }

std::vector<CensoringInterval> rounding_censor_spec(std::span<const std::int64_t> diffs) {
  std::set<std::int64_t> values(diffs.begin(), diffs.end());
  std::vector<CensoringInterval> spec;
  for (auto c : values) {
    if (c < 0) throw InputError("negative difference in rounding spec");
    const double v = static_cast<double>(c);
    spec.push_back({c == 0 ? 0.0 : v - 0.5, v + 0.5, 0});
  }
  return spec;
}

std::vector<std::int64_t> diff_and_round(const TimestampSeries& ts) {
  if (ts.stamps.size() < 2) {
    throw InputError("need at least two time stamps to form differences");
  }
  std::vector<std::int64_t> out;
  out.reserve(ts.stamps.size() - 1);
  for (std::size_t k = 1; k < ts.stamps.size(); ++k) {
    const auto d = ts.stamps[k] - ts.stamps[k - 1];
    if (d < 0) {
      throw InputError("negative time difference at index " + std::to_string(k) +
                       " (unsorted input)");
    }
    out.push_back(d);
  }
  return out;
}

CensoredSample build_sample(std::span<const std::int64_t> diffs,
                            std::span<const CensoringInterval> censor_spec) {
  CensoredSample s;
  s.intervals.assign(censor_spec.begin(), censor_spec.end());
  for (auto& iv : s.intervals) iv.count = 0;
  // validates ordering and disjointness of the spec
  s.validate(false);

  for (auto d : diffs) {
    if (d < 0) throw InputError("negative difference " + std::to_string(d));
    const double x = static_cast<double>(d);
    auto it = std::upper_bound(
        s.intervals.begin(), s.intervals.end(), x,
        [](double v, const CensoringInterval& iv) { return v < iv.hi; });
    if (it != s.intervals.end() && it->contains(x)) {
      ++it->count;
    } else if (d == 0) {
      throw InputError("zero difference not covered by any censoring interval");
    } else {
      s.uncensored.push_back(x);
    }
  }
  return s;
}

std::vector<std::int64_t> subsample(std::span<const std::int64_t> diffs,
                                    std::size_t start, std::size_t size) {
  if (start > diffs.size() || size > diffs.size() - start) {
    throw std::out_of_range("subsample: [" + std::to_string(start) + ", " +
                            std::to_string(start + size) + ") exceeds length " +
                            std::to_string(diffs.size()));
  }
  auto slice = diffs.subspan(start, size);
  return {slice.begin(), slice.end()};
}

std::size_t random_subsample_start(std::size_t length, std::size_t size,
                                   std::uint64_t seed) {
  if (size > length) {
    throw std::out_of_range("subsample size " + std::to_string(size) +
                            " exceeds length " + std::to_string(length));
  }
  Rng rng(seed);
  return static_cast<std::size_t>(rng.uniform_index(length - size + 1));
}

CensoredSample bootstrap_resample(const CensoredSample& s, std::uint64_t seed) {
  const std::uint64_t n_total = s.total();
  if (n_total == 0) throw InputError("bootstrap_resample: empty sample");
  const std::uint64_t n_exact = s.uncensored.size();

  std::vector<std::uint64_t> upper;  // cumulative interval counts
  std::uint64_t acc = n_exact;
  for (const auto& iv : s.intervals) upper.push_back(acc += iv.count);

  CensoredSample out;
  out.intervals = s.intervals;
  for (auto& iv : out.intervals) iv.count = 0;

  Rng rng(seed);
  for (std::uint64_t k = 0; k < n_total; ++k) {
    const auto idx = rng.uniform_index(n_total);
    if (idx < n_exact) {
      out.uncensored.push_back(s.uncensored[idx]);
    } else {
      const auto l = std::upper_bound(upper.begin(), upper.end(), idx) - upper.begin();
      ++out.intervals[static_cast<std::size_t>(l)].count;
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, TimestampSeries>> bucket_by_time(
    const TimestampSeries& ts, const BucketSpec& spec) {
  const std::size_t count = spec.bucket_count();
  std::vector<std::pair<std::size_t, TimestampSeries>> out(count);
  for (std::size_t b = 0; b < count; ++b) out[b].first = b;
  for (auto t : ts.stamps) {
    if (t < spec.session_start || t >= spec.session_end) {
      throw InputError("time stamp " + std::to_string(t) + " (" +
                       format_time_of_day(t) + ") lies outside the session");
    }
    const auto b = static_cast<std::size_t>((t - spec.session_start) / spec.width);
    out[b].second.stamps.push_back(t);
  }
  return out;
}

std::vector<std::int64_t> generate_synthetic(const MixtureModel& m, std::size_t n,
                                             std::uint64_t seed) {
  const auto draws = sample(m, n, seed);
  std::vector<std::int64_t> out;
  out.reserve(n);
  // [c - 0.5, c + 0.5) -> c; (0, 0.5) -> 0
  for (double x : draws) out.push_back(static_cast<std::int64_t>(std::floor(x + 0.5)));
  return out;
}

std::vector<std::int64_t> read_integer_lines(std::istream& in) {
  std::vector<std::int64_t> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t");
    const char* b = line.data() + first;
    const char* e = line.data() + last + 1;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) {
      throw InputError("line " + std::to_string(line_no) + ": expected an integer, got '" +
                           line.substr(first, last - first + 1) + "'",
                       line_no);
    }
    if (v < 0) {
      throw InputError("line " + std::to_string(line_no) + ": negative value", line_no);
    }
    values.push_back(v);
  }
  return values;
}

void write_integer_lines(std::ostream& out, std::span<const std::int64_t> values) {
  for (auto v : values) out << v << '\n';
}

}  // namespace censem
