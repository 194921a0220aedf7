#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace censem {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative procedure (series, root search, optimizer) did not converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Root not bracketed by the configured interval.
class BracketError : public ConvergenceError {
 public:
  BracketError(const std::string& what, double lo, double hi, double f_lo,
               double f_hi)
      : ConvergenceError(what), lo_(lo), hi_(hi), f_lo_(f_lo), f_hi_(f_hi) {}

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double f_lo() const noexcept { return f_lo_; }
  double f_hi() const noexcept { return f_hi_; }

 private:
  double lo_, hi_, f_lo_, f_hi_;
};

/// A mixture component or observation carries no usable probability mass.
class DegenerateError : public std::runtime_error {
 public:
  DegenerateError(const std::string& what, std::size_t index)
      : std::runtime_error(what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Malformed or inconsistent input data. `line()` is 0 when not file-based.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace censem
