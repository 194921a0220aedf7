#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "censem/censored_sample.hpp"
#include "censem/components.hpp"

namespace censem::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kDegenerate = 3 };

inline constexpr std::uint64_t kDefaultSeed = 20100601;

/// Runs one command line (without the program name). Reports go to the
/// --output file or to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// %.17g, with "inf"/"-inf" for infinities.
std::string format_number(double v);

ModelShape parse_shape(const std::string& text);                ///< "p,r"
CensoringInterval parse_censor(const std::string& text);         ///< "lo,hi"
/// "w:exp:alpha,w:wbl:alpha:beta,..."
MixtureModel parse_model(const std::string& text);

/// Censored-sample file: `n=<int>`, `L=<int>`, L lines `interval lo hi count`,
/// then n exact values one per line. '#' lines are comments.
void write_censored_sample(std::ostream& out, const CensoredSample& s);
CensoredSample read_censored_sample(std::istream& in);

}  // namespace censem::cli
