#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include "censem/em.hpp"
#include "censem/errors.hpp"
#include "censem/model_select.hpp"
#include "censem/sample_data.hpp"

namespace censem::cli {

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) throw DomainError("refusing to serialize NaN");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

double parse_real(const std::string& text, const std::string& what) {
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || std::isnan(v)) {
    throw InputError("invalid " + what + " '" + text + "'");
  }
  return v;
}

long long parse_int(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw InputError("invalid " + what + " '" + text + "'");
  }
  return v;
}

}  // namespace

ModelShape parse_shape(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw InputError("shape must be 'p,r', got '" + text + "'");
  const auto p = parse_int(parts[0], "shape p");
  const auto r = parse_int(parts[1], "shape r");
  if (p < 0 || r < 0 || p + r < 1 || p + r > 64) {
    throw InputError("shape needs p, r >= 0 and 1 <= p + r <= 64, got '" + text + "'");
  }
  return {static_cast<int>(p), static_cast<int>(r)};
}

CensoringInterval parse_censor(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw InputError("censor interval must be 'lo,hi', got '" + text + "'");
  const CensoringInterval iv{parse_real(parts[0], "interval bound"),
                             parse_real(parts[1], "interval bound"), 0};
  if (!(iv.lo >= 0.0 && iv.lo < iv.hi)) {
    throw InputError("censor interval needs 0 <= lo < hi, got '" + text + "'");
  }
  return iv;
}

MixtureModel parse_model(const std::string& text) {
  MixtureModel m;
  for (const auto& item : split(text, ',')) {
    const auto f = split(item, ':');
    if (f.size() == 3 && f[1] == "exp") {
      m.weights.push_back(parse_real(f[0], "weight"));
      m.components.push_back(ComponentSpec::exponential(parse_real(f[2], "alpha")));
    } else if (f.size() == 4 && f[1] == "wbl") {
      m.weights.push_back(parse_real(f[0], "weight"));
      m.components.push_back(
          ComponentSpec::weibull(parse_real(f[2], "alpha"), parse_real(f[3], "beta")));
    } else {
      throw InputError("invalid model component '" + item +
                       "' (expected w:exp:alpha or w:wbl:alpha:beta)");
    }
  }
  try {
    m.validate();
  } catch (const DomainError& e) {
    throw InputError(std::string("invalid model: ") + e.what());
  }
  return m;
}

void write_censored_sample(std::ostream& out, const CensoredSample& s) {
  out << "n=" << s.uncensored.size() << '\n';
  out << "L=" << s.intervals.size() << '\n';
  for (const auto& iv : s.intervals) {
    out << "interval " << format_number(iv.lo) << ' ' << format_number(iv.hi) << ' '
        << iv.count << '\n';
  }
  for (double x : s.uncensored) out << format_number(x) << '\n';
}

CensoredSample read_censored_sample(std::istream& in) {
  CensoredSample s;
  std::string line;
  std::size_t line_no = 0;
  long long n = -1, n_intervals = -1;
  auto fail = [&](const std::string& msg) {
    throw InputError("line " + std::to_string(line_no) + ": " + msg, line_no);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    line = line.substr(first, line.find_last_not_of(" \t") - first + 1);
    try {
      if (n < 0) {
        if (line.rfind("n=", 0) != 0) fail("expected 'n=<int>'");
        n = parse_int(line.substr(2), "n");
        if (n < 0) fail("n must be >= 0");
      } else if (n_intervals < 0) {
        if (line.rfind("L=", 0) != 0) fail("expected 'L=<int>'");
        n_intervals = parse_int(line.substr(2), "L");
        if (n_intervals < 0) fail("L must be >= 0");
      } else if (static_cast<long long>(s.intervals.size()) < n_intervals) {
        std::istringstream fields(line);
        std::string tag, lo, hi, count, extra;
        fields >> tag >> lo >> hi >> count;
        if (tag != "interval" || count.empty() || (fields >> extra)) {
          fail("expected 'interval <lo> <hi> <count>'");
        }
        const auto c = parse_int(count, "count");
        if (c < 0) fail("negative interval count");
        s.intervals.push_back({parse_real(lo, "interval bound"),
                               parse_real(hi, "interval bound"),
                               static_cast<std::uint64_t>(c)});
      } else {
        if (static_cast<long long>(s.uncensored.size()) >= n) {
          fail("more exact values than n=" + std::to_string(n));
        }
        s.uncensored.push_back(parse_real(line, "value"));
      }
    } catch (const InputError& e) {
      if (e.line() != 0) throw;
      fail(e.what());
    }
  }
  if (n < 0 || n_intervals < 0) throw InputError("missing n= or L= header", line_no);
  if (static_cast<long long>(s.intervals.size()) != n_intervals) {
    throw InputError("expected " + std::to_string(n_intervals) + " interval lines", line_no);
  }
  if (static_cast<long long>(s.uncensored.size()) != n) {
    throw InputError("expected " + std::to_string(n) + " exact values, found " +
                         std::to_string(s.uncensored.size()),
                     line_no);
  }
  s.validate();
  return s;
}

namespace {

struct Options {
  std::vector<std::string> inputs;
  std::string output;
  std::string input_kind = "timestamps";
  std::vector<std::string> shapes;
  double epsilon = 1e-5;
  int max_iter = 500;
  std::string m_step = "mle";
  std::vector<std::string> censors;
  bool all_bins = false;
  std::size_t boot = 999;
  std::size_t subsample = 200;
  std::size_t ensembles = 1;
  unsigned threads = 0;
  int bucket_minutes = 10;
  std::string session_start = "09:00";
  std::string session_end = "17:30";
  std::size_t min_obs = 10;
  std::uint64_t seed = kDefaultSeed;
  double alpha_level = 0.05;
  bool two_sided = false;
  std::string model;
  std::size_t n = 0;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("CENSEM_SEED"); env && *env) {
    const auto v = parse_int(env, "CENSEM_SEED");
    if (v < 0) throw InputError("CENSEM_SEED must be non-negative");
    return static_cast<std::uint64_t>(v);
  }
  return kDefaultSeed;
}

EmConfig em_config(const Options& o) {
  EmConfig c;
  c.epsilon = o.epsilon;
  c.max_iter = o.max_iter;
  if (o.m_step == "mle") {
    c.m_step_variant = MStepVariant::SelfConsistentMLE;
  } else if (o.m_step == "direct") {
    c.m_step_variant = MStepVariant::DirectObjective;
  } else {
    throw InputError("--m-step must be 'mle' or 'direct'");
  }
  if (!(c.epsilon > 0.0) || c.max_iter < 1) {
    throw InputError("--epsilon must be > 0 and --max-iter >= 1");
  }
  return c;
}

std::vector<CensoringInterval> censor_spec(const Options& o) {
  if (o.censors.empty()) return default_censor_spec();
  std::vector<CensoringInterval> spec;
  for (const auto& c : o.censors) spec.push_back(parse_censor(c));
  return spec;
}

std::vector<ModelShape> shapes(const Options& o, std::vector<ModelShape> fallback) {
  if (o.shapes.empty()) return fallback;
  std::vector<ModelShape> out;
  for (const auto& s : o.shapes) out.push_back(parse_shape(s));
  return out;
}

std::vector<std::int64_t> read_integers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return read_integer_lines(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what(), e.line());
  }
}

std::vector<std::int64_t> read_diffs(const std::string& path, const std::string& kind) {
  auto values = read_integers(path);
  if (kind == "diffs") return values;
  if (kind != "timestamps") throw InputError("--input-kind must be 'timestamps' or 'diffs'");
  TimestampSeries ts{std::move(values)};
  return diff_and_round(ts);
}

std::string single_input(const Options& o) {
  if (o.inputs.size() != 1) throw InputError("exactly one --input is required");
  return o.inputs.front();
}

std::string shape_list(const std::vector<ModelShape>& v) {
  std::string s;
  for (const auto& x : v) {
    if (!s.empty()) s += ';';
    s += std::to_string(x.p) + "," + std::to_string(x.r);
  }
  return s;
}

std::string shape_key(const ModelShape& s) {
  return std::to_string(s.p) + "," + std::to_string(s.r);
}

std::string variant_name(MStepVariant v) {
  return v == MStepVariant::SelfConsistentMLE ? "mle" : "direct";
}

std::string kind_tag(ComponentKind k) { return k == ComponentKind::Exponential ? "exp" : "wbl"; }

int cmd_preprocess(const Options& o, std::ostream& out) {
  const auto diffs = read_diffs(single_input(o), o.input_kind);
  const auto spec = o.all_bins ? rounding_censor_spec(diffs) : censor_spec(o);
  write_censored_sample(out, build_sample(diffs, spec));
  return kOk;
}

int cmd_fit(const Options& o, std::ostream& out, std::ostream& err) {
  const auto path = single_input(o);
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  CensoredSample s;
  try {
    s = read_censored_sample(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what(), e.line());
  }
  const auto shape_v = shapes(o, {{1, 1}});
  if (shape_v.size() != 1) throw InputError("fit takes exactly one --shape");
  const auto shape = shape_v.front();
  const auto config = em_config(o);
  const auto fr = fit(s, shape, config);
  const auto model = canonical_order(fr.model);
  const auto n_total = s.total();
  const int d = dof(shape);

  out << "# censem fit report\n";
  out << "command=fit\n";
  out << "shape=" << shape_key(shape) << '\n';
  out << "label=" << shape.label() << '\n';
  out << "m_step=" << variant_name(config.m_step_variant) << '\n';
  out << "epsilon=" << format_number(config.epsilon) << '\n';
  out << "max_iter=" << config.max_iter << '\n';
  out << "N=" << n_total << '\n';
  out << "n=" << s.uncensored.size() << '\n';
  out << "censored=" << s.censored_count() << '\n';
  out << "dof=" << d << '\n';
  out << "loglik=" << format_number(fr.loglik()) << '\n';
  out << "avg_loglik=" << format_number(avg_loglik(fr.loglik(), n_total)) << '\n';
  out << "bic=" << format_number(bic(fr.loglik(), d, n_total)) << '\n';
  out << "iterations=" << fr.iterations << '\n';
  out << "converged=" << (fr.converged ? 1 : 0) << '\n';
  out << "degenerate=" << (fr.degenerate() ? 1 : 0) << '\n';
  std::string flagged;
  for (auto i : fr.degenerate_components) {
    flagged += (flagged.empty() ? "" : ",") + std::to_string(i);
  }
  out << "degenerate_components=" << flagged << '\n';
  if (fr.error) out << "error=" << *fr.error << '\n';
  out << "\n[components]\nindex kind weight alpha beta\n";
  for (std::size_t i = 0; i < model.size(); ++i) {
    out << i << ' ' << kind_tag(model.components[i].kind) << ' '
        << format_number(model.weights[i]) << ' '
        << format_number(model.components[i].alpha) << ' '
        << format_number(model.components[i].beta) << '\n';
  }
  out << "\n[trace]\niteration loglik\n";
  for (std::size_t k = 0; k < fr.loglik_trace.size(); ++k) {
    out << k << ' ' << format_number(fr.loglik_trace[k]) << '\n';
  }
  for (const auto& w : fr.warnings) err << "warning: " << w << '\n';
  if (fr.degenerate()) {
    err << "fit is degenerate" << (fr.error ? ": " + *fr.error : std::string()) << '\n';
    return kDegenerate;
  }
  return kOk;
}

int cmd_select(const Options& o, std::ostream& out, std::ostream& err) {
  const auto diffs = read_diffs(single_input(o), o.input_kind);
  SelectionConfig c;
  c.shapes = shapes(o, c.shapes);
  c.n_boot = o.boot;
  c.subsample_size = o.subsample;
  c.ensembles = o.ensembles;
  c.seed = o.seed;
  c.alpha_level = o.alpha_level;
  c.two_sided = o.two_sided;
  c.em = em_config(o);
  c.censor_spec = censor_spec(o);
  c.threads = o.threads;
  if (std::find(c.shapes.begin(), c.shapes.end(), c.baseline) == c.shapes.end()) {
    c.baseline = c.shapes.front();
  }
  try {
    c.validate();
  } catch (const DomainError& e) {
    throw InputError(e.what());
  }
  const auto r = run_selection(diffs, c);

  out << "# censem selection report\n";
  out << "command=select\n";
  out << "shapes=" << shape_list(c.shapes) << '\n';
  out << "baseline=" << shape_key(r.baseline) << '\n';
  out << "boot=" << c.n_boot << '\n';
  out << "subsample=" << c.subsample_size << '\n';
  out << "ensembles=" << c.ensembles << '\n';
  out << "seed=" << c.seed << '\n';
  out << "alpha_level=" << format_number(c.alpha_level) << '\n';
  out << "sided=" << (c.two_sided ? "two" : "one") << '\n';
  out << "m_step=" << variant_name(c.em.m_step_variant) << '\n';
  out << "\n[shapes]\nshape label samples skipped flagged mean_bic sd_bic tally\n";
  bool all_failed = false;
  for (const auto& st : r.shapes) {
    std::size_t count = 0;
    for (const auto& v : st.bic_samples) count += v.size();
    all_failed = all_failed || count == 0;
    out << shape_key(st.shape) << " \"" << st.shape.label() << "\" " << count << ' '
        << st.skipped << ' ' << st.flagged << ' ' << format_number(st.mean_bic) << ' '
        << format_number(st.sd_bic) << ' ' << format_number(st.tally) << '\n';
  }
  out << "\n[tests]\nensemble shape_a shape_b t dof p_value significant degenerate\n";
  for (const auto& t : r.tests) {
    out << t.ensemble << ' ' << shape_key(t.shape_a) << ' ' << shape_key(t.shape_b) << ' '
        << format_number(t.result.t) << ' ' << format_number(t.result.dof) << ' '
        << format_number(t.result.p_value) << ' ' << (t.result.significant ? 1 : 0) << ' '
        << (t.result.degenerate ? 1 : 0) << '\n';
  }
  out << "\n[winners]\nensemble shape\n";
  for (std::size_t e = 0; e < r.winners.size(); ++e) {
    out << e << ' ' << shape_key(r.winners[e]) << '\n';
  }
  if (all_failed) {
    err << "every replica fit failed for at least one shape\n";
    return kDegenerate;
  }
  return kOk;
}

int cmd_profile(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.inputs.empty()) throw InputError("profile needs at least one --input");
  if (o.bucket_minutes < 1) throw InputError("--bucket-minutes must be >= 1");
  BucketSpec spec;
  spec.session_start = parse_time_of_day(o.session_start);
  spec.session_end = parse_time_of_day(o.session_end);
  spec.width = o.bucket_minutes * kMsPerMinute;
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw InputError(e.what());
  }
  std::vector<TimestampSeries> days;
  for (const auto& path : o.inputs) {
    TimestampSeries ts{read_integers(path)};
    try {
      ts.validate();
    } catch (const InputError& e) {
      throw InputError(path + ": " + e.what());
    }
    days.push_back(std::move(ts));
  }
  const auto shape_v = shapes(o, {{1, 1}});
  if (shape_v.size() != 1) throw InputError("profile takes exactly one --shape");
  const auto config = em_config(o);
  const auto prof =
      profile_intraday(days, spec, shape_v.front(), config, censor_spec(o), o.min_obs);
  if (prof.buckets.empty()) throw InputError("no bucket has enough observations");

  const auto m = static_cast<std::size_t>(prof.shape.size());
  out << "# censem intraday profile\n";
  out << "command=profile\n";
  out << "shape=" << shape_key(prof.shape) << '\n';
  out << "label=" << prof.shape.label() << '\n';
  out << "days=" << days.size() << '\n';
  out << "session=" << o.session_start << '-' << o.session_end << '\n';
  out << "bucket_minutes=" << o.bucket_minutes << '\n';
  out << "min_obs=" << o.min_obs << '\n';
  out << "failed_fits=" << prof.failed_fits << '\n';
  std::string omitted;
  for (auto b : prof.omitted) omitted += (omitted.empty() ? "" : ",") + std::to_string(b);
  out << "omitted=" << omitted << '\n';
  out << "\n[buckets]\nstart bucket days samples";
  for (std::size_t i = 0; i < m; ++i) {
    out << " weight" << i << " alpha" << i << " beta" << i;
  }
  out << '\n';
  for (const auto& b : prof.buckets) {
    out << format_time_of_day(b.start_ms) << ' ' << b.bucket_id << ' ' << b.days << ' '
        << b.sample_count;
    for (std::size_t i = 0; i < m; ++i) {
      out << ' ' << format_number(b.mean_weights[i]) << ' '
          << format_number(b.mean_alphas[i]) << ' ' << format_number(b.mean_betas[i]);
    }
    out << '\n';
  }
  if (prof.failed_fits > 0) err << prof.failed_fits << " bucket fits failed\n";
  return kOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  if (o.model.empty()) throw InputError("simulate needs --model");
  const auto model = parse_model(o.model);
  const auto diffs = generate_synthetic(model, o.n, o.seed);
  out << "# censem simulate\n";
  out << "# model=" << o.model << '\n';
  out << "# n=" << o.n << '\n';
  out << "# seed=" << o.seed << '\n';
  write_integer_lines(out, diffs);
  return kOk;
}

void add_em_flags(CLI::App* sub, Options& o) {
  sub->add_option("--epsilon", o.epsilon, "log-likelihood change for convergence");
  sub->add_option("--max-iter", o.max_iter, "EM iteration cap");
  sub->add_option("--m-step", o.m_step, "M-step variant: mle or direct");
}

void add_censor_flags(CLI::App* sub, Options& o) {
  sub->add_option("--censor", o.censors, "censoring interval lo,hi (repeatable)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Censored EM for exponential/Weibull mixtures of inter-arrival times",
               "censem"};
  app.require_subcommand(1);

  auto* pre = app.add_subcommand("preprocess", "time stamps to a censored-sample file");
  pre->add_option("--input", o.inputs, "integer-per-line input")->required();
  pre->add_option("--input-kind", o.input_kind, "timestamps or diffs");
  pre->add_flag("--all-bins", o.all_bins, "censor every rounded value to its bin");
  add_censor_flags(pre, o);

  auto* fitc = app.add_subcommand("fit", "fit one mixture shape");
  fitc->add_option("--input", o.inputs, "censored-sample file")->required();
  fitc->add_option("--shape", o.shapes, "p,r");
  add_em_flags(fitc, o);

  auto* sel = app.add_subcommand("select", "bootstrap BIC model selection");
  sel->add_option("--input", o.inputs, "integer-per-line input")->required();
  sel->add_option("--input-kind", o.input_kind, "timestamps or diffs");
  sel->add_option("--shape", o.shapes, "p,r (repeatable)");
  sel->add_option("--boot", o.boot, "bootstrap replicas per ensemble");
  sel->add_option("--subsample", o.subsample, "subsample size");
  sel->add_option("--ensembles", o.ensembles, "number of ensembles (days)");
  sel->add_option("--seed", o.seed, "random seed");
  sel->add_option("--alpha-level", o.alpha_level, "Welch test level");
  sel->add_flag("--two-sided", o.two_sided, "two-sided Welch test");
  sel->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  add_em_flags(sel, o);
  add_censor_flags(sel, o);

  auto* prof = app.add_subcommand("profile", "intraday parameter profile");
  prof->add_option("--input", o.inputs, "one time-stamp file per day (repeatable)")
      ->required();
  prof->add_option("--shape", o.shapes, "p,r");
  prof->add_option("--bucket-minutes", o.bucket_minutes, "bucket width in minutes");
  prof->add_option("--session-start", o.session_start, "HH:MM");
  prof->add_option("--session-end", o.session_end, "HH:MM");
  prof->add_option("--min-obs", o.min_obs, "minimum differences per bucket fit");
  add_em_flags(prof, o);
  add_censor_flags(prof, o);

  auto* sim = app.add_subcommand("simulate", "rounded mixture draws");
  sim->add_option("--model", o.model, "w:exp:alpha,w:wbl:alpha:beta,...")->required();
  sim->add_option("--n", o.n, "number of draws")->required();
  sim->add_option("--seed", o.seed, "random seed");

  for (auto* sub : {pre, fitc, sel, prof, sim}) {
    sub->add_option("--output", o.output, "output file (default stdout)");
  }

  try {
    o.seed = default_seed();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  std::ostringstream report;
  int code = kOk;
  try {
    if (pre->parsed()) {
      code = cmd_preprocess(o, report);
    } else if (fitc->parsed()) {
      code = cmd_fit(o, report, err);
    } else if (sel->parsed()) {
      code = cmd_select(o, report, err);
    } else if (prof->parsed()) {
      code = cmd_profile(o, report, err);
    } else {
      code = cmd_simulate(o, report);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kDegenerate;
  }

  if (o.output.empty()) {
    out << report.str();
  } else {
    std::ofstream file(o.output, std::ios::binary);
    if (!file) {
      err << "error: cannot write '" << o.output << "'\n";
      return kInputError;
    }
    file << report.str();
  }
  return code;
}

}  // namespace censem::cli
