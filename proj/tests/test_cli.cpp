#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "censem/errors.hpp"
#include "censem/model_select.hpp"
#include "cli.hpp"

using namespace censem;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("censem_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& contents = {}) const {
    const auto p = path_ / name;
    if (!contents.empty()) std::ofstream(p, std::ios::binary) << contents;
    return p.string();
  }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::map<std::string, std::string> header(const std::string& report) {
  std::map<std::string, std::string> kv;
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line) && !line.empty()) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::vector<std::string> section(const std::string& report, const std::string& name) {
  std::istringstream in(report);
  std::string line;
  std::vector<std::string> rows;
  bool inside = false;
  while (std::getline(in, line)) {
    if (line == "[" + name + "]") {
      inside = true;
      std::getline(in, line);  // column names
      continue;
    }
    if (!inside) continue;
    if (line.empty() || line.front() == '[') break;
    rows.push_back(line);
  }
  return rows;
}

std::vector<std::string> words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> w;
  for (std::string s; in >> s;) w.push_back(s);
  return w;
}

const std::string kModel = "0.2:exp:17,0.8:wbl:2500:0.57";

}  // namespace

TEST(Preprocess, WorkedExample) {
  TempDir dir;
  const auto in = dir.file("ts.txt", "0\n0\n3\n3\n10\n");
  const auto r = run({"preprocess", "--input", in});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = [&] {
    std::istringstream is(r.out);
    return cli::read_censored_sample(is);
  }();
  EXPECT_EQ(s.uncensored, (std::vector<double>{3, 7}));
  ASSERT_EQ(s.intervals.size(), 1u);
  EXPECT_EQ(s.intervals[0].count, 2u);
  EXPECT_EQ(s.intervals[0].lo, 0.0);
  EXPECT_EQ(s.intervals[0].hi, 0.5);
}

TEST(Preprocess, AllBins) {
  TempDir dir;
  const auto in = dir.file("d.txt", "0\n1\n1\n4\n");
  const auto r = run({"preprocess", "--input", in, "--input-kind", "diffs", "--all-bins"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream is(r.out);
  const auto s = cli::read_censored_sample(is);
  EXPECT_TRUE(s.uncensored.empty());
  EXPECT_EQ(s.total(), 4u);
  EXPECT_EQ(s.intervals.size(), 3u);
}

TEST(Preprocess, BadInputExitsTwo) {
  TempDir dir;
  EXPECT_EQ(run({"preprocess", "--input", dir.file("empty.txt", "# nothing\n")}).code, 2);
  const auto bad = run({"preprocess", "--input", dir.file("bad.txt", "1\n2\nabc\n")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find('3'), std::string::npos) << bad.err;
  EXPECT_EQ(run({"preprocess", "--input", dir.file("dec.txt", "5\n3\n")}).code, 2);
  EXPECT_EQ(run({"preprocess", "--input", dir.file("missing.txt")}).code, 2);
  EXPECT_EQ(run({"preprocess"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CensoredSampleFile, RoundTripsExactly) {
  const CensoredSample s{{0.6, 3.0, 1e300, 7.0 / 3.0},
                         {{0.0, 0.5, 4}, {10.5, 20.0, 2}, {1e301, INFINITY, 1}}};
  std::ostringstream out;
  cli::write_censored_sample(out, s);
  std::istringstream in(out.str());
  EXPECT_EQ(cli::read_censored_sample(in), s);
  std::istringstream broken("n=2\nL=0\n1\n");
  EXPECT_THROW(cli::read_censored_sample(broken), InputError);
}

TEST(Parsers, ShapesModelsIntervals) {
  EXPECT_EQ(cli::parse_shape("2,1"), (ModelShape{2, 1}));
  EXPECT_THROW(cli::parse_shape("2"), InputError);
  EXPECT_THROW(cli::parse_shape("0,0"), InputError);
  const auto m = cli::parse_model(kModel);
  EXPECT_EQ(m.weights, (std::vector<double>{0.2, 0.8}));
  EXPECT_EQ(m.components[1].beta, 0.57);
  EXPECT_THROW(cli::parse_model("0.5:exp:1"), InputError);
  EXPECT_THROW(cli::parse_model("1:gam:1"), InputError);
  EXPECT_TRUE(std::isinf(cli::parse_censor("3,inf").hi));
  EXPECT_THROW(cli::parse_censor("3,1"), InputError);
  EXPECT_EQ(cli::format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(cli::format_number(-INFINITY), "-inf");
}

TEST(Fit, ReportFieldsAndBic) {
  TempDir dir;
  const auto diffs = dir.file("d.txt");
  ASSERT_EQ(run({"simulate", "--model", kModel, "--n", "1500", "--seed", "4", "--output", diffs}).code, 0);
  const auto sample = dir.file("s.txt");
  ASSERT_EQ(run({"preprocess", "--input", diffs, "--input-kind", "diffs", "--output", sample}).code, 0);
  const auto r = run({"fit", "--input", sample, "--shape", "1,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto kv = header(r.out);
  for (const char* key : {"shape", "N", "n", "censored", "dof", "loglik", "avg_loglik", "bic",
                          "iterations", "converged", "degenerate"}) {
    EXPECT_TRUE(kv.count(key)) << key;
  }
  const double N = std::stod(kv["N"]), ll = std::stod(kv["loglik"]);
  EXPECT_EQ(N, 1500);
  EXPECT_EQ(kv["dof"], "4");
  EXPECT_NEAR(std::stod(kv["bic"]), -2 * ll + 4 * std::log(N), 1e-9 * std::abs(ll));
  EXPECT_NEAR(std::stod(kv["avg_loglik"]), ll / N, 1e-12);
  EXPECT_EQ(kv["converged"], "1");
  const auto comps = section(r.out, "components");
  ASSERT_EQ(comps.size(), 2u);
  EXPECT_EQ(words(comps[0])[1], "exp");
  EXPECT_EQ(words(comps[1])[1], "wbl");
  const auto trace = section(r.out, "trace");
  EXPECT_EQ(trace.size(), std::stoul(kv["iterations"]) + 1);
  EXPECT_EQ(std::stod(words(trace.back())[1]), ll);
}

TEST(Fit, SingleExponentialIsSampleMean) {
  TempDir dir;
  std::string body;
  double sum = 0;
  for (int k = 1; k <= 40; ++k) {
    const double x = 0.75 * k;
    body += cli::format_number(x) + "\n";
    sum += x;
  }
  const auto in = dir.file("s.txt", "n=40\nL=0\n" + body);
  const auto r = run({"fit", "--input", in, "--shape", "1,0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto c = words(section(r.out, "components")[0]);
  EXPECT_NEAR(std::stod(c[3]), sum / 40, 1e-12 * sum);
  EXPECT_EQ(std::stod(c[2]), 1.0);
}

TEST(Fit, DegenerateExitsThree) {
  TempDir dir;
  std::string body = "n=12\nL=1\ninterval 0 0.5 0\n";
  for (int k = 0; k < 12; ++k) body += "1\n";
  const auto r = run({"fit", "--input", dir.file("s.txt", body), "--shape", "1,1"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(header(r.out)["degenerate"], "1");
  EXPECT_TRUE(header(r.out).count("error"));
}

TEST(Fit, ByteIdenticalReruns) {
  TempDir dir;
  const auto diffs = dir.file("d.txt");
  run({"simulate", "--model", kModel, "--n", "800", "--seed", "9", "--output", diffs});
  const auto sample = dir.file("s.txt");
  run({"preprocess", "--input", diffs, "--input-kind", "diffs", "--output", sample});
  const auto a = dir.file("a.txt"), b = dir.file("b.txt");
  ASSERT_EQ(run({"fit", "--input", sample, "--shape", "2,1", "--output", a}).code, 0);
  ASSERT_EQ(run({"fit", "--input", sample, "--shape", "2,1", "--output", b}).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
  const auto direct = run({"fit", "--input", sample, "--m-step", "direct"});
  EXPECT_EQ(direct.code, 0) << direct.err;
  EXPECT_EQ(header(direct.out)["m_step"], "direct");
  EXPECT_EQ(run({"fit", "--input", sample, "--m-step", "newton"}).code, 2);
}

TEST(Simulate, EmptyAndInvalid) {
  const auto r = run({"simulate", "--model", kModel, "--n", "0"});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  EXPECT_TRUE(read_integer_lines(in).empty());
  EXPECT_EQ(run({"simulate", "--model", "0.3:exp:1,0.3:exp:2", "--n", "5"}).code, 2);
  EXPECT_EQ(run({"simulate", "--model", "1:wbl:-1:1", "--n", "5"}).code, 2);
}

TEST(Simulate, SeedControlsStream) {
  const auto a = run({"simulate", "--model", kModel, "--n", "50", "--seed", "1"});
  const auto b = run({"simulate", "--model", kModel, "--n", "50", "--seed", "1"});
  const auto c = run({"simulate", "--model", kModel, "--n", "50", "--seed", "2"});
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  ::setenv("CENSEM_SEED", "1", 1);
  const auto d = run({"simulate", "--model", kModel, "--n", "50"});
  ::unsetenv("CENSEM_SEED");
  EXPECT_EQ(a.out, d.out);
}

TEST(Select, DefaultShapesAndDeterminism) {
  TempDir dir;
  const auto diffs = dir.file("d.txt");
  run({"simulate", "--model", kModel, "--n", "3000", "--seed", "11", "--output", diffs});
  const std::vector<std::string> args{"select", "--input", diffs, "--input-kind", "diffs",
                                      "--boot", "10", "--ensembles", "2"};
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto shapes = section(r.out, "shapes");
  ASSERT_EQ(shapes.size(), 4u);
  double total = 0;
  for (const auto& row : shapes) total += std::stod(words(row).back());
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(section(r.out, "tests").size(), 2u * 3u);
  EXPECT_EQ(section(r.out, "winners").size(), 2u);
  EXPECT_EQ(run(args).out, r.out);
}

TEST(Select, SingleShapeWinsEverything) {
  TempDir dir;
  const auto diffs = dir.file("d.txt");
  run({"simulate", "--model", kModel, "--n", "3000", "--seed", "12", "--output", diffs});
  const auto r = run({"select", "--input", diffs, "--input-kind", "diffs", "--shape", "1,1",
                      "--boot", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = section(r.out, "shapes");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(std::stod(words(rows[0]).back()), 1.0);
  EXPECT_EQ(run({"select", "--input", diffs, "--input-kind", "diffs", "--subsample", "5000"}).code,
            2);
}

TEST(Profile, FullSessionRows) {
  TempDir dir;
  const BucketSpec spec;
  std::string stamps;
  // a steady stream of about 200 trades per 10 minutes
  const MixtureModel m{{0.2, 0.8},
                       {ComponentSpec::exponential(17), ComponentSpec::weibull(2500, 0.57)}};
  const auto d = generate_synthetic(m, 20000, 5);
  std::int64_t t = spec.session_start;
  for (auto step : d) {
    if (t >= spec.session_end) break;
    stamps += std::to_string(t) + "\n";
    t += step;
  }
  ASSERT_GE(t, spec.session_end);
  const auto in = dir.file("day.txt", stamps);
  const auto r = run({"profile", "--input", in, "--shape", "1,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = section(r.out, "buckets");
  ASSERT_EQ(rows.size(), 51u);
  EXPECT_EQ(words(rows.front())[0], "09:00");
  EXPECT_EQ(words(rows.back())[0], "17:20");
  EXPECT_EQ(words(rows.front()).size(), 4u + 3u * 2u);

  const auto sparse = dir.file("sparse.txt", std::to_string(spec.session_start) + "\n" +
                                                 std::to_string(spec.session_start + 10) + "\n");
  EXPECT_EQ(run({"profile", "--input", sparse}).code, 2);
  EXPECT_EQ(run({"profile", "--input", in, "--bucket-minutes", "7"}).code, 2);
}

#ifdef CENSEM_BIN
TEST(Binary, ExitCodes) {
  TempDir dir;
  const auto empty = dir.file("empty.txt", "#\n");
  const auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  const std::string bin = CENSEM_BIN;
  EXPECT_EQ(status(bin + " --help"), 0);
  EXPECT_EQ(status(bin + " preprocess --input " + empty), 2);
  EXPECT_EQ(status(bin + " simulate --model 1:exp:2 --n 3"), 0);
}
#endif
