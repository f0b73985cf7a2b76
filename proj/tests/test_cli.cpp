#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "krein/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;  // stdout and stderr
};

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("krein_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Run kreinctl(const std::string& args, const fs::path& dir) {
  const auto log = dir / "console.txt";
  const std::string cmd = std::string("\"") + KREINCTL_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST(Cli, VerifyRandomInstance) {
  const auto dir = fresh_dir("verify");
  const auto r = kreinctl("verify --random 8 2 42 --fn z^3 --out " + quoted(dir), dir);
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = load(dir / "verify.json");
  EXPECT_EQ(j["schema"], "krein.verify");
  EXPECT_LE(j["rel_error"].get<double>(), 1e-7);
  EXPECT_NE(r.out.find("rel_error"), std::string::npos);
}

TEST(Cli, SsfOfZeroGeneratorIsOneZeroArc) {
  const auto dir = fresh_dir("ssf_zero");
  krein::io::write_matrix(dir / "U.json", krein::random_haar_unitary(4, 1).matrix());
  krein::io::write_matrix(dir / "A.json", krein::ComplexMatrix::Zero(4, 4));
  const auto r = kreinctl("ssf --u " + quoted(dir / "U.json") + " --a " + quoted(dir / "A.json") + " --out " +
                              quoted(dir),
                          dir);
  ASSERT_EQ(r.code, 0) << r.out;
  const auto csv = slurp(dir / "ssf.csv");
  EXPECT_EQ(csv.rfind("# schema: krein.ssf/1\n", 0), 0u);
  EXPECT_NE(csv.find("theta_start,theta_end,xi_value\n0,6.2831853071795862,0\n"), std::string::npos) << csv;
  EXPECT_EQ(load(dir / "ssf_report.json")["breakpoint_count"], 0);
}

TEST(Cli, GenThenDoiDerivTwist) {
  const auto dir = fresh_dir("pipeline");
  auto r = kreinctl("gen --n 5 --rank 2 --seed 3 --degree 4 --out " + quoted(dir), dir);
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* f : {"U.json", "A.json", "V.json", "f.json"}) EXPECT_TRUE(fs::exists(dir / f)) << f;

  r = kreinctl("doi --fn " + quoted(dir / "f.json") + " --u " + quoted(dir / "U.json") + " --v " +
                   quoted(dir / "V.json") + " --t " + quoted(dir / "A.json") + " --out " + quoted(dir),
               dir);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(krein::io::read_matrix(dir / "doi.json").rows(), 5);
  EXPECT_GE(load(dir / "doi_report.json")["trace_norm"].get<double>(), 0.0);

  r = kreinctl("deriv --u " + quoted(dir / "U.json") + " --a " + quoted(dir / "A.json") +
                   " --fn z^2 --s 0.3 --steps 1e-2,1e-3 --format json --out " + quoted(dir),
               dir);
  ASSERT_EQ(r.code, 0) << r.out;
  const auto d = load(dir / "deriv.json");
  EXPECT_EQ(d["rows"].size(), 2u);
  EXPECT_NEAR(d["fitted_order"].get<double>(), 2.0, 0.2);

  r = kreinctl("twist --u " + quoted(dir / "U.json") + " --v " + quoted(dir / "V.json") + " --grid 16 --out " +
                   quoted(dir),
               dir);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(slurp(dir / "twist.csv").find("theta_k,re,im"), std::string::npos);
}

TEST(Cli, CorruptedUnitaryIsRejected) {
  const auto dir = fresh_dir("corrupt");
  auto u = krein::random_haar_unitary(4, 2).matrix();
  u(1, 2) += 0.05;
  krein::io::write_matrix(dir / "U.json", u);
  krein::io::write_matrix(dir / "A.json", krein::random_hermitian(4, 1, 1.0, 2).matrix());
  const auto r = kreinctl("verify --u " + quoted(dir / "U.json") + " --a " + quoted(dir / "A.json") + " --out " +
                              quoted(dir),
                          dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("unitarity violated"), std::string::npos) << r.out;
  EXPECT_EQ(load(dir / "error.json")["kind"], "validation");
}

TEST(Cli, UnknownFunctionIsAValidationError) {
  const auto dir = fresh_dir("badfn");
  const auto r = kreinctl("verify --random 3 1 1 --fn tan --out " + quoted(dir), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("unknown function spec"), std::string::npos);
}

TEST(Cli, TrackingFailureExitsWithNumericalCode) {
  const auto dir = fresh_dir("tracking");
  const auto r = kreinctl("ssf --random 6 3 1 --norm 3 --steps 1 --max-depth 0 --out " + quoted(dir), dir);
  EXPECT_EQ(r.code, 3) << r.out;
  const auto j = load(dir / "error.json");
  EXPECT_EQ(j["s_lo"], 0.0);
  EXPECT_EQ(j["s_hi"], 1.0);
}

TEST(Cli, TightenedToleranceFailsTheSuite) {
  const auto dir = fresh_dir("suite");
  const auto r = kreinctl("suite --only dkbs --tol dkbs=1e-16 --out " + quoted(dir), dir);
  EXPECT_EQ(r.code, 3) << r.out;
  EXPECT_NE(r.out.find("[FAIL] dkbs"), std::string::npos) << r.out;
  const auto ok = kreinctl("suite --only dkbs,gauge --out " + quoted(dir), dir);
  EXPECT_EQ(ok.code, 0) << ok.out;
}

TEST(Cli, OutputsAreDeterministic) {
  const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
  for (const auto& dir : {a, b}) {
    ASSERT_EQ(kreinctl("ssf --random 7 2 5 --out " + quoted(dir), dir).code, 0);
    ASSERT_EQ(kreinctl("gen --n 4 --seed 9 --out " + quoted(dir), dir).code, 0);
  }
  for (const char* f : {"ssf.csv", "ssf_report.json", "U.json", "A.json", "V.json", "f.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Cli, SchurnormLowerBoundsGrow) {
  const auto dir = fresh_dir("schurnorm");
  const auto r = kreinctl("schurnorm --fn abs-theta --grids 16,64,256 --format json --out " + quoted(dir), dir);
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rows = load(dir / "schurnorm.json")["rows"];
  ASSERT_EQ(rows.size(), 3u);
  // Columns: n, lower_bound, raw_lower_bound, upper_bound, ...
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_GT(rows[k][1].get<double>(), rows[k - 1][1].get<double>());
  for (const auto& row : rows) EXPECT_LE(row[1].get<double>(), row[3].get<double>() * (1 + 1e-9));
}

TEST(Cli, UsageErrors) {
  const auto dir = fresh_dir("usage");
  EXPECT_EQ(kreinctl("", dir).code, 2);
  EXPECT_EQ(kreinctl("nosuchcommand", dir).code, 2);
  EXPECT_EQ(kreinctl("verify --random 3 1", dir).code, 2);
  EXPECT_EQ(kreinctl("suite --only nosuchkey --out " + quoted(dir), dir).code, 2);
  EXPECT_EQ(kreinctl("--help", dir).code, 0);
}
