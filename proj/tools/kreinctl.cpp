// kreinctl: instance generation, the computations of the krein library, and
// machine-readable reports.
//
// Exit status: 0 on success, 2 on invalid input, 3 on numerical failure. On
// failure a JSON error report goes to stderr and to <out>/error.json.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "krein/acceptance.hpp"
#include "krein/io.hpp"
#include "krein/krein.hpp"

namespace fs = std::filesystem;
using namespace krein;

namespace {

constexpr std::uint64_t default_seed = 20240601;

struct InstanceArgs {
  std::string u_path, a_path, v_path;
  std::vector<long long> random;  // n rank seed
  double norm = 1.0;

  void attach(CLI::App* sub, bool want_v = false) {
    sub->add_option("--u", u_path, "unitary U (JSON matrix)")->check(CLI::ExistingFile);
    sub->add_option("--a", a_path, "Hermitian generator A (JSON matrix); V = e^{iA} U")->check(CLI::ExistingFile);
    if (want_v) sub->add_option("--v", v_path, "unitary V (JSON matrix), instead of --a")->check(CLI::ExistingFile);
    sub->add_option("--random", random, "random instance: n rank seed")->expected(3);
    sub->add_option("--norm", norm, "norm bound of A for --random")->check(CLI::PositiveNumber);
  }

  bool is_random() const { return !random.empty(); }

  UnitaryMatrix u() const {
    if (is_random()) {
      if (random[0] < 1) throw validation_error("--random: n must be >= 1");
      return random_haar_unitary(random[0], seed());
    }
    if (u_path.empty()) throw validation_error("no instance given: use --u/--a or --random n rank seed");
    return UnitaryMatrix(io::read_matrix(u_path));
  }

  std::optional<HermitianMatrix> a() const {
    if (is_random()) {
      return random_hermitian(random[0], random[1], norm, seed());
    }
    if (a_path.empty()) return std::nullopt;
    return HermitianMatrix(io::read_matrix(a_path));
  }

  HermitianMatrix require_a() const {
    auto m = a();
    if (!m) throw validation_error("this command needs the generator A (--a or --random)");
    return *m;
  }

  std::uint64_t seed() const {
    if (random[2] < 0) throw validation_error("--random: seed must be non-negative");
    return static_cast<std::uint64_t>(random[2]);
  }
};

struct Common {
  std::string out = ".";
  std::string format = "csv";

  void attach(CLI::App* sub, bool tabular) {
    sub->add_option("--out", out, "output directory");
    if (tabular) sub->add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json"}));
  }

  fs::path path(const std::string& stem) const { return fs::path(out) / stem; }

  void write_table(const std::string& stem, const io::Table& t) const {
    const bool csv = format == "csv";
    io::write_text(path(stem + (csv ? ".csv" : ".json")), csv ? io::to_csv(t) : io::to_json(t));
  }
};

std::string render_complex(cplx z) {
  return "{\"re\": " + io::format_number(z.real()) + ", \"im\": " + io::format_number(z.imag()) + "}";
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw validation_error(std::string(what) + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw validation_error(std::string(what) + ": empty list");
  return out;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  Common common;
  Index n = 8, rank = 2;
  long long seed = default_seed;
  double norm = 1.0;
  int degree = 6;
};

int run_gen(const GenArgs& g) {
  if (g.seed < 0) throw validation_error("--seed must be non-negative");
  const auto seed = static_cast<std::uint64_t>(g.seed);
  const auto u = random_haar_unitary(g.n, seed);
  const auto a = random_hermitian(g.n, g.rank, g.norm, seed);
  io::write_matrix(g.common.path("U.json"), u.matrix());
  io::write_matrix(g.common.path("A.json"), a.matrix());
  io::write_matrix(g.common.path("V.json"), path_point(u, a, 1.0).matrix());
  io::write_text(g.common.path("f.json"), io::trig_poly_to_json(random_trig_poly(g.degree, seed)));
  std::cout << "wrote U.json A.json V.json f.json to " << g.common.out << "\n";
  return 0;
}

struct DoiArgs {
  Common common;
  std::string fn = "z^2";
  std::string u_path, v_path, h_path, k_path, t_path;
};

int run_doi(const DoiArgs& g) {
  if (g.t_path.empty()) throw validation_error("doi: --t is required");
  const ComplexMatrix t = io::read_matrix(g.t_path);
  ComplexMatrix result;
  cplx trace = 0.0;
  if (!g.h_path.empty()) {
    const auto f = io::parse_line_function(g.fn);
    const auto d1 = decompose_hermitian(HermitianMatrix(io::read_matrix(g.h_path)));
    const auto d2 = g.k_path.empty() ? d1 : decompose_hermitian(HermitianMatrix(io::read_matrix(g.k_path)));
    result = doi_compute(divided_difference_kernel(f, d1.points(), d2.points()), d1, t, d2);
    trace = result.trace();
  } else {
    if (g.u_path.empty()) throw validation_error("doi: give --u (unitary) or --hl (Hermitian)");
    const auto f = io::parse_circle_function(g.fn);
    const auto d1 = decompose_unitary(UnitaryMatrix(io::read_matrix(g.u_path)));
    const auto d2 = g.v_path.empty() ? d1 : decompose_unitary(UnitaryMatrix(io::read_matrix(g.v_path)));
    const auto phi = divided_difference_kernel(f, d1.points(), d2.points());
    result = doi_compute(phi, d1, t, d2);
    trace = g.v_path.empty() ? doi_trace(phi, d1, t) : result.trace();
  }
  io::write_matrix(g.common.path("doi.json"), result);
  io::Report r("krein.doi");
  r.add_string("fn", g.fn).add_raw("trace", render_complex(trace)).add("trace_norm", trace_norm(result));
  r.add("operator_norm", operator_norm(result));
  io::write_text(g.common.path("doi_report.json"), r.str());
  std::cout << r.str();
  return 0;
}

struct DerivArgs {
  Common common;
  InstanceArgs inst;
  std::string fn = "z^3";
  double s = 0.0;
  std::string steps = "1e-2,1e-3,1e-4,1e-5";
};

int run_deriv(const DerivArgs& g) {
  const auto f = io::parse_circle_function(g.fn);
  const auto rep = fd_probe(f, g.inst.u(), g.inst.require_a(), g.s, parse_list(g.steps, "--steps"));
  io::Table t{"krein.deriv", {"step", "error"}, {}, {}};
  for (const auto& e : rep.fd_errors) t.rows.push_back({e.step, e.error});
  t.meta.emplace_back("fn", io::quote(g.fn));
  t.meta.emplace_back("s", io::format_number(g.s));
  t.meta.emplace_back("qs_norm", io::format_number(rep.qs.norm()));
  t.meta.emplace_back("fitted_order", std::isnan(rep.fitted_order) ? "null" : io::format_number(rep.fitted_order));
  t.meta.emplace_back("regression_residual", io::format_number(rep.regression_residual));
  t.meta.emplace_back("cancellation_flag", rep.cancellation_flag ? "true" : "false");
  g.common.write_table("deriv", t);
  std::cout << "fitted_order " << (std::isnan(rep.fitted_order) ? "n/a" : io::format_number(rep.fitted_order)) << "\n";
  return 0;
}

struct SsfArgs {
  Common common;
  InstanceArgs inst;
  TrackingPolicy policy;
};

int run_ssf(const SsfArgs& g) {
  const auto u = g.inst.u();
  const auto xi = build_ssf(track_eigenphases(u, g.inst.require_a(), g.policy));
  io::Table t{"krein.ssf", {"theta_start", "theta_end", "xi_value"}, {}, {}};
  for (const auto& arc : xi.arcs()) t.rows.push_back({arc.start, arc.end, arc.value});
  g.common.write_table("ssf", t);
  io::Report r("krein.ssf_report");
  r.add("mean_check", xi.integral()).add_int("breakpoint_count", static_cast<long long>(xi.breakpoints.size()));
  r.add("normalization_shift", xi.normalization_shift);
  r.add_string("sign_convention", "trace(f(U) - f(V)) = int_0^{2pi} g'(theta) xi(theta) dtheta, g(theta) = f(e^{i theta})");
  io::write_text(g.common.path("ssf_report.json"), r.str());
  return 0;
}

struct VerifyArgs {
  Common common;
  InstanceArgs inst;
  std::string fn = "z^3";
  TrackingPolicy policy;
};

int run_verify(const VerifyArgs& g) {
  const auto f = io::parse_circle_function(g.fn);
  const auto rep = verify_trace_formula(f, g.inst.u(), g.inst.require_a(), g.policy);
  io::Report r("krein.verify");
  r.add_string("fn", g.fn);
  r.add("lhs_re", rep.lhs.real()).add("lhs_im", rep.lhs.imag());
  r.add("rhs_re", rep.rhs.real()).add("rhs_im", rep.rhs.imag());
  r.add("abs_error", rep.abs_error).add("rel_error", rep.rel_error);
  io::write_text(g.common.path("verify.json"), r.str());
  std::cout << r.str();
  return 0;
}

struct SchurArgs {
  Common common;
  std::string fn = "abs-theta";
  std::string grids = "16,64,256";
  double tol = 1e-6;
  long long seed = 1;
  int restarts = 1;
  int iterations = 100;
  Index upper_max = 20;
};

int run_schurnorm(const SchurArgs& g) {
  const auto f = io::parse_circle_function(g.fn);
  std::vector<Index> sizes;
  for (double v : parse_list(g.grids, "--grids")) {
    if (v != std::floor(v) || v < 2) throw validation_error("--grids: sizes must be integers >= 2");
    sizes.push_back(static_cast<Index>(v));
  }
  if (g.seed < 0) throw validation_error("--seed must be non-negative");
  SchurNormOptions opt;
  opt.tol = g.tol;
  opt.seed = static_cast<std::uint64_t>(g.seed);
  opt.restarts = g.restarts;
  opt.ascent_iterations = g.iterations;
  const auto lower = ol_lower_bound(f, sizes, g.restarts, g.iterations, opt.seed);
  io::Table t{"krein.schurnorm", {"n", "lower_bound", "raw_lower_bound", "upper_bound", "iterations", "residual"}, {}, {}};
  for (const auto& b : lower) {
    const auto kernel = divided_difference_kernel(f, half_step_grid(b.n));
    double upper = 0.0, residual = 0.0;
    int iterations = 0;
    if (b.n <= g.upper_max) {
      const auto res = schur_norm(kernel, opt);
      upper = res.value;
      residual = res.certificate.reconstruction_residual;
      iterations = res.iterations;
    } else {
      // Beyond desk scale only the trivial factorization is certified.
      const auto triv = krein::detail::trivial_factorization(kernel.values);
      upper = triv.norm_bound();
      residual = (kernel.values - triv.product()).cwiseAbs().maxCoeff();
    }
    t.rows.push_back({static_cast<double>(b.n), b.bound, b.raw, upper, static_cast<double>(iterations), residual});
  }
  t.meta.emplace_back("fn", io::quote(g.fn));
  t.meta.emplace_back("upper_max", std::to_string(g.upper_max));
  g.common.write_table("schurnorm", t);
  return 0;
}

struct TwistArgs {
  Common common;
  InstanceArgs inst;
  std::string fn = "random:6:1";
  int grid = 256;
};

int run_twist(const TwistArgs& g) {
  const auto f = io::parse_circle_function(g.fn);
  const auto u = g.inst.u();
  const auto a = g.inst.a();
  std::optional<UnitaryMatrix> v;
  if (!g.inst.v_path.empty()) {
    if (a) throw validation_error("twist: give either --v or the generator, not both");
    v = UnitaryMatrix(io::read_matrix(g.inst.v_path));
  } else if (a) {
    v = path_point(u, *a, 1.0);
  } else {
    throw validation_error("twist: give --v, --a or --random");
  }
  const auto scan = twist_scan(f, u, *v, g.grid);
  io::Table t{"krein.twist", {"theta_k", "re", "im"}, {}, {}};
  for (const auto& sample : scan.samples) t.rows.push_back({sample.theta, sample.value.real(), sample.value.imag()});
  t.meta.emplace_back("fn", io::quote(g.fn));
  t.meta.emplace_back("max_jump", io::format_number(scan.max_jump));
  if (a) {
    const auto rotated = twist_scan(f, build_ssf(track_eigenphases(u, *a)), g.grid);
    double gap = 0.0;
    for (std::size_t k = 0; k < scan.samples.size(); ++k) {
      gap = std::max(gap, std::abs(scan.samples[k].value - rotated.samples[k].value));
    }
    t.meta.emplace_back("rotated_route_gap", io::format_number(gap));
  }
  g.common.write_table("twist", t);
  return 0;
}

struct SuiteArgs {
  Common common;
  InstanceArgs inst;
  std::string fn = "z^3";
  std::vector<std::string> only;
  std::vector<std::string> tol;  // key=value
};

int run_suite(const SuiteArgs& g) {
  std::map<std::string, double> overrides;
  for (const auto& item : g.tol) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw validation_error("--tol expects key=value, got '" + item + "'");
    overrides[item.substr(0, eq)] = parse_list(item.substr(eq + 1), "--tol").at(0);
  }
  // A supplied instance is validated before anything runs.
  std::optional<TraceReport> user;
  if (g.inst.is_random() || !g.inst.u_path.empty()) {
    user = verify_trace_formula(io::parse_circle_function(g.fn), g.inst.u(), g.inst.require_a());
  }
  const auto results = acceptance::run(g.only, overrides);
  bool all = true;
  std::ostringstream list;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    std::cout << acceptance::summary_line(r) << "\n";
    all = all && r.passed;
    io::Report item("krein.criterion");
    item.add_string("key", r.key).add_string("title", r.title).add_bool("passed", r.passed);
    item.add("measured", r.measured).add("tolerance", r.tolerance);
    item.add_string("sense", r.sense == acceptance::Sense::at_most ? "at_most" : "at_least");
    item.add_int("instances", r.instances).add_bool("side_conditions", r.side_conditions);
    item.add_string("detail", r.detail).add_string("error", r.error);
    list << (k ? ",\n" : "") << item.str();
  }
  io::Report summary("krein.suite");
  summary.add_bool("passed", all).add_int("criteria", static_cast<long long>(results.size()));
  if (user) {
    summary.add("user_instance_rel_error", user->rel_error);
    all = all && user->rel_error <= 1e-7;
  }
  summary.add_raw("results", "[\n" + list.str() + "]");
  io::write_text(g.common.path("suite.json"), summary.str());
  return all ? 0 : 3;
}

void write_error(const std::string& out, const io::Report& r) {
  std::cerr << r.str();
  try {
    io::write_text(fs::path(out) / "error.json", r.str());
  } catch (const std::exception&) {
    // stderr already carries the report
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral shift, double operator integrals and Krein's trace formula for unitary matrices"};
  app.set_config("--config", "", "key = value config file (INI syntax, [subcommand] sections)");
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "write a seeded random instance U, A, V = e^{iA}U and a TrigPoly f");
  gen.common.attach(gen_cmd, false);
  gen_cmd->add_option("--n", gen.n, "dimension")->check(CLI::Range(1, 4096));
  gen_cmd->add_option("--rank", gen.rank, "rank of A")->check(CLI::Range(1, 4096));
  gen_cmd->add_option("--seed", gen.seed, "seed");
  gen_cmd->add_option("--norm", gen.norm, "norm bound of A")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--degree", gen.degree, "degree of f")->check(CLI::Range(0, 1024));

  DoiArgs doi;
  auto* doi_cmd = app.add_subcommand("doi", "double operator integral of the divided-difference kernel against T");
  doi.common.attach(doi_cmd, false);
  doi_cmd->add_option("--fn", doi.fn, "function (z^n, abs-theta, cos, sawtooth, random:d:s, file; x^n with --hl)");
  doi_cmd->add_option("--u", doi.u_path, "left unitary")->check(CLI::ExistingFile);
  doi_cmd->add_option("--v", doi.v_path, "right unitary (default: --u)")->check(CLI::ExistingFile);
  doi_cmd->add_option("--hl", doi.h_path, "left Hermitian")->check(CLI::ExistingFile);
  doi_cmd->add_option("--hr", doi.k_path, "right Hermitian (default: --hl)")->check(CLI::ExistingFile);
  doi_cmd->add_option("--t", doi.t_path, "operand T")->check(CLI::ExistingFile);

  DerivArgs deriv;
  auto* deriv_cmd = app.add_subcommand("deriv", "derivative of f(e^{isA}U) against central differences");
  deriv.common.attach(deriv_cmd, true);
  deriv.inst.attach(deriv_cmd);
  deriv_cmd->add_option("--fn", deriv.fn, "function");
  deriv_cmd->add_option("--s", deriv.s, "path parameter");
  deriv_cmd->add_option("--steps", deriv.steps, "decreasing comma-separated steps");

  SsfArgs ssf;
  auto* ssf_cmd = app.add_subcommand("ssf", "spectral shift function of (U, e^{iA}U)");
  ssf.common.attach(ssf_cmd, true);
  ssf.inst.attach(ssf_cmd);
  ssf_cmd->add_option("--steps", ssf.policy.initial_steps, "initial tracking steps")->check(CLI::Range(1, 1 << 20));
  ssf_cmd->add_option("--max-depth", ssf.policy.max_depth, "tracking refinement depth")->check(CLI::Range(0, 60));

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "both sides of the trace formula");
  verify.common.attach(verify_cmd, false);
  verify.inst.attach(verify_cmd);
  verify_cmd->add_option("--fn", verify.fn, "function");
  verify_cmd->add_option("--steps", verify.policy.initial_steps, "initial tracking steps")->check(CLI::Range(1, 1 << 20));
  verify_cmd->add_option("--max-depth", verify.policy.max_depth, "tracking refinement depth")->check(CLI::Range(0, 60));

  SchurArgs schur;
  auto* schur_cmd = app.add_subcommand("schurnorm", "Schur-multiplier norm bounds of divided-difference kernels");
  schur.common.attach(schur_cmd, true);
  schur_cmd->add_option("--fn", schur.fn, "function");
  schur_cmd->add_option("--grids", schur.grids, "comma-separated grid sizes");
  schur_cmd->add_option("--tol", schur.tol, "relative gap target for the norm solver");
  schur_cmd->add_option("--seed", schur.seed, "seed of the lower-bound ascent");
  schur_cmd->add_option("--restarts", schur.restarts, "random restarts of the ascent")->check(CLI::Range(1, 1000));
  schur_cmd->add_option("--iters", schur.iterations, "ascent iterations")->check(CLI::Range(1, 100000));
  schur_cmd->add_option("--upper-max", schur.upper_max, "largest grid solved for a tight upper bound");

  TwistArgs twist;
  auto* twist_cmd = app.add_subcommand("twist", "scan zeta -> trace(f(zeta U) - f(zeta V)) over the circle");
  twist.common.attach(twist_cmd, true);
  twist.inst.attach(twist_cmd, true);
  twist_cmd->add_option("--fn", twist.fn, "function");
  twist_cmd->add_option("--grid", twist.grid, "number of sample points (>= 8)");

  SuiteArgs suite;
  auto* suite_cmd = app.add_subcommand("suite", "run the acceptance battery");
  suite.common.attach(suite_cmd, false);
  suite.inst.attach(suite_cmd);
  suite_cmd->add_option("--fn", suite.fn, "function for a supplied instance");
  suite_cmd->add_option("--only", suite.only, "criterion keys to run")->delimiter(',');
  suite_cmd->add_option("--tol", suite.tol, "tolerance override key=value")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::vector<std::pair<CLI::App*, const Common*>> commons = {
      {gen_cmd, &gen.common},     {doi_cmd, &doi.common},     {deriv_cmd, &deriv.common},
      {ssf_cmd, &ssf.common},     {verify_cmd, &verify.common}, {schur_cmd, &schur.common},
      {twist_cmd, &twist.common}, {suite_cmd, &suite.common}};
  std::string out_for_errors = ".";
  for (const auto& [cmd, common] : commons) {
    if (*cmd) out_for_errors = common->out;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*doi_cmd) return run_doi(doi);
    if (*deriv_cmd) return run_deriv(deriv);
    if (*ssf_cmd) return run_ssf(ssf);
    if (*verify_cmd) return run_verify(verify);
    if (*schur_cmd) return run_schurnorm(schur);
    if (*twist_cmd) return run_twist(twist);
    if (*suite_cmd) return run_suite(suite);
  } catch (const validation_error& e) {
    io::Report r("krein.error");
    r.add_string("kind", "validation").add_string("message", e.what());
    if (const auto* nd = dynamic_cast<const non_differentiable_error*>(&e)) r.add("angle", nd->angle());
    write_error(out_for_errors, r);
    return 2;
  } catch (const tracking_error& e) {
    io::Report r("krein.error");
    r.add_string("kind", "numerical").add_string("message", e.what()).add("s_lo", e.s_lo()).add("s_hi", e.s_hi());
    write_error(out_for_errors, r);
    return 3;
  } catch (const std::exception& e) {
    io::Report r("krein.error");
    r.add_string("kind", "numerical").add_string("message", e.what());
    write_error(out_for_errors, r);
    return 3;
  }
  return 2;
}
