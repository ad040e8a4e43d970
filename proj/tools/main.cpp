// dpgcd: DPG convection-diffusion solver and benchmark driver.
//
//   dpgcd solve --problem ej --epsilon 1e-4 --norm qon --nx 10 --out run1
//   dpgcd study --type h --problem skew-cont --values 5,10,25 --out study1
//   dpgcd --config run.cfg solve --nx 20
//
// Options may come from a config file of `key = value` lines using the long
// flag names; command-line values win.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpgcd/bench.hpp"

namespace fs = std::filesystem;
using namespace dpgcd;

namespace {

struct Settings {
  std::string problem = "ej";
  double epsilon = 1e-2;
  std::string norm = "qon";
  int nx = 10;
  int p = 1;
  int dp = 2;
  std::string subgrid = "auto";
  double kappa = 1.0;
  double theta = 45.0;
  std::optional<double> gamma;
  std::optional<double> delta;
  std::string alpha1 = "auto";
  double alpha2 = 1.0;
  int samples = 5;
  std::string out = ".";
  bool reference = false;

  std::string type = "h";
  std::vector<int> values;
  std::vector<std::string> norms{"sn", "wn", "qon"};
  std::vector<int> dps{1, 2, 3, 4, 5, 6, 7, 8, 9};
  int reference_n = 512;
  std::string grading = "uniform";
  std::string measure = "squared";
};

NormChoice norm_choice(const Settings& s, const std::string& name) {
  NormChoice c;
  c.kind = parse_norm(name);
  c.gamma = s.gamma;
  c.delta = s.delta;
  if (s.alpha1 != "auto") c.alpha1 = std::stod(s.alpha1);
  c.alpha2 = s.alpha2;
  return c;
}

int subgrid_value(const Settings& s) {
  if (s.subgrid == "auto") return 0;
  const int v = std::stoi(s.subgrid);
  if (v != 1 && v != 3) throw std::invalid_argument("--subgrid must be 1, 3 or auto");
  return v;
}

Grading grading_value(const Settings& s) {
  if (s.grading == "uniform") return Grading::uniform;
  if (s.grading == "layer") return Grading::layer;
  throw std::invalid_argument("--grading must be uniform or layer");
}

std::ofstream open_out(const Settings& s, const std::string& name) {
  fs::create_directories(s.out);
  std::ofstream f(fs::path(s.out) / name);
  if (!f) throw std::runtime_error("cannot write " + (fs::path(s.out) / name).string());
  return f;
}

void header(std::ostream& os, const Settings& s, const BenchmarkProblem& prob) {
  os << "problem = " << problem_name(prob.kind) << '\n'
     << "epsilon = " << prob.eps << '\n';
  if (prob.kind != ProblemKind::eriksson_johnson) os << "theta = " << prob.theta_deg << '\n';
  os << "nx = " << s.nx << "\np = " << s.p << "\ndp = " << s.dp << "\nsubgrid = " << s.subgrid
     << "\nkappa = " << s.kappa << '\n';
}

int run_solve(const Settings& s) {
  const BenchmarkProblem prob = make_problem(parse_problem(s.problem), s.epsilon, s.theta);
  const NormChoice nc = norm_choice(s, s.norm);
  SolveReport rep;
  const auto t0 = std::chrono::steady_clock::now();
  const SolutionField sol =
      solve_benchmark(prob, nc, s.nx, s.p, s.dp, subgrid_value(s), s.kappa, &rep);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto rows = sample_solution(sol, s.samples);
  {
    auto f = open_out(s, "solution.csv");
    write_solution_csv(f, rows);
  }
  std::ostringstream sum;
  header(sum, s, prob);
  sum << "norm = " << nc.resolve(prob.eps, 1.0 / s.nx).name() << '\n'
      << "unknowns = " << rep.num_unknowns << '\n'
      << "relative_residual = " << rep.relative_residual << '\n'
      << "gram_diagonal_spread = " << rep.max_diagonal_spread << '\n'
      << "solve_seconds = " << secs << '\n'
      << format_min_max(sampled_range(rows)) << '\n';
  if (prob.has_exact_solution() || s.reference) {
    try {
      const ReferenceSpec ref = make_reference(prob, s.reference_n, grading_value(s));
      const L2Error e = l2_error(sol, ref.field, ref.breaks_x, ref.breaks_y);
      sum << "l2_error_u = " << e.u << "\nl2_error_sigma = " << e.sigma << '\n';
    } catch (const ReferenceUnavailable& ex) {
      sum << "l2_error = N/A (" << ex.what() << ")\n";
    }
  }
  auto f = open_out(s, "summary.txt");
  f << sum.str();
  std::cout << sum.str();
  return 0;
}

int run_study(const Settings& s) {
  const BenchmarkProblem prob = make_problem(parse_problem(s.problem), s.epsilon, s.theta);
  std::ostringstream sum;
  header(sum, s, prob);

  if (s.type == "testfn") {
    const StructuredMesh mesh(s.nx, s.nx);
    const Physics phys{prob.eps, prob.advection()};
    const NormChoice nc = norm_choice(s, s.norm);
    const NormSpec spec = nc.resolve(prob.eps, 1.0 / s.nx);
    const int sg = subgrid_value(s) > 0 ? subgrid_value(s) : nc.default_subgrid();
    auto steps =
        test_function_convergence(mesh.element(0), phys, spec, s.p, s.dps, sg, s.kappa);
    if (s.reference) {
      try {
        const ReferenceSpec ref = make_reference(prob, s.reference_n, grading_value(s));
        for (auto& st : steps) {
          const SolutionField sol = solve_benchmark(prob, nc, s.nx, s.p, st.dp, sg, s.kappa);
          st.e_u = l2_error(sol, ref.field, ref.breaks_x, ref.breaks_y).u;
        }
      } catch (const ReferenceUnavailable& ex) {
        sum << "l2_u = N/A (" << ex.what() << ")\n";
      }
    }
    const bool squared = s.measure == "squared";
    auto f = open_out(s, "table_testfn.csv");
    write_test_function_csv(f, steps, squared);
    sum << "norm = " << spec.name() << "\nmeasure = " << s.measure << '\n';
    std::ostringstream table;
    write_test_function_csv(table, steps, squared);
    sum << table.str();
  } else {
    StudyOptions opt;
    opt.sweep = s.type == "h" ? SweepKind::h
                : s.type == "p" ? SweepKind::p
                                : throw std::invalid_argument("--type must be h, p or testfn");
    if (!s.values.empty()) {
      opt.values = s.values;
    } else if (opt.sweep == SweepKind::p) {
      opt.values = {1, 2, 3, 4};
    }
    opt.n = s.nx;
    opt.p = s.p;
    opt.dp = s.dp;
    opt.subgrid = subgrid_value(s);
    opt.kappa = s.kappa;
    const ReferenceSpec ref = make_reference(prob, s.reference_n, grading_value(s));
    std::vector<ConvergenceRecord> records;
    for (const auto& n : s.norms) {
      records.push_back(run_convergence_study(prob, norm_choice(s, n), opt, ref));
      for (std::size_t k = 0; k < records.back().failures.size(); ++k) {
        if (!records.back().failures[k].empty()) {
          sum << "failed " << records.back().norm << ' ' << records.back().sweep << '='
              << records.back().values[k] << ": " << records.back().failures[k] << '\n';
        }
      }
    }
    auto f = open_out(s, "table_" + s.type + ".csv");
    write_table_csv(f, records);
    std::ostringstream table;
    write_table_csv(table, records);
    sum << table.str();
  }
  auto f = open_out(s, "summary.txt");
  f << sum.str();
  std::cout << sum.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DPG solver for stationary convection-diffusion"};
  app.set_config("--config", "", "Read `key = value` options from a file");
  app.require_subcommand(1);
  Settings s;

  app.add_option("--problem", s.problem, "ej | skew-cont | skew-disc")
      ->check(CLI::IsMember({"ej", "skew-cont", "skew-disc"}));
  app.add_option("--epsilon", s.epsilon, "Diffusion coefficient")->check(CLI::PositiveNumber);
  app.add_option("--norm", s.norm, "sn | wn | qon")->check(CLI::IsMember({"sn", "wn", "qon"}));
  app.add_option("--nx", s.nx, "Elements per direction")->check(CLI::Range(1, 1000));
  app.add_option("--p", s.p, "Trial order")->check(CLI::Range(1, 8));
  app.add_option("--dp", s.dp, "Test enrichment")->check(CLI::Range(1, 10));
  app.add_option("--subgrid", s.subgrid, "1 | 3 | auto")
      ->check(CLI::IsMember({"1", "3", "auto"}));
  app.add_option("--kappa", s.kappa, "Shishkin width factor")->check(CLI::PositiveNumber);
  app.add_option("--theta", s.theta, "Skew angle in degrees")->check(CLI::Range(0.0, 90.0));
  app.add_option("--gamma", s.gamma, "WN weight (default epsilon)");
  app.add_option("--delta", s.delta, "WN band width (default h)");
  app.add_option("--alpha1", s.alpha1, "QON alpha1 or auto (epsilon^-1.5)");
  app.add_option("--alpha2", s.alpha2, "QON alpha2");
  app.add_option("--samples", s.samples, "Samples per element edge")->check(CLI::Range(2, 100));
  app.add_option("--out", s.out, "Output directory");
  app.add_flag("--reference", s.reference, "Also compute L2 errors against a reference");
  app.add_option("--type", s.type, "Study: h | p | testfn")
      ->check(CLI::IsMember({"h", "p", "testfn"}));
  app.add_option("--values", s.values, "Sweep values (N or p)")->delimiter(',');
  app.add_option("--norms", s.norms, "Norms in the table")->delimiter(',');
  app.add_option("--dps", s.dps, "Enrichments for the test-function study")->delimiter(',');
  app.add_option("--reference-n", s.reference_n, "Reference grid cells per direction")
      ->check(CLI::Range(2, 4096));
  app.add_option("--grading", s.grading, "Reference grid: uniform | layer")
      ->check(CLI::IsMember({"uniform", "layer"}));

  app.add_option("--measure", s.measure,
                 "Test-function error: squared (|||dw|||^2/|||w|||^2) or relative")
      ->check(CLI::IsMember({"squared", "relative"}));

  auto* solve = app.add_subcommand("solve", "Solve one benchmark and dump the solution");
  auto* study = app.add_subcommand("study", "Run a convergence study");
  solve->fallthrough();
  study->fallthrough();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve) return run_solve(s);
    return run_study(s);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
}
