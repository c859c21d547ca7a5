// Command-line front end: solve/compare/check/verify/bench over the
// truncated-series, theoretical, Monte Carlo and exact-discrete methods.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rcheb/closedform.hpp"
#include "rcheb/distribution.hpp"
#include "rcheb/errors.hpp"
#include "rcheb/montecarlo.hpp"
#include "rcheb/msverify.hpp"
#include "rcheb/parse.hpp"
#include "rcheb/series.hpp"
#include "rcheb/stat_series.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 12345;

struct CommonOptions {
  std::string a_spec = "normal(0,0.25)";
  std::string y0_spec = "beta(1,3)";
  std::string y1_spec = "uniform(0,2)";
  std::string grid_spec = "0.1,0.3,0.5,0.7,0.9";
  int order = 10;
  std::uint64_t m = 100000;
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
  std::string format;
  std::string output = "-";
  double y0_m1 = 0, y0_m2 = 0, y1_m1 = 0, y1_m2 = 0;  // moment overrides (presence-gated)
};

struct RunSpec {
  rcheb::DistributionModel a_model;
  rcheb::DistributionModel y0_model;
  rcheb::DistributionModel y1_model;
  rcheb::InitialMoments ic;
  std::vector<double> grid;
  int order;
  std::uint64_t m;
  std::uint64_t seed;
  int threads;
};

RunSpec build_run_spec(const CommonOptions& opt, const CLI::App& cmd) {
  RunSpec spec{rcheb::parse_distribution(opt.a_spec),
               rcheb::parse_distribution(opt.y0_spec),
               rcheb::parse_distribution(opt.y1_spec),
               {},
               rcheb::parse_grid(opt.grid_spec),
               opt.order,
               opt.m,
               opt.seed,
               opt.threads};
  for (double s : spec.grid)
    if (!(s > -1.0 && s < 1.0))
      throw rcheb::ConfigError("grid: point " + rcheb::detail::format_num(s) +
                               " lies outside (-1,1)");
  if (spec.order < 0) throw rcheb::ConfigError("N: truncation order must be >= 0");
  if (spec.threads < 1) throw rcheb::ConfigError("threads: must be >= 1");
  spec.ic = rcheb::InitialMoments::from_models(spec.y0_model, spec.y1_model);
  if (cmd.count("--Y0-m1") > 0) spec.ic.y0_mean = opt.y0_m1;
  if (cmd.count("--Y0-m2") > 0) spec.ic.y0_second = opt.y0_m2;
  if (cmd.count("--Y1-m1") > 0) spec.ic.y1_mean = opt.y1_m1;
  if (cmd.count("--Y1-m2") > 0) spec.ic.y1_second = opt.y1_m2;
  return spec;
}

void add_model_options(CLI::App& cmd, CommonOptions& opt) {
  cmd.add_option("--A", opt.a_spec,
                 "coefficient law A, e.g. normal(0,0.25) [2nd arg is the VARIANCE], "
                 "uniform(0,2), beta(1,3), discrete(2:1/3,4:1/3,6:1/3), point(0.7), "
                 "trunc(normal(0,0.25),-5,5)")
      ->capture_default_str();
  cmd.add_option("--Y0", opt.y0_spec, "initial value law Y(0)")->capture_default_str();
  cmd.add_option("--Y1", opt.y1_spec, "initial slope law Y'(0)")->capture_default_str();
  cmd.add_option("--Y0-m1", opt.y0_m1, "override E[Y0]");
  cmd.add_option("--Y0-m2", opt.y0_m2, "override E[Y0^2]");
  cmd.add_option("--Y1-m1", opt.y1_m1, "override E[Y1]");
  cmd.add_option("--Y1-m2", opt.y1_m2, "override E[Y1^2]");
}

void add_run_options(CLI::App& cmd, CommonOptions& opt) {
  cmd.add_option("--N", opt.order, "truncation order")->capture_default_str();
  cmd.add_option("--grid", opt.grid_spec, "evaluation points: comma list or linspace(lo,hi,count)")
      ->capture_default_str();
  cmd.add_option("--m", opt.m, "Monte Carlo sample count")->capture_default_str();
  cmd.add_option("--seed", opt.seed, "RNG seed")->envname("RCHEB_SEED")->capture_default_str();
  cmd.add_option("--threads", opt.threads, "worker cap for Monte Carlo")->capture_default_str();
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path == "-") return std::cout;
  file.open(path);
  if (!file) throw rcheb::ConfigError("output: cannot open '" + path + "' for writing");
  return file;
}

rcheb::StatSeries run_method(const std::string& method, const RunSpec& spec) {
  if (method == "tsm") {
    rcheb::TruncatedSolution solution(spec.a_model, spec.order, spec.ic);
    return solution.solve_grid(spec.grid);
  }
  if (method == "theoretical")
    return rcheb::theoretical_grid(spec.a_model, spec.ic, spec.grid);
  if (method == "mc") {
    if (spec.m < 1) throw rcheb::ConfigError("m: Monte Carlo needs m >= 1");
    return rcheb::simulate(
        {spec.a_model, spec.y0_model, spec.y1_model, spec.grid, spec.m, spec.seed},
        spec.threads);
  }
  if (method == "exact")
    return rcheb::exact_discrete_grid(spec.a_model, spec.ic, spec.grid);
  throw rcheb::ConfigError("method: unknown method '" + method +
                           "' (expected tsm, theoretical, mc or exact)");
}

void write_series(const rcheb::StatSeries& series, const std::string& format,
                  std::ostream& os) {
  if (format == "json") {
    series.write_json(os);
  } else if (format.empty() || format == "csv") {
    series.write_csv(os);
  } else {
    throw rcheb::ConfigError("format: unknown format '" + format + "' (expected csv or json)");
  }
}

int cmd_solve(const CommonOptions& opt, const std::string& method, const CLI::App& cmd) {
  const RunSpec spec = build_run_spec(opt, cmd);
  const rcheb::StatSeries series = run_method(method, spec);
  std::ofstream file;
  write_series(series, opt.format, open_output(opt.output, file));
  return 0;
}

int cmd_compare(const CommonOptions& opt, std::vector<std::string> methods,
                const CLI::App& cmd) {
  if (methods.size() < 2)
    throw rcheb::ConfigError("methods: compare needs at least two of tsm, theoretical, mc, exact");
  const RunSpec spec = build_run_spec(opt, cmd);
  std::vector<rcheb::StatSeries> series;
  std::vector<double> wall_ms;
  for (const auto& method : methods) {
    const auto start = std::chrono::steady_clock::now();
    series.push_back(run_method(method, spec));
    const auto stop = std::chrono::steady_clock::now();
    wall_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }

  std::ofstream file;
  std::ostream& os = open_output(opt.output, file);
  char buf[64];
  if (opt.format == "json") {
    nlohmann::json j;
    j["s"] = spec.grid;
    for (std::size_t k = 0; k < methods.size(); ++k) {
      j["methods"][methods[k]] = series[k].to_json();
      if (k > 0) {
        std::vector<double> dmean, dstd;
        for (std::size_t i = 0; i < spec.grid.size(); ++i) {
          dmean.push_back(std::abs(series[k].mean[i] - series[0].mean[i]));
          dstd.push_back(std::abs(series[k].std_dev[i] - series[0].std_dev[i]));
        }
        j["abs_diff_vs_" + methods[0]][methods[k]] = {{"mean", dmean}, {"std", dstd}};
      }
    }
    os << j.dump(2) << "\n";
  } else if (opt.format == "csv") {
    os << "s";
    for (const auto& m : methods) os << ",mean_" << m << ",std_" << m;
    for (std::size_t k = 1; k < methods.size(); ++k)
      os << ",dmean_" << methods[k] << ",dstd_" << methods[k];
    os << "\n";
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", spec.grid[i]);
      os << buf;
      for (std::size_t k = 0; k < methods.size(); ++k) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g", series[k].mean[i], series[k].std_dev[i]);
        os << buf;
      }
      for (std::size_t k = 1; k < methods.size(); ++k) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g",
                      std::abs(series[k].mean[i] - series[0].mean[i]),
                      std::abs(series[k].std_dev[i] - series[0].std_dev[i]));
        os << buf;
      }
      os << "\n";
    }
  } else if (opt.format.empty() || opt.format == "table") {
    os << "s";
    for (const auto& m : methods) os << "  mean[" << m << "]  std[" << m << "]";
    for (std::size_t k = 1; k < methods.size(); ++k) os << "  |d mean|[" << methods[k] << "]";
    os << "\n";
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.6f", spec.grid[i]);
      os << buf;
      for (std::size_t k = 0; k < methods.size(); ++k) {
        std::snprintf(buf, sizeof buf, "  %.6f  %.6f", series[k].mean[i], series[k].std_dev[i]);
        os << buf;
      }
      for (std::size_t k = 1; k < methods.size(); ++k) {
        std::snprintf(buf, sizeof buf, "  %.6f",
                      std::abs(series[k].mean[i] - series[0].mean[i]));
        os << buf;
      }
      os << "\n";
    }
  } else {
    throw rcheb::ConfigError("format: unknown format '" + opt.format +
                             "' (expected table, csv or json)");
  }
  // Wall-clock goes to stderr: the data on stdout stays byte-identical across runs.
  for (std::size_t k = 0; k < methods.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.3f", wall_ms[k]);
    std::cerr << "wall_ms[" << methods[k] << "] = " << buf << "\n";
  }
  return 0;
}

int cmd_check(const std::string& a_spec, int nmax, const std::string& format,
              const std::string& output) {
  const rcheb::DistributionModel model = rcheb::parse_distribution(a_spec);
  const rcheb::GrowthReport report = rcheb::check_growth_condition(model, nmax);
  std::ofstream file;
  std::ostream& os = open_output(output, file);
  if (format == "json") {
    nlohmann::json j{{"label", report.label},  {"max_n", report.max_n},
                     {"ratios", report.ratios}, {"kappa", report.kappa},
                     {"M", report.big_m},       {"verdict", rcheb::to_string(report.verdict)},
                     {"note", report.note}};
    os << j.dump(2) << "\n";
  } else {
    char buf[64];
    os << "model:   " << report.label << "\n";
    os << "verdict: " << rcheb::to_string(report.verdict) << " (" << report.note << ")\n";
    std::snprintf(buf, sizeof buf, "%.6g", report.kappa);
    os << "kappa:   " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.6g", report.big_m);
    os << "M:       " << buf << "\n";
    os << "n  ||(A^2)^(n+1)||_4 / ||(A^2)^n||_4\n";
    for (std::size_t n = 0; n < report.ratios.size(); ++n) {
      std::snprintf(buf, sizeof buf, "%-3zu %.12g", n, report.ratios[n]);
      os << buf << "\n";
    }
  }
  return report.verdict == rcheb::GrowthVerdict::Violated ? 1 : 0;
}

int cmd_verify(std::uint64_t m, std::uint64_t seed, const std::string& ladder_spec,
               const std::string& output) {
  std::vector<double> ladder = rcheb::parse_grid(ladder_spec);
  const rcheb::VerifyReport report = rcheb::run_verification(m, seed, ladder);
  std::ofstream file;
  std::ostream& os = open_output(output, file);
  char buf[64];
  os << "chain-rule residual ||(Y(g(t+h))-Y(g(t)))/h - Y'(g(t)) g'(t)||_2, g=cos, t=1\n";
  os << "family";
  for (double h : report.h_ladder) {
    std::snprintf(buf, sizeof buf, "  h=%g", h);
    os << buf;
  }
  os << "  result\n";
  for (const auto& row : report.rows) {
    os << row.family;
    for (double r : row.residuals) {
      std::snprintf(buf, sizeof buf, "  %.6e", r);
      os << buf;
    }
    if (row.expect_decreasing)
      os << (row.passed ? "  decreasing [ok]" : "  NOT decreasing [fail]");
    else
      os << (row.passed ? "  stays large [expected-fail ok]" : "  vanished [fail]");
    os << "\n";
  }
  std::snprintf(buf, sizeof buf, "%.6e", report.transform_max_residual);
  os << "variable-change identities: max residual " << buf
     << (report.transform_ok ? " [ok]" : " [fail]") << "\n";
  os << (report.passed ? "verify: PASS\n" : "verify: FAIL\n");
  return report.passed ? 0 : 1;
}

int cmd_bench(const CommonOptions& opt, const CLI::App& cmd) {
  const RunSpec spec = build_run_spec(opt, cmd);
  using clock = std::chrono::steady_clock;
  auto time_ms = [](auto&& fn, int repeats) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < repeats; ++r) {
      const auto start = clock::now();
      fn();
      const auto stop = clock::now();
      best = std::min(best, std::chrono::duration<double, std::milli>(stop - start).count());
    }
    return best;
  };

  const double tsm_ms = time_ms(
      [&] {
        rcheb::TruncatedSolution solution(spec.a_model, spec.order, spec.ic);
        volatile double sink = solution.solve_grid(spec.grid).mean.back();
        (void)sink;
      },
      5);
  const double theo_ms = time_ms(
      [&] {
        volatile double sink =
            rcheb::theoretical_grid(spec.a_model, spec.ic, spec.grid).mean.back();
        (void)sink;
      },
      5);
  const double mc_ms = time_ms(
      [&] {
        volatile double sink =
            rcheb::simulate(
                {spec.a_model, spec.y0_model, spec.y1_model, spec.grid, spec.m, spec.seed},
                spec.threads)
                .mean.back();
        (void)sink;
      },
      3);

  char label[48], buf[96];
  std::snprintf(label, sizeof label, "tsm (N=%d):", spec.order);
  std::snprintf(buf, sizeof buf, "%-24s %12.4f ms", label, tsm_ms);
  std::cout << buf << "\n";
  std::snprintf(buf, sizeof buf, "%-24s %12.4f ms  (%.1fx tsm)", "theoretical:", theo_ms,
                theo_ms / tsm_ms);
  std::cout << buf << "\n";
  std::snprintf(label, sizeof label, "mc (m=%llu):", static_cast<unsigned long long>(spec.m));
  std::snprintf(buf, sizeof buf, "%-24s %12.4f ms  (%.1fx tsm)", label, mc_ms, mc_ms / tsm_ms);
  std::cout << buf << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean-square statistics of the random Chebyshev differential equation\n"
               "(1-s^2) Y'' - s Y' + A^2 Y = 0,  Y(0)=Y0,  Y'(0)=Y1,  s in (-1,1)"};
  app.require_subcommand(1);
  app.set_config("--config", "", "config file with key=value lines mirroring the long flags");

  CommonOptions solve_opt, compare_opt, bench_opt;
  std::string solve_method = "tsm";
  std::vector<std::string> compare_methods;

  CLI::App* solve = app.add_subcommand("solve", "run one method over a grid, emit CSV/JSON");
  add_model_options(*solve, solve_opt);
  add_run_options(*solve, solve_opt);
  solve->add_option("--method", solve_method, "tsm | theoretical | mc | exact")
      ->capture_default_str();
  solve->add_option("--format", solve_opt.format, "csv (default) | json");
  solve->add_option("--output,-o", solve_opt.output, "output path, '-' for stdout")
      ->capture_default_str();

  CLI::App* compare = app.add_subcommand("compare", "run several methods, tabulate differences");
  add_model_options(*compare, compare_opt);
  add_run_options(*compare, compare_opt);
  compare->add_option("--methods", compare_methods, "two or more of tsm,theoretical,mc,exact")
      ->required()
      ->delimiter(',');
  compare->add_option("--format", compare_opt.format, "table (default) | csv | json");
  compare->add_option("--output,-o", compare_opt.output, "output path, '-' for stdout")
      ->capture_default_str();

  std::string check_a = "normal(0,0.25)";
  int check_nmax = 20;
  std::string check_format, check_output = "-";
  CLI::App* check = app.add_subcommand("check", "moment-growth admissibility report for A");
  check->add_option("--A", check_a, "coefficient law")->capture_default_str();
  check->add_option("--nmax", check_nmax, "ratio depth (>= 2)")->capture_default_str();
  check->add_option("--format", check_format, "text (default) | json");
  check->add_option("--output,-o", check_output, "output path, '-' for stdout")
      ->capture_default_str();

  std::uint64_t verify_m = 10000, verify_seed = kDefaultSeed;
  std::string verify_ladder = "1e-2,5e-3,2.5e-3,1.25e-3";
  std::string verify_output = "-";
  CLI::App* verify = app.add_subcommand(
      "verify", "empirical chain-rule and variable-change checks");
  verify->add_option("--m", verify_m, "ensemble size")->capture_default_str();
  verify->add_option("--seed", verify_seed, "RNG seed")
      ->envname("RCHEB_SEED")
      ->capture_default_str();
  verify->add_option("--h-ladder", verify_ladder, "decreasing step sizes")->capture_default_str();
  verify->add_option("--output,-o", verify_output, "output path, '-' for stdout")
      ->capture_default_str();

  CLI::App* bench = app.add_subcommand("bench", "wall-clock comparison of the methods");
  add_model_options(*bench, bench_opt);
  add_run_options(*bench, bench_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(solve)) return cmd_solve(solve_opt, solve_method, *solve);
    if (app.got_subcommand(compare)) return cmd_compare(compare_opt, compare_methods, *compare);
    if (app.got_subcommand(check))
      return cmd_check(check_a, check_nmax, check_format, check_output);
    if (app.got_subcommand(verify))
      return cmd_verify(verify_m, verify_seed, verify_ladder, verify_output);
    if (app.got_subcommand(bench)) return cmd_bench(bench_opt, *bench);
  } catch (const rcheb::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rcheb::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rcheb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
