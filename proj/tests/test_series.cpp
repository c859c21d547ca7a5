#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "rcheb/closedform.hpp"
#include "rcheb/series.hpp"

using Catch::Approx;
using namespace rcheb;

namespace {

// A ~ N(0, 1/4), Y0 ~ beta(1,3), Y1 ~ uniform(0,2)
const double kTableGrid[5] = {0.1, 0.3, 0.5, 0.7, 0.9};

DistributionModel example2_a() { return DistributionModel::centered_gaussian(0.5); }

InitialMoments example2_ic() { return {0.25, 0.1, 1.0, 4.0 / 3.0}; }

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace

TEST_CASE("theta transform") {
  CHECK(theta(0.0) == Approx(0.0).margin(1e-15));
  CHECK(theta(0.1) == Approx(-0.1001674211615598).epsilon(1e-14));
  CHECK(theta(0.5) == Approx(-0.52359877559829887).epsilon(1e-14));
  CHECK(theta(1.0 - 1e-10) == Approx(-std::numbers::pi / 2).margin(2e-5));
  CHECK_THROWS_AS(theta(1.0), DomainError);
  CHECK_THROWS_AS(theta(-1.0), DomainError);
  CHECK_THROWS_AS(theta(1.5), DomainError);

  // strictly decreasing in s
  double prev = theta(-0.99);
  for (double s = -0.9; s < 1.0 - 1e-9; s += 0.1) {
    const double t = theta(s);
    CHECK(t < prev);
    prev = t;
  }
  const ThetaPoint p = theta_point(0.3);
  CHECK(p.theta == Approx(theta(0.3)));
}

TEST_CASE("eval_F and eval_G basics") {
  for (double a2 : {0.0, 0.25, 1.0, 4.0}) {
    for (int n : {0, 3, 10}) {
      CHECK(eval_F(0.0, a2, n) == 1.0);
      CHECK(eval_G(0.0, a2, n) == 0.0);
    }
  }
  for (double s : {-0.7, 0.2, 0.9}) {
    CHECK(eval_F(s, 0.0, 12) == 1.0);
    CHECK(eval_G(s, 0.0, 12) == Approx(-theta(s)).epsilon(1e-15));
  }
  // N=30 at a2=1 reaches the trig closed form to machine precision
  const double th = theta(0.9);
  CHECK(eval_F(0.9, 1.0, 30) == Approx(std::cos(th)).margin(1e-15));
  CHECK(eval_G(0.9, 1.0, 30) == Approx(-std::sin(th)).margin(1e-15));
  CHECK_THROWS_AS(eval_F(0.5, -1.0, 5), DomainError);
}

TEST_CASE("taylor remainder bound for truncated F and G") {
  for (double a2 : {0.25, 1.0, 4.0}) {
    const double a = std::sqrt(a2);
    for (double s : {-0.9, -0.3, 0.4, 0.8}) {
      const double th = theta(s);
      const double x = a * std::abs(th);
      for (int n : {2, 5, 8}) {
        const double f_bound = std::pow(x, 2 * n + 2) / factorial(2 * n + 2);
        // G sums a^{2k} theta^{2k+1}, so its first omitted term is the F-style
        // bound divided by a.
        const double g_bound = std::pow(x, 2 * n + 3) / factorial(2 * n + 3) / a;
        CHECK(std::abs(eval_F(s, a2, n) - std::cos(a * th)) <= f_bound * (1.0 + 1e-12) + 1e-16);
        CHECK(std::abs(eval_G(s, a2, n) + std::sin(a * th) / a) <=
              g_bound * (1.0 + 1e-12) + 1e-16);
      }
    }
  }
}

TEST_CASE("expected series factors at the Example-2 setup, s=0.1, N=10") {
  const TruncatedSolution sol(example2_a(), 10, example2_ic());
  CHECK(sol.expected_F(0.1) == Approx(0.99874659713359387).epsilon(1e-14));
  CHECK(sol.expected_G(0.1) == Approx(0.10012556061940514).epsilon(1e-14));
  CHECK(sol.expected_F2(0.1) == Approx(0.99749790338641954).epsilon(1e-14));
  CHECK(sol.expected_G2(0.1) == Approx(0.010025131391324626).epsilon(1e-13));
  CHECK(sol.expected_FG(0.1) == Approx(0.1000001677857636).epsilon(1e-14));

  // characteristic-function cross-checks (sigma = 1/2)
  const double th = theta(0.1);
  CHECK(sol.expected_F(0.1) == Approx(std::exp(-0.25 * th * th / 2)).epsilon(1e-10));
  CHECK(sol.expected_F2(0.1) ==
        Approx(0.5 * (1.0 + std::exp(-2 * 0.25 * th * th))).epsilon(1e-10));

  // s = 0 trivials
  CHECK(sol.expected_F(0.0) == 1.0);
  CHECK(sol.expected_G(0.0) == 0.0);
  CHECK(sol.expected_F2(0.0) == 1.0);
  CHECK(sol.expected_G2(0.0) == 0.0);
  CHECK(sol.expected_FG(0.0) == 0.0);
}

TEST_CASE("degenerate coefficient reduces expectations to the sample path") {
  const double a = 0.8;
  const TruncatedSolution sol(DistributionModel::point_mass(a), 10, {1.0, 1.0, 0.0, 0.0});
  for (double s : {-0.6, 0.2, 0.7}) {
    CHECK(sol.expected_F(s) == Approx(eval_F(s, a * a, 10)).epsilon(1e-14));
    CHECK(sol.expected_G(s) == Approx(eval_G(s, a * a, 10)).epsilon(1e-14));
    CHECK(sol.expected_F2(s) == Approx(std::pow(eval_F(s, a * a, 10), 2)).epsilon(1e-13));
    CHECK(sol.expected_G2(s) == Approx(std::pow(eval_G(s, a * a, 10), 2)).epsilon(1e-13));
    CHECK(sol.expected_FG(s) ==
          Approx(eval_F(s, a * a, 10) * eval_G(s, a * a, 10)).epsilon(1e-13));
  }
}

TEST_CASE("table grid reproduction at N=10") {
  const TruncatedSolution sol(example2_a(), 10, example2_ic());
  const double mean_expect[5] = {0.34981220990280361, 0.55063371681169928, 0.75925639127276195,
                                 0.98830258669711781, 1.277650748119094};
  const double std_expect[5] = {0.2018616701841638, 0.2595974133575781, 0.35334309723814418,
                                0.47557542892108564, 0.65046859242509617};
  for (int i = 0; i < 5; ++i) {
    CHECK(sol.mean(kTableGrid[i]) == Approx(mean_expect[i]).epsilon(1e-13));
    CHECK(sol.std_dev(kTableGrid[i]) == Approx(std_expect[i]).epsilon(1e-13));
  }
  // printed 6-decimal reference values
  const double printed_mean[5] = {0.349812, 0.550634, 0.759256, 0.988303, 1.277650};
  const double printed_std[5] = {0.201862, 0.259597, 0.353343, 0.475575, 0.650469};
  for (int i = 0; i < 5; ++i) {
    CHECK(sol.mean(kTableGrid[i]) == Approx(printed_mean[i]).margin(1e-6));
    CHECK(sol.std_dev(kTableGrid[i]) == Approx(printed_std[i]).margin(1e-6));
  }
}

TEST_CASE("solve_grid batches and tags") {
  const TruncatedSolution sol(example2_a(), 10, example2_ic());
  const std::vector<double> grid(kTableGrid, kTableGrid + 5);
  const StatSeries series = sol.solve_grid(grid);
  CHECK(series.method == "tsm");
  REQUIRE(series.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(series.mean[i] == sol.mean(grid[i]));
    CHECK(series.std_dev[i] == sol.std_dev(grid[i]));
    // std^2 == second_moment - mean^2 after the clamp
    CHECK(series.std_dev[i] * series.std_dev[i] ==
          Approx(series.second_moment[i] - series.mean[i] * series.mean[i]).margin(1e-12));
  }
  const std::vector<double> bad = {0.5, 1.0};
  CHECK_THROWS_AS(sol.solve_grid(bad), DomainError);
}

TEST_CASE("initial point identities") {
  const TruncatedSolution sol(example2_a(), 10, example2_ic());
  CHECK(sol.mean(0.0) == Approx(0.25).margin(1e-14));                  // E[Y0]
  CHECK(sol.std_dev(0.0) == Approx(0.19364916731037084).margin(1e-14));  // std(Y0)
  CHECK(sol.second_moment(0.0) == Approx(0.1).margin(1e-14));          // E[Y0^2]
}

TEST_CASE("moment table shorter than required names the missing order") {
  const MomentTable table = a2_moment_table(example2_a(), 10);  // covers E[F] but not E[F^2]
  const TruncatedSolution sol(table, 10, example2_ic());
  CHECK(sol.mean(0.3) == Approx(0.55063371681169928).epsilon(1e-13));
  try {
    sol.second_moment(0.3);
    FAIL("expected OrderError");
  } catch (const OrderError& e) {
    CHECK(std::string(e.what()).find("11") != std::string::npos);
  }
}

TEST_CASE("degenerate inputs match the closed form and have zero spread") {
  const double a = 2.0, y0 = 1.0, y1 = 0.5;
  const TruncatedSolution sol(DistributionModel::point_mass(a), 40,
                              {y0, y0 * y0, y1, y1 * y1});
  for (double s : {-0.8, -0.2, 0.3, 0.9}) {
    CHECK(sol.mean(s) == Approx(path_Y(a, y0, y1, s)).margin(1e-12));
    // E[F^2] and E[F]^2 are summed in different orders, so the variance sits
    // on a ~1e-15 cancellation floor; assert it, not the unreachable std.
    CHECK(sol.second_moment(s) - sol.mean(s) * sol.mean(s) <= 1e-12);
    CHECK(sol.std_dev(s) <= 1e-6);
  }
}

TEST_CASE("convergence in N at the Example-2 grid") {
  const InitialMoments ic = example2_ic();
  const DistributionModel a = example2_a();
  std::vector<TruncatedSolution> sols;
  for (int n = 4; n <= 26; ++n) sols.emplace_back(a, n, ic);
  for (double s : kTableGrid) {
    double prev_diff = -1.0;
    for (int n = 4; n <= 20; ++n) {
      const double diff =
          std::abs(sols[static_cast<std::size_t>(n - 4)].mean(s) -
                   sols[static_cast<std::size_t>(n + 1)].mean(s));
      // monotone decrease until the difference sinks into roundoff
      if (prev_diff >= 0.0 && prev_diff > 1e-13) CHECK(diff < prev_diff);
      prev_diff = diff;
      if (n == 20) CHECK(diff < 1e-10);
    }
  }
}

TEST_CASE("mean symmetry when E[Y1] = 0") {
  const TruncatedSolution sol(example2_a(), 12, {0.7, 0.6, 0.0, 0.5});
  for (double s : {0.1, 0.35, 0.62, 0.9}) {
    CHECK(sol.mean(s) == Approx(sol.mean(-s)).epsilon(1e-13));
    // E[F] even, E[G] odd under theta -> -theta (s -> -s)
    CHECK(sol.expected_F(s) == Approx(sol.expected_F(-s)).epsilon(1e-13));
    CHECK(sol.expected_G(s) == Approx(-sol.expected_G(-s)).epsilon(1e-13));
  }
}

TEST_CASE("variance nonnegativity across configurations") {
  const std::vector<DistributionModel> coeffs = {
      example2_a(), DistributionModel::uniform(0.0, 2.0),
      DistributionModel::discrete({2.0, 4.0, 6.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3}),
      DistributionModel::point_mass(1.5)};
  const std::vector<InitialMoments> ics = {
      example2_ic(), {1.0, 1.0, 0.0, 0.0}, {0.5, 0.3, -0.2, 0.1}};
  for (const auto& a : coeffs) {
    for (const auto& ic : ics) {
      const TruncatedSolution sol(a, 12, ic);
      for (double s = -0.9; s <= 0.91; s += 0.3) {
        const double var = sol.second_moment(s) - sol.mean(s) * sol.mean(s);
        CHECK(var >= -1e-12);
        CHECK(sol.std_dev(s) >= 0.0);
      }
    }
  }
}

TEST_CASE("stat series serialization schema") {
  const TruncatedSolution sol(example2_a(), 10, example2_ic());
  const std::vector<double> grid = {0.1, 0.5};
  StatSeries series = sol.solve_grid(grid);

  std::ostringstream csv;
  series.write_csv(csv);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "s,mean,std,second_moment");
  std::string row;
  int rows = 0;
  while (std::getline(lines, row))
    if (!row.empty()) ++rows;
  CHECK(rows == 2);

  const auto j = series.to_json();
  CHECK(j["method"] == "tsm");
  CHECK(j["mean"].size() == 2);
  CHECK(j["mean"][0].get<double>() == series.mean[0]);  // full round-trip precision
  CHECK(!j.contains("stderr"));

  series.std_error = {0.01, 0.02};
  std::ostringstream csv_se;
  series.write_csv(csv_se);
  CHECK(csv_se.str().rfind("s,mean,std,second_moment,stderr", 0) == 0);
  CHECK(series.to_json().contains("stderr"));
}

TEST_CASE("two printed expansions of the solution agree") {
  // Y_N = Y0 F + Y1 G with G carrying (-1)^{k+1} equals the variant that
  // carries (-Y1) with (-1)^k; parity check with a degenerate ensemble.
  const double a2 = 1.7, y1 = 0.9;
  for (double s : {-0.5, 0.2, 0.8}) {
    const double th = theta(s);
    KahanSum alt;  // sum (-1)^k a2^k (-y1) th^{2k+1} / (2k+1)!
    double term = -y1 * th;
    for (int k = 0;; ++k) {
      alt.add(term);
      if (k == 15) break;
      term *= -a2 * th * th / static_cast<double>((2 * k + 2) * (2 * k + 3));
    }
    CHECK(y1 * eval_G(s, a2, 15) == Approx(alt.value()).epsilon(1e-14));
  }
}
