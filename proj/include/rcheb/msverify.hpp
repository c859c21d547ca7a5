#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rcheb/closedform.hpp"
#include "rcheb/distribution.hpp"
#include "rcheb/errors.hpp"
#include "rcheb/numeric.hpp"
#include "rcheb/rng.hpp"

namespace rcheb {

/// A family of paths s -> value(a, s), one per sampled parameter a, with
/// analytic s-derivatives. Paths are deterministic functions of their
/// parameter, so an ensemble is fully described by (family, m, seed).
struct PathFamily {
  std::string name;
  DistributionModel param;
  std::function<double(double a, double s)> value;
  std::function<double(double a, double s)> deriv1;
  std::function<double(double a, double s)> deriv2;
  double domain_lo = -std::numeric_limits<double>::infinity();
  double domain_hi = std::numeric_limits<double>::infinity();
};

/// Frozen ensemble: parameters drawn once from (seed, sample index).
class EnsembleProcess {
 public:
  EnsembleProcess(PathFamily family, std::size_t m, std::uint64_t seed)
      : family_(std::move(family)) {
    if (m == 0) throw ConfigError("EnsembleProcess: sample count must be >= 1");
    params_.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      RngStream rng(seed, 0, i);
      params_.push_back(sample(family_.param, rng));
    }
  }

  std::size_t size() const { return params_.size(); }
  const PathFamily& family() const { return family_; }
  const std::vector<double>& params() const { return params_; }

  double value(std::size_t i, double s) const { return family_.value(params_[i], s); }
  double deriv1(std::size_t i, double s) const { return family_.deriv1(params_[i], s); }
  double deriv2(std::size_t i, double s) const { return family_.deriv2(params_[i], s); }

  void require_inside(double s) const {
    if (!(s >= family_.domain_lo && s <= family_.domain_hi))
      throw DomainError("ensemble '" + family_.name + "': point s=" + detail::format_num(s) +
                        " leaves the process domain");
  }

 private:
  PathFamily family_;
  std::vector<double> params_;
};

/// Empirical L2 norm: sqrt of the sample mean of squares (divisor m).
inline double empirical_l2(std::span<const double> values) {
  if (values.empty()) throw ConfigError("empirical_l2: empty sample");
  KahanSum sum;
  for (double v : values) sum.add(v * v);
  return std::sqrt(sum.value() / static_cast<double>(values.size()));
}

/// Deterministic outer function g with its derivative.
struct DeterministicMap {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
};

inline DeterministicMap cosine_map() {
  return {"cos", [](double t) { return std::cos(t); }, [](double t) { return -std::sin(t); }};
}

/// Empirical L2 norm of the chain-rule defect at t with step h:
///   (Y(g(t+h)) - Y(g(t)))/h - Y'(g(t)) g'(t)
/// using the forward difference quotient that defines the derivative.
inline double chain_rule_residual(const EnsembleProcess& proc, const DeterministicMap& g,
                                  double t, double h) {
  if (h == 0.0) throw ConfigError("chain_rule_residual: h must be nonzero");
  const double s0 = g.f(t);
  const double s1 = g.f(t + h);
  proc.require_inside(s0);
  proc.require_inside(s1);
  const double dg = g.df(t);
  std::vector<double> defects;
  defects.reserve(proc.size());
  for (std::size_t i = 0; i < proc.size(); ++i)
    defects.push_back((proc.value(i, s1) - proc.value(i, s0)) / h -
                      proc.deriv1(i, s0) * dg);
  return empirical_l2(defects);
}

/// Empirical L2 norm of the second-derivative identity defect for X = Y(cos t):
///   central second difference of X  minus  sin^2(t) Y''(cos t) - cos(t) Y'(cos t).
inline double second_derivative_identity_check(const EnsembleProcess& proc, double t, double h) {
  if (h == 0.0) throw ConfigError("second_derivative_identity_check: h must be nonzero");
  const double sm = std::cos(t - h);
  const double s0 = std::cos(t);
  const double sp = std::cos(t + h);
  proc.require_inside(sm);
  proc.require_inside(s0);
  proc.require_inside(sp);
  const double sin_t = std::sin(t);
  const double cos_t = std::cos(t);
  std::vector<double> defects;
  defects.reserve(proc.size());
  for (std::size_t i = 0; i < proc.size(); ++i) {
    const double second_diff =
        (proc.value(i, sp) - 2.0 * proc.value(i, s0) + proc.value(i, sm)) / (h * h);
    defects.push_back(second_diff -
                      (sin_t * sin_t * proc.deriv2(i, s0) - cos_t * proc.deriv1(i, s0)));
  }
  return empirical_l2(defects);
}

namespace detail {

template <class F>
double central_d1(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

template <class F>
double central_d2(F&& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

}  // namespace detail

/// Follows the chain of variable changes for fixed scalars (a, y0, y1):
/// Z(r) = y0 cos(ar) - y1 r sinc(ar) solves Z'' + a^2 Z = 0 with Z(0) = y0,
/// Z'(0) = -y1; X(t) = Z(t - pi/2) solves the same oscillator on (0, pi); and
/// Y(s) = X(arccos s) reproduces the closed-form path. Returns the largest
/// finite-difference residual across all checks.
inline double transform_consistency_check(double a, double y0, double y1, double h = 1e-4) {
  auto z = [=](double r) { return y0 * std::cos(a * r) - y1 * r * sinc(a * r); };
  auto x = [=](double t) { return z(t - std::numbers::pi / 2); };

  double worst = 0.0;
  for (double r : linspace(-std::numbers::pi / 2 + 0.1, std::numbers::pi / 2 - 0.1, 21))
    worst = std::max(worst, std::abs(detail::central_d2(z, r, h) + a * a * z(r)));
  worst = std::max(worst, std::abs(z(0.0) - y0));
  worst = std::max(worst, std::abs(detail::central_d1(z, 0.0, h) + y1));
  for (double t : linspace(0.1, std::numbers::pi - 0.1, 21))
    worst = std::max(worst, std::abs(detail::central_d2(x, t, h) + a * a * x(t)));
  for (double s : linspace(-0.95, 0.95, 21))
    worst = std::max(worst, std::abs(x(std::acos(s)) - path_Y(a, y0, y1, s)));
  return worst;
}

/// Max over the grid of the central-difference residual of the original
/// equation (1 - s^2) Y'' - s Y' + a^2 Y on the closed-form path.
inline double rcde_residual(double a, double y0, double y1, double h,
                            std::span<const double> grid) {
  auto y = [=](double s) { return path_Y(a, y0, y1, s); };
  double worst = 0.0;
  for (double s : grid) {
    const double r = (1.0 - s * s) * detail::central_d2(y, s, h) -
                     s * detail::central_d1(y, s, h) + a * a * y(s);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Built-in verification families
// ---------------------------------------------------------------------------

/// Y(s) = s (no randomness): the residual reduces to scalar calculus on g.
inline PathFamily family_linear_deterministic() {
  return {"linear-deterministic",
          DistributionModel::point_mass(1.0),
          [](double, double s) { return s; },
          [](double, double) { return 1.0; },
          [](double, double) { return 0.0; }};
}

/// Y(s) = A s with A ~ uniform(0,2): the defect factors into the scalar
/// difference-quotient error of g times ||A||_2.
inline PathFamily family_linear_random() {
  return {"linear-random",
          DistributionModel::uniform(0.0, 2.0),
          [](double a, double s) { return a * s; },
          [](double a, double) { return a; },
          [](double, double) { return 0.0; }};
}

/// Y(s) = cos(A s) with A ~ N(0, 1/4): a smooth genuinely random family.
inline PathFamily family_cosine_gaussian() {
  return {"cosine-gaussian",
          DistributionModel::centered_gaussian(0.5),
          [](double a, double s) { return std::cos(a * s); },
          [](double a, double s) { return -a * std::sin(a * s); },
          [](double a, double s) { return -a * a * std::cos(a * s); }};
}

/// Negative control: Y(s) = A * 1{s >= s_break} is discontinuous at the
/// composition point, so the chain-rule defect must NOT vanish as h -> 0.
inline PathFamily family_step_negative_control(double s_break) {
  return {"step-negative-control",
          DistributionModel::uniform(0.0, 2.0),
          [s_break](double a, double s) { return s >= s_break ? a : 0.0; },
          [](double, double) { return 0.0; },
          [](double, double) { return 0.0; }};
}

struct VerifyRow {
  std::string family;
  std::vector<double> residuals;   // one per ladder step
  bool strictly_decreasing = false;
  bool expect_decreasing = true;   // negative control expects the opposite
  bool passed = false;
};

struct VerifyReport {
  std::vector<double> h_ladder;
  std::vector<VerifyRow> rows;
  double transform_max_residual = 0.0;
  bool transform_ok = false;
  bool passed = false;
};

/// Runs the chain-rule ladder for the three positive families and the step
/// negative control at t = 1 with g = cos, plus the variable-change identity
/// on a small seeded set of scalar triples.
inline VerifyReport run_verification(std::size_t m, std::uint64_t seed,
                                     std::span<const double> h_ladder) {
  if (h_ladder.size() < 2) throw ConfigError("run_verification: h ladder needs >= 2 steps");
  VerifyReport report;
  report.h_ladder.assign(h_ladder.begin(), h_ladder.end());
  const double t = 1.0;
  const DeterministicMap g = cosine_map();

  auto run_family = [&](PathFamily family, bool expect_decreasing) {
    VerifyRow row;
    row.family = family.name;
    row.expect_decreasing = expect_decreasing;
    EnsembleProcess proc(std::move(family), m, seed);
    for (double h : h_ladder) row.residuals.push_back(chain_rule_residual(proc, g, t, h));
    row.strictly_decreasing = true;
    for (std::size_t i = 1; i < row.residuals.size(); ++i)
      if (!(row.residuals[i] < row.residuals[i - 1])) row.strictly_decreasing = false;
    if (expect_decreasing) {
      row.passed = row.strictly_decreasing;
    } else {
      double lowest = row.residuals.front();
      for (double r : row.residuals) lowest = std::min(lowest, r);
      row.passed = lowest >= 0.1;  // must not sink toward zero
    }
    report.rows.push_back(std::move(row));
  };

  run_family(family_linear_deterministic(), true);
  run_family(family_linear_random(), true);
  run_family(family_cosine_gaussian(), true);
  run_family(family_step_negative_control(std::cos(t)), false);

  {
    VerifyRow row;
    row.family = "cosine-gaussian (2nd derivative)";
    row.expect_decreasing = true;
    const EnsembleProcess proc(family_cosine_gaussian(), m, seed);
    for (double h : h_ladder)
      row.residuals.push_back(second_derivative_identity_check(proc, t, h));
    row.strictly_decreasing = true;
    for (std::size_t i = 1; i < row.residuals.size(); ++i)
      if (!(row.residuals[i] < row.residuals[i - 1])) row.strictly_decreasing = false;
    row.passed = row.strictly_decreasing;
    report.rows.push_back(std::move(row));
  }

  RngStream triple_rng(seed, 17);
  report.transform_max_residual = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double a = 0.5 + 2.5 * triple_rng.next_u01();
    const double y0 = -2.0 + 4.0 * triple_rng.next_u01();
    const double y1 = -2.0 + 4.0 * triple_rng.next_u01();
    report.transform_max_residual =
        std::max(report.transform_max_residual, transform_consistency_check(a, y0, y1));
  }
  report.transform_ok = report.transform_max_residual < 1e-6;

  report.passed = report.transform_ok;
  for (const auto& row : report.rows) report.passed = report.passed && row.passed;
  return report;
}

}  // namespace rcheb
