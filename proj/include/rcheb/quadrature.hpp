#pragma once

#include <cmath>
#include <utility>

namespace rcheb {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;  // accumulated |K15 - G7| over accepted panels
};

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights (positive half, node 0 last).
inline constexpr double kGk15Nodes[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr double kGk15Weights[8] = {
    0.02293532201052922, 0.06309209262997855, 0.1047900103222502,
    0.1406532597155259,  0.1690047266392679,  0.1903505780647854,
    0.2044329400752989,  0.2094821410847278};
inline constexpr double kGauss7Weights[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

template <class F>
std::pair<double, double> gk15_panel(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double f0 = f(c);
  double kronrod = kGk15Weights[7] * f0;
  double gauss = kGauss7Weights[3] * f0;
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kGk15Nodes[i];
    const double fsum = f(c - dx) + f(c + dx);
    kronrod += kGk15Weights[i] * fsum;
    if (i % 2 == 1) gauss += kGauss7Weights[i / 2] * fsum;
  }
  kronrod *= h;
  gauss *= h;
  return {kronrod, std::abs(kronrod - gauss)};
}

template <class F>
void gk15_adapt(F& f, double a, double b, double tol, int depth, QuadratureResult& out) {
  const auto [value, err] = gk15_panel(f, a, b);
  if (err <= tol || depth <= 0) {
    out.value += value;
    out.abs_error += err;
    return;
  }
  const double c = 0.5 * (a + b);
  gk15_adapt(f, a, c, 0.5 * tol, depth - 1, out);
  gk15_adapt(f, c, b, 0.5 * tol, depth - 1, out);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over the finite interval
/// [a, b] to relative tolerance rel_tol (with abs_tol as a floor). Panel sums
/// combine pairwise through the bisection tree.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-12,
                                    double abs_tol = 0.0, int max_depth = 60) {
  auto& fn = f;
  const auto [first, first_err] = detail::gk15_panel(fn, a, b);
  const double scale = std::max(std::abs(first), first_err);
  const double tol = std::max(abs_tol, rel_tol * scale);
  QuadratureResult out;
  detail::gk15_adapt(fn, a, b, tol, max_depth, out);
  return out;
}

}  // namespace rcheb
