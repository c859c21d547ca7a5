#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rcheb/distribution.hpp"
#include "rcheb/errors.hpp"
#include "rcheb/numeric.hpp"
#include "rcheb/series.hpp"
#include "rcheb/stat_series.hpp"

namespace rcheb {

/// Chebyshev polynomial in the monomial basis, built by the coefficient form
/// of the three-term recurrence. Evaluation from values (cheb_T/cheb_U) is the
/// numerically preferred route; the expanded coefficients exist for the
/// polynomial identities (they grow like 2^n).
struct ChebPolynomial {
  enum class Kind { First, Second };

  Kind kind;
  int degree;
  std::vector<double> coeffs;  // coeffs[i] multiplies s^i

  static ChebPolynomial first(int n) { return build(Kind::First, n); }
  static ChebPolynomial second(int n) { return build(Kind::Second, n); }

  double operator()(double s) const {
    double r = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) r = r * s + coeffs[i];
    return r;
  }

 private:
  static ChebPolynomial build(Kind kind, int n) {
    if (n < 0) throw ConfigError("ChebPolynomial: degree must be >= 0");
    std::vector<double> prev = {1.0};
    std::vector<double> cur = {0.0, kind == Kind::First ? 1.0 : 2.0};
    if (n == 0) return {kind, 0, std::move(prev)};
    for (int i = 1; i < n; ++i) {
      std::vector<double> next(static_cast<std::size_t>(i) + 2, 0.0);
      for (std::size_t j = 0; j < cur.size(); ++j) next[j + 1] = 2.0 * cur[j];
      for (std::size_t j = 0; j < prev.size(); ++j) next[j] -= prev[j];
      prev = std::move(cur);
      cur = std::move(next);
    }
    return {kind, n, std::move(cur)};
  }
};

/// Chebyshev polynomial of the first kind by the three-term recurrence
/// (avoids arccos cancellation near |s| -> 1).
inline double cheb_T(int n, double s) {
  if (n < 0) throw ConfigError("cheb_T: degree must be >= 0");
  if (!(s >= -1.0 && s <= 1.0))
    throw DomainError("cheb_T: s must lie in [-1,1], got s=" + detail::format_num(s));
  double prev = 1.0, cur = s;
  if (n == 0) return prev;
  for (int i = 1; i < n; ++i) {
    const double next = 2.0 * s * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Chebyshev polynomial of the second kind.
inline double cheb_U(int n, double s) {
  if (n < 0) throw ConfigError("cheb_U: degree must be >= 0");
  if (!(s >= -1.0 && s <= 1.0))
    throw DomainError("cheb_U: s must lie in [-1,1], got s=" + detail::format_num(s));
  double prev = 1.0, cur = 2.0 * s;
  if (n == 0) return prev;
  for (int i = 1; i < n; ++i) {
    const double next = 2.0 * s * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Solution path for fixed (a, y0, y1) at a precomputed angle th = theta(s):
/// Y = y0 cos(a th) - (y1/a) sin(a th), with the second term evaluated as
/// y1 * th * sinc(a th) so a = 0 needs no special case.
inline double path_Y_theta(double a, double y0, double y1, double th) {
  return y0 * std::cos(a * th) - y1 * th * sinc(a * th);
}

inline double path_Y(double a, double y0, double y1, double s) {
  return path_Y_theta(a, y0, y1, theta(s));
}

namespace detail {

/// cos(a pi/2), sin(a pi/2) for integer a, exactly in {-1, 0, 1}.
inline std::pair<double, double> half_pi_phase(int a) {
  switch (((a % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace detail

/// Random-Chebyshev-polynomial form of the path for positive integer degree:
/// cos(a pi/2) [y0 T_a - (y1/a) U_{a-1} sin(arccos s)]
///   + sin(a pi/2) [y0 U_{a-1} sin(arccos s) + (y1/a) T_a].
inline double path_Y_cheb(int a, double y0, double y1, double s) {
  if (a < 1)
    throw DomainError("path_Y_cheb: a must be a positive integer, got " + std::to_string(a) +
                      " (use path_Y for non-integer coefficients)");
  if (!(s > -1.0 && s < 1.0))
    throw DomainError("path_Y_cheb: s must lie in (-1,1), got s=" + detail::format_num(s));
  const auto [ca, sa] = detail::half_pi_phase(a);
  const double sn = std::sqrt(1.0 - s * s);  // sin(arccos s)
  const double t = cheb_T(a, s);
  const double u = cheb_U(a - 1, s);
  const double y1a = y1 / static_cast<double>(a);
  return ca * (y0 * t - y1a * u * sn) + sa * (y0 * u * sn + y1a * t);
}

namespace detail {

struct IntegerAtom {
  int value;
  double prob;
};

/// Positive-integer atoms of a discrete (or point-mass) coefficient law.
inline std::vector<IntegerAtom> integer_atoms(const DistributionModel& model) {
  std::vector<std::pair<double, double>> raw;
  if (model.kind() == DistKind::Discrete) {
    const auto& d = std::get<DiscreteLaw>(model.law());
    for (std::size_t i = 0; i < d.values.size(); ++i) raw.emplace_back(d.values[i], d.probs[i]);
  } else if (model.kind() == DistKind::PointMass) {
    raw.emplace_back(std::get<PointMassLaw>(model.law()).value, 1.0);
  } else {
    throw DomainError("exact discrete method: coefficient law " + model.label() +
                      " is not discrete");
  }
  std::vector<IntegerAtom> atoms;
  for (auto [v, p] : raw) {
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9 || r < 1.0)
      throw DomainError("exact discrete method: support value " + format_num(v) +
                        " is not a positive integer");
    atoms.push_back({static_cast<int>(r), p});
  }
  return atoms;
}

}  // namespace detail

/// E[Y(s)] for integer-valued discrete A, factored by independence of A and
/// (Y0, Y1): sum over atoms of the polynomial path with unit initial data.
inline double exact_mean_discrete(const DistributionModel& a_model, double y0_mean,
                                  double y1_mean, double s) {
  KahanSum sum;
  for (const auto& atom : detail::integer_atoms(a_model))
    sum.add(atom.prob * path_Y_cheb(atom.value, y0_mean, y1_mean, s));
  return sum.value();
}

/// E[Y(s)^2] for integer-valued discrete A. With P_a, Q_a the unit-data paths,
/// E[Y^2] = E[Y0^2] E[P^2] + E[Y1^2] E[Q^2] + 2 E[Y0] E[Y1] E[PQ].
inline double exact_second_moment_discrete(const DistributionModel& a_model,
                                           const InitialMoments& ic, double s) {
  KahanSum sum;
  for (const auto& atom : detail::integer_atoms(a_model)) {
    const double p = path_Y_cheb(atom.value, 1.0, 0.0, s);
    const double q = path_Y_cheb(atom.value, 0.0, 1.0, s);
    sum.add(atom.prob * (ic.y0_second * p * p + ic.y1_second * q * q +
                         2.0 * ic.y0_mean * ic.y1_mean * p * q));
  }
  return sum.value();
}

inline StatSeries exact_discrete_grid(const DistributionModel& a_model, const InitialMoments& ic,
                                      std::span<const double> grid) {
  StatSeries out;
  out.method = "exact";
  out.grid.assign(grid.begin(), grid.end());
  for (double s : grid) {
    const double m = exact_mean_discrete(a_model, ic.y0_mean, ic.y1_mean, s);
    const double m2 = exact_second_moment_discrete(a_model, ic, s);
    out.mean.push_back(m);
    out.second_moment.push_back(m2);
    out.std_dev.push_back(TruncatedSolution::clamped_std(m2, m));
  }
  return out;
}

namespace detail {

inline constexpr int kSeriesTermCap = 500;
inline constexpr double kSeriesRelTol = 1e-12;

/// Grow-on-demand cache of E[(A^2)^k].
class A2MomentCache {
 public:
  explicit A2MomentCache(const DistributionModel& model) : model_(&model) {}

  double get(int k) {
    while (static_cast<int>(mu_.size()) <= k)
      mu_.push_back(raw_moment(*model_, 2 * static_cast<int>(mu_.size())));
    return mu_[static_cast<std::size_t>(k)];
  }

 private:
  const DistributionModel* model_;
  std::vector<double> mu_;
};

/// sum_{k>=0} mu_k c_k where c_0 = first and c_k = c_{k-1} * q / divisor(k).
/// Stops once two consecutive terms fall below the relative tolerance.
template <class Divisor>
double moment_series(A2MomentCache& mu, double first, double q, Divisor divisor,
                     const char* what) {
  KahanSum sum;
  double c = first;
  double max_mag = 0.0;
  double prev_term = 0.0;
  for (int k = 0; k < kSeriesTermCap; ++k) {
    const double term = mu.get(k) * c;
    sum.add(term);
    max_mag = std::max(max_mag, std::abs(term));
    const double scale = std::max(std::abs(sum.value()), max_mag * 1e-3);
    if (k > 0 && std::abs(term) <= kSeriesRelTol * scale &&
        std::abs(prev_term) <= kSeriesRelTol * scale)
      return sum.value();
    prev_term = term;
    c *= q / divisor(k + 1);
  }
  const double next_term = mu.get(kSeriesTermCap) * c;
  const double last_ratio = prev_term != 0.0 ? std::abs(next_term / prev_term) : std::abs(next_term);
  throw ConvergenceError(std::string(what) + ": series not converged after " +
                         std::to_string(kSeriesTermCap) +
                         " terms; last term ratio " + format_num(last_ratio));
}

// The five A-expectations of the untruncated solution, each a convergent
// even/odd moment series in theta. None divides by A.
inline double expect_cos(A2MomentCache& mu, double th) {
  const double q = -th * th;
  return moment_series(mu, 1.0, q,
                       [](int k) { return static_cast<double>((2 * k - 1) * (2 * k)); },
                       "E[cos(A theta)]");
}

inline double expect_sin_over_a(A2MomentCache& mu, double th) {
  const double q = -th * th;
  return moment_series(mu, th, q,
                       [](int k) { return static_cast<double>((2 * k) * (2 * k + 1)); },
                       "E[sin(A theta)/A]");
}

inline double expect_cos2(A2MomentCache& mu, double th) {
  const double q = -4.0 * th * th;
  const double cos_2a = moment_series(
      mu, 1.0, q, [](int k) { return static_cast<double>((2 * k - 1) * (2 * k)); },
      "E[cos(2 A theta)]");
  return 0.5 * (1.0 + cos_2a);
}

inline double expect_sin2_over_a2(A2MomentCache& mu, double th) {
  const double q = -4.0 * th * th;
  return moment_series(mu, th * th, q,
                       [](int k) { return static_cast<double>((2 * k + 1) * (2 * k + 2)); },
                       "E[sin^2(A theta)/A^2]");
}

inline double expect_cos_sin_over_a(A2MomentCache& mu, double th) {
  const double q = -4.0 * th * th;
  return moment_series(mu, th, q,
                       [](int k) { return static_cast<double>((2 * k) * (2 * k + 1)); },
                       "E[cos(A theta) sin(A theta)/A]");
}

}  // namespace detail

/// Exact mean of the untruncated solution:
/// E[Y(s)] = E[Y0] E[cos(A theta)] - E[Y1] E[sin(A theta)/A].
inline double theoretical_mean(const DistributionModel& a_model, const InitialMoments& ic,
                               double s) {
  detail::A2MomentCache mu(a_model);
  const double th = theta(s);
  return ic.y0_mean * detail::expect_cos(mu, th) - ic.y1_mean * detail::expect_sin_over_a(mu, th);
}

/// Exact second moment, from squaring the closed-form path under independence.
inline double theoretical_second_moment(const DistributionModel& a_model,
                                        const InitialMoments& ic, double s) {
  detail::A2MomentCache mu(a_model);
  const double th = theta(s);
  return ic.y0_second * detail::expect_cos2(mu, th) +
         ic.y1_second * detail::expect_sin2_over_a2(mu, th) -
         2.0 * ic.y0_mean * ic.y1_mean * detail::expect_cos_sin_over_a(mu, th);
}

inline double theoretical_std(const DistributionModel& a_model, const InitialMoments& ic,
                              double s) {
  return TruncatedSolution::clamped_std(theoretical_second_moment(a_model, ic, s),
                                        theoretical_mean(a_model, ic, s));
}

inline StatSeries theoretical_grid(const DistributionModel& a_model, const InitialMoments& ic,
                                   std::span<const double> grid) {
  detail::A2MomentCache mu(a_model);
  StatSeries out;
  out.method = "theoretical";
  out.grid.assign(grid.begin(), grid.end());
  for (double s : grid) {
    const double th = theta(s);
    const double m =
        ic.y0_mean * detail::expect_cos(mu, th) - ic.y1_mean * detail::expect_sin_over_a(mu, th);
    const double m2 = ic.y0_second * detail::expect_cos2(mu, th) +
                      ic.y1_second * detail::expect_sin2_over_a2(mu, th) -
                      2.0 * ic.y0_mean * ic.y1_mean * detail::expect_cos_sin_over_a(mu, th);
    out.mean.push_back(m);
    out.second_moment.push_back(m2);
    out.std_dev.push_back(TruncatedSolution::clamped_std(m2, m));
  }
  return out;
}

}  // namespace rcheb
