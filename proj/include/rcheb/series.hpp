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
#include "rcheb/stat_series.hpp"

namespace rcheb {

/// Series expansion variable: theta(s) = arccos(s) - pi/2, the angle measured
/// from the initial-condition point s = 0.
inline double theta(double s) {
  if (!(s > -1.0 && s < 1.0))
    throw DomainError("theta: s must lie in (-1,1), got s=" + detail::format_num(s));
  return std::acos(s) - std::numbers::pi / 2;
}

struct ThetaPoint {
  double s;
  double theta;
};

inline ThetaPoint theta_point(double s) { return {s, theta(s)}; }

/// F(s; a2, N) = sum_{k=0}^{N} (-1)^k a2^k theta^{2k} / (2k)! for one sample
/// a2 of the squared coefficient. Terms build by recurrence.
inline double eval_F(double s, double a2, int N) {
  if (!(a2 >= 0.0)) throw DomainError("eval_F: a2 must be >= 0 (a squared sample)");
  const double th = theta(s);
  const double q = -a2 * th * th;
  KahanSum sum;
  double term = 1.0;
  for (int k = 0;; ++k) {
    sum.add(term);
    if (k == N) break;
    term *= q / static_cast<double>((2 * k + 1) * (2 * k + 2));
  }
  return sum.value();
}

/// G(s; a2, N) = sum_{k=0}^{N} (-1)^{k+1} a2^k theta^{2k+1} / (2k+1)!.
inline double eval_G(double s, double a2, int N) {
  if (!(a2 >= 0.0)) throw DomainError("eval_G: a2 must be >= 0 (a squared sample)");
  const double th = theta(s);
  const double q = -a2 * th * th;
  KahanSum sum;
  double term = -th;
  for (int k = 0;; ++k) {
    sum.add(term);
    if (k == N) break;
    term *= q / static_cast<double>((2 * k + 2) * (2 * k + 3));
  }
  return sum.value();
}

/// First and second moments of the initial conditions Y0, Y1.
struct InitialMoments {
  double y0_mean = 0.0;
  double y0_second = 0.0;
  double y1_mean = 0.0;
  double y1_second = 0.0;

  static InitialMoments from_models(const DistributionModel& y0, const DistributionModel& y1) {
    return {raw_moment(y0, 1), raw_moment(y0, 2), raw_moment(y1, 1), raw_moment(y1, 2)};
  }
};

/// Truncated-series method at order N: moment-exact mean, second moment and
/// standard deviation of Y_N(s) = Y0 F(s;A,N) + Y1 G(s;A,N).
///
/// The cross-moment double sums over (j,k) are collapsed by total degree
/// p = j + k into single sums with precomputed convolution coefficients, so
/// setup is O(N^2) and each grid point costs O(N).
class TruncatedSolution {
 public:
  TruncatedSolution(const DistributionModel& a_model, int order, InitialMoments ic)
      : TruncatedSolution(a2_moment_table(a_model, 2 * check_order(order)), order, ic) {}

  /// Builds from an existing moment table; operations that need orders the
  /// table does not cover throw OrderError naming the missing order.
  TruncatedSolution(MomentTable table, int order, InitialMoments ic)
      : n_(check_order(order)), ic_(ic), mu_(std::move(table)) {
    const std::size_t count = static_cast<std::size_t>(n_) + 1;
    inv_fact_even_.resize(count);
    inv_fact_odd_.resize(count);
    double fe = 1.0, fo = 1.0;  // 1/(2k)!, 1/(2k+1)!
    for (std::size_t k = 0; k < count; ++k) {
      if (k > 0) {
        fe /= static_cast<double>((2 * k - 1) * (2 * k));
        fo /= static_cast<double>((2 * k) * (2 * k + 1));
      }
      inv_fact_even_[k] = fe;
      inv_fact_odd_[k] = fo;
    }
    const std::size_t conv = 2 * static_cast<std::size_t>(n_) + 1;
    c_ff_.assign(conv, 0.0);
    c_gg_.assign(conv, 0.0);
    c_fg_.assign(conv, 0.0);
    for (std::size_t j = 0; j < count; ++j) {
      for (std::size_t k = 0; k < count; ++k) {
        c_ff_[j + k] += inv_fact_even_[j] * inv_fact_even_[k];
        c_gg_[j + k] += inv_fact_odd_[j] * inv_fact_odd_[k];
        c_fg_[j + k] += inv_fact_even_[j] * inv_fact_odd_[k];
      }
    }
  }

  int order() const { return n_; }
  const MomentTable& moments() const { return mu_; }
  const InitialMoments& initial_moments() const { return ic_; }

  double expected_F(double s) const {
    const double th = theta(s);
    const double th2 = th * th;
    KahanSum sum;
    double sign = 1.0, power = 1.0;  // (-1)^k, theta^{2k}
    for (int k = 0; k <= n_; ++k) {
      sum.add(sign * mu_.at(k) * power * inv_fact_even_[static_cast<std::size_t>(k)]);
      sign = -sign;
      power *= th2;
    }
    return sum.value();
  }

  double expected_G(double s) const {
    const double th = theta(s);
    const double th2 = th * th;
    KahanSum sum;
    double sign = -1.0, power = th;  // (-1)^{k+1}, theta^{2k+1}
    for (int k = 0; k <= n_; ++k) {
      sum.add(sign * mu_.at(k) * power * inv_fact_odd_[static_cast<std::size_t>(k)]);
      sign = -sign;
      power *= th2;
    }
    return sum.value();
  }

  double expected_F2(double s) const {
    const double th = theta(s);
    return convolved_sum(c_ff_, th * th, 1.0, 1.0);
  }

  double expected_G2(double s) const {
    const double th = theta(s);
    return convolved_sum(c_gg_, th * th, th * th, 1.0);
  }

  double expected_FG(double s) const {
    const double th = theta(s);
    return convolved_sum(c_fg_, th * th, th, -1.0);
  }

  /// E[Y_N(s)] = E[Y0] E[F] + E[Y1] E[G].
  double mean(double s) const {
    return ic_.y0_mean * expected_F(s) + ic_.y1_mean * expected_G(s);
  }

  /// E[Y_N(s)^2] = E[Y0^2] E[F^2] + E[Y1^2] E[G^2] + 2 E[Y1] E[Y0] E[FG].
  double second_moment(double s) const {
    return ic_.y0_second * expected_F2(s) + ic_.y1_second * expected_G2(s) +
           2.0 * ic_.y1_mean * ic_.y0_mean * expected_FG(s);
  }

  double std_dev(double s) const {
    return clamped_std(second_moment(s), mean(s));
  }

  StatSeries solve_grid(std::span<const double> grid) const {
    StatSeries out;
    out.method = "tsm";
    out.grid.assign(grid.begin(), grid.end());
    out.mean.reserve(grid.size());
    out.std_dev.reserve(grid.size());
    out.second_moment.reserve(grid.size());
    for (double s : grid) {
      const double m = mean(s);
      const double m2 = second_moment(s);
      out.mean.push_back(m);
      out.second_moment.push_back(m2);
      out.std_dev.push_back(clamped_std(m2, m));
    }
    return out;
  }

  /// Tiny negative variances (>= -1e-12) are roundoff and clamp to zero;
  /// anything more negative is a genuine inconsistency.
  static double clamped_std(double second_moment, double mean) {
    const double var = second_moment - mean * mean;
    if (var < -1e-12)
      throw Error("negative variance " + detail::format_num(var) +
                  " exceeds the roundoff clamp of -1e-12");
    return std::sqrt(std::max(0.0, var));
  }

 private:
  // 2N <= 400 keeps theta^{2p} finite at every s in (-1,1); beyond that the
  // power can overflow against an underflowed coefficient and make NaN.
  static int check_order(int order) {
    if (order < 0) throw ConfigError("TruncatedSolution: truncation order must be >= 0");
    if (order > 200) throw ConfigError("TruncatedSolution: truncation order above 200");
    return order;
  }

  /// sum_{p=0}^{2N} (-1)^p c[p] mu_p theta^{2p} * prefactor_power, with an
  /// overall sign; used by the three collapsed cross-moment sums.
  double convolved_sum(const std::vector<double>& coeff, double th2, double prefactor,
                       double overall_sign) const {
    KahanSum sum;
    double sign = 1.0, power = prefactor;
    for (std::size_t p = 0; p < coeff.size(); ++p) {
      sum.add(sign * coeff[p] * mu_.at(static_cast<int>(p)) * power);
      sign = -sign;
      power *= th2;
    }
    return overall_sign * sum.value();
  }

  int n_;
  InitialMoments ic_;
  MomentTable mu_;
  std::vector<double> inv_fact_even_;
  std::vector<double> inv_fact_odd_;
  std::vector<double> c_ff_, c_gg_, c_fg_;
};

}  // namespace rcheb
