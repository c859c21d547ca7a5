#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rcheb/errors.hpp"
#include "rcheb/numeric.hpp"
#include "rcheb/quadrature.hpp"
#include "rcheb/rng.hpp"

namespace rcheb {

enum class DistKind { CenteredGaussian, Uniform, Beta, Discrete, PointMass, Truncated };

struct Support {
  double lo = 0.0;
  double hi = 0.0;
  bool bounded = false;
};

class DistributionModel;

struct GaussianLaw {
  double sigma;  // standard deviation; the law is N(0, sigma^2)
};
struct UniformLaw {
  double lo, hi;
};
struct BetaLaw {
  double alpha, beta;
};
struct DiscreteLaw {
  std::vector<double> values;
  std::vector<double> probs;
};
struct PointMassLaw {
  double value;
};
struct TruncatedLaw {
  std::shared_ptr<const DistributionModel> base;
  double lo, hi;    // effective bounds: requested window intersected with base support
  double mass;      // base probability of [lo, hi]
};

namespace detail {

inline double ipow(double base, int exp) {
  double r = 1.0;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

inline std::string format_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace detail

/// A coefficient or initial-condition random variable. Immutable after
/// construction; factories validate parameters.
class DistributionModel {
 public:
  using Law = std::variant<GaussianLaw, UniformLaw, BetaLaw, DiscreteLaw, PointMassLaw,
                           TruncatedLaw>;

  static DistributionModel centered_gaussian(double sigma, std::string label = "") {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw ConfigError("centered_gaussian: sigma must be positive, got " +
                        detail::format_num(sigma));
    if (label.empty()) label = "normal(0," + detail::format_num(sigma * sigma) + ")";
    return DistributionModel(GaussianLaw{sigma}, std::move(label));
  }

  static DistributionModel uniform(double a, double b, std::string label = "") {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
      throw ConfigError("uniform: requires a < b, got a=" + detail::format_num(a) +
                        ", b=" + detail::format_num(b));
    if (label.empty())
      label = "uniform(" + detail::format_num(a) + "," + detail::format_num(b) + ")";
    return DistributionModel(UniformLaw{a, b}, std::move(label));
  }

  static DistributionModel beta(double alpha, double beta_, std::string label = "") {
    if (!(alpha > 0.0) || !(beta_ > 0.0))
      throw ConfigError("beta: shape parameters must be positive, got alpha=" +
                        detail::format_num(alpha) + ", beta=" + detail::format_num(beta_));
    if (label.empty())
      label = "beta(" + detail::format_num(alpha) + "," + detail::format_num(beta_) + ")";
    return DistributionModel(BetaLaw{alpha, beta_}, std::move(label));
  }

  static DistributionModel discrete(std::vector<double> values, std::vector<double> probs,
                                    std::string label = "") {
    if (values.empty() || values.size() != probs.size())
      throw ConfigError("discrete: values and probs must be non-empty and equal-sized");
    KahanSum total;
    for (double p : probs) {
      if (!(p >= 0.0)) throw ConfigError("discrete: probabilities must be >= 0");
      total.add(p);
    }
    if (std::abs(total.value() - 1.0) > 1e-12)
      throw ConfigError("discrete: probabilities sum to " + detail::format_num(total.value()) +
                        ", expected 1 within 1e-12");
    if (label.empty()) label = "discrete(" + std::to_string(values.size()) + " atoms)";
    return DistributionModel(DiscreteLaw{std::move(values), std::move(probs)}, std::move(label));
  }

  static DistributionModel point_mass(double c, std::string label = "") {
    if (!std::isfinite(c)) throw ConfigError("point_mass: value must be finite");
    if (label.empty()) label = "point(" + detail::format_num(c) + ")";
    return DistributionModel(PointMassLaw{c}, std::move(label));
  }

  static DistributionModel truncated(DistributionModel base, double lower, double upper,
                                     std::string label = "");

  DistKind kind() const {
    switch (law_.index()) {
      case 0: return DistKind::CenteredGaussian;
      case 1: return DistKind::Uniform;
      case 2: return DistKind::Beta;
      case 3: return DistKind::Discrete;
      case 4: return DistKind::PointMass;
      default: return DistKind::Truncated;
    }
  }

  const Law& law() const { return law_; }
  const std::string& label() const { return label_; }

  Support support() const {
    struct Visitor {
      Support operator()(const GaussianLaw&) const { return {0.0, 0.0, false}; }
      Support operator()(const UniformLaw& u) const { return {u.lo, u.hi, true}; }
      Support operator()(const BetaLaw&) const { return {0.0, 1.0, true}; }
      Support operator()(const DiscreteLaw& d) const {
        auto [lo, hi] = std::minmax_element(d.values.begin(), d.values.end());
        return {*lo, *hi, true};
      }
      Support operator()(const PointMassLaw& p) const { return {p.value, p.value, true}; }
      Support operator()(const TruncatedLaw& t) const { return {t.lo, t.hi, true}; }
    };
    return std::visit(Visitor{}, law_);
  }

  bool has_density() const {
    struct Visitor {
      bool operator()(const GaussianLaw&) const { return true; }
      bool operator()(const UniformLaw&) const { return true; }
      bool operator()(const BetaLaw&) const { return true; }
      bool operator()(const DiscreteLaw&) const { return false; }
      bool operator()(const PointMassLaw&) const { return false; }
      bool operator()(const TruncatedLaw& t) const { return t.base->has_density(); }
    };
    return std::visit(Visitor{}, law_);
  }

  double density(double x) const {
    struct Visitor {
      double x;
      double operator()(const GaussianLaw& g) const {
        const double z = x / g.sigma;
        return std::exp(-0.5 * z * z) / (g.sigma * std::sqrt(2.0 * std::numbers::pi));
      }
      double operator()(const UniformLaw& u) const {
        return (x >= u.lo && x <= u.hi) ? 1.0 / (u.hi - u.lo) : 0.0;
      }
      double operator()(const BetaLaw& b) const {
        if (x < 0.0 || x > 1.0) return 0.0;
        return std::pow(x, b.alpha - 1.0) * std::pow(1.0 - x, b.beta - 1.0) /
               std::beta(b.alpha, b.beta);
      }
      double operator()(const DiscreteLaw&) const {
        throw Error("density: discrete law has no density");
      }
      double operator()(const PointMassLaw&) const {
        throw Error("density: point mass has no density");
      }
      double operator()(const TruncatedLaw& t) const {
        if (x < t.lo || x > t.hi) return 0.0;
        return t.base->density(x) / t.mass;
      }
    };
    return std::visit(Visitor{x}, law_);
  }

 private:
  DistributionModel(Law law, std::string label) : law_(std::move(law)), label_(std::move(label)) {}

  Law law_;
  std::string label_;
};

/// E[A^k], exact closed form where one exists, otherwise adaptive quadrature
/// at relative tolerance 1e-12. Never returns NaN: unsupported combinations
/// and overflowing moments throw.
inline double raw_moment(const DistributionModel& model, int k) {
  if (k < 0) throw UnsupportedMomentError("raw_moment: order must be >= 0, got " +
                                          std::to_string(k));
  if (k == 0) return 1.0;
  struct Visitor {
    const DistributionModel& model;
    int k;

    double operator()(const GaussianLaw& g) const {
      if (k % 2 == 1) return 0.0;
      const int m = k / 2;
      const double s2 = g.sigma * g.sigma;
      double r = 1.0;  // (2m)!/(2^m m!) sigma^{2m} built as prod of (2i-1) sigma^2
      for (int i = 1; i <= m; ++i) {
        r *= static_cast<double>(2 * i - 1) * s2;
        if (!std::isfinite(r))
          throw MomentOverflowError("raw_moment: gaussian moment overflow at order " +
                                        std::to_string(k),
                                    k);
      }
      return r;
    }

    double operator()(const UniformLaw& u) const {
      const double num = detail::ipow(u.hi, k + 1) - detail::ipow(u.lo, k + 1);
      const double r = num / (static_cast<double>(k + 1) * (u.hi - u.lo));
      if (!std::isfinite(r))
        throw MomentOverflowError("raw_moment: uniform moment overflow at order " +
                                      std::to_string(k),
                                  k);
      return r;
    }

    double operator()(const BetaLaw& b) const {
      double r = 1.0;
      for (int i = 0; i < k; ++i) r *= (b.alpha + i) / (b.alpha + b.beta + i);
      return r;
    }

    double operator()(const DiscreteLaw& d) const {
      KahanSum sum;
      for (std::size_t i = 0; i < d.values.size(); ++i)
        sum.add(d.probs[i] * detail::ipow(d.values[i], k));
      const double r = sum.value();
      if (!std::isfinite(r))
        throw MomentOverflowError("raw_moment: discrete moment overflow at order " +
                                      std::to_string(k),
                                  k);
      return r;
    }

    double operator()(const PointMassLaw& p) const {
      const double r = detail::ipow(p.value, k);
      if (!std::isfinite(r))
        throw MomentOverflowError("raw_moment: point-mass moment overflow at order " +
                                      std::to_string(k),
                                  k);
      return r;
    }

    double operator()(const TruncatedLaw& t) const {
      if (t.base->kind() == DistKind::PointMass)
        return detail::ipow(std::get<PointMassLaw>(t.base->law()).value, k);
      if (t.base->kind() == DistKind::Discrete) {
        const auto& d = std::get<DiscreteLaw>(t.base->law());
        KahanSum sum;
        for (std::size_t i = 0; i < d.values.size(); ++i)
          if (d.values[i] >= t.lo && d.values[i] <= t.hi)
            sum.add(d.probs[i] * detail::ipow(d.values[i], k));
        return sum.value() / t.mass;
      }
      if (!t.base->has_density())
        throw UnsupportedMomentError("raw_moment: truncated base lacks a density and is not "
                                     "atomic; cannot compute order " +
                                     std::to_string(k));
      const auto& base = *t.base;
      const int order = k;
      auto integrand = [&base, order](double x) {
        return detail::ipow(x, order) * base.density(x);
      };
      const double r = integrate_adaptive(integrand, t.lo, t.hi, 1e-12).value / t.mass;
      if (!std::isfinite(r))
        throw MomentOverflowError("raw_moment: truncated moment overflow at order " +
                                      std::to_string(k),
                                  k);
      return r;
    }
  };
  return std::visit(Visitor{model, k}, model.law());
}

inline DistributionModel DistributionModel::truncated(DistributionModel base, double lower,
                                                      double upper, std::string label) {
  if (!(lower < upper))
    throw ConfigError("truncated: requires lower < upper, got lower=" +
                      detail::format_num(lower) + ", upper=" + detail::format_num(upper));
  const Support sup = base.support();
  double lo = lower, hi = upper;
  if (sup.bounded) {
    if (lo <= sup.lo && hi >= sup.hi) return base;  // window encloses the support
    lo = std::max(lo, sup.lo);
    hi = std::min(hi, sup.hi);
    if (!(lo < hi))
      throw ConfigError("truncated: window [" + detail::format_num(lower) + "," +
                        detail::format_num(upper) + "] misses the support of " + base.label());
  }
  double mass = 0.0;
  switch (base.kind()) {
    case DistKind::PointMass: {
      const double c = std::get<PointMassLaw>(base.law()).value;
      mass = (c >= lo && c <= hi) ? 1.0 : 0.0;
      break;
    }
    case DistKind::Discrete: {
      const auto& d = std::get<DiscreteLaw>(base.law());
      KahanSum sum;
      for (std::size_t i = 0; i < d.values.size(); ++i)
        if (d.values[i] >= lo && d.values[i] <= hi) sum.add(d.probs[i]);
      mass = sum.value();
      break;
    }
    default: {
      const DistributionModel& b = base;
      mass = integrate_adaptive([&b](double x) { return b.density(x); }, lo, hi, 1e-12).value;
      break;
    }
  }
  if (!(mass > 0.0))
    throw ConfigError("truncated: window [" + detail::format_num(lower) + "," +
                      detail::format_num(upper) + "] carries no probability mass of " +
                      base.label());
  if (label.empty())
    label = "trunc(" + base.label() + "," + detail::format_num(lower) + "," +
            detail::format_num(upper) + ")";
  auto base_ptr = std::make_shared<const DistributionModel>(std::move(base));
  return DistributionModel(TruncatedLaw{std::move(base_ptr), lo, hi, mass}, std::move(label));
}

inline double model_mean(const DistributionModel& model) { return raw_moment(model, 1); }

inline double model_variance(const DistributionModel& model) {
  const double m1 = raw_moment(model, 1);
  return std::max(0.0, raw_moment(model, 2) - m1 * m1);
}

/// Cached even-power moments: values[n] = E[(A^2)^n] = E[A^{2n}], n = 0..max_order.
struct MomentTable {
  std::string label;
  int max_order = 0;
  std::vector<double> values;

  double at(int n) const {
    if (n < 0 || n > max_order)
      throw OrderError("moment table for " + label + " covers orders 0.." +
                       std::to_string(max_order) + ", missing order " + std::to_string(n));
    return values[static_cast<std::size_t>(n)];
  }
};

inline MomentTable a2_moment_table(const DistributionModel& model, int max_order) {
  if (max_order < 0) throw ConfigError("a2_moment_table: max_order must be >= 0");
  MomentTable table;
  table.label = model.label();
  table.max_order = max_order;
  table.values.reserve(static_cast<std::size_t>(max_order) + 1);
  for (int n = 0; n <= max_order; ++n) table.values.push_back(raw_moment(model, 2 * n));
  return table;
}

/// ||(A^2)^n||_4 = (E[A^{8n}])^{1/4}.
inline double a2_norm4(const DistributionModel& model, int n) {
  if (n < 0) throw ConfigError("a2_norm4: n must be >= 0");
  return std::pow(raw_moment(model, 8 * n), 0.25);
}

enum class GrowthVerdict { Admissible, Inconclusive, Violated };

inline const char* to_string(GrowthVerdict v) {
  switch (v) {
    case GrowthVerdict::Admissible: return "admissible";
    case GrowthVerdict::Inconclusive: return "inconclusive";
    default: return "violated";
  }
}

/// Verdict plus fitted (M, kappa) evidence for the moment-growth condition
/// governing mean-square convergence of the solution series.
struct GrowthReport {
  std::string label;
  int max_n = 0;               // requested check depth
  std::vector<double> ratios;  // ratios[n] = ||(A^2)^{n+1}||_4 / ||(A^2)^n||_4
  double kappa = 0.0;
  double big_m = 0.0;
  GrowthVerdict verdict = GrowthVerdict::Inconclusive;
  std::string note;
};

namespace detail {

/// Least squares of log(ratio[n]) on log(n) over n >= 2.
/// Returns {slope, exp(intercept)}; {0, 1} when fewer than two usable points.
inline std::pair<double, double> fit_growth_ratios(const std::vector<double>& ratios) {
  std::vector<double> xs, ys;
  for (std::size_t n = 2; n < ratios.size(); ++n) {
    if (ratios[n] > 0.0 && std::isfinite(ratios[n])) {
      xs.push_back(std::log(static_cast<double>(n)));
      ys.push_back(std::log(ratios[n]));
    }
  }
  if (xs.size() < 2) return {0.0, 1.0};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double n = static_cast<double>(xs.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return {0.0, std::exp(sy / n)};
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  return {slope, std::exp(intercept)};
}

}  // namespace detail

/// Checks the ratio form of the admissibility condition: computes
/// ||(A^2)^{n+1}||_4 / ||(A^2)^n||_4 for n = 0..n_max-1 and classifies.
/// Bounded laws are admissible with kappa=0 and M=H^2, H=max{1, lo^2, hi^2};
/// the centered gaussian is admissible with kappa=1. Anything else gets a
/// least-squares kappa fit, which alone never upgrades past "inconclusive".
inline GrowthReport check_growth_condition(const DistributionModel& model, int n_max) {
  if (n_max < 2) throw ConfigError("check_growth_condition: n_max must be >= 2");
  GrowthReport report;
  report.label = model.label();
  report.max_n = n_max;

  std::vector<double> norms;
  bool overflowed = false;
  std::string overflow_note;
  for (int n = 0; n <= n_max; ++n) {
    try {
      norms.push_back(a2_norm4(model, n));
    } catch (const MomentOverflowError& e) {
      overflowed = true;
      overflow_note = std::string("partial: ") + e.what();
      break;
    }
  }
  for (std::size_t n = 0; n + 1 < norms.size(); ++n)
    report.ratios.push_back(norms[n + 1] / norms[n]);

  const auto [fit_kappa, fit_m] = detail::fit_growth_ratios(report.ratios);

  if (overflowed) {
    report.verdict = GrowthVerdict::Inconclusive;
    report.kappa = fit_kappa;
    report.big_m = fit_m;
    report.note = overflow_note;
    return report;
  }

  const Support sup = model.support();
  if (sup.bounded) {
    const double h = std::max({1.0, sup.lo * sup.lo, sup.hi * sup.hi});
    report.verdict = GrowthVerdict::Admissible;
    report.kappa = 0.0;
    report.big_m = h * h;
    report.note = "bounded support; H=" + detail::format_num(h);
    return report;
  }
  if (model.kind() == DistKind::CenteredGaussian) {
    // Intercept with the slope pinned at the proven kappa=1.
    KahanSum acc;
    int count = 0;
    for (std::size_t n = 2; n < report.ratios.size(); ++n) {
      acc.add(std::log(report.ratios[n]) - std::log(static_cast<double>(n)));
      ++count;
    }
    report.verdict = GrowthVerdict::Admissible;
    report.kappa = 1.0;
    report.big_m = count > 0 ? std::exp(acc.value() / count) : fit_m;
    report.note = "centered gaussian";
    return report;
  }
  report.verdict = GrowthVerdict::Inconclusive;
  report.kappa = fit_kappa;
  report.big_m = fit_m;
  report.note = fit_kappa >= 2.0 ? "least-squares fit exceeds the admissible range"
                                 : "least-squares fit only; not a proof";
  return report;
}

namespace detail {

inline constexpr int kGammaAttemptCap = 1000;
inline constexpr int kTruncatedRejectionCap = 100000;

inline double sample_standard_normal(RngStream& rng) {
  const double u1 = rng.next_u01_open();
  const double u2 = rng.next_u01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Marsaglia-Tsang for shape >= 1; boosted for shape < 1.
inline double sample_gamma(double shape, RngStream& rng) {
  if (shape < 1.0) {
    const double u = rng.next_u01_open();
    return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (int attempt = 0; attempt < kGammaAttemptCap; ++attempt) {
    const double x = sample_standard_normal(rng);
    const double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = rng.next_u01_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
  throw SamplingStallError("sample_gamma: no acceptance within " +
                           std::to_string(kGammaAttemptCap) + " attempts");
}

}  // namespace detail

/// One variate from the model's law, consuming the given stream. Inverse CDF
/// where a closed form exists (uniform, beta(1,b), beta(a,1), discrete),
/// Box-Muller for the gaussian, rejection for truncated laws.
inline double sample(const DistributionModel& model, RngStream& rng) {
  struct Visitor {
    RngStream& rng;

    double operator()(const GaussianLaw& g) const {
      return g.sigma * detail::sample_standard_normal(rng);
    }
    double operator()(const UniformLaw& u) const {
      return u.lo + (u.hi - u.lo) * rng.next_u01();
    }
    double operator()(const BetaLaw& b) const {
      if (b.alpha == 1.0) return 1.0 - std::pow(1.0 - rng.next_u01(), 1.0 / b.beta);
      if (b.beta == 1.0) return std::pow(rng.next_u01(), 1.0 / b.alpha);
      const double g1 = detail::sample_gamma(b.alpha, rng);
      const double g2 = detail::sample_gamma(b.beta, rng);
      return g1 / (g1 + g2);
    }
    double operator()(const DiscreteLaw& d) const {
      const double u = rng.next_u01();
      double cum = 0.0;
      for (std::size_t i = 0; i < d.values.size(); ++i) {
        cum += d.probs[i];
        if (u < cum) return d.values[i];
      }
      return d.values.back();
    }
    double operator()(const PointMassLaw& p) const { return p.value; }
    double operator()(const TruncatedLaw& t) const {
      for (int attempt = 0; attempt < detail::kTruncatedRejectionCap; ++attempt) {
        const double x = sample(*t.base, rng);
        if (x >= t.lo && x <= t.hi) return x;
      }
      throw SamplingStallError("sample: truncated rejection exceeded " +
                               std::to_string(detail::kTruncatedRejectionCap) + " attempts");
    }
  };
  return std::visit(Visitor{rng}, model.law());
}

/// Chebyshev-inequality truncation to [mu - k sigma, mu + k sigma]; the result
/// is bounded, hence admissible with kappa=0. Zero-variance models pass
/// through unchanged.
inline DistributionModel truncate_for_admissibility(const DistributionModel& model, double k) {
  if (!(k > 0.0)) throw ConfigError("truncate_for_admissibility: k must be positive");
  const double mu = model_mean(model);
  const double var = model_variance(model);
  if (var <= 0.0) return model;
  const double sigma = std::sqrt(var);
  return DistributionModel::truncated(model, mu - k * sigma, mu + k * sigma);
}

}  // namespace rcheb
