#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "rcheb/distribution.hpp"
#include "rcheb/errors.hpp"
#include "rcheb/numeric.hpp"

namespace rcheb {

namespace detail {

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  void expect(char c) {
    skip_ws();
    if (pos >= text.size() || text[pos] != c)
      throw ParseError("expected '" + std::string(1, c) + "' at position " + std::to_string(pos) +
                       " in \"" + std::string(text) + "\"");
    ++pos;
  }

  bool consume(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  std::string_view ident() {
    skip_ws();
    const std::size_t start = pos;
    while (pos < text.size() && std::isalpha(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start)
      throw ParseError("expected a name at position " + std::to_string(start) + " in \"" +
                       std::string(text) + "\"");
    return text.substr(start, pos - start);
  }

  double number_token() {
    skip_ws();
    const char* begin = text.data() + pos;
    const char* end = text.data() + text.size();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr == begin)
      throw ParseError("expected a number at position " + std::to_string(pos) + " in \"" +
                       std::string(text) + "\"");
    pos = static_cast<std::size_t>(ptr - text.data());
    return value;
  }

  /// Decimal or fraction "p/q".
  double number() {
    const double num = number_token();
    if (consume('/')) {
      const double den = number_token();
      if (den == 0.0) throw ParseError("fraction with zero denominator in \"" +
                                       std::string(text) + "\"");
      return num / den;
    }
    return num;
  }
};

inline DistributionModel parse_distribution_at(Cursor& cur) {
  const std::string_view name = cur.ident();
  cur.expect('(');
  if (name == "normal") {
    const double mu = cur.number();
    cur.expect(',');
    const double variance = cur.number();
    cur.expect(')');
    if (mu != 0.0)
      throw ParseError("normal(mu,v): only zero-mean laws are supported, got mu=" +
                       format_num(mu));
    if (!(variance > 0.0))
      throw ParseError("normal(mu,v): v is the variance and must be positive, got v=" +
                       format_num(variance));
    return DistributionModel::centered_gaussian(std::sqrt(variance));
  }
  if (name == "uniform") {
    const double a = cur.number();
    cur.expect(',');
    const double b = cur.number();
    cur.expect(')');
    return DistributionModel::uniform(a, b);
  }
  if (name == "beta") {
    const double a = cur.number();
    cur.expect(',');
    const double b = cur.number();
    cur.expect(')');
    return DistributionModel::beta(a, b);
  }
  if (name == "point") {
    const double c = cur.number();
    cur.expect(')');
    return DistributionModel::point_mass(c);
  }
  if (name == "discrete") {
    std::vector<double> values, probs;
    do {
      values.push_back(cur.number());
      cur.expect(':');
      probs.push_back(cur.number());
    } while (cur.consume(','));
    cur.expect(')');
    return DistributionModel::discrete(std::move(values), std::move(probs));
  }
  if (name == "trunc") {
    DistributionModel base = parse_distribution_at(cur);
    cur.expect(',');
    const double lo = cur.number();
    cur.expect(',');
    const double hi = cur.number();
    cur.expect(')');
    return DistributionModel::truncated(std::move(base), lo, hi);
  }
  throw ParseError("unknown distribution kind '" + std::string(name) +
                   "' (expected normal, uniform, beta, discrete, point or trunc)");
}

}  // namespace detail

/// Parses the distribution mini-format: normal(0,0.25) [second argument is the
/// VARIANCE], uniform(0,2), beta(1,3), discrete(2:1/3,4:1/3,6:1/3), point(0.7),
/// trunc(normal(0,0.25),-5,5). Probabilities and parameters accept fractions.
inline DistributionModel parse_distribution(std::string_view text) {
  detail::Cursor cur{text};
  try {
    DistributionModel model = detail::parse_distribution_at(cur);
    if (!cur.at_end())
      throw ParseError("unexpected trailing text at position " + std::to_string(cur.pos) +
                       " in \"" + std::string(text) + "\"");
    return model;
  } catch (const ConfigError& e) {
    throw ParseError(std::string(e.what()) + " in \"" + std::string(text) + "\"");
  }
}

/// Grid spec: an explicit comma list "0.1,0.3,0.5" or "linspace(lo,hi,count)".
inline std::vector<double> parse_grid(std::string_view text) {
  detail::Cursor cur{text};
  if (cur.peek() == 'l') {
    const std::string_view name = cur.ident();
    if (name != "linspace")
      throw ParseError("unknown grid form '" + std::string(name) + "' (expected linspace)");
    cur.expect('(');
    const double lo = cur.number();
    cur.expect(',');
    const double hi = cur.number();
    cur.expect(',');
    const double count_raw = cur.number();
    cur.expect(')');
    if (!cur.at_end()) throw ParseError("unexpected trailing text in grid \"" +
                                        std::string(text) + "\"");
    if (count_raw < 1 || count_raw != std::floor(count_raw))
      throw ParseError("linspace count must be a positive integer, got " +
                       detail::format_num(count_raw));
    return linspace(lo, hi, static_cast<std::size_t>(count_raw));
  }
  std::vector<double> grid;
  do {
    grid.push_back(cur.number());
  } while (cur.consume(','));
  if (!cur.at_end())
    throw ParseError("unexpected trailing text in grid \"" + std::string(text) + "\"");
  return grid;
}

}  // namespace rcheb
