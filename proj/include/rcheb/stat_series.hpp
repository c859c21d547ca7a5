#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace rcheb {

/// Per-grid-point statistics of the solution process. std_error is filled by
/// the Monte Carlo method only.
struct StatSeries {
  std::string method;
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> std_dev;
  std::vector<double> second_moment;
  std::vector<double> std_error;

  std::size_t size() const { return grid.size(); }

  /// Columns: s,mean,std,second_moment[,stderr]. Full round-trip precision.
  void write_csv(std::ostream& os) const {
    const bool has_se = !std_error.empty();
    os << "s,mean,std,second_moment" << (has_se ? ",stderr" : "") << "\n";
    char buf[32];
    auto put = [&](double x, char sep) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      os << buf << sep;
    };
    for (std::size_t i = 0; i < grid.size(); ++i) {
      put(grid[i], ',');
      put(mean[i], ',');
      put(std_dev[i], ',');
      put(second_moment[i], has_se ? ',' : '\n');
      if (has_se) put(std_error[i], '\n');
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"method", method},
                     {"s", grid},
                     {"mean", mean},
                     {"std", std_dev},
                     {"second_moment", second_moment}};
    if (!std_error.empty()) j["stderr"] = std_error;
    return j;
  }

  void write_json(std::ostream& os) const { os << to_json().dump(2) << "\n"; }
};

}  // namespace rcheb
