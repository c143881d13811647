#pragma once
#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "keyid/hypgeom.hpp"

namespace keyid {

class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& source, int line, int column, const std::string& what);
  int line, column;
};

struct GridSpec {
  double x_min = -0.45, x_max = 0.45;
  double y_min = 0.1, y_max = 2.0;
  int nx = 4, ny = 5;

  std::vector<Point> points() const;
  // n points along the diagonal of the box, used as one factor of a product grid
  std::vector<Point> diagonal(int n) const;
};

struct RunConfig {
  int level = 11;
  int level2 = 11;
  GridSpec grid;
  GridSpec grid2;
  int product_n = 5;
  std::vector<Point> points;   // overrides grid when nonempty
  std::vector<Point> points2;  // second factor for product runs

  double t = 1;
  double tail_eps = 1e-10;
  double quad_rel_tol = 1e-12;
  double h_tol = 1e-3;
  double trunc_radius = 0;
  std::int64_t c_max = 16000;
  std::optional<double> target;  // residual target; 1e-2 for surfaces, 2e-2 for products when unset

  std::string out;
  int threads = 0;  // 0: machine parallelism

  void validate() const;
  std::vector<Point> surface_points() const;
  std::vector<std::pair<Point, Point>> product_points() const;
};

RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);
// applies one key = value assignment, as from the file
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& source = "<cli>",
                   int line = 0, int column = 0);

}  // namespace keyid
