#include "keyid/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace keyid {

namespace {

std::string locate(const std::string& source, int line, int column) {
  if (line <= 0) return source;
  return source + ":" + std::to_string(line) + ":" + std::to_string(column);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  T v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("invalid value '" + text + "' for " + key);
  return v;
}

std::vector<Point> parse_points(const std::string& text, const std::string& key) {
  std::vector<Point> pts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto comma = item.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("point '" + item + "' in " + key + " needs the form x,y");
    const double x = parse_number<double>(trim(item.substr(0, comma)), key);
    const double y = parse_number<double>(trim(item.substr(comma + 1)), key);
    if (!(y > 0)) throw std::invalid_argument("point '" + item + "' in " + key + " must have y > 0");
    pts.emplace_back(x, y);
  }
  if (pts.empty()) throw std::invalid_argument(key + " is empty");
  return pts;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> m;
    auto real = [&](const char* key, auto member) {
      m[key] = [member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_number<double>(v, k); };
    };
    auto grid_real = [&](const char* key, GridSpec RunConfig::*grid, double GridSpec::*member) {
      m[key] = [grid, member](RunConfig& c, const std::string& k, const std::string& v) {
        (c.*grid).*member = parse_number<double>(v, k);
      };
    };
    auto grid_int = [&](const char* key, GridSpec RunConfig::*grid, int GridSpec::*member) {
      m[key] = [grid, member](RunConfig& c, const std::string& k, const std::string& v) {
        (c.*grid).*member = parse_number<int>(v, k);
      };
    };
    m["level"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.level = parse_number<int>(v, k); };
    m["level2"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.level2 = parse_number<int>(v, k); };
    m["product_n"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.product_n = parse_number<int>(v, k);
    };
    m["threads"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.threads = parse_number<int>(v, k); };
    m["c_max"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.c_max = parse_number<std::int64_t>(v, k);
    };
    m["target"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.target = parse_number<double>(v, k); };
    m["out"] = [](RunConfig& c, const std::string&, const std::string& v) { c.out = v; };
    m["points"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.points = parse_points(v, k); };
    m["points2"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.points2 = parse_points(v, k); };
    real("t", &RunConfig::t);
    real("tail_eps", &RunConfig::tail_eps);
    real("quad_rel_tol", &RunConfig::quad_rel_tol);
    real("h_tol", &RunConfig::h_tol);
    real("trunc_radius", &RunConfig::trunc_radius);
    for (auto [suffix, grid] : {std::pair{"", &RunConfig::grid}, std::pair{"2", &RunConfig::grid2}}) {
      const std::string s = suffix;
      grid_real(("x_min" + s).c_str(), grid, &GridSpec::x_min);
      grid_real(("x_max" + s).c_str(), grid, &GridSpec::x_max);
      grid_real(("y_min" + s).c_str(), grid, &GridSpec::y_min);
      grid_real(("y_max" + s).c_str(), grid, &GridSpec::y_max);
      grid_int(("nx" + s).c_str(), grid, &GridSpec::nx);
      grid_int(("ny" + s).c_str(), grid, &GridSpec::ny);
    }
    return m;
  }();
  return table;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[std::size_t(i)] = n == 1 ? 0.5 * (a + b) : a + (b - a) * i / (n - 1);
  return v;
}

void validate_grid(const GridSpec& g, const char* name) {
  if (!(g.x_min <= g.x_max) || !(g.y_min <= g.y_max) || !(g.y_min > 0) || g.nx < 1 || g.ny < 1)
    throw std::invalid_argument(std::string(name) + ": need x_min <= x_max, 0 < y_min <= y_max and positive counts");
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line_, int column_, const std::string& what)
    : std::runtime_error(locate(source, line_, column_) + ": " + what), line(line_), column(column_) {}

std::vector<Point> GridSpec::points() const {
  std::vector<Point> pts;
  for (double y : linspace(y_min, y_max, ny))
    for (double x : linspace(x_min, x_max, nx)) pts.emplace_back(x, y);
  return pts;
}

std::vector<Point> GridSpec::diagonal(int n) const {
  const auto xs = linspace(x_min, x_max, n), ys = linspace(y_min, y_max, n);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < xs.size(); ++i) pts.emplace_back(xs[i], ys[i]);
  return pts;
}

void RunConfig::validate() const {
  if (level < 1 || level2 < 1) throw std::invalid_argument("levels must be positive");
  validate_grid(grid, "grid");
  validate_grid(grid2, "grid2");
  if (product_n < 1) throw std::invalid_argument("product_n must be positive");
  if (!(t > 0)) throw std::invalid_argument("t must be positive");
  if (!(tail_eps > 0)) throw std::invalid_argument("tail_eps must be positive");
  if (!(quad_rel_tol > 0 && quad_rel_tol <= 1e-2)) throw std::invalid_argument("quad_rel_tol must lie in (0, 1e-2]");
  if (!(h_tol > 0)) throw std::invalid_argument("h_tol must be positive");
  if (!(trunc_radius >= 0)) throw std::invalid_argument("trunc_radius must be nonnegative");
  if (c_max < 1) throw std::invalid_argument("c_max must be positive");
  if (target && !(*target > 0)) throw std::invalid_argument("target must be positive");
  if (threads < 0) throw std::invalid_argument("threads must be nonnegative");
}

std::vector<Point> RunConfig::surface_points() const { return points.empty() ? grid.points() : points; }

std::vector<std::pair<Point, Point>> RunConfig::product_points() const {
  const auto first = points.empty() ? grid.diagonal(product_n) : points;
  const auto second = points2.empty() ? grid2.diagonal(product_n) : points2;
  std::vector<std::pair<Point, Point>> pairs;
  for (const auto& a : first)
    for (const auto& b : second) pairs.emplace_back(a, b);
  return pairs;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& source,
                   int line, int column) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError(source, line, column, "unknown key '" + key + "'");
  if (value.empty()) throw ConfigError(source, line, column, "missing value for '" + key + "'");
  try {
    it->second(cfg, key, value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source, line, column, e.what());
  }
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = hash == std::string::npos ? raw : raw.substr(0, hash);
    if (trim(text).empty()) continue;
    const auto eq = text.find('=');
    const int key_col = int(text.find_first_not_of(" \t")) + 1;
    if (eq == std::string::npos) throw ConfigError(source, line, key_col, "expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    if (key.empty()) throw ConfigError(source, line, int(eq) + 1, "missing key before '='");
    const auto vpos = text.find_first_not_of(" \t", eq + 1);
    const int value_col = vpos == std::string::npos ? int(text.size()) + 1 : int(vpos) + 1;
    const std::string value = trim(text.substr(eq + 1));
    if (setters().count(key) == 0) throw ConfigError(source, line, key_col, "unknown key '" + key + "'");
    apply_setting(cfg, key, value, source, line, value_col);
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source, 0, 0, e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, 0, "cannot open config file");
  return parse_config(in, path);
}

}  // namespace keyid
