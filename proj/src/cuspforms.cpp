#include "keyid/cuspforms.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "keyid/quadrature.hpp"

namespace keyid {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

bool is_prime_level(int n) { return n > 1 && GroupSpec(n).primes().size() == 1; }

void require_fricke_sign(const QExpansion& f) {
  if (f.fricke_sign != 1 && f.fricke_sign != -1)
    throw std::invalid_argument("form has no Fricke sign; construct it through eta_product_basis or set it");
}

// number of terms needed so that the tail falls below 1e-18 |q|
std::size_t effective_order(const QExpansion& f, double r) {
  if (r <= 0) return 1;
  const double C = f.growth_constant();
  const double target = std::log(1e-18 * (1 - r) * (1 - r) / C);
  auto m = static_cast<std::size_t>(std::max(1.0, target / std::log(r)));
  while (m < f.order() && std::log(double(m + 1)) + double(m) * std::log(r) > target) m += 8;
  return std::min(m, f.order());
}

std::complex<double> horner(const QExpansion& f, std::complex<double> q, std::size_t m) {
  std::complex<double> s = 0;
  for (std::size_t n = m; n >= 1; --n) s = s * q + double(f.coeffs[n - 1]);
  return s * q;
}

}  // namespace

double QExpansion::growth_constant() const {
  double c = 2;
  for (std::size_t n = 1; n <= coeffs.size(); ++n) c = std::max(c, std::abs(double(coeffs[n - 1])) / double(n));
  return c;
}

QExpansion scaled(const QExpansion& f, std::int64_t factor) {
  QExpansion g = f;
  for (auto& a : g.coeffs) a *= factor;
  if (factor == 0) g.fricke_sign = 1;
  return g;
}

double truncation_bound(const QExpansion& f, double y, std::size_t M) {
  const double r = std::exp(-kTwoPi * y);
  const double m = double(M);
  return f.growth_constant() * std::pow(r, m + 1) * ((m + 1) - m * r) / ((1 - r) * (1 - r));
}

std::string data_directory() {
  if (const char* env = std::getenv("KEYID_DATA_DIR"); env && *env) return env;
  return KEYID_DEFAULT_DATA_DIR;
}

std::vector<QExpansion> load_coefficient_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFileError("cannot open coefficient table " + path);
  std::string line, word;
  if (!std::getline(in, line)) throw DataFileError(path + ":1: empty coefficient table");
  std::istringstream head(line);
  long level = 0, dim = 0, order = 0;
  std::string k1, k2, k3;
  if (!(head >> k1 >> level >> k2 >> dim >> k3 >> order) || k1 != "level" || k2 != "dim" || k3 != "order" ||
      (head >> word) || level < 1 || dim < 0 || order < 1)
    throw DataFileError(path + ":1: header must read 'level N dim g order M'");
  std::vector<QExpansion> out;
  for (long j = 0; j < dim; ++j) {
    if (!std::getline(in, line)) throw DataFileError(path + ":" + std::to_string(j + 2) + ": missing form line");
    std::istringstream row(line);
    QExpansion f;
    f.level = int(level);
    while (row >> word) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(word, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != word.size())
        throw DataFileError(path + ":" + std::to_string(j + 2) + ": non-integer coefficient '" + word + "'");
      f.coeffs.push_back(v);
    }
    if (long(f.coeffs.size()) != order)
      throw DataFileError(path + ":" + std::to_string(j + 2) + ": expected " + std::to_string(order) +
                          " coefficients, found " + std::to_string(f.coeffs.size()));
    out.push_back(std::move(f));
  }
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos) throw DataFileError(path + ": trailing data");
  return out;
}

void write_coefficient_table(std::ostream& os, const std::vector<QExpansion>& forms, std::size_t order) {
  const int level = forms.empty() ? 1 : forms.front().level;
  os << "level " << level << " dim " << forms.size() << " order " << order << "\n";
  for (const auto& f : forms) {
    if (f.order() < order) throw std::invalid_argument("requested order exceeds stored coefficients");
    for (std::size_t n = 1; n <= order; ++n) os << (n > 1 ? " " : "") << f[n];
    os << "\n";
  }
}

std::vector<std::int64_t> eta_product_coefficients(int level, std::size_t order) {
  if (level != 11) throw UnsupportedLevel(level);
  // q prod (1 - q^n)^2 (1 - q^{11 n})^2, truncated at q^order
  std::vector<std::int64_t> p(order, 0);
  p[0] = 1;  // coefficient of q^{1 + k} stored at k
  auto times_one_minus = [&](std::size_t step) {
    for (std::size_t k = order; k-- > step;) p[k] -= p[k - step];
  };
  for (std::size_t n = 1; n < order; ++n) {
    times_one_minus(n);
    times_one_minus(n);
    if (11 * n < order) {
      times_one_minus(11 * n);
      times_one_minus(11 * n);
    }
  }
  return p;
}

std::vector<QExpansion> eta_product_basis(int level, std::size_t order) {
  std::vector<QExpansion> forms;
  if (level == 11) {
    QExpansion f;
    f.level = 11;
    f.coeffs = eta_product_coefficients(11, order);
    forms.push_back(std::move(f));
  } else if (level == 37) {
    forms = load_coefficient_table(data_directory() + "/level37.txt");
    for (auto& f : forms) {
      if (f.level != 37) throw DataFileError("level37.txt declares a different level");
      if (f.order() < std::min<std::size_t>(order, 64)) throw DataFileError("level37.txt has too few coefficients");
      if (f.order() > order) f.coeffs.resize(order);
    }
    if (forms.size() != 2) throw DataFileError("level37.txt must hold a 2-dimensional space");
  } else {
    throw UnsupportedLevel(level);
  }
  for (auto& f : forms) {
    if (f.coeffs.empty() || f.coeffs[0] != 1) throw DataFileError("generator is not normalized (a1 != 1)");
    f.fricke_sign = determine_fricke_sign(f);
  }
  return forms;
}

FormValue evaluate(const QExpansion& f, const Point& z, double y_min) {
  if (z.y < y_min) throw std::domain_error("evaluation height below y_min; reduce the point first");
  const double r = std::exp(-kTwoPi * z.y);
  const std::complex<double> q = std::polar(r, kTwoPi * (z.x - std::floor(z.x)));
  const std::size_t m = effective_order(f, r);
  return {horner(f, q, m), truncation_bound(f, z.y, m)};
}

FormValue evaluate_anywhere(const QExpansion& f, const Point& z) {
  const auto red = reduce(z);
  const GroupElement h = red.element.inverse();  // z = h z'
  const std::complex<double> zp = red.point.complex();
  const int n = f.level;
  if (h.c() % n == 0) {
    const auto v = evaluate(f, red.point, 0.0);
    const std::complex<double> j = double(h.c()) * zp + double(h.d());
    return {j * j * v.value, std::norm(j) * v.bound};
  }
  if (!is_prime_level(n)) throw UnsupportedLevel(n);
  require_fricke_sign(f);
  // h = gamma S T^k, gamma in Gamma0(N)
  const std::int64_t cm = ((h.c() % n) + n) % n, dm = ((h.d() % n) + n) % n;
  const std::int64_t k = dm * mod_inverse(cm, n) % n;
  const GroupElement alpha = GroupElement::inversion() * GroupElement::translation(k);
  const GroupElement gamma = h * alpha.inverse();
  if (gamma.c() % n != 0) throw std::logic_error("coset decomposition failed");
  const std::complex<double> zk = zp + double(k);
  const std::complex<double> az = -1.0 / zk;
  const auto inner = evaluate(f, Point(zk.real() / n, zk.imag() / n), 0.0);
  const std::complex<double> fa = double(f.fricke_sign) * zk * zk / double(n) * inner.value;
  const std::complex<double> j = double(gamma.c()) * az + double(gamma.d());
  const double scale = std::norm(j) * std::norm(zk) / n;
  return {j * j * fa, scale * inner.bound};
}

double fricke_ratio(const QExpansion& f) {
  const double n = f.level;
  const std::complex<double> z0(0.137, std::sqrt(n));
  const std::complex<double> w = -1.0 / z0;
  const auto lhs = evaluate(f, Point(w.real(), w.imag()), 0.0).value;
  const auto rhs = z0 * z0 / n * evaluate(f, Point(z0.real() / n, z0.imag() / n), 0.0).value;
  const std::complex<double> ratio = lhs / rhs;
  if (std::abs(ratio.imag()) > 1e-8) return std::numeric_limits<double>::quiet_NaN();
  return ratio.real();
}

int determine_fricke_sign(const QExpansion& f) {
  const double r = fricke_ratio(f);
  if (std::abs(r - 1) < 1e-8) return 1;
  if (std::abs(r + 1) < 1e-8) return -1;
  throw std::invalid_argument("form is not an eigenform of the Fricke involution");
}

std::vector<AreaNode> modular_domain_nodes(int nx, int ny, double y_max) {
  std::vector<AreaNode> out;
  const auto& gx = gauss_legendre(nx);
  const auto& gy = gauss_legendre(ny);
  for (std::size_t i = 0; i < gx.nodes.size(); ++i) {
    const double x = 0.5 * gx.nodes[i], wx = 0.5 * gx.weights[i];
    double a = std::sqrt(1 - x * x);
    while (a < y_max) {
      const double b = std::min(2 * a, y_max);
      for (std::size_t j = 0; j < gy.nodes.size(); ++j)
        out.push_back({x, 0.5 * (a + b) + 0.5 * (b - a) * gy.nodes[j], wx * 0.5 * (b - a) * gy.weights[j]});
      a = b;
    }
  }
  return out;
}

namespace {

template <typename Accumulate>
void gram_tail(const std::vector<QExpansion>& forms, double scale_height, Accumulate&& add) {
  // integral over y > Y of the x-average of f_j conj f_k: sum a_j(n) a_k(n) e^{-4 pi n Y} / (4 pi n)
  const std::size_t g = forms.size();
  for (std::size_t j = 0; j < g; ++j)
    for (std::size_t k = 0; k < g; ++k) {
      double s = 0;
      const std::size_t m = std::min(forms[j].order(), forms[k].order());
      for (std::size_t n = 1; n <= m; ++n) {
        const double e = std::exp(-2 * kTwoPi * double(n) * scale_height);
        if (e < 1e-300) break;
        s += double(forms[j][n]) * double(forms[k][n]) * e / (2 * kTwoPi * double(n));
      }
      add(j, k, s);
    }
}

}  // namespace

Eigen::MatrixXcd petersson_gram(const GroupSpec& spec, const std::vector<QExpansion>& forms,
                                const GramQuadrature& quad) {
  const std::size_t g = forms.size();
  const int n = spec.level;
  if (n > 1 && !is_prime_level(n)) throw UnsupportedLevel(n);
  for (const auto& f : forms) {
    if (f.level != n) throw std::invalid_argument("form level differs from the group level");
    if (n > 1) require_fricke_sign(f);
  }
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(g));
  Eigen::MatrixXd eps(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(g));
  for (std::size_t j = 0; j < g; ++j)
    for (std::size_t k = 0; k < g; ++k) eps(Eigen::Index(j), Eigen::Index(k)) = forms[j].fricke_sign * forms[k].fricke_sign;

  const auto nodes = modular_domain_nodes(quad.nx, quad.ny, quad.y_max);
  Eigen::VectorXcd at_z(static_cast<Eigen::Index>(g)), at_w(static_cast<Eigen::Index>(g));
  for (const auto& node : nodes) {
    for (std::size_t j = 0; j < g; ++j) at_z(Eigen::Index(j)) = evaluate(forms[j], Point(node.x, node.y), 0.0).value;
    Eigen::MatrixXcd local = at_z * at_z.adjoint();
    if (n > 1) {
      Eigen::MatrixXcd cos_sum = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(g));
      for (int k = 0; k < n; ++k) {
        const Point w((node.x + k) / n, node.y / n);
        for (std::size_t j = 0; j < g; ++j) at_w(Eigen::Index(j)) = evaluate(forms[j], w, 0.0).value;
        cos_sum += at_w * at_w.adjoint();
      }
      local += eps.cast<std::complex<double>>().cwiseProduct(cos_sum) / double(n) / double(n);
    }
    G += node.w * local;
  }
  gram_tail(forms, quad.y_max, [&](std::size_t j, std::size_t k, double s) {
    G(Eigen::Index(j), Eigen::Index(k)) += s;
  });
  if (n > 1)
    gram_tail(forms, quad.y_max / n, [&](std::size_t j, std::size_t k, double s) {
      G(Eigen::Index(j), Eigen::Index(k)) += eps(Eigen::Index(j), Eigen::Index(k)) * s;
    });
  return G;
}

FrickeDomain::FrickeDomain(const GroupSpec& spec, double r_min) : circles_(fricke_ford_circles(spec, r_min)) {
  if (spec.level == 1) throw UnsupportedLevel(1);
  auto top = [&](double x) {
    std::size_t best = circles_.size();
    double h = 0;
    for (std::size_t i = 0; i < circles_.size(); ++i) {
      const double dx = x - circles_[i].center;
      const double v = circles_[i].radius * circles_[i].radius - dx * dx;
      if (v > h) {
        h = v;
        best = i;
      }
    }
    return best;
  };
  constexpr int samples = 20000;
  breaks_.push_back(-0.5);
  std::size_t prev = top(-0.5);
  if (prev == circles_.size()) throw std::runtime_error("Fricke domain is not bounded below");
  for (int s = 1; s <= samples; ++s) {
    const double x = -0.5 + double(s) / samples;
    const std::size_t cur = top(x);
    if (cur == circles_.size()) throw std::runtime_error("Fricke domain is not bounded below");
    if (cur != prev) {
      const auto& c1 = circles_[prev];
      const auto& c2 = circles_[cur];
      double xs = (c1.radius * c1.radius - c2.radius * c2.radius + c2.center * c2.center - c1.center * c1.center) /
                  (2 * (c2.center - c1.center));
      const double lo = x - 1.0 / samples;
      if (!(xs >= lo && xs <= x)) xs = 0.5 * (lo + x);
      breaks_.push_back(xs);
      prev = cur;
    }
  }
  breaks_.push_back(0.5);
}

double FrickeDomain::lower(double x) const {
  double h = 0;
  for (const auto& c : circles_) {
    const double dx = x - c.center;
    h = std::max(h, c.radius * c.radius - dx * dx);
  }
  return std::sqrt(h);
}

double FrickeDomain::min_height() const {
  double m = std::numeric_limits<double>::infinity();
  for (double x : breaks_) m = std::min(m, lower(x));
  return m;
}

std::vector<AreaNode> FrickeDomain::nodes(int nx, int ny, double y_max) const {
  std::vector<AreaNode> out;
  const auto& gx = gauss_legendre(nx);
  const auto& gy = gauss_legendre(ny);
  for (std::size_t p = 0; p + 1 < breaks_.size(); ++p) {
    const double xa = breaks_[p], xb = breaks_[p + 1];
    if (xb <= xa) continue;
    for (std::size_t i = 0; i < gx.nodes.size(); ++i) {
      const double x = 0.5 * (xa + xb) + 0.5 * (xb - xa) * gx.nodes[i];
      const double wx = 0.5 * (xb - xa) * gx.weights[i];
      double a = lower(x);
      while (a < y_max) {
        const double b = std::min(2 * a, y_max);
        for (std::size_t j = 0; j < gy.nodes.size(); ++j)
          out.push_back({x, 0.5 * (a + b) + 0.5 * (b - a) * gy.nodes[j], wx * 0.5 * (b - a) * gy.weights[j]});
        a = b;
      }
    }
  }
  return out;
}

Eigen::MatrixXcd petersson_gram_fricke(const GroupSpec& spec, const std::vector<QExpansion>& forms,
                                       const FordQuadrature& quad) {
  const std::size_t g = forms.size();
  for (const auto& f : forms) {
    if (f.level != spec.level) throw std::invalid_argument("form level differs from the group level");
    require_fricke_sign(f);
  }
  const FrickeDomain domain(spec, quad.r_min);
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(g));
  Eigen::VectorXcd v(static_cast<Eigen::Index>(g));
  for (const auto& node : domain.nodes(quad.nx, quad.ny, quad.y_max)) {
    for (std::size_t j = 0; j < g; ++j) v(Eigen::Index(j)) = evaluate(forms[j], Point(node.x, node.y), 0.0).value;
    G += node.w * (v * v.adjoint());
  }
  gram_tail(forms, quad.y_max, [&](std::size_t j, std::size_t k, double s) {
    G(Eigen::Index(j), Eigen::Index(k)) += s;
  });
  for (std::size_t j = 0; j < g; ++j)
    for (std::size_t k = 0; k < g; ++k)
      G(Eigen::Index(j), Eigen::Index(k)) *= double(1 + forms[j].fricke_sign * forms[k].fricke_sign);
  return G;
}

Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& gram) {
  const Eigen::Index g = gram.rows();
  auto ip = [&](const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) {
    return (u.transpose() * gram * v.conjugate())(0, 0);
  };
  Eigen::MatrixXcd L(g, g);
  std::vector<Eigen::VectorXcd> done;
  for (Eigen::Index j = 0; j < g; ++j) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Unit(g, j);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : done) v -= ip(v, u) * u;
    const double norm2 = ip(v, v).real();
    if (!(norm2 > 0)) throw std::runtime_error("Gram matrix is not positive definite");
    v /= std::sqrt(norm2);
    done.push_back(v);
    L.row(j) = v.transpose();
  }
  return L;
}

CuspFormBasis::CuspFormBasis(const GroupSpec& spec, std::vector<QExpansion> forms, const GramQuadrature& quad)
    : spec_(spec), forms_(std::move(forms)) {
  gram_ = petersson_gram(spec_, forms_, quad);
  const GramQuadrature coarse{quad.nx * 3 / 4, quad.ny * 3 / 4, quad.y_max};
  gram_error_ = (petersson_gram(spec_, forms_, coarse) - gram_).norm() / gram_.norm();
  Eigen::LLT<Eigen::MatrixXcd> llt(gram_);
  if (llt.info() != Eigen::Success) throw std::runtime_error("Gram matrix is not positive definite");
  transform_ = orthonormalize(gram_);
}

CuspFormBasis CuspFormBasis::standard(int level) { return {GroupSpec(level), eta_product_basis(level)}; }

Eigen::MatrixXcd CuspFormBasis::orthonormal_coefficients() const {
  const std::size_t m = forms_.front().order();
  Eigen::MatrixXcd A(genus(), Eigen::Index(m));
  for (int j = 0; j < genus(); ++j)
    for (std::size_t n = 0; n < m; ++n) A(j, Eigen::Index(n)) = double(forms_[std::size_t(j)].coeffs[n]);
  return transform_ * A;
}

Eigen::VectorXcd CuspFormBasis::generator_values(const Point& z, double* bound) const {
  Eigen::VectorXcd v(genus());
  double b = 0;
  for (int j = 0; j < genus(); ++j) {
    const auto fv = evaluate_anywhere(forms_[std::size_t(j)], z);
    v(j) = fv.value;
    b = std::max(b, fv.bound);
  }
  if (bound) *bound = b;
  return v;
}

Eigen::VectorXcd CuspFormBasis::orthonormal_values(const Point& z, double* bound) const {
  double b = 0;
  const Eigen::VectorXcd v = transform_ * generator_values(z, &b);
  if (bound) *bound = b * transform_.cwiseAbs().rowwise().sum().maxCoeff();
  return v;
}

double canonical_lhs(const CuspFormBasis& basis, const Point& z, double* bound) {
  double b = 0;
  const Eigen::VectorXcd v = basis.orthonormal_values(z, &b);
  const double y2 = z.y * z.y;
  if (bound) *bound = y2 * (2 * b * v.cwiseAbs().sum() + double(v.size()) * b * b);
  return y2 * v.squaredNorm();
}

double canonical_density(const CuspFormBasis& basis, const Point& z) {
  return canonical_lhs(basis, z) / basis.genus();
}

}  // namespace keyid
