#include "keyid/identity.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include "keyid/kloosterman.hpp"
#include "keyid/laplacian.hpp"
#include "keyid/quadrature.hpp"

namespace keyid {

namespace {

constexpr double pi = std::numbers::pi;
constexpr int kMaxModes = 256;

struct SeriesValue {
  double rhs = 0, budget = 0;
  int modes = 0;
};

// sum_{k > K} k r^k
double weighted_tail(double r, int K) {
  double head = 0, p = 1;
  for (int k = 1; k <= K; ++k) {
    p *= r;
    head += k * p;
  }
  return std::max(r / ((1 - r) * (1 - r)) - head, 0.0);
}

// Fourier truncation of y^2 sum B(k, l) e(kz) conj e(lz), with |B(k, l)|^2 <= B(k, k) B(l, l) and B(k, k) <= beta k^2
double fourier_tail(double y, double beta, int K) {
  const double r = std::exp(-2 * pi * y);
  const double all = r / ((1 - r) * (1 - r));
  const double tail = weighted_tail(r, K);
  const double head = all - tail;
  return y * y * beta * (all * all - head * head);
}

SeriesValue series_rhs(const GroupSpec& spec, const Point& p, double rhs_tol, std::int64_t c_max, int threads) {
  const double y = p.y;
  const auto first = kloosterman_table(spec, 1, c_max, threads);
  const double z11 = first->full(0, 0);
  const double e11 = first->truncation_estimate()(0, 0);
  const double beta = 3 * (std::abs(4 * pi * (1 - 2 * pi * z11)) + 8 * pi * pi * e11 + 1e-12);

  int K = 1;
  while (K < kMaxModes && fourier_tail(y, beta, K) > 0.05 * rhs_tol) ++K;
  if (fourier_tail(y, beta, K) > 0.05 * rhs_tol)
    throw BudgetUnachievable("Fourier truncation cannot meet the tolerance at this height");
  K = std::min(kMaxModes, ((K + 15) / 16) * 16);

  const auto table = kloosterman_table(spec, K, c_max, threads);
  Eigen::VectorXd root(K);
  for (int k = 1; k <= K; ++k) root(k - 1) = std::sqrt(double(k));
  Eigen::VectorXcd e(K);
  const std::complex<double> q = std::exp(std::complex<double>(0, 2 * pi) * p.complex());
  std::complex<double> qk = 1;
  for (int k = 1; k <= K; ++k) e(k - 1) = (qk *= q);
  const double y2 = y * y;
  // y^2 sum B(k, l) e(kz) conj e(lz) with B(k, l) = 4 pi sqrt(k l) (delta_kl - 2 pi Z(k, l))
  auto evaluate = [&](const Eigen::MatrixXd& Z) {
    Eigen::MatrixXd B = -8 * pi * pi * (root.asDiagonal() * Z.topLeftCorner(K, K) * root.asDiagonal());
    B.diagonal() += 4 * pi * root.cwiseAbs2();
    const Eigen::VectorXd m = e.cwiseAbs();
    return std::pair{y2 * (e.transpose() * B * e.conjugate())(0).real(), y2 * m.dot(B.cwiseAbs() * m)};
  };
  const auto [value, magnitude] = evaluate(table->full);
  double deviation = 0;
  for (const auto& cp : table->checkpoints) deviation = std::max(deviation, std::abs(value - evaluate(cp).first));

  SeriesValue out;
  out.modes = K;
  out.rhs = value;
  out.budget = fourier_tail(y, beta, K) + 2 * deviation + 1e-14 * magnitude;
  return out;
}

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (10 - 15 * t + 6 * t * t);
}

struct TimeGrid {
  std::vector<double> t, w;
};

// Gauss panels on [0, T], dyadic towards t = 0, stopping where exp(-rho0^2 / 4t) is negligible
TimeGrid time_grid(double T, double rho0, int n) {
  const double t_lo = rho0 * rho0 / (4 * 45.0);
  const auto& rule = gauss_legendre(n);
  TimeGrid g;
  double b = T;
  while (b > t_lo) {
    const double a = b / 2;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      g.t.push_back(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i]);
      g.w.push_back(0.5 * (b - a) * rule.weights[i]);
    }
    b = a;
  }
  return g;
}

double min_displacement(const std::vector<OrbitEntry>& entries) {
  double rho0 = std::numeric_limits<double>::infinity();
  for (const auto& e : entries)
    if (!e.g.is_identity()) rho0 = std::min(rho0, e.displacement());
  return rho0;
}

std::int64_t round_key(double v) { return std::llround(v * 1e9); }

}  // namespace

HeatIntegral heat_laplacian_integral(const GroupSpec& spec, const Point& z, const HeatIntegralOptions& opt) {
  if (!(opt.tol > 0)) throw std::invalid_argument("tolerance must be positive");
  if (near_elliptic_point(spec, z, kEllipticExclusion))
    throw EllipticPointError("point lies within the exclusion disk of an elliptic fixed point");
  const auto fr = fricke_reduce(spec, z);
  const double c = identity_constant(spec);
  std::int64_t c_max = opt.c_max;
  for (int attempt = 0; attempt < 3; ++attempt, c_max *= 2) {
    const auto s = series_rhs(spec, fr.point, opt.tol / 2, c_max, opt.threads);
    if (2 * s.budget <= opt.tol) {
      HeatIntegral h;
      h.value = 2 * (s.rhs - c);
      h.density = s.rhs;
      h.error_budget = 2 * s.budget;
      h.reduced = fr.point;
      h.modes = s.modes;
      h.c_max = c_max;
      return h;
    }
  }
  throw BudgetUnachievable("error budget for H exceeds the tolerance");
}

HeatIntegral HeatIntegralCache::get(const GroupSpec& spec, const Point& z) {
  const Key key{spec.level, round_key(z.x), round_key(z.y)};
  {
    std::lock_guard lock(mutex_);
    if (auto it = table_.find(key); it != table_.end()) return it->second;
  }
  const auto h = heat_laplacian_integral(spec, z, opt_);
  std::lock_guard lock(mutex_);
  return table_.emplace(key, h).first->second;
}

std::size_t HeatIntegralCache::size() const {
  std::lock_guard lock(mutex_);
  return table_.size();
}

TimeIntegral fd_time_integral(const GroupSpec& spec, const Point& z, const TimeIntegralOptions& opt) {
  HeatParams params;
  params.t = opt.horizon;
  params.tail_eps = opt.tail_eps;
  const double h = opt.h_rel * z.y;
  const double R = auto_radius(spec, params, z, z) + 4 * h / z.y;
  const auto base = enumerate_entries(spec, z, R);
  const auto grid = time_grid(opt.horizon, min_displacement(base), opt.nodes_per_panel);
  std::vector<RadialKernel> tables;
  tables.reserve(grid.t.size());
  for (double t : grid.t) tables.emplace_back(t, R + 0.5, 1e-12);

  auto integrated = [&](const Point& p) {
    const auto entries = enumerate_entries(spec, p, R);
    std::vector<double> rho;
    rho.reserve(entries.size());
    for (const auto& e : entries)
      if (!e.g.is_identity()) rho.push_back(e.displacement());
    std::vector<double> per_t(grid.t.size()), terms(rho.size());
    for (std::size_t i = 0; i < grid.t.size(); ++i) {
      for (std::size_t j = 0; j < rho.size(); ++j) terms[j] = tables[i](rho[j]);
      per_t[i] = grid.w[i] * pairwise_sum(terms);
    }
    return pairwise_sum(per_t);
  };
  TimeIntegral out;
  out.value = laplacian(integrated, z, h).value;
  out.radius = R;
  out.time_nodes = grid.t.size();
  return out;
}

TimeIntegral polarized_time_integral(const GroupSpec& spec, const Point& z, const TimeIntegralOptions& opt) {
  HeatParams params;
  params.t = opt.horizon;
  params.tail_eps = opt.tail_eps;
  const double R = auto_radius(spec, params, z, z);
  std::vector<OrbitEntry> entries;
  for (auto& e : enumerate_entries(spec, z, R))
    if (!e.g.is_identity()) entries.push_back(e);
  const auto grid = time_grid(opt.horizon, min_displacement(entries), opt.nodes_per_panel);

  using C = std::complex<double>;
  const C zc = z.complex();
  const double y = z.y;
  // per image: dS/dz, dS/dw-bar, d2S/dz dw-bar, conj(gamma'(z))
  struct Geometry {
    double rho;
    C sz, sw, szw, dgamma;
  };
  std::vector<Geometry> geo;
  geo.reserve(entries.size());
  const C i4(0, 4);
  for (const auto& e : entries) {
    const C w = e.image.complex();
    const double eta = e.image.y;
    const C dz = zc - w;
    const double A = std::norm(dz);
    Geometry g;
    g.rho = e.displacement();
    g.sz = std::conj(dz) / (2 * y * eta) - A / (y * y * eta * i4);
    g.sw = -dz / (2 * y * eta) + A / (y * eta * eta * i4);
    g.szw = -1 / (2 * y * eta) + dz / (i4 * y * y * eta) + std::conj(dz) / (i4 * y * eta * eta) +
            A / (8 * y * y * eta * eta);
    const C cd = double(e.g.c()) * zc + double(e.g.d());
    g.dgamma = std::conj(1.0 / (cd * cd));
    geo.push_back(g);
  }

  std::vector<double> per_t(grid.t.size()), terms(geo.size());
  for (std::size_t i = 0; i < grid.t.size(); ++i) {
    const RadialKernel table(grid.t[i], R + 0.5, 1e-12, true);
    for (std::size_t j = 0; j < geo.size(); ++j) {
      const auto jet = table.jet(geo[j].rho);
      const C kzw = jet.kss * geo[j].sz * geo[j].sw + jet.ks * geo[j].szw;
      terms[j] = -8 * y * y * (kzw * geo[j].dgamma).real();
    }
    per_t[i] = grid.w[i] * pairwise_sum(terms);
  }
  const RadialKernel final_table(opt.horizon, R + 0.5, 1e-12);
  for (std::size_t j = 0; j < geo.size(); ++j) terms[j] = final_table(geo[j].rho);
  TimeIntegral out;
  out.value = -2 * pairwise_sum(terms) + pairwise_sum(per_t);
  out.radius = R;
  out.time_nodes = grid.t.size() + 1;
  return out;
}

double resolved_image_sum(const GroupSpec& spec, const Point& z, double R, double ramp) {
  if (!(ramp > 0) || !(R > ramp)) throw std::invalid_argument("need R > ramp > 0");
  const auto entries = enumerate_entries(spec, z, R);
  const std::complex<double> zc = z.complex();
  const double az = std::norm(zc);
  std::vector<double> terms;
  terms.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.g.is_identity()) continue;
    const auto& g = e.g;
    const std::complex<double> Q = double(g.c()) * az + double(g.d()) * zc - double(g.a()) * std::conj(zc) - double(g.b());
    terms.push_back(smoothstep((R - e.displacement()) / ramp) * (1.0 / (Q * Q)).real());
  }
  return 1 / (4 * pi) - z.y * z.y / pi * pairwise_sum(terms);
}

double relative_residual(double lhs, double rhs) {
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return scale > 0 ? std::abs(lhs - rhs) / scale : 0.0;
}

double DensityPair::relative_budget() const {
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return scale > 0 ? error_budget / scale : 0.0;
}

double ProductReport::relative_budget() const {
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return scale > 0 ? error_budget / scale : 0.0;
}

double identity_constant(const GroupSpec& spec) { return 1 / (4 * pi) + 1 / volume(spec); }

namespace {

struct SurfaceTerms {
  double lhs, lhs_budget, H, H_budget, density;
};

SurfaceTerms surface_terms(const GroupSpec& spec, const CuspFormBasis& basis, const Point& z, HeatIntegralCache* cache) {
  SurfaceTerms s{};
  const auto h = cache ? cache->get(spec, z) : heat_laplacian_integral(spec, z);
  s.H = h.value;
  s.H_budget = h.error_budget;
  s.density = h.density;
  double bound = 0;
  s.lhs = basis.genus() > 0 ? canonical_lhs(basis, z, &bound) : 0.0;
  s.lhs_budget = bound + std::abs(s.lhs) * basis.gram_error();
  return s;
}

}  // namespace

DensityPair surface_residual(const GroupSpec& spec, const CuspFormBasis& basis, const Point& z,
                             HeatIntegralCache* cache) {
  const auto s = surface_terms(spec, basis, z, cache);
  DensityPair d;
  d.lhs = s.lhs;
  d.rhs = s.density;
  d.absolute_residual = std::abs(d.lhs - d.rhs);
  d.residual = relative_residual(d.lhs, d.rhs);
  d.error_budget = s.lhs_budget + s.H_budget / 2;
  return d;
}

int kunneth_dimension(int g1, int g2) {
  if (g1 < 1 || g2 < 1) throw std::invalid_argument("genera must be positive");
  return g1 * g2;
}

double product_can_density(const CuspFormBasis& basis1, const CuspFormBasis& basis2, const Point& z1,
                           const Point& z2) {
  return canonical_density(basis1, z1) * canonical_density(basis2, z2);
}

ProductReport product_residual(const GroupSpec& spec1, const GroupSpec& spec2, const CuspFormBasis& basis1,
                               const CuspFormBasis& basis2, const Point& z1, const Point& z2,
                               HeatIntegralCache* cache) {
  const auto s1 = surface_terms(spec1, basis1, z1, cache);
  const auto s2 = surface_terms(spec2, basis2, z2, cache);
  const double c1 = identity_constant(spec1), c2 = identity_constant(spec2);
  ProductReport r;
  r.z1 = z1;
  r.z2 = z2;
  r.terms = {c1 * c2, c1 * s2.H / 2, s1.H / 2 * c2, s1.H * s2.H / 4};
  r.assembled = (r.terms[0] + r.terms[1]) + (r.terms[2] + r.terms[3]);
  r.rhs = s1.density * s2.density;
  r.factorization_gap = std::abs(r.assembled - r.rhs);
  r.lhs = double(kunneth_dimension(basis1.genus(), basis2.genus())) * product_can_density(basis1, basis2, z1, z2);
  r.absolute_residual = std::abs(r.lhs - r.rhs);
  r.residual = relative_residual(r.lhs, r.rhs);
  const double rhs1 = s1.density, rhs2 = s2.density;
  r.error_budget = s1.lhs_budget * std::abs(s2.lhs) + std::abs(s1.lhs) * s2.lhs_budget + s1.lhs_budget * s2.lhs_budget +
                   s1.H_budget / 2 * std::abs(rhs2) + std::abs(rhs1) * s2.H_budget / 2 + s1.H_budget * s2.H_budget / 4;
  return r;
}

}  // namespace keyid
