#include "keyid/heatkernel.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numbers>

#include "keyid/laplacian.hpp"
#include "keyid/quadrature.hpp"

namespace keyid {

namespace {

constexpr std::array<double, 11> kSeriesA{1.0,
                                          -0.16666666666666666667,
                                          0.019444444444444444444,
                                          -0.0020502645502645502645,
                                          0.00020998677248677248677,
                                          -0.000021336045641601197157,
                                          2.1633474427786597099e-6,
                                          -2.1923271344567640864e-7,
                                          2.2213930853920414559e-8,
                                          -2.2507674795567867297e-9,
                                          2.2805107707218211705e-10};
constexpr std::array<double, 11> kSeriesP{-0.33333333333333333333,
                                          0.13333333333333333333,
                                          -0.031746031746031746032,
                                          0.0059259259259259259259,
                                          -0.00096200096200096200096,
                                          0.00014285068253322221576,
                                          -0.000019952612545205137798,
                                          2.6657530547975614891e-6,
                                          -3.4437005170717759067e-7,
                                          4.3329787288725147445e-8,
                                          -5.3375859303696061663e-9};
constexpr std::array<double, 11> kSeriesU{0.26666666666666666667,
                                          -0.17142857142857142857,
                                          0.061904761904761904762,
                                          -0.016637806637806637807,
                                          0.0037188803260231831660,
                                          -0.00073241330979426217521,
                                          0.00013153356935453107255,
                                          -0.000022022285402747236604,
                                          3.4896828587870013079e-6,
                                          -5.2901661985178034853e-7,
                                          7.7329128180668432495e-8};

double even_series(const std::array<double, 11>& c, double r2) {
  double s = 0;
  for (int k = 10; k >= 0; --k) s = s * r2 + c[std::size_t(k)];
  return s;
}

// A = r / sinh r, P = A' / sinh r, U = P' / sinh r
struct Shape {
  double A, P, U;
};

Shape shape(double r) {
  if (r < 0.5) {
    const double r2 = r * r;
    return {even_series(kSeriesA, r2), even_series(kSeriesP, r2), even_series(kSeriesU, r2)};
  }
  const double sh = std::sinh(r), coth = 1 / std::tanh(r);
  const double A = r / sh;
  const double P = (1 - r * coth) / (sh * sh);
  const double U = (-r - 3 * coth + 3 * r * coth * coth) / (sh * sh * sh);
  return {A, P, U};
}

// acosh(1 + delta) without cancellation
double acosh1p(double delta) {
  if (delta > 1e8) {
    const double s = 1 + delta;
    return std::log(2 * s) - 1 / (4 * s * s);
  }
  return std::log1p(delta + std::sqrt(delta * (2 + delta)));
}

double log_prefactor(double t) {
  // log(2 * sqrt(2) e^{-t/4} / (4 pi t)^{3/2})
  return std::log(2 * std::numbers::sqrt2) - 0.25 * t - 1.5 * std::log(4 * std::numbers::pi * t);
}

// Returns the integral of F^{(order)}(S + v^2) dv scaled by e^{rho^2/4t}.
double scaled_radial_integral(double t, double rho, int order, double rel_tol) {
  if (!(t >= 1e-6)) throw QuadratureFailure("diffusion time below the supported range");
  const double delta0 = 2 * std::pow(std::sinh(0.5 * rho), 2);
  const double r_max = std::sqrt(rho * rho + 180 * t);
  const double v_max = std::sqrt(2 * std::sinh(0.5 * (r_max + rho)) * std::sinh(0.5 * (r_max - rho)));
  const double w_max = std::asinh(v_max);
  const double inv4t = 0.25 / t;
  auto integrand = [&](double w) {
    const double v = std::sinh(w);
    const double r = acosh1p(delta0 + v * v);
    const double e = std::exp(-(r - rho) * (r + rho) * inv4t) * std::cosh(w);
    const Shape s = shape(r);
    switch (order) {
      case 0:
        return s.A * e;
      case 1:
        return e * (s.P - s.A * s.A * 2 * inv4t);
      default:
        return e * (s.U - 6 * inv4t * s.A * s.P + s.A * s.A * s.A * 4 * inv4t * inv4t);
    }
  };
  AdaptiveOptions opt;
  opt.rel_tol = rel_tol;
  opt.max_intervals = 4000;
  return integrate(integrand, 0.0, w_max, opt).value;
}

double log_khh(double t, double rho, int order, double rel_tol) {
  const double i = scaled_radial_integral(t, rho, order, rel_tol);
  return log_prefactor(t) - rho * rho / (4 * t) + std::log(std::abs(i));
}

}  // namespace

void HeatParams::validate() const {
  if (!(t > 0) || !std::isfinite(t)) throw std::invalid_argument("heat parameter t must be positive");
  if (!(tail_eps > 0)) throw std::invalid_argument("tail_eps must be positive");
  if (!(quad_rel_tol > 0 && quad_rel_tol <= 1e-2)) throw std::invalid_argument("quad_rel_tol must lie in (0, 1e-2]");
}

double khh(double t, double rho, double rel_tol) {
  if (!(t > 0) || !(rho >= 0)) throw std::invalid_argument("khh requires t > 0 and rho >= 0");
  return std::exp(log_khh(t, rho, 0, rel_tol));
}

RadialJet khh_jet(double t, double rho, double rel_tol) {
  if (!(t > 0) || !(rho >= 0)) throw std::invalid_argument("khh requires t > 0 and rho >= 0");
  return {std::exp(log_khh(t, rho, 0, rel_tol)), -std::exp(log_khh(t, rho, 1, rel_tol)),
          std::exp(log_khh(t, rho, 2, rel_tol))};
}

RadialKernel::RadialKernel(double t, double rho_max, double rel_tol, bool with_derivatives)
    : t_(t), rho_max_(rho_max), derivatives_(with_derivatives), channels_(with_derivatives ? 3 : 1) {
  if (!(t > 0) || !(rho_max > 0)) throw std::invalid_argument("radial table needs t > 0 and rho_max > 0");
  constexpr int n = kDegree + 1;
  std::array<double, n> nodes;
  for (int j = 0; j < n; ++j) nodes[std::size_t(j)] = std::cos(std::numbers::pi * (j + 0.5) / n);
  const double quad_tol = std::min(1e-14, 0.01 * rel_tol);

  auto fit = [&](double a, double b, std::vector<double>& out) {
    out.assign(std::size_t(channels_ * n), 0.0);
    for (int ch = 0; ch < channels_; ++ch) {
      std::array<double, n> f;
      for (int j = 0; j < n; ++j)
        f[std::size_t(j)] = log_khh(t_, 0.5 * (a + b) + 0.5 * (b - a) * nodes[std::size_t(j)], ch, quad_tol);
      for (int k = 0; k < n; ++k) {
        double s = 0;
        for (int j = 0; j < n; ++j) s += f[std::size_t(j)] * std::cos(std::numbers::pi * k * (j + 0.5) / n);
        out[std::size_t(ch * n + k)] = (k == 0 ? 1.0 : 2.0) * s / n;
      }
    }
  };
  auto clenshaw = [](const double* c, double x) {
    double b1 = 0, b2 = 0;
    for (int k = kDegree; k >= 1; --k) {
      const double b0 = 2 * x * b1 - b2 + c[k];
      b2 = b1;
      b1 = b0;
    }
    return x * b1 - b2 + c[0];
  };

  const double w0 = std::clamp(0.6 * std::sqrt(t), 0.02, 1.0);
  breaks_.push_back(0);
  double a = 0;
  std::vector<double> c;
  while (a < rho_max_) {
    double b = std::min(rho_max_, a + w0);
    for (int depth = 0;; ++depth) {
      fit(a, b, c);
      bool ok = true;
      for (double q : {0.27, 0.73}) {
        const double x = 2 * q - 1;
        for (int ch = 0; ch < channels_ && ok; ++ch) {
          const double exact = log_khh(t_, a + q * (b - a), ch, quad_tol);
          if (std::abs(clenshaw(c.data() + ch * n, x) - exact) > rel_tol) ok = false;
        }
      }
      if (ok || depth > 30) break;
      b = a + 0.5 * (b - a);
    }
    coeffs_.insert(coeffs_.end(), c.begin(), c.end());
    breaks_.push_back(b);
    a = b;
    if (clenshaw(c.data(), 1.0) < -740 && a < rho_max_) {
      // beyond this the kernel underflows; keep the tail as a zero region
      breaks_.push_back(rho_max_);
      coeffs_.insert(coeffs_.end(), std::size_t(channels_ * n), -std::numeric_limits<double>::infinity());
      break;
    }
  }
}

double RadialKernel::eval(int which, double rho) const {
  if (which >= channels_) throw std::logic_error("radial table built without derivatives");
  if (!(rho >= 0) || rho > rho_max_ * (1 + 1e-12)) throw std::out_of_range("radius outside the radial table");
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), rho);
  std::size_t p = std::size_t(it - breaks_.begin());
  p = p == 0 ? 0 : std::min(p - 1, breaks_.size() - 2);
  constexpr int n = kDegree + 1;
  const double* c = coeffs_.data() + (p * std::size_t(channels_) + std::size_t(which)) * n;
  if (std::isinf(c[0])) return c[0];
  const double a = breaks_[p], b = breaks_[p + 1];
  const double x = std::clamp((2 * rho - a - b) / (b - a), -1.0, 1.0);
  double b1 = 0, b2 = 0;
  for (int k = kDegree; k >= 1; --k) {
    const double b0 = 2 * x * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + c[0];
}

RadialJet RadialKernel::jet(double rho) const { return {(*this)(rho), ks(rho), kss(rho)}; }

double orbit_count_constant(const GroupSpec& spec, const Point& z, const Point& w, double r_cal) {
  const auto entries = enumerate_entries(spec, z, w, r_cal);
  double best = 0;
  std::size_t j = 0;
  for (double rho = 0.5; rho <= r_cal + 1e-12; rho += 0.25) {
    while (j < entries.size() && entries[j].displacement() <= rho) ++j;
    best = std::max(best, double(j) * std::exp(-rho));
  }
  return 4 * std::max(best, 1e-3);
}

double images_tail_bound(double t, double A, double R) {
  const double end = std::max(R, t) + 14 * std::sqrt(t) + 12;
  AdaptiveOptions opt;
  opt.rel_tol = 1e-6;
  auto f = [&](double rho) { return std::exp(rho) * khh(t, rho, 1e-8); };
  const double tail = integrate(f, R, end, opt).value;
  return A * (std::exp(R) * khh(t, R, 1e-8) + tail);
}

double auto_radius(const GroupSpec& spec, const HeatParams& params, const Point& z, const Point& w,
                   double* counting_constant) {
  params.validate();
  const double A = orbit_count_constant(spec, z, w);
  if (counting_constant) *counting_constant = A;
  if (params.trunc_radius > 0) return params.trunc_radius;
  for (double R = 1; R <= 60; R += 0.25) {
    if (images_tail_bound(params.t, A, R) <= params.tail_eps) {
      if (predicted_orbit_count(spec, z, w, R) > 1e7)
        throw TailNotAchievable("tail bound needs an orbit larger than the enumeration cap");
      return R;
    }
  }
  throw TailNotAchievable("tail bound not achievable at the requested t and tail_eps");
}

KernelSum khyp(const GroupSpec& spec, const HeatParams& params, const Point& z, const Point& w,
               const RadialKernel* table) {
  double A = 0;
  const double R = auto_radius(spec, params, z, w, &A);
  KernelSum out;
  out.radius = R;
  std::vector<double> terms;
  for_each_image(spec, z, w, R, [&](const GroupElement&, const Point&, double u) {
    const double rho = distance_from_invariant(u);
    terms.push_back(table ? (*table)(rho) : khh(params.t, rho, params.quad_rel_tol));
  });
  // enumeration order is deterministic; sort for an order-independent reduction
  std::sort(terms.begin(), terms.end());
  out.value = pairwise_sum(terms);
  out.terms = terms.size();
  out.tail_bound = images_tail_bound(params.t, A, R);
  return out;
}

HeatResidual heat_equation_residual(const GroupSpec& spec, const HeatParams& params, const Point& z, const Point& w,
                                    const FiniteDifferenceSteps& steps, bool free) {
  params.validate();
  const double t = params.t;
  const double h = steps.h_rel * z.y;
  const double tau = steps.tau_rel * t;
  if (!(h > 0 && h < z.y / 4) || !(tau > 0 && 2 * tau < t))
    throw std::invalid_argument("finite-difference steps out of range");
  const double margin = 4 * h / z.y + 1e-9;
  std::vector<Point> images;
  double R = 0;
  if (free) {
    images.push_back(w);
  } else {
    R = auto_radius(spec, params, z, w);
    for (const auto& e : enumerate_entries(spec, z, w, R + margin)) images.push_back(e.image);
  }
  const double rho_max = (free ? distance(z, w) : R) + margin + 0.1;
  const double table_tol = 1e-13;

  auto sum_at = [&](const RadialKernel& k, const Point& p) {
    std::vector<double> v;
    v.reserve(images.size());
    for (const auto& q : images) v.push_back(k(distance(p, q)));
    std::sort(v.begin(), v.end());
    return pairwise_sum(v);
  };
  auto time_value = [&](double s) {
    RadialKernel k(s, rho_max, table_tol);
    return sum_at(k, z);
  };
  auto dt = [&](double step) {
    return (-time_value(t + 2 * step) + 8 * time_value(t + step) - 8 * time_value(t - step) +
            time_value(t - 2 * step)) /
           (12 * step);
  };

  HeatResidual out;
  RadialKernel k0(t, rho_max, table_tol);
  auto field = [&](const Point& p) { return sum_at(k0, p); };
  out.value = field(z);
  if (steps.richardson) {
    out.laplacian = laplacian(field, z, h).value;
    out.time_derivative = (16 * dt(0.5 * tau) - dt(tau)) / 15;
  } else {
    out.laplacian = laplacian_stencil(field, z, h);
    out.time_derivative = dt(tau);
  }
  if (!(std::abs(out.time_derivative) > 1e-10 * std::abs(out.value)))
    throw DegenerateDenominator("time derivative vanishes; residual undefined near stationary t");
  out.residual = std::abs(out.laplacian + out.time_derivative) / std::abs(out.time_derivative);
  return out;
}

}  // namespace keyid
