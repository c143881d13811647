#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

namespace keyid {

class QuadratureFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct QuadResult {
  double value = 0;
  double error = 0;
};

struct GaussRule {
  std::vector<double> nodes, weights;  // on [-1, 1]
};

const GaussRule& gauss_legendre(int n);

double pairwise_sum(std::span<const double> v);

namespace detail {
inline constexpr std::array<double, 8> kXgk{0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk{0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
QuadResult gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * kWgk[7], g = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    k += kWgk[j] * s;
    if (j % 2 == 1) g += kWg[j / 2] * s;
  }
  return {k * h, std::abs((k - g) * h)};
}
}  // namespace detail

struct AdaptiveOptions {
  double abs_tol = 0;
  double rel_tol = 1e-12;
  int max_intervals = 2000;
};

// Globally adaptive Gauss-Kronrod (7,15) on [a, b].
template <typename F>
QuadResult integrate(F&& f, double a, double b, const AdaptiveOptions& opt = {}) {
  struct Piece {
    double a, b;
    QuadResult r;
    bool operator<(const Piece& o) const { return r.error < o.r.error; }
  };
  std::priority_queue<Piece> heap;
  auto first = detail::gk15(f, a, b);
  heap.push({a, b, first});
  double value = first.value, error = first.error;
  int intervals = 1;
  while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) {
    if (intervals >= opt.max_intervals) {
      if (!std::isfinite(value)) throw QuadratureFailure("non-finite integrand");
      throw QuadratureFailure("adaptive quadrature did not converge");
    }
    Piece p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    auto l = detail::gk15(f, p.a, m), r = detail::gk15(f, m, p.b);
    value += l.value + r.value - p.r.value;
    error += l.error + r.error - p.r.error;
    heap.push({p.a, m, l});
    heap.push({m, p.b, r});
    intervals += 1;
    if (intervals % 64 == 0) {
      auto copy = heap;
      value = error = 0;
      while (!copy.empty()) {
        value += copy.top().r.value;
        error += copy.top().r.error;
        copy.pop();
      }
    }
  }
  if (!std::isfinite(value)) throw QuadratureFailure("non-finite integral");
  return {value, error};
}

// Fixed Gauss-Legendre on [a, b].
template <typename F>
double gauss_integrate(F&& f, double a, double b, int n) {
  const auto& rule = gauss_legendre(n);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0;
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) s += rule.weights[j] * f(c + h * rule.nodes[j]);
  return s * h;
}

}  // namespace keyid
