#pragma once
#include <cmath>
#include <stdexcept>

#include "keyid/hypgeom.hpp"

namespace keyid {

struct LaplacianEstimate {
  double value = 0;
  double error = 0;
};

class NonFiniteSample : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// -y^2 (F_xx + F_yy) by the 5-point 4th-order stencil along each axis, step h.
template <typename F>
double laplacian_stencil(F&& f, const Point& z, double h) {
  double s[2][5];
  for (int k = -2; k <= 2; ++k) {
    s[0][k + 2] = k == 0 ? f(z) : f(Point(z.x + k * h, z.y));
    s[1][k + 2] = k == 0 ? s[0][2] : f(Point(z.x, z.y + k * h));
  }
  for (auto& row : s)
    for (double v : row)
      if (!std::isfinite(v)) throw NonFiniteSample("laplacian sampler returned a non-finite value");
  // differences against the centre cancel constants exactly
  auto second = [&](const double* r) {
    return (16 * ((r[1] - r[2]) + (r[3] - r[2])) - ((r[0] - r[2]) + (r[4] - r[2]))) / (12 * h * h);
  };
  const double fxx = second(s[0]), fyy = second(s[1]);
  return -z.y * z.y * (fxx + fyy);
}

// Stencil at h and h/2 combined by one Richardson level; error from the pair.
template <typename F>
LaplacianEstimate laplacian(F&& f, const Point& z, double h) {
  if (!(h >= 1e-5 * z.y * (1 - 1e-12) && h <= 1e-2 * z.y * (1 + 1e-12)))
    throw std::invalid_argument("laplacian step must lie in [1e-5, 1e-2] * y");
  const double coarse = laplacian_stencil(f, z, h);
  const double fine = laplacian_stencil(f, z, 0.5 * h);
  return {(16 * fine - coarse) / 15, std::abs(fine - coarse) / 15};
}

}  // namespace keyid
