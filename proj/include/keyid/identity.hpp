#pragma once
#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "keyid/cuspforms.hpp"
#include "keyid/fuchsian.hpp"
#include "keyid/heatkernel.hpp"
#include "keyid/hypgeom.hpp"

namespace keyid {

class EllipticPointError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class BudgetUnachievable : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kEllipticExclusion = 1e-2;

struct HeatIntegralOptions {
  double tol = 1e-3;
  std::int64_t c_max = 16000;  // Kloosterman modulus cutoff; doubled up to twice if the budget needs it
  int threads = 1;
};

struct HeatIntegral {
  double value = 0;         // H(z)
  double density = 0;       // 1/(4 pi) + 1/vol + H/2, evaluated without the cancellation
  double error_budget = 0;  // truncation of the Fourier and Kloosterman series
  Point reduced{0, 1};      // representative where the series was evaluated
  int modes = 0;
  std::int64_t c_max = 0;
};

// H(z) = int_0^inf Delta_z K_hyp(t; z, z) dt with the identity term dropped.
HeatIntegral heat_laplacian_integral(const GroupSpec& spec, const Point& z, const HeatIntegralOptions& opt = {});
inline HeatIntegral heat_laplacian_integral(const GroupSpec& spec, const Point& z, double tol) {
  HeatIntegralOptions opt;
  opt.tol = tol;
  return heat_laplacian_integral(spec, z, opt);
}

// per-run memo of H keyed by level and rounded coordinates
class HeatIntegralCache {
public:
  explicit HeatIntegralCache(HeatIntegralOptions opt = {}) : opt_(opt) {}
  HeatIntegral get(const GroupSpec& spec, const Point& z);
  std::size_t size() const;

private:
  using Key = std::tuple<int, std::int64_t, std::int64_t>;
  HeatIntegralOptions opt_;
  mutable std::mutex mutex_;
  std::map<Key, HeatIntegral> table_;
};

// Finite-horizon versions of the time integral, int_0^T Delta_z K_hyp(t; z, z) dt without the identity term.
struct TimeIntegralOptions {
  double horizon = 1;
  int nodes_per_panel = 10;
  double tail_eps = 1e-12;
  double h_rel = 2e-3;
};

struct TimeIntegral {
  double value = 0;
  double radius = 0;
  std::size_t time_nodes = 0;
};

// Laplacian stencil applied to z -> int_0^T K_hyp(t; z, z) dt.
TimeIntegral fd_time_integral(const GroupSpec& spec, const Point& z, const TimeIntegralOptions& opt = {});
// -2 D(T) plus the mixed second-derivative term integrated in t, from closed-form kernel derivatives.
TimeIntegral polarized_time_integral(const GroupSpec& spec, const Point& z, const TimeIntegralOptions& opt = {});

// 1/(4 pi) + 1/vol + H/2 from the image sum over the ball of radius R, smoothed over the last `ramp` units.
double resolved_image_sum(const GroupSpec& spec, const Point& z, double R, double ramp = 1);

struct DensityPair {
  double lhs = 0;
  double rhs = 0;
  double residual = 0;           // |lhs - rhs| / max(|lhs|, |rhs|)
  double absolute_residual = 0;  // |lhs - rhs|
  double error_budget = 0;       // absolute
  double relative_budget() const;
};

double relative_residual(double lhs, double rhs);

// the constant 1/(4 pi) + 1/vol
double identity_constant(const GroupSpec& spec);

DensityPair surface_residual(const GroupSpec& spec, const CuspFormBasis& basis, const Point& z,
                             HeatIntegralCache* cache = nullptr);

int kunneth_dimension(int g1, int g2);

double product_can_density(const CuspFormBasis& basis1, const CuspFormBasis& basis2, const Point& z1, const Point& z2);

struct ProductReport {
  Point z1{0, 1}, z2{0, 1};
  // (c1 c2), (c1 H2/2), (H1/2 c2), (H1 H2/4) with c_i = 1/(4 pi) + 1/vol_i
  std::array<double, 4> terms{};
  double assembled = 0;  // sum of the four terms
  double lhs = 0;
  double rhs = 0;                // product of the two surface right sides, free of the cancellation in `assembled`
  double factorization_gap = 0;  // |assembled - rhs|
  double residual = 0;
  double absolute_residual = 0;
  double error_budget = 0;
  double relative_budget() const;
};

ProductReport product_residual(const GroupSpec& spec1, const GroupSpec& spec2, const CuspFormBasis& basis1,
                               const CuspFormBasis& basis2, const Point& z1, const Point& z2,
                               HeatIntegralCache* cache = nullptr);

}  // namespace keyid
