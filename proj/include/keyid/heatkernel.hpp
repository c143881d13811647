#pragma once
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "keyid/fuchsian.hpp"
#include "keyid/hypgeom.hpp"

namespace keyid {

struct HeatParams {
  double t = 1;
  double trunc_radius = 0;  // <= 0 selects the smallest radius meeting tail_eps
  double tail_eps = 1e-10;
  double quad_rel_tol = 1e-12;

  void validate() const;
};

class TailNotAchievable : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DegenerateDenominator : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// K_H(t; rho); derivatives are with respect to S = cosh rho.
double khh(double t, double rho, double rel_tol = 1e-12);

struct RadialJet {
  double k = 0, ks = 0, kss = 0;
};
RadialJet khh_jet(double t, double rho, double rel_tol = 1e-12);

// Piecewise Chebyshev interpolant of log K_H(t; .) on [0, rho_max].
class RadialKernel {
public:
  RadialKernel(double t, double rho_max, double rel_tol = 1e-12, bool with_derivatives = false);

  double t() const { return t_; }
  double rho_max() const { return rho_max_; }
  bool has_derivatives() const { return derivatives_; }
  std::size_t panel_count() const { return breaks_.size() - 1; }

  double operator()(double rho) const { return std::exp(eval(0, rho)); }
  double ks(double rho) const { return -std::exp(eval(1, rho)); }
  double kss(double rho) const { return std::exp(eval(2, rho)); }
  RadialJet jet(double rho) const;

private:
  static constexpr int kDegree = 16;
  double eval(int which, double rho) const;

  double t_, rho_max_;
  bool derivatives_;
  std::vector<double> breaks_;
  // per panel, per channel, kDegree + 1 Chebyshev coefficients
  std::vector<double> coeffs_;
  int channels_;
};

struct KernelSum {
  double value = 0;
  double tail_bound = 0;
  double radius = 0;
  std::size_t terms = 0;
};

// Counting constant A with #{gamma : d(z, gamma w) <= rho} <= A e^rho (safety factor included).
double orbit_count_constant(const GroupSpec& spec, const Point& z, const Point& w, double r_cal = 7);

// A (e^R K(R) + int_R^inf e^rho K(rho) d rho)
double images_tail_bound(double t, double A, double R);

double auto_radius(const GroupSpec& spec, const HeatParams& params, const Point& z, const Point& w,
                   double* counting_constant = nullptr);

KernelSum khyp(const GroupSpec& spec, const HeatParams& params, const Point& z, const Point& w,
               const RadialKernel* table = nullptr);

inline double khyp_free(const HeatParams& params, const Point& z, const Point& w) {
  return khh(params.t, distance(z, w), params.quad_rel_tol);
}

struct FiniteDifferenceSteps {
  double h_rel = 1e-3;    // h = h_rel * y
  double tau_rel = 1e-3;  // tau = tau_rel * t
  bool richardson = true;
};

struct HeatResidual {
  double residual = 0;
  double laplacian = 0;
  double time_derivative = 0;
  double value = 0;
};

// |Delta_z K_hyp + d_t K_hyp| / |d_t K_hyp|; free == true uses the identity element only.
HeatResidual heat_equation_residual(const GroupSpec& spec, const HeatParams& params, const Point& z, const Point& w,
                                    const FiniteDifferenceSteps& steps = {}, bool free = false);

}  // namespace keyid
