#pragma once
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "keyid/fuchsian.hpp"
#include "keyid/hypgeom.hpp"

namespace keyid {

class DataFileError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct QExpansion {
  int level = 1;
  std::vector<std::int64_t> coeffs;  // coeffs[n - 1] = a_n
  int fricke_sign = 0;               // eigenvalue of the Fricke involution, once known

  std::size_t order() const { return coeffs.size(); }
  std::int64_t operator[](std::size_t n) const { return coeffs.at(n - 1); }
  // C with |a_n| <= C n on the stored range, at least the Deligne value 2
  double growth_constant() const;
};

QExpansion scaled(const QExpansion& f, std::int64_t factor);

// sum_{n > M} C n r^n with r = e^{-2 pi y}
double truncation_bound(const QExpansion& f, double y, std::size_t M);

std::string data_directory();
std::vector<QExpansion> load_coefficient_table(const std::string& path);
void write_coefficient_table(std::ostream& os, const std::vector<QExpansion>& forms, std::size_t order);

// Generators of S_2(Gamma0(N)): the eta product for N = 11, the stored table for N = 37.
std::vector<QExpansion> eta_product_basis(int level, std::size_t order = 1000);
std::vector<std::int64_t> eta_product_coefficients(int level, std::size_t order);

struct FormValue {
  std::complex<double> value;
  double bound = 0;
};

FormValue evaluate(const QExpansion& f, const Point& z, double y_min = 0.2);

// Evaluation at any point through reduction, the weight-2 cocycle and the Fricke sign (prime level).
FormValue evaluate_anywhere(const QExpansion& f, const Point& z);

// f(-1/z) / ((z^2/N) f(z/N)), which is the Fricke sign for a Fricke eigenform.
double fricke_ratio(const QExpansion& f);
int determine_fricke_sign(const QExpansion& f);

struct GramQuadrature {
  int nx = 96;
  int ny = 28;
  double y_max = 12;
};

// Unfolding over coset_reps into the modular fundamental domain.
Eigen::MatrixXcd petersson_gram(const GroupSpec& spec, const std::vector<QExpansion>& forms,
                                const GramQuadrature& quad = {});

struct FordQuadrature {
  int nx = 24;
  int ny = 28;
  double y_max = 12;
  double r_min = 0.004;
};

struct AreaNode {
  double x, y, w;  // weight for dx dy
};

// Tensor Gauss nodes on |x| <= 1/2, sqrt(1 - x^2) <= y <= y_max, geometric panels in y.
std::vector<AreaNode> modular_domain_nodes(int nx, int ny, double y_max);

class FrickeDomain {
public:
  explicit FrickeDomain(const GroupSpec& spec, double r_min = 0.004);
  double lower(double x) const;
  const std::vector<double>& breakpoints() const { return breaks_; }
  double min_height() const;
  // nodes for dx dy on the part of the domain below y_max
  std::vector<AreaNode> nodes(int nx, int ny, double y_max) const;

private:
  std::vector<Circle> circles_;
  std::vector<double> breaks_;
};

// Integration over the Ford domain of Gamma0(N) extended by the Fricke involution.
Eigen::MatrixXcd petersson_gram_fricke(const GroupSpec& spec, const std::vector<QExpansion>& forms,
                                       const FordQuadrature& quad = {});

class CuspFormBasis {
public:
  CuspFormBasis(const GroupSpec& spec, std::vector<QExpansion> forms, const GramQuadrature& quad = {});
  static CuspFormBasis standard(int level);

  const GroupSpec& spec() const { return spec_; }
  int genus() const { return int(forms_.size()); }
  const std::vector<QExpansion>& forms() const { return forms_; }
  const Eigen::MatrixXcd& gram() const { return gram_; }
  // relative change of the Gram matrix against a coarser quadrature
  double gram_error() const { return gram_error_; }
  // orthonormal f_j = sum_k transform(j, k) F_k
  const Eigen::MatrixXcd& transform() const { return transform_; }
  Eigen::MatrixXcd orthonormal_coefficients() const;
  Eigen::MatrixXcd orthonormal_gram() const { return transform_ * gram_ * transform_.adjoint(); }

  Eigen::VectorXcd generator_values(const Point& z, double* bound = nullptr) const;
  Eigen::VectorXcd orthonormal_values(const Point& z, double* bound = nullptr) const;

private:
  GroupSpec spec_;
  std::vector<QExpansion> forms_;
  Eigen::MatrixXcd gram_, transform_;
  double gram_error_ = 0;
};

// Gram-Schmidt in the Petersson inner product, applied twice.
Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& gram);

// y^2 sum_j |f_j(z)|^2, i.e. g times the canonical density
double canonical_lhs(const CuspFormBasis& basis, const Point& z, double* bound = nullptr);
double canonical_density(const CuspFormBasis& basis, const Point& z);

}  // namespace keyid
