#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "keyid/identity.hpp"
#include "keyid/kloosterman.hpp"
#include "keyid/laplacian.hpp"

using namespace keyid;

namespace {

constexpr double pi = std::numbers::pi;

const CuspFormBasis& basis11() {
  static const auto b = CuspFormBasis::standard(11);
  return b;
}

const CuspFormBasis& basis37() {
  static const auto b = CuspFormBasis::standard(37);
  return b;
}

double measured_order(auto&& f, const Point& z, double exact, double h) {
  const double e1 = std::abs(laplacian_stencil(f, z, h) - exact);
  const double e2 = std::abs(laplacian_stencil(f, z, h / 2) - exact);
  return std::log2(e1 / e2);
}

}  // namespace

TEST_CASE("laplacian on analytic fields") {
  const Point z(0.3, 1.7);
  const double h = 1e-3 * z.y;
  CHECK(std::abs(laplacian([](const Point&) { return 4.2; }, z, h).value) <= 1e-10);
  CHECK(laplacian([](const Point& p) { return std::log(p.y); }, z, h).value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(laplacian([](const Point& p) { return p.y * p.y; }, z, h).value ==
        doctest::Approx(-2 * z.y * z.y).epsilon(1e-7));
  // y^s is an eigenfunction with eigenvalue s (1 - s)
  const auto est = laplacian([](const Point& p) { return std::pow(p.y, 2.5); }, z, h);
  CHECK(est.value == doctest::Approx(2.5 * (1 - 2.5) * std::pow(z.y, 2.5)).epsilon(1e-8));
  CHECK(est.error >= 0);
}

TEST_CASE("laplacian step range and non-finite samples") {
  const Point z(0, 2);
  auto f = [](const Point& p) { return p.y; };
  CHECK_THROWS_AS(laplacian(f, z, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(laplacian(f, z, 0.1), std::invalid_argument);
  CHECK_NOTHROW(laplacian(f, z, 2e-5));
  CHECK_NOTHROW(laplacian(f, z, 2e-2));
  CHECK_THROWS_AS(laplacian([](const Point& p) { return p.x > 0 ? std::nan("") : 1.0; }, z, 1e-3), NonFiniteSample);
}

TEST_CASE("stencil convergence order") {
  const Point z(0.1, 1.3);
  for (double h : {0.08, 0.04}) {
    CHECK(measured_order([](const Point& p) { return std::log(p.y); }, z, 1.0, h * z.y) >= 3.5);
    CHECK(measured_order([](const Point& p) { return std::exp(p.x) / p.y; }, z, -z.y * z.y * std::exp(z.x) * (1 / z.y + 2 / (z.y * z.y * z.y)), h * z.y) >= 3.5);
  }
  // degree <= 5 polynomials are reproduced exactly, so no order is observable
  for (double h : {0.08, 0.04, 0.02})
    CHECK(std::abs(laplacian_stencil([](const Point& p) { return p.y * p.y; }, z, h * z.y) + 2 * z.y * z.y) <= 1e-11);
}

TEST_CASE("identity term contributes nothing") {
  auto diag = [](const Point& p) { return khh(1.0, distance(p, p)); };
  CHECK(laplacian_stencil(diag, Point(0.2, 1.4), 1e-3) == 0.0);
}

TEST_CASE("Kloosterman table against a direct sum") {
  const GroupSpec spec(11);
  const auto t = compute_kloosterman_table(spec, 6, 11);
  for (int k = 1; k <= 6; ++k)
    for (int l = 1; l <= 6; ++l) {
      double s = 0;
      for (int d = 1; d < 11; ++d) {
        const int dbar = int(mod_inverse(d, 11));
        s += std::cos(2 * pi * (k * dbar + l * d) / 11.0);
      }
      const double expect = s * std::cyl_bessel_j(1.0, 4 * pi * std::sqrt(double(k * l)) / 11) / 11;
      CHECK(t.full(k - 1, l - 1) == doctest::Approx(expect).epsilon(1e-12));
    }
  CHECK((t.full - t.full.transpose()).norm() == 0.0);
  const auto threaded = compute_kloosterman_table(spec, 8, 3000, 3);
  const auto serial = compute_kloosterman_table(spec, 8, 3000, 1);
  CHECK((threaded.full - serial.full).norm() == 0.0);
}

TEST_CASE("level one has no cusp forms, so the right side vanishes") {
  const GroupSpec spec(1);
  HeatIntegralOptions opt;
  opt.c_max = 4000;
  for (const Point z : {Point(0.2, 1.4), Point(-0.3, 0.95), Point(0.45, 3.0)}) {
    const auto h = heat_laplacian_integral(spec, z, opt);
    CHECK(std::abs(h.density) <= h.error_budget / 2 + 1e-12);
    CHECK(h.value == doctest::Approx(-2 * identity_constant(spec)).epsilon(1e-3));
  }
  CHECK_THROWS_AS(heat_laplacian_integral(spec, Point(0, 1)), EllipticPointError);
  CHECK_THROWS_AS(heat_laplacian_integral(spec, Point(0.001, 1.002)), EllipticPointError);
  CHECK_THROWS_AS(heat_laplacian_integral(spec, Point(0.2, 1.4), 0.0), std::invalid_argument);
}

TEST_CASE("budget for H on a sample set") {
  const GroupSpec spec(11);
  const Point pts[] = {Point(0.25, 1.5), Point(0.2, 1.4), Point(-0.45, 0.1),  Point(0.0, 0.5),  Point(0.3, 0.25),
                       Point(-0.2, 2.0), Point(0.45, 0.8), Point(0.123, 0.02), Point(-0.1, 0.3), Point(0.4, 4.0)};
  for (const auto& z : pts) {
    const auto h = heat_laplacian_integral(spec, z, 1e-3);
    CAPTURE(z);
    CHECK(h.error_budget <= 1e-3);
    CHECK(h.error_budget > 0);
  }
}

TEST_CASE("H is invariant under the group") {
  const GroupSpec spec(11);
  const double tol = 1e-3;
  const Point z(0.31, 0.83);
  const auto base = heat_laplacian_integral(spec, z, tol);
  for (const auto& g : enumerate(spec, z, 4.0)) {
    const auto h = heat_laplacian_integral(spec, apply(g, z), tol);
    CHECK(std::abs(h.value - base.value) <= 2 * tol);
  }
}

TEST_CASE("interchange of Laplacian and time integral") {
  const GroupSpec spec(11);
  const Point z(0.2, 1.4);
  const auto fd = fd_time_integral(spec, z);
  const auto pol = polarized_time_integral(spec, z);
  CHECK(fd.value == doctest::Approx(pol.value).epsilon(1e-3));
  CHECK(fd.time_nodes > 0);
}

TEST_CASE("ball-resolved image sum approaches the resummed value") {
  const GroupSpec spec(11);
  const Point z(0.25, 1.5);
  const double series = heat_laplacian_integral(spec, z).density;
  const double ball = resolved_image_sum(spec, z, 14.0, 1.0);
  CHECK(std::abs(ball - series) <= 5e-5);
  CHECK(std::abs(resolved_image_sum(spec, z, 12.0, 1.0) - series) > std::abs(ball - series));
}

TEST_CASE("surface identity at a point") {
  const GroupSpec spec(11);
  const auto d = surface_residual(spec, basis11(), Point(0.25, 1.5));
  CHECK(d.residual <= 1e-2);
  CHECK(d.error_budget >= 0);
  CHECK(d.relative_budget() < 1e-2);
  CHECK(d.absolute_residual == doctest::Approx(std::abs(d.lhs - d.rhs)));
}

TEST_CASE("cusp limit") {
  const GroupSpec spec(11);
  const auto d = surface_residual(spec, basis11(), Point(0.0, 8.0));
  CHECK(std::abs(d.lhs) <= 1e-3);
  CHECK(std::abs(d.rhs) <= 1e-3);
}

TEST_CASE("mean of the left side is the inverse volume") {
  const GroupSpec spec(11);
  const FrickeDomain dom{spec};
  // the region above the nodes has area 1/12 and negligible density
  double num = 0, den = 1.0 / 12;
  for (const auto& a : dom.nodes(24, 28, 12)) {
    const double w = a.w / (a.y * a.y);
    num += w * canonical_lhs(basis11(), Point(a.x, a.y));
    den += w;
  }
  CHECK(num / den == doctest::Approx(1 / volume(spec)).epsilon(2e-3));
}

TEST_CASE("Kunneth dimension") {
  CHECK(kunneth_dimension(1, 1) == 1);
  CHECK(kunneth_dimension(2, 1) == 2);
  CHECK(kunneth_dimension(2, 3) == 6);
  CHECK_THROWS_AS(kunneth_dimension(0, 1), std::invalid_argument);
}

TEST_CASE("product density factorizes") {
  const Point z1(0.25, 1.5), z2(0.1, 1.2);
  const double d = product_can_density(basis11(), basis37(), z1, z2);
  CHECK(d == canonical_density(basis11(), z1) * canonical_density(basis37(), z2));
  // Gram of the product basis f_j g_k is the tensor product
  Eigen::MatrixXcd G(2, 2);
  const auto g1 = basis11().orthonormal_gram(), g2 = basis37().orthonormal_gram();
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) G(j, k) = g1(0, 0) * g2(j, k);
  CHECK((G - Eigen::MatrixXcd::Identity(2, 2)).norm() <= 1e-6);
}

TEST_CASE("product mass is one") {
  double m[2] = {0, 0};
  const CuspFormBasis* b[2] = {&basis11(), &basis37()};
  for (int i = 0; i < 2; ++i) {
    const FrickeDomain dom{b[i]->spec()};
    for (const auto& a : dom.nodes(24, 28, 12))
      m[i] += 2 * a.w / (a.y * a.y) * canonical_density(*b[i], Point(a.x, a.y));
  }
  CHECK(m[0] * m[1] == doctest::Approx(1.0).epsilon(3e-3));
}

TEST_CASE("product identity") {
  const GroupSpec s11(11);
  const auto r = product_residual(s11, s11, basis11(), basis11(), Point(0.25, 1.5), Point(0.1, 1.2));
  CHECK(r.residual <= 2e-2);
  CHECK(r.factorization_gap <= 1e-12);
  const auto d1 = surface_residual(s11, basis11(), Point(0.25, 1.5));
  const auto d2 = surface_residual(s11, basis11(), Point(0.1, 1.2));
  CHECK(r.lhs == doctest::Approx(d1.lhs * d2.lhs).epsilon(1e-10));
  CHECK(std::abs(r.assembled - d1.rhs * d2.rhs) <= 1e-12);
  const auto mixed = product_residual(s11, GroupSpec(37), basis11(), basis37(), Point(0.1, 0.6), Point(-0.2, 0.4));
  CHECK(mixed.residual <= 2e-2);
}

TEST_CASE("term sizes high in both cusps") {
  // both sides vanish at the cusp, so each mixed term cancels the constant term to leading order
  const GroupSpec s11(11);
  const auto r = product_residual(s11, s11, basis11(), basis11(), Point(0.1, 6.0), Point(-0.2, 6.0));
  CHECK(r.terms[1] / r.terms[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(r.terms[2] / r.terms[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(r.terms[3] / r.terms[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(r.lhs) < 1e-30);
}

TEST_CASE("H cache") {
  HeatIntegralCache cache;
  const GroupSpec spec(11);
  const auto a = cache.get(spec, Point(0.2, 1.4));
  const auto b = cache.get(spec, Point(0.2, 1.4));
  CHECK(a.value == b.value);
  CHECK(cache.size() == 1);
}
