#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "keyid/config.hpp"
#include "keyid/cuspforms.hpp"
#include "keyid/fuchsian.hpp"
#include "keyid/heatkernel.hpp"
#include "keyid/kloosterman.hpp"
#include "keyid/parallel.hpp"

using namespace keyid;

namespace {

constexpr double pi = std::numbers::pi;

struct Sampler {
  std::mt19937_64 rng{20261014};
  Point point(double y_lo = 0.05, double y_hi = 3.0) {
    std::uniform_real_distribution<double> x(-2, 2), ly(std::log(y_lo), std::log(y_hi));
    return Point(x(rng), std::exp(ly(rng)));
  }
  // a random element of Gamma0(N) from a few generator words
  GroupElement element(int n) {
    std::uniform_int_distribution<int> pick(0, 3), step(-2, 2);
    GroupElement g = GroupElement::identity();
    for (int k = 0; k < 2; ++k) {
      const int s = step(rng);
      g = g * (pick(rng) % 2 ? GroupElement::translation(s) : GroupElement(1, 0, std::int64_t(n) * s, 1));
    }
    return g;
  }
};

}  // namespace

TEST_CASE("distance is invariant and satisfies the triangle inequality") {
  Sampler s;
  for (int trial = 0; trial < 200; ++trial) {
    const Point a = s.point(), b = s.point(), c = s.point();
    const auto g = s.element(1);
    CHECK(distance(apply(g, a), apply(g, b)) == doctest::Approx(distance(a, b)).epsilon(1e-8));
    CHECK(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-12);
    CHECK(distance(a, b) >= 0);
  }
}

TEST_CASE("point-pair invariant under elements with entries up to 50") {
  Sampler s;
  std::uniform_int_distribution<std::int64_t> e(-50, 50);
  int done = 0;
  while (done < 100) {
    const std::int64_t c = e(s.rng), d = e(s.rng);
    if (std::gcd(c, d) != 1) continue;
    const auto g = complete_bottom_row(c, d);
    if (std::max({std::abs(g.a()), std::abs(g.b())}) > 50) continue;
    const Point z = s.point(0.1, 3), w = s.point(0.1, 3);
    const double u = point_pair_invariant(z, w);
    const Point gz = apply(g, z), gw = apply(g, w);
    // rounding the image coordinates alone moves u by about eps |x'| |dx'| / (y1' y2')
    const double eps = std::numeric_limits<double>::epsilon();
    const double repr = 4 * eps * (std::abs(gz.x) + std::abs(gw.x)) * std::abs(gz.x - gw.x) / (gz.y * gw.y) + 8 * eps * u;
    CHECK(std::abs(point_pair_invariant(gz, gw) - u) <= 1e-12 * u + repr);
    ++done;
  }
}

TEST_CASE("triangle inequality on 1000 triples") {
  Sampler s;
  for (int trial = 0; trial < 1000; ++trial) {
    const Point a = s.point(0.01, 10), b = s.point(0.01, 10), c = s.point(0.01, 10);
    CHECK(distance(a, c) <= (distance(a, b) + distance(b, c)) * (1 + 1e-12));
  }
}

TEST_CASE("reduction round trip on 1000 points") {
  Sampler s;
  for (int trial = 0; trial < 1000; ++trial) {
    const Point z = s.point(0.01, 10);
    const auto r = reduce(z);
    CHECK(in_modular_domain(r.point));
    const Point back = apply(r.element.inverse(), r.point);
    CHECK(std::abs(back.x - z.x) <= 1e-10 * std::max(1.0, std::abs(z.x)));
    CHECK(std::abs(back.y - z.y) <= 1e-10 * z.y);
  }
}

TEST_CASE("weight-two covariance on 100 random pairs") {
  Sampler s;
  const auto f = eta_product_basis(11)[0];
  std::uniform_int_distribution<std::int64_t> e(-6, 6);
  int done = 0;
  while (done < 100) {
    const std::int64_t c = 11 * e(s.rng), d = e(s.rng);
    if (c == 0 || std::gcd(c, d) != 1) continue;
    const auto g = complete_bottom_row(c, d);
    const Point z = s.point(0.3, 1.5);
    const auto factor = std::pow(double(g.c()) * z.complex() + double(g.d()), 2);
    const auto lhs = evaluate_anywhere(f, apply(g, z)).value;
    const auto rhs = factor * evaluate_anywhere(f, z).value;
    CHECK(std::abs(lhs - rhs) <= 1e-8 * std::abs(rhs));
    ++done;
  }
}

TEST_CASE("reduction is idempotent") {
  Sampler s;
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = reduce(s.point(1e-3, 5));
    const auto again = reduce(r.point);
    CHECK(again.point.x == doctest::Approx(r.point.x).epsilon(1e-10));
    CHECK(again.point.y == doctest::Approx(r.point.y).epsilon(1e-10));
  }
}

TEST_CASE("automorphic kernel symmetry and invariance on random inputs") {
  Sampler s;
  const GroupSpec spec(11);
  std::uniform_real_distribution<double> tdist(0.3, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    HeatParams p;
    p.t = tdist(s.rng);
    const Point z = s.point(0.4, 2), w = s.point(0.4, 2);
    const double k = khyp(spec, p, z, w).value;
    CAPTURE(trial);
    CHECK(khyp(spec, p, w, z).value == doctest::Approx(k).epsilon(1e-9));
    CHECK(khyp(spec, p, apply(s.element(11), z), w).value == doctest::Approx(k).epsilon(1e-8));
    CHECK(k > 0);
  }
}

TEST_CASE("canonical density is invariant on random inputs") {
  Sampler s;
  const auto basis = CuspFormBasis::standard(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Point z = s.point(0.1, 2);
    const double c = canonical_density(basis, z);
    CHECK(canonical_density(basis, apply(s.element(11), z)) == doctest::Approx(c).epsilon(1e-7));
  }
}

TEST_CASE("parallel_for visits each index once regardless of threads") {
  for (int threads : {1, 2, 5}) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  CHECK(default_threads() >= 1);
}

TEST_CASE("config values survive a write and parse") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double y_min = u(rng), y_max = y_min + u(rng), t = u(rng);
    std::ostringstream os;
    os.precision(17);
    os << "level = 37\n# comment\ny_min = " << y_min << "\ny_max = " << y_max << "\nt = " << t << "   # trailing\n";
    std::istringstream in(os.str());
    const auto cfg = parse_config(in);
    CHECK(cfg.level == 37);
    CHECK(cfg.grid.y_min == y_min);
    CHECK(cfg.grid.y_max == y_max);
    CHECK(cfg.t == t);
  }
  std::istringstream bad("y_min = 1\ny_max = 0.5\n");
  CHECK_THROWS(parse_config(bad).validate());
}

TEST_CASE("Kloosterman sums against the naive definition") {
  std::mt19937 rng(11);
  for (int n : {1, 11, 37}) {
    const GroupSpec spec(n);
    const std::int64_t c_max = 5 * n;
    const auto t = compute_kloosterman_table(spec, 7, c_max);
    for (int trial = 0; trial < 10; ++trial) {
      const int k = 1 + int(rng() % 7), l = 1 + int(rng() % 7);
      double z = 0;
      for (std::int64_t c = n; c <= c_max; c += n) {
        double s = 0;
        for (std::int64_t d = 0; d < c; ++d) {
          if (std::gcd(d, c) != 1) continue;
          const std::int64_t dbar = c == 1 ? 0 : mod_inverse(d, c);
          s += std::cos(2 * pi * double((k * dbar + l * d) % c) / double(c));
        }
        z += s * std::cyl_bessel_j(1.0, 4 * pi * std::sqrt(double(k * l)) / double(c)) / double(c);
      }
      CAPTURE(n);
      CAPTURE(k);
      CAPTURE(l);
      CHECK(t.full(k - 1, l - 1) == doctest::Approx(z).epsilon(1e-10));
    }
  }
}

TEST_CASE("level one has no cusp forms: 2 pi Z is the identity") {
  // Petersson formula with an empty basis
  // and the truncation estimate covers the remaining deviation
  const auto t = compute_kloosterman_table(GroupSpec(1), 4, 8000);
  const Eigen::MatrixXd est = t.truncation_estimate();
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) {
      const double dev = std::abs(2 * pi * t.full(k, l) - (k == l));
      CAPTURE(k);
      CAPTURE(l);
      CHECK(dev <= 5e-3);
      CHECK(dev <= 2 * pi * est(k, l) + 1e-12);
    }
}
