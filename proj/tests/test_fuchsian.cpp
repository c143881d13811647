#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <string>

#include "keyid/fuchsian.hpp"

using namespace keyid;

namespace {

// independent counts straight from the definitions
struct Counts {
  long index, nu2, nu3, cusps;
};

long phi(long n) {
  long r = 0;
  for (long k = 1; k <= n; ++k) r += std::gcd(k, n) == 1;
  return r;
}

Counts brute_counts(long n) {
  Counts c{0, 0, 0, 0};
  // points of P^1(Z/N): pairs (c, d) with gcd(c, d, N) = 1 modulo units
  long pairs = 0;
  for (long a = 0; a < n; ++a)
    for (long b = 0; b < n; ++b) pairs += std::gcd(std::gcd(a, b), n) == 1;
  c.index = n == 1 ? 1 : pairs / phi(n);
  for (long x = 0; x < n; ++x) {
    c.nu2 += (x * x + 1) % n == 0;
    c.nu3 += (x * x + x + 1) % n == 0;
  }
  for (long d = 1; d <= n; ++d)
    if (n % d == 0) c.cusps += phi(std::gcd(d, n / d));
  return c;
}

std::set<GroupElement> brute_force(const GroupSpec& spec, const Point& z, const Point& w, double R) {
  // |g0^-1 gamma g1|_F^2 = 2 cosh d(z, gamma w) with z = g0 i, w = g1 i
  auto frob = [](const Point& p) { return std::sqrt(p.y + p.x * p.x / p.y + 1 / p.y); };
  const double cond = frob(z) * frob(w);
  const auto B = static_cast<std::int64_t>(std::ceil(cond * std::sqrt(2 * std::cosh(R)))) + 1;
  std::set<GroupElement> out;
  for (std::int64_t c = -B; c <= B; ++c) {
    if (c % spec.level != 0) continue;
    for (std::int64_t d = -B; d <= B; ++d) {
      if (std::gcd(c, d) != 1) continue;
      for (std::int64_t a = -B; a <= B; ++a) {
        // b from a d - b c = 1
        if (c == 0) {
          if (a * d != 1) continue;
          for (std::int64_t b = -B; b <= B; ++b) {
            const GroupElement g(a, b, c, d);
            if (distance(z, apply(g, w)) <= R) out.insert(g);
          }
        } else {
          if ((a * d - 1) % c != 0) continue;
          const GroupElement g(a, (a * d - 1) / c, c, d);
          if (std::abs(g.b()) > B) continue;
          if (distance(z, apply(g, w)) <= R) out.insert(g);
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("level validation") {
  CHECK_THROWS_AS(GroupSpec(0), UnsupportedLevel);
  CHECK_THROWS_AS(GroupSpec(-3), UnsupportedLevel);
  CHECK_THROWS_AS(GroupSpec(12), UnsupportedLevel);
  try {
    GroupSpec g(12);
  } catch (const UnsupportedLevel& e) {
    CHECK(std::string(e.what()).find("unsupported level") != std::string::npos);
    CHECK(e.level == 12);
  }
  CHECK_NOTHROW(GroupSpec(30));
  CHECK(GroupSpec(30).primes() == std::vector<int>{2, 3, 5});
}

TEST_CASE("signature agrees with brute-force counts") {
  for (int n : {1, 2, 3, 5, 6, 7, 10, 11, 13, 15, 30, 37, 101}) {
    const GroupSpec spec(n);
    const auto sig = signature(spec);
    const auto c = brute_counts(n);
    CAPTURE(n);
    CHECK(index(spec) == c.index);
    CHECK(sig.cusp_count == c.cusps);
    CHECK(std::count(sig.elliptic_orders.begin(), sig.elliptic_orders.end(), 2) == c.nu2);
    CHECK(std::count(sig.elliptic_orders.begin(), sig.elliptic_orders.end(), 3) == c.nu3);
    CHECK(12 * sig.genus == 12 + c.index - 3 * c.nu2 - 4 * c.nu3 - 6 * c.cusps);
    CHECK(volume(spec) == doctest::Approx(double(c.index) * std::numbers::pi / 3).epsilon(1e-14));
  }
  CHECK(signature(GroupSpec(11)).genus == 1);
  CHECK(signature(GroupSpec(37)).genus == 2);
  CHECK(volume(GroupSpec(11)) == doctest::Approx(4 * std::numbers::pi).epsilon(1e-15));
  CHECK(volume(GroupSpec(1)) == doctest::Approx(std::numbers::pi / 3).epsilon(1e-15));
}

TEST_CASE("coset representatives partition the modular group") {
  for (int n : {1, 6, 11, 37}) {
    const GroupSpec spec(n);
    const auto reps = coset_reps(spec);
    REQUIRE(std::int64_t(reps.size()) == index(spec));
    for (std::size_t i = 0; i < reps.size(); ++i)
      for (std::size_t j = 0; j < i; ++j) CHECK_FALSE(spec.contains(reps[i] * reps[j].inverse()));
    for (const GroupElement g : {GroupElement(2, 1, 7, 4), GroupElement(5, -2, 13, -5), GroupElement(3, 5, 4, 7),
                                 GroupElement(0, -1, 1, 9)}) {
      const auto k = coset_index(spec, g);
      CHECK(spec.contains(g * reps[k].inverse()));
    }
  }
  const auto reps11 = coset_reps(GroupSpec(11));
  CHECK(reps11[0].is_identity());
  CHECK(reps11[4] == GroupElement(0, -1, 1, 3));
}

TEST_CASE("modular arithmetic helpers") {
  CHECK(mod_inverse(3, 11) == 4);
  CHECK(mod_inverse(10, 37) * 10 % 37 == 1);
  CHECK_THROWS(mod_inverse(6, 9));
  for (auto [c, d] : {std::pair{7L, 4L}, {11L, -3L}, {0L, 1L}, {-5L, 2L}, {1L, 0L}}) {
    const auto g = complete_bottom_row(c, d);
    CHECK(std::abs(g.c()) == std::abs(c));
    CHECK(std::abs(g.d()) == std::abs(d));
  }
}

TEST_CASE("enumeration equals brute-force box enumeration") {
  const Point pts[] = {Point(0.2, 1.4), Point(-0.31, 0.95), Point(0.45, 0.6), Point(0.0, 2.3), Point(0.137, 0.41)};
  for (int n : {1, 11}) {
    const GroupSpec spec(n);
    for (const auto& z : pts)
      for (double R : {2.0, 3.5, 5.0}) {
        const auto got = enumerate(spec, z, R);
        const std::set<GroupElement> a(got.begin(), got.end());
        CAPTURE(n);
        CAPTURE(z);
        CAPTURE(R);
        CHECK(a.size() == got.size());
        CHECK(a == brute_force(spec, z, z, R));
      }
  }
}

TEST_CASE("two-point enumeration equals brute force") {
  const GroupSpec spec(11);
  const Point z(0.2, 1.4), w(-0.3, 0.8);
  std::set<GroupElement> got;
  for_each_image(spec, z, w, 4.5, [&](const GroupElement& g, const Point& p, double u) {
    const Point q = apply(g, w);
    CHECK(std::abs(q.x - p.x) < 1e-9);
    CHECK(u == doctest::Approx(point_pair_invariant(z, q)).epsilon(1e-9));
    got.insert(g);
  });
  CHECK(got == brute_force(spec, z, w, 4.5));
}

TEST_CASE("entries are sorted and the identity comes first") {
  const auto e = enumerate_entries(GroupSpec(11), Point(0.2, 1.4), 6.0);
  REQUIRE_FALSE(e.empty());
  CHECK(e.front().g.is_identity());
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i - 1].u <= e[i].u);
}

TEST_CASE("enumeration cap") {
  EnumerationLimits small;
  small.cap = 10;
  CHECK_THROWS_AS(enumerate(GroupSpec(1), Point(0, 1), 6.0, small), EnumerationCapExceeded);
  CHECK_THROWS_AS(enumerate(GroupSpec(1), Point(0, 1), -1.0), std::invalid_argument);
}

TEST_CASE("orbit cache reuses lists") {
  OrbitCache cache;
  const GroupSpec spec(11);
  const auto a = cache.get(spec, Point(0.2, 1.4), 5.0);
  const auto b = cache.get(spec, Point(0.2, 1.4), 5.0);
  CHECK(a.get() == b.get());
  CHECK(cache.size() == 1);
  cache.get(spec, Point(0.2, 1.4), 6.0);
  CHECK(cache.size() == 2);
}

TEST_CASE("elliptic points") {
  CHECK(near_elliptic_point(GroupSpec(1), Point(0, 1), 1e-2));
  CHECK(near_elliptic_point(GroupSpec(1), Point(-0.5, std::sqrt(3.0) / 2 + 1e-3), 1e-2));
  CHECK_FALSE(near_elliptic_point(GroupSpec(1), Point(0.2, 1.4), 1e-2));
  // Gamma0(11) has no elliptic elements
  CHECK_FALSE(near_elliptic_point(GroupSpec(11), Point(0, 1), 1e-2));
  CHECK_FALSE(near_elliptic_point(GroupSpec(11), Point(-0.5, std::sqrt(3.0) / 2), 1e-2));
  // 6^2 + 1 = 37: (6 - i) / 37 is fixed by an element of order 2 in Gamma0(37)
  CHECK(near_elliptic_point(GroupSpec(37), Point(6.0 / 37, 1.0 / 37), 1e-2));
}

TEST_CASE("Fricke reduction maximizes height and is class invariant") {
  const GroupSpec spec(11);
  const Point z(0.123, 0.02);
  const auto r = fricke_reduce(spec, z);
  CHECK(r.point.y >= z.y);
  const auto again = fricke_reduce(spec, r.point);
  CHECK(again.point.y == doctest::Approx(r.point.y).epsilon(1e-12));
  const auto moved = fricke_reduce(spec, apply(GroupElement(1, 0, 11, 1), Point(0.3, 0.9)));
  const auto base = fricke_reduce(spec, Point(0.3, 0.9));
  CHECK(moved.point.y == doctest::Approx(base.point.y).epsilon(1e-10));
  // W maps 1/sqrt(11) i to itself
  const auto fixed = fricke_reduce(spec, Point(0, 1 / std::sqrt(11.0)));
  CHECK(fixed.point.y == doctest::Approx(1 / std::sqrt(11.0)).epsilon(1e-12));
}

TEST_CASE("Ford circles respect the radius floor") {
  const auto circles = fricke_ford_circles(GroupSpec(11), 0.01);
  REQUIRE_FALSE(circles.empty());
  for (const auto& c : circles) CHECK(c.radius >= 0.01);
  const double top = std::max_element(circles.begin(), circles.end(), [](auto& a, auto& b) {
                       return a.radius < b.radius;
                     })->radius;
  CHECK(top == doctest::Approx(1 / std::sqrt(11.0)));
}
