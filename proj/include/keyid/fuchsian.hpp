#pragma once
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "keyid/hypgeom.hpp"

namespace keyid {

class UnsupportedLevel : public std::invalid_argument {
public:
  explicit UnsupportedLevel(int level);
  int level;
};

class EnumerationCapExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct GroupSpec {
  int level = 1;

  GroupSpec() = default;
  explicit GroupSpec(int n);

  std::vector<int> primes() const;
  bool contains(const GroupElement& g) const { return g.c() % level == 0; }
};

struct Signature {
  int genus = 0;
  int cusp_count = 1;
  std::vector<int> elliptic_orders;
};

Signature signature(const GroupSpec& spec);
double volume(const Signature& sig);
inline double volume(const GroupSpec& spec) { return volume(signature(spec)); }

// [PSL2(Z) : Gamma0(N)]
std::int64_t index(const GroupSpec& spec);

// Right cosets Gamma0(N) r; for prime N the order is I, S T^0, ..., S T^(N-1).
std::vector<GroupElement> coset_reps(const GroupSpec& spec);
std::size_t coset_index(const GroupSpec& spec, const GroupElement& g);

std::int64_t mod_inverse(std::int64_t a, std::int64_t m);

// Completes a coprime bottom row (c, d) to a unimodular matrix.
GroupElement complete_bottom_row(std::int64_t c, std::int64_t d);

struct OrbitEntry {
  GroupElement g;
  Point image;
  double u;  // point-pair invariant u(z, g w)
  double displacement() const { return distance_from_invariant(u); }
};

struct EnumerationLimits {
  std::size_t cap = 10'000'000;
};

double predicted_orbit_count(const GroupSpec& spec, const Point& z, const Point& w, double R);

// Visits every gamma in Gamma0(N) (mod +-I) with d(z, gamma w) <= R.
template <typename Visitor>
std::size_t for_each_image(const GroupSpec& spec, const Point& z, const Point& w, double R, Visitor&& visit,
                           const EnumerationLimits& limits = {}) {
  if (!(R >= 0)) throw std::invalid_argument("enumeration radius must be nonnegative");
  if (predicted_orbit_count(spec, z, w, R) > double(limits.cap))
    throw EnumerationCapExceeded("predicted orbit count exceeds the enumeration cap");
  const double X = std::cosh(R);
  const double umax = 0.5 * (X - 1);
  const double eR = std::exp(R);
  const double slack = 1e-9;
  const double x = z.x, y = z.y, xi = w.x, eta = w.y;
  std::size_t count = 0;

  auto translations = [&](std::int64_t a0, std::int64_t b0, std::int64_t c, std::int64_t d, const Point& p0) {
    const double e = p0.y;
    const double room = 2 * y * e * (X - 1) - (y - e) * (y - e);
    if (room < -slack * y * e) return;
    const double r = std::sqrt(std::max(room, 0.0)) + slack * (1 + std::abs(x - p0.x));
    const auto n_lo = static_cast<std::int64_t>(std::ceil(x - p0.x - r));
    const auto n_hi = static_cast<std::int64_t>(std::floor(x - p0.x + r));
    for (std::int64_t n = n_lo; n <= n_hi; ++n) {
      const Point p(p0.x + double(n), e);
      const double u = point_pair_invariant(z, p);
      if (u > umax) continue;
      if (++count > limits.cap) throw EnumerationCapExceeded("orbit enumeration exceeded the cap");
      visit(GroupElement(a0 + n * c, b0 + n * d, c, d), p, u);
    }
  };

  if (eta / y <= eR * (1 + slack) && eta / y * eR >= 1 - slack) translations(1, 0, 0, 1, w);

  const double upper = eta * eR / y;
  const auto c_max = static_cast<std::int64_t>(std::floor(std::sqrt(eR / (y * eta)) * (1 + slack)));
  const std::int64_t step = spec.level;
  for (std::int64_t c = step; c <= c_max; c += step) {
    const double cc = double(c);
    const double s2 = upper - cc * cc * eta * eta;
    if (s2 < -slack * upper) continue;
    const double s = std::sqrt(std::max(s2, 0.0)) + slack * (1 + cc * std::abs(xi));
    const auto d_lo = static_cast<std::int64_t>(std::ceil(-cc * xi - s));
    const auto d_hi = static_cast<std::int64_t>(std::floor(-cc * xi + s));
    for (std::int64_t d = d_lo; d <= d_hi; ++d) {
      if (std::gcd(c, d) != 1) continue;
      const std::int64_t a0 = c == 1 ? 0 : mod_inverse(((d % c) + c) % c, c);
      const std::int64_t b0 = static_cast<std::int64_t>((static_cast<__int128>(a0) * d - 1) / c);
      const GroupElement g0(a0, b0, c, d);
      translations(a0, b0, c, d, apply(g0, w, std::numeric_limits<std::int64_t>::max()));
    }
  }
  return count;
}

std::vector<OrbitEntry> enumerate_entries(const GroupSpec& spec, const Point& z, const Point& w, double R,
                                          const EnumerationLimits& limits = {});
inline std::vector<OrbitEntry> enumerate_entries(const GroupSpec& spec, const Point& z, double R,
                                                 const EnumerationLimits& limits = {}) {
  return enumerate_entries(spec, z, z, R, limits);
}

// {gamma : d(z, gamma z) <= R}, identity included, sorted by displacement.
std::vector<GroupElement> enumerate(const GroupSpec& spec, const Point& z, double R, const EnumerationLimits& limits = {});

class OrbitCache {
public:
  using List = std::shared_ptr<const std::vector<OrbitEntry>>;

  List get(const GroupSpec& spec, const Point& z, double R);
  std::size_t size() const;

  static OrbitCache& global();

private:
  struct Slot {
    Point z;
    List list;
  };
  using Key = std::tuple<int, std::int64_t, std::int64_t, double>;
  mutable std::mutex mutex_;
  std::map<Key, Slot> table_;
};

// Non-identity stabilizer element of finite order within `radius` of z, if any.
bool near_elliptic_point(const GroupSpec& spec, const Point& z, double radius);

// Maximizes Im over the orbit of z under Gamma0(N) and the Fricke involution z -> -1/(N z).
struct FrickeReduction {
  Point point;
  int fricke_parity = 0;
};
FrickeReduction fricke_reduce(const GroupSpec& spec, const Point& z, int max_iterations = 1000);

struct Circle {
  double center, radius;
};

// Isometric circles of the group generated by Gamma0(N) and the Fricke involution, radius >= r_min,
// with centers in [-1/2 - 1, 1/2 + 1].
std::vector<Circle> fricke_ford_circles(const GroupSpec& spec, double r_min);

}  // namespace keyid
