#include "keyid/fuchsian.hpp"

#include <algorithm>
#include <numbers>
#include <set>
#include <string>

namespace keyid {

namespace {

int kronecker_minus_one(int p) {
  if (p == 2) return 0;
  return p % 4 == 1 ? 1 : -1;
}

int kronecker_minus_three(int p) {
  if (p == 3) return 0;
  if (p == 2) return -1;
  return p % 3 == 1 ? 1 : -1;
}

std::pair<std::int64_t, std::int64_t> canonical_p1(std::int64_t c, std::int64_t d, std::int64_t n) {
  c = ((c % n) + n) % n;
  d = ((d % n) + n) % n;
  if (n == 1) return {0, 0};
  std::pair<std::int64_t, std::int64_t> best{n, n};
  for (std::int64_t lam = 1; lam < n; ++lam) {
    if (std::gcd(lam, n) != 1) continue;
    std::pair<std::int64_t, std::int64_t> cand{lam * c % n, lam * d % n};
    best = std::min(best, cand);
  }
  return best;
}

}  // namespace

UnsupportedLevel::UnsupportedLevel(int n)
    : std::invalid_argument("unsupported level " + std::to_string(n) + " (squarefree N >= 1 required)"), level(n) {}

GroupSpec::GroupSpec(int n) : level(n) {
  if (n < 1 || n > 1'000'000) throw UnsupportedLevel(n);
  for (int p = 2; p * p <= n; ++p)
    if (n % (p * p) == 0) throw UnsupportedLevel(n);
}

std::vector<int> GroupSpec::primes() const {
  std::vector<int> out;
  int n = level;
  for (int p = 2; p * p <= n; ++p)
    if (n % p == 0) {
      out.push_back(p);
      n /= p;
    }
  if (n > 1) out.push_back(n);
  return out;
}

std::int64_t index(const GroupSpec& spec) {
  std::int64_t mu = 1;
  for (int p : spec.primes()) mu *= p + 1;
  return mu;
}

Signature signature(const GroupSpec& spec) {
  const auto ps = spec.primes();
  std::int64_t mu = 1, nu2 = 1, nu3 = 1;
  for (int p : ps) {
    mu *= p + 1;
    nu2 *= 1 + kronecker_minus_one(p);
    nu3 *= 1 + kronecker_minus_three(p);
  }
  const std::int64_t cusps = std::int64_t(1) << ps.size();
  // 12 g = 12 + mu - 3 nu2 - 4 nu3 - 6 cusps
  const std::int64_t twelve_g = 12 + mu - 3 * nu2 - 4 * nu3 - 6 * cusps;
  if (twelve_g % 12 != 0) throw std::logic_error("non-integral genus");
  Signature sig;
  sig.genus = int(twelve_g / 12);
  sig.cusp_count = int(cusps);
  sig.elliptic_orders.assign(std::size_t(nu2), 2);
  sig.elliptic_orders.insert(sig.elliptic_orders.end(), std::size_t(nu3), 3);
  return sig;
}

double volume(const Signature& sig) {
  double chi = 2.0 * sig.genus - 2 + sig.cusp_count;
  for (int m : sig.elliptic_orders) chi += 1.0 - 1.0 / m;
  if (!(chi > 0)) throw std::invalid_argument("signature has nonpositive volume");
  return 2 * std::numbers::pi * chi;
}

std::int64_t mod_inverse(std::int64_t a, std::int64_t m) {
  std::int64_t g = m, x = 0, x1 = 1, a1 = ((a % m) + m) % m;
  while (a1 != 0) {
    const std::int64_t q = g / a1;
    std::tie(g, a1) = std::make_pair(a1, g - q * a1);
    std::tie(x, x1) = std::make_pair(x1, x - q * x1);
  }
  if (g != 1) throw std::invalid_argument("not invertible");
  return ((x % m) + m) % m;
}

GroupElement complete_bottom_row(std::int64_t c, std::int64_t d) {
  if (c == 0) {
    if (d != 1 && d != -1) throw std::invalid_argument("bottom row not coprime");
    return {d, 0, 0, d};
  }
  const std::int64_t ac = std::llabs(c);
  if (std::gcd(ac, d) != 1) throw std::invalid_argument("bottom row not coprime");
  // a d - b c = 1
  std::int64_t a = ac == 1 ? 0 : mod_inverse(d, ac);
  const auto b = static_cast<std::int64_t>((static_cast<__int128>(a) * d - 1) / c);
  return {a, b, c, d};
}

std::vector<GroupElement> coset_reps(const GroupSpec& spec) {
  const std::int64_t n = spec.level;
  std::vector<GroupElement> reps{GroupElement::identity()};
  if (n == 1) return reps;
  std::set<std::pair<std::int64_t, std::int64_t>> seen{canonical_p1(0, 1, n)};
  for (std::int64_t c = 1; c < n; ++c)
    for (std::int64_t d = 0; d < n; ++d) {
      if (std::gcd(std::gcd(c, d), n) != 1) continue;
      if (!seen.insert(canonical_p1(c, d, n)).second) continue;
      std::int64_t dl = d;
      while (std::gcd(c, dl) != 1) dl += n;
      reps.push_back(complete_bottom_row(c, dl));
    }
  if (std::int64_t(reps.size()) != index(spec)) throw std::logic_error("coset count mismatch");
  return reps;
}

std::size_t coset_index(const GroupSpec& spec, const GroupElement& g) {
  const std::int64_t n = spec.level;
  if (n == 1) return 0;
  const auto key = canonical_p1(g.c(), g.d(), n);
  const auto reps = coset_reps(spec);
  for (std::size_t j = 0; j < reps.size(); ++j)
    if (canonical_p1(reps[j].c(), reps[j].d(), n) == key) return j;
  throw std::logic_error("element outside every coset");
}

double predicted_orbit_count(const GroupSpec& spec, const Point& z, const Point& w, double R) {
  const double X = std::cosh(R);
  const double bulk = 2 * std::numbers::pi * (X - 1) / volume(spec);
  const double parabolic = 2 * std::sqrt(std::max(2 * (X - 1), 0.0)) * std::max(z.y, w.y);
  return 2 * bulk + parabolic + 1;
}

std::vector<OrbitEntry> enumerate_entries(const GroupSpec& spec, const Point& z, const Point& w, double R,
                                          const EnumerationLimits& limits) {
  std::vector<OrbitEntry> out;
  for_each_image(
      spec, z, w, R, [&](const GroupElement& g, const Point& p, double u) { out.push_back({g, p, u}); }, limits);
  std::sort(out.begin(), out.end(), [](const OrbitEntry& l, const OrbitEntry& r) {
    return l.u != r.u ? l.u < r.u : l.g < r.g;
  });
  return out;
}

std::vector<GroupElement> enumerate(const GroupSpec& spec, const Point& z, double R, const EnumerationLimits& limits) {
  std::vector<GroupElement> out;
  for (const auto& e : enumerate_entries(spec, z, R, limits)) out.push_back(e.g);
  return out;
}

OrbitCache::List OrbitCache::get(const GroupSpec& spec, const Point& z, double R) {
  const Key key{spec.level, std::llround(z.x * 1e6), std::llround(z.y * 1e6), R};
  {
    std::lock_guard lock(mutex_);
    auto it = table_.find(key);
    if (it != table_.end() && it->second.z.x == z.x && it->second.z.y == z.y) return it->second.list;
  }
  auto list = std::make_shared<const std::vector<OrbitEntry>>(enumerate_entries(spec, z, R));
  std::lock_guard lock(mutex_);
  table_[key] = {z, list};
  return list;
}

std::size_t OrbitCache::size() const {
  std::lock_guard lock(mutex_);
  return table_.size();
}

OrbitCache& OrbitCache::global() {
  static OrbitCache cache;
  return cache;
}

bool near_elliptic_point(const GroupSpec& spec, const Point& z, double radius) {
  // a rotation of order m >= 2 about p moves z by at least 2 sin(pi/m) d(z,p) >= sqrt(3) d(z,p)
  for (const auto& e : enumerate_entries(spec, z, 2 * radius)) {
    if (e.g.is_identity()) continue;
    if (std::llabs(e.g.a() + e.g.d()) < 2) return true;
  }
  return false;
}

FrickeReduction fricke_reduce(const GroupSpec& spec, const Point& z0, int max_iterations) {
  const double n = spec.level;
  const double sqrt_n = std::sqrt(n);
  double x = z0.x, y = z0.y;
  int parity = 0;
  for (int it = 0; it < max_iterations; ++it) {
    x -= std::floor(x + 0.5);
    struct Best {
      double height;
      std::int64_t c, d;
      bool fricke;
    } best{y * (1 + 1e-13), 0, 0, false};
    auto consider = [&](std::int64_t c, bool fricke) {
      const auto d0 = static_cast<std::int64_t>(std::floor(-double(c) * x));
      for (std::int64_t d = d0 - 1; d <= d0 + 2; ++d) {
        if (fricke ? std::gcd(c, d * spec.level) != 1 : std::gcd(c, d) != 1) continue;
        const double re = double(c) * x + double(d), im = double(c) * y;
        const double h = y / ((fricke ? n : 1.0) * (re * re + im * im));
        if (h > best.height) best = {h, c, d, fricke};
      }
    };
    for (std::int64_t c = spec.level; double(c) * y < 1; c += spec.level) consider(c, false);
    if (spec.level > 1)
      for (std::int64_t c = 1; double(c) * y * sqrt_n < 1; ++c) consider(c, true);
    if (best.c == 0) return {Point(x, y), parity};
    const std::complex<double> zz(x, y);
    std::complex<double> img;
    if (!best.fricke) {
      const auto g = complete_bottom_row(best.c, best.d);
      img = (double(g.a()) * zz + double(g.b())) / (double(g.c()) * zz + double(g.d()));
    } else {
      // (aN z + b) / (cN z + dN), a d N - b c = 1
      const std::int64_t c = best.c, d = best.d;
      const std::int64_t dn = d * spec.level;
      const std::int64_t a = c == 1 ? 0 : mod_inverse(((dn % c) + c) % c, c);
      const auto b = static_cast<std::int64_t>((static_cast<__int128>(a) * dn - 1) / c);
      img = (double(a) * n * zz + double(b)) / (double(c) * n * zz + double(dn));
      parity ^= 1;
    }
    x = img.real();
    y = best.height;
  }
  throw std::runtime_error("Fricke reduction did not terminate");
}

std::vector<Circle> fricke_ford_circles(const GroupSpec& spec, double r_min) {
  std::vector<Circle> out;
  const double sqrt_n = std::sqrt(double(spec.level));
  auto add_family = [&](std::int64_t c_step, double scale, bool fricke) {
    for (std::int64_t c = c_step; 1.0 / (double(c) * scale) >= r_min; c += c_step) {
      const double r = 1.0 / (double(c) * scale);
      for (std::int64_t d = -2 * c; d <= 2 * c; ++d) {
        if (fricke ? std::gcd(c, d * spec.level) != 1 : std::gcd(c, d) != 1) continue;
        const double center = -double(d) / double(c);
        if (std::abs(center) <= 1.5) out.push_back({center, r});
      }
    }
  };
  add_family(spec.level, 1.0, false);
  if (spec.level > 1) add_family(1, sqrt_n, true);
  return out;
}

}  // namespace keyid
