#pragma once
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace keyid {

template <typename Scalar>
struct BasicPoint {
  Scalar x{0}, y{1};

  BasicPoint() = default;
  BasicPoint(Scalar x_, Scalar y_) : x(x_), y(y_) {
    if (!std::isfinite(x) || !std::isfinite(y)) throw std::invalid_argument("point has non-finite coordinates");
    if (!(y > 0)) throw std::invalid_argument("point must lie in the upper half-plane (y > 0)");
  }
  explicit BasicPoint(std::complex<Scalar> z) : BasicPoint(z.real(), z.imag()) {}

  std::complex<Scalar> complex() const { return {x, y}; }

  friend std::ostream& operator<<(std::ostream& os, const BasicPoint& p) { return os << p.x << "+" << p.y << "i"; }
};

using Point = BasicPoint<double>;

class GroupElement {
public:
  static constexpr std::int64_t kDefaultEntryCap = 1'000'000'000;

  GroupElement() = default;
  GroupElement(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d);

  static GroupElement identity() { return {}; }
  static GroupElement inversion() { return {0, -1, 1, 0}; }
  static GroupElement translation(std::int64_t n) { return {1, n, 0, 1}; }

  std::int64_t a() const { return a_; }
  std::int64_t b() const { return b_; }
  std::int64_t c() const { return c_; }
  std::int64_t d() const { return d_; }

  GroupElement inverse() const { return {d_, -b_, -c_, a_}; }
  GroupElement operator*(const GroupElement& o) const;
  bool is_identity() const { return a_ == 1 && b_ == 0 && c_ == 0 && d_ == 1; }
  std::int64_t max_entry() const;

  auto operator<=>(const GroupElement&) const = default;

  friend std::ostream& operator<<(std::ostream& os, const GroupElement& g) {
    return os << "(" << g.a_ << "," << g.b_ << ";" << g.c_ << "," << g.d_ << ")";
  }

private:
  std::int64_t a_ = 1, b_ = 0, c_ = 0, d_ = 1;
};

struct GroupElementHash {
  std::size_t operator()(const GroupElement& g) const noexcept {
    std::size_t h = std::hash<std::int64_t>{}(g.a());
    for (auto v : {g.b(), g.c(), g.d()}) h = h * 1000003u ^ std::hash<std::int64_t>{}(v);
    return h;
  }
};

Point apply(const GroupElement& g, const Point& z, std::int64_t entry_cap = GroupElement::kDefaultEntryCap);

// u = |z-w|^2 / (4 Im z Im w), cosh d = 1 + 2u
template <typename Scalar>
Scalar point_pair_invariant(const BasicPoint<Scalar>& z, const BasicPoint<Scalar>& w) {
  const Scalar dx = z.x - w.x, dy = z.y - w.y;
  return (dx * dx + dy * dy) / (4 * z.y * w.y);
}

template <typename Scalar>
Scalar distance_from_invariant(Scalar u) {
  if (u < Scalar(1e-8)) return 2 * std::sqrt(u) * (1 - u / 6);
  return std::acosh(1 + 2 * u);
}

template <typename Scalar>
Scalar distance(const BasicPoint<Scalar>& z, const BasicPoint<Scalar>& w) {
  return distance_from_invariant(point_pair_invariant(z, w));
}

struct Reduction {
  Point point;
  GroupElement element;
};

// Into |x| <= 1/2, |z| >= 1 for the full modular group.
Reduction reduce(const Point& z, int max_iterations = 10000);

inline bool in_modular_domain(const Point& z, double slack = 1e-12) {
  return std::abs(z.x) <= 0.5 + slack && z.x * z.x + z.y * z.y >= 1 - slack;
}

}  // namespace keyid
