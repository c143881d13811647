#include "keyid/hypgeom.hpp"

#include <cstdlib>
#include <limits>

namespace keyid {

namespace {

std::int64_t checked(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw std::overflow_error("group element entry overflows 64 bits");
  return static_cast<std::int64_t>(v);
}

}  // namespace

GroupElement::GroupElement(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
  if (static_cast<__int128>(a) * d - static_cast<__int128>(b) * c != 1)
    throw std::invalid_argument("group element must have determinant 1");
  if (c < 0 || (c == 0 && d < 0)) {
    a = -a;
    b = -b;
    c = -c;
    d = -d;
  }
  a_ = a;
  b_ = b;
  c_ = c;
  d_ = d;
}

GroupElement GroupElement::operator*(const GroupElement& o) const {
  using W = __int128;
  return {checked(W(a_) * o.a_ + W(b_) * o.c_), checked(W(a_) * o.b_ + W(b_) * o.d_),
          checked(W(c_) * o.a_ + W(d_) * o.c_), checked(W(c_) * o.b_ + W(d_) * o.d_)};
}

std::int64_t GroupElement::max_entry() const {
  return std::max({std::llabs(a_), std::llabs(b_), std::llabs(c_), std::llabs(d_)});
}

Point apply(const GroupElement& g, const Point& z, std::int64_t entry_cap) {
  if (g.max_entry() > entry_cap) throw std::overflow_error("group element entries exceed the configured magnitude bound");
  const double a = double(g.a()), b = double(g.b()), c = double(g.c()), d = double(g.d());
  const double re = c * z.x + d, im = c * z.y;
  const double den = re * re + im * im;
  const double x = ((a * z.x + b) * re + a * c * z.y * z.y) / den;
  return {x, z.y / den};
}

Reduction reduce(const Point& z, int max_iterations) {
  GroupElement g;
  double x = z.x, y = z.y;
  for (int it = 0; it < max_iterations; ++it) {
    const double n = std::floor(x + 0.5);
    if (n != 0) {
      if (std::abs(n) > 1e15) throw std::overflow_error("reduction translation out of range");
      x -= n;
      g = GroupElement::translation(-static_cast<std::int64_t>(n)) * g;
    }
    if (x >= 0.5) {
      x -= 1;
      g = GroupElement::translation(-1) * g;
    }
    const double r2 = x * x + y * y;
    if (r2 > 1) return {Point(x, y), g};
    if (r2 == 1) {
      if (x > 0) {
        x = -x;
        g = GroupElement::inversion() * g;
      }
      return {Point(x, y), g};
    }
    x = -x / r2;
    y = y / r2;
    g = GroupElement::inversion() * g;
  }
  throw std::runtime_error("reduction iteration cap exceeded");
}

}  // namespace keyid
