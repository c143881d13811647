#include "keyid/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace keyid {

const GaussRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (slot) return *slot;
  if (n < 1) throw std::invalid_argument("Gauss rule needs at least one node");
  auto rule = std::make_unique<GaussRule>();
  rule->nodes.resize(std::size_t(n));
  rule->weights.resize(std::size_t(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    const double w = 2 / ((1 - x * x) * dp * dp);
    rule->nodes[std::size_t(i)] = -x;
    rule->nodes[std::size_t(n - 1 - i)] = x;
    rule->weights[std::size_t(i)] = rule->weights[std::size_t(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule->nodes[std::size_t(n / 2)] = 0;
  slot = std::move(rule);
  return *slot;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

}  // namespace keyid
