#include "keyid/kloosterman.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <utility>
#include <vector>

#include "keyid/parallel.hpp"

namespace keyid {

namespace {

// contribution of a single modulus c
void add_modulus(std::int64_t c, int kmax, Eigen::MatrixXd& acc) {
  std::vector<std::int64_t> ds, inv;
  for (std::int64_t d = 1; d <= c; ++d)
    if (std::gcd(d, c) == 1) {
      ds.push_back(d % c);
      inv.push_back(c == 1 ? 0 : mod_inverse(d, c));
    }
  const auto phi = Eigen::Index(ds.size());
  std::vector<double> cs(static_cast<std::size_t>(c)), sn(static_cast<std::size_t>(c));
  for (std::int64_t j = 0; j < c; ++j) {
    const double a = 2 * std::numbers::pi * double(j) / double(c);
    cs[std::size_t(j)] = std::cos(a);
    sn[std::size_t(j)] = std::sin(a);
  }
  Eigen::MatrixXd cb(kmax, phi), sb(kmax, phi), cd(phi, kmax), sd(phi, kmax);
  for (Eigen::Index i = 0; i < phi; ++i)
    for (int k = 1; k <= kmax; ++k) {
      const auto jb = std::size_t(std::int64_t(k) * inv[std::size_t(i)] % c);
      const auto jd = std::size_t(std::int64_t(k) * ds[std::size_t(i)] % c);
      cb(k - 1, i) = cs[jb];
      sb(k - 1, i) = sn[jb];
      cd(i, k - 1) = cs[jd];
      sd(i, k - 1) = sn[jd];
    }
  Eigen::MatrixXd s = cb * cd;
  s.noalias() -= sb * sd;
  const double inv_c = 1.0 / double(c);
  for (int l = 1; l <= kmax; ++l)
    for (int k = 1; k <= kmax; ++k)
      acc(k - 1, l - 1) +=
          s(k - 1, l - 1) * std::cyl_bessel_j(1.0, 4 * std::numbers::pi * std::sqrt(double(k) * l) * inv_c) * inv_c;
}

}  // namespace

Eigen::MatrixXd KloostermanTable::truncation_estimate() const {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(full.rows(), full.cols());
  for (const auto& cp : checkpoints) e = e.cwiseMax((full - cp).cwiseAbs());
  return 2 * e;
}

KloostermanTable compute_kloosterman_table(const GroupSpec& spec, int kmax, std::int64_t c_max, int threads) {
  if (kmax < 1 || c_max < spec.level) throw std::invalid_argument("Kloosterman table needs kmax >= 1 and c_max >= N");
  const std::int64_t n = spec.level;
  std::vector<std::int64_t> moduli;
  for (std::int64_t c = n; c <= c_max; c += n) moduli.push_back(c);
  // fixed blocks keep the reduction order independent of the thread count
  constexpr std::size_t block = 16;
  const std::size_t nblocks = (moduli.size() + block - 1) / block;
  std::vector<Eigen::MatrixXd> partial(nblocks);
  parallel_for(nblocks, threads, [&](std::size_t b) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(kmax, kmax);
    for (std::size_t i = b * block; i < std::min(moduli.size(), (b + 1) * block); ++i) add_modulus(moduli[i], kmax, acc);
    partial[b] = std::move(acc);
  });
  KloostermanTable t;
  t.level = spec.level;
  t.kmax = kmax;
  t.c_max = c_max;
  t.full = Eigen::MatrixXd::Zero(kmax, kmax);
  t.checkpoints.assign(4, t.full);
  for (std::size_t b = 0; b < nblocks; ++b) {
    const std::int64_t last = moduli[std::min(moduli.size(), (b + 1) * block) - 1];
    t.full += partial[b];
    for (int j = 0; j < 4; ++j)
      if (last <= (4 + j) * c_max / 8) t.checkpoints[std::size_t(j)] += partial[b];
  }
  t.full = (0.5 * (t.full + t.full.transpose())).eval();
  for (auto& cp : t.checkpoints) cp = (0.5 * (cp + cp.transpose())).eval();
  return t;
}

std::shared_ptr<const KloostermanTable> kloosterman_table(const GroupSpec& spec, int kmax, std::int64_t c_max,
                                                          int threads) {
  static std::mutex mutex;
  static std::map<std::pair<int, std::int64_t>, std::shared_ptr<const KloostermanTable>> cache;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find({spec.level, c_max});
    if (it != cache.end() && it->second->kmax >= kmax) return it->second;
  }
  auto table = std::make_shared<const KloostermanTable>(compute_kloosterman_table(spec, kmax, c_max, threads));
  std::lock_guard lock(mutex);
  auto& slot = cache[{spec.level, c_max}];
  if (!slot || slot->kmax < kmax) slot = table;
  return table;
}

}  // namespace keyid
