#pragma once
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "keyid/fuchsian.hpp"

namespace keyid {

// Z(k, l) = sum_{0 < c <= c_max, N | c} S(k, l; c) J_1(4 pi sqrt(k l) / c) / c for 1 <= k, l <= kmax,
// with partial sums at c_max * {4, 5, 6, 7} / 8 kept for the truncation estimate.
struct KloostermanTable {
  int level = 1;
  int kmax = 0;
  std::int64_t c_max = 0;
  Eigen::MatrixXd full;
  std::vector<Eigen::MatrixXd> checkpoints;

  // twice the largest deviation of a checkpoint from the full sum, per entry
  Eigen::MatrixXd truncation_estimate() const;
};

KloostermanTable compute_kloosterman_table(const GroupSpec& spec, int kmax, std::int64_t c_max, int threads = 1);

// Process-wide table cache; keyed by level and c_max, grows kmax on demand.
std::shared_ptr<const KloostermanTable> kloosterman_table(const GroupSpec& spec, int kmax, std::int64_t c_max,
                                                          int threads = 1);

}  // namespace keyid
