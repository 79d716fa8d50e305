#pragma once

#include <cstddef>
#include <istream>
#include <vector>

#include "cim/observables.hpp"

namespace cim::ising {

/// Symmetric Ising couplings with zero diagonal.
class CouplingMatrix {
 public:
  explicit CouplingMatrix(std::size_t n);

  /// Nearest-neighbour ring with coupling j on every bond.
  static CouplingMatrix ring(std::size_t n, double j);

  /// Whitespace-separated "i j J_ij" triplets with zero-based indices.
  /// Size is max index + 1 unless `n` is given.
  static CouplingMatrix read_triplets(std::istream& in, std::size_t n = 0);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const {
    return j_[i * n_ + j];
  }
  /// Sets both J_ij and J_ji.
  void set(std::size_t i, std::size_t j, double value);

 private:
  std::size_t n_;
  std::vector<double> j_;
};

inline constexpr std::size_t kMaxEnumerationSpins = 24;

/// sum_{i<j} J_ij s_i s_j.
double ising_energy(const obs::SpinConfig& config, const CouplingMatrix& j);

/// Every minimum-energy configuration, in ascending bit order.
std::vector<obs::SpinConfig> brute_force_ground_states(
    const CouplingMatrix& j, double tolerance = 1e-9);

}  // namespace cim::ising
