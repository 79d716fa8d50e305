#include "cim/ising.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cim::ising {

CouplingMatrix::CouplingMatrix(std::size_t n) : n_(n), j_(n * n, 0.0) {
  if (n == 0) throw std::invalid_argument("coupling matrix needs >= 1 spin");
  if (n > 64) throw std::invalid_argument("at most 64 spins supported");
}

CouplingMatrix CouplingMatrix::ring(std::size_t n, double j) {
  if (n < 3) throw std::invalid_argument("ring needs at least 3 spins");
  CouplingMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, (i + 1) % n, j);
  return m;
}

void CouplingMatrix::set(std::size_t i, std::size_t j, double value) {
  if (i >= n_ || j >= n_) throw std::out_of_range("coupling index out of range");
  if (i == j) throw std::invalid_argument("diagonal couplings are not allowed");
  if (!std::isfinite(value)) throw std::invalid_argument("coupling not finite");
  j_[i * n_ + j] = value;
  j_[j * n_ + i] = value;
}

CouplingMatrix CouplingMatrix::read_triplets(std::istream& in, std::size_t n) {
  struct Triplet {
    std::size_t i, j;
    double v;
  };
  std::vector<Triplet> triplets;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(ls >> i)) continue;  // blank or comment-only line
    if (!(ls >> j >> v) || i < 0 || j < 0) {
      throw std::invalid_argument("malformed coupling triplet on line " +
                                  std::to_string(line_no));
    }
    std::string extra;
    if (ls >> extra) {
      throw std::invalid_argument("trailing text on coupling line " +
                                  std::to_string(line_no));
    }
    triplets.push_back({static_cast<std::size_t>(i),
                        static_cast<std::size_t>(j), v});
    max_index = std::max({max_index, triplets.back().i, triplets.back().j});
  }
  if (n == 0) {
    if (triplets.empty()) throw std::invalid_argument("no coupling triplets");
    n = max_index + 1;
  }
  CouplingMatrix m(n);
  std::vector<bool> seen(n * n, false);
  for (const auto& t : triplets) {
    const std::size_t a = std::min(t.i, t.j);
    const std::size_t b = std::max(t.i, t.j);
    if (b >= n) throw std::out_of_range("coupling index exceeds spin count");
    if (seen[a * n + b] && m(a, b) != t.v) {
      throw std::invalid_argument("conflicting couplings for pair " +
                                  std::to_string(a) + "," + std::to_string(b));
    }
    seen[a * n + b] = true;
    m.set(a, b, t.v);
  }
  return m;
}

double ising_energy(const obs::SpinConfig& config, const CouplingMatrix& j) {
  const std::size_t n = j.size();
  if (config.size() != n) {
    throw std::invalid_argument("spin config and couplings differ in size");
  }
  double e = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      e += j(a, b) * config.sigma(a) * config.sigma(b);
    }
  }
  return e;
}

std::vector<obs::SpinConfig> brute_force_ground_states(const CouplingMatrix& j,
                                                       double tolerance) {
  const std::size_t n = j.size();
  if (n > kMaxEnumerationSpins) {
    throw std::invalid_argument("brute-force enumeration limited to " +
                                std::to_string(kMaxEnumerationSpins) +
                                " spins");
  }
  double scale = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) scale += std::abs(j(a, b));
  }
  const double tol = tolerance * std::max(scale, 1.0);

  // Gray-code walk from all-up; local fields h_k = sum_m J_km s_m.
  std::vector<int> s(n, 1);
  std::vector<double> h(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) h[a] += j(a, b);
  }
  double energy = ising_energy(obs::SpinConfig::all_up(n), j);
  std::uint64_t bits = 0;
  double best = energy;
  std::vector<std::uint64_t> candidates{0};

  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < total; ++step) {
    const auto k = static_cast<std::size_t>(std::countr_zero(step));
    energy -= 2.0 * s[k] * h[k];
    const int old = s[k];
    s[k] = -old;
    for (std::size_t m = 0; m < n; ++m) h[m] -= 2.0 * old * j(m, k);
    bits ^= std::uint64_t{1} << k;
    if (energy < best - tol) {
      best = energy;
      candidates.assign(1, bits);
    } else if (energy <= best + tol) {
      candidates.push_back(bits);
    }
  }

  // Re-evaluate exactly to shed drift from the incremental updates.
  std::vector<std::pair<double, std::uint64_t>> exact;
  exact.reserve(candidates.size());
  for (auto b : candidates) {
    exact.emplace_back(ising_energy(obs::SpinConfig(b, n), j), b);
  }
  double min_e = exact.front().first;
  for (const auto& [e, b] : exact) min_e = std::min(min_e, e);
  std::vector<obs::SpinConfig> out;
  for (const auto& [e, b] : exact) {
    if (e <= min_e + tol) out.emplace_back(b, n);
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.bits() < y.bits();
  });
  return out;
}

}  // namespace cim::ising
