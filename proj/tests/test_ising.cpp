#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cim/ising.hpp"
#include "cim/rng.hpp"

using namespace cim;
using namespace cim::ising;
using obs::SpinConfig;

namespace {

std::vector<std::string> names(const std::vector<SpinConfig>& v) {
  std::vector<std::string> out;
  for (const auto& c : v) out.push_back(c.to_string());
  std::sort(out.begin(), out.end());
  return out;
}

/// Direct enumeration with the energy recomputed from scratch.
std::vector<SpinConfig> naive_ground(const CouplingMatrix& j) {
  const std::size_t n = j.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<SpinConfig> out;
  for (std::uint64_t b = 0; b < (1ull << n); ++b) {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = i + 1; k < n; ++k) {
        const int si = (b >> i) & 1 ? -1 : 1;
        const int sk = (b >> k) & 1 ? -1 : 1;
        e += j(i, k) * si * sk;
      }
    }
    if (e < best - 1e-12) {
      best = e;
      out.clear();
    }
    if (std::abs(e - best) <= 1e-12) out.emplace_back(b, n);
  }
  return out;
}

}  // namespace

TEST(Oracle, AntiferroRingOfFour) {
  const auto g = brute_force_ground_states(CouplingMatrix::ring(4, 1.0));
  EXPECT_EQ(names(g), (std::vector<std::string>{"dudu", "udud"}));
  EXPECT_DOUBLE_EQ(ising_energy(g[0], CouplingMatrix::ring(4, 1.0)), -4.0);
}

TEST(Oracle, FrustratedTriangle) {
  const auto g = brute_force_ground_states(CouplingMatrix::ring(3, 1.0));
  EXPECT_EQ(g.size(), 6u);
  for (const auto& c : g) {
    EXPECT_NE(c.to_string(), "uuu");
    EXPECT_NE(c.to_string(), "ddd");
  }
}

TEST(Oracle, FerroRingOfFour) {
  const auto g = brute_force_ground_states(CouplingMatrix::ring(4, -1.0));
  EXPECT_EQ(names(g), (std::vector<std::string>{"dddd", "uuuu"}));
}

TEST(Oracle, EvenRingsHaveAlternatingGroundPair) {
  for (std::size_t n : {8u, 12u, 16u}) {
    const auto g = brute_force_ground_states(CouplingMatrix::ring(n, 1.0));
    ASSERT_EQ(g.size(), 2u) << n;
    const std::vector<SpinConfig> expect = {SpinConfig::alternating(n, true),
                                            SpinConfig::alternating(n, false)};
    EXPECT_TRUE(std::is_permutation(g.begin(), g.end(), expect.begin()));
  }
}

TEST(Oracle, RandomGuessBaseline) {
  const auto g = brute_force_ground_states(CouplingMatrix::ring(16, 1.0));
  EXPECT_DOUBLE_EQ(static_cast<double>(g.size()) / 65536.0, 2.0 / 65536.0);
}

TEST(Oracle, MatchesNaiveEnumerationOnRandomGraphs) {
  RngStream s(21, 0, "j");
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 6 + trial % 5;
    CouplingMatrix j(n);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        // Integer couplings produce degenerate ground sets.
        j.set(a, b, static_cast<double>(static_cast<int>(s() % 5) - 2));
      }
    }
    EXPECT_EQ(names(brute_force_ground_states(j)), names(naive_ground(j)));
  }
}

TEST(Oracle, RejectsOversizedProblems) {
  EXPECT_THROW(brute_force_ground_states(CouplingMatrix(kMaxEnumerationSpins + 1)),
               std::invalid_argument);
}

TEST(Couplings, ReadTriplets) {
  std::istringstream in("# triangle\n0 1 1.0\n1 2 1\n\n2 0 1.0\n");
  const auto j = CouplingMatrix::read_triplets(in);
  EXPECT_EQ(j.size(), 3u);
  EXPECT_DOUBLE_EQ(j(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(j(0, 2), 1.0);
  std::istringstream sized("0 1 -1\n");
  EXPECT_EQ(CouplingMatrix::read_triplets(sized, 5).size(), 5u);
}

TEST(Couplings, RejectsMalformedInput) {
  std::istringstream diag("0 0 1\n");
  EXPECT_THROW(CouplingMatrix::read_triplets(diag), std::invalid_argument);
  std::istringstream conflict("0 1 1\n1 0 2\n");
  EXPECT_THROW(CouplingMatrix::read_triplets(conflict), std::invalid_argument);
  std::istringstream garbage("0 1 x\n");
  EXPECT_THROW(CouplingMatrix::read_triplets(garbage), std::invalid_argument);
  std::istringstream out_of_range("0 7 1\n");
  EXPECT_THROW(CouplingMatrix::read_triplets(out_of_range, 4), std::out_of_range);
}
