#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cim/continuous.hpp"
#include "cim/rng.hpp"

using namespace cim;
using namespace cim::continuous;

namespace {

ContinuousParams params(double xi, double e, double g = 0.01) {
  ContinuousParams p;
  p.g = g;
  p.xi = xi;
  p.pump = PumpSchedule::constant(e);
  return p;
}

const TwoDopoWignerDraws kNoDraws{};

}  // namespace

TEST(TwoDopoWigner, ZeroStateZeroPumpIsFixed) {
  const auto d = wigner_two_dopo_increment({Complex(0, 0), Complex(0, 0)},
                                           params(0.6, 0.0), 0.0, 0.01, kNoDraws);
  EXPECT_EQ(d[0], Complex(0, 0));
  EXPECT_EQ(d[1], Complex(0, 0));
}

TEST(TwoDopoWigner, MarginalAtThreshold) {
  const auto d = wigner_two_dopo_increment({Complex(0.1, 0), Complex(-0.1, 0)},
                                           params(0.6, 0.4), 0.0, 1.0, kNoDraws);
  EXPECT_NEAR(d[0].real(), -0.001, 1e-12);
  EXPECT_NEAR(d[1].real(), 0.001, 1e-12);
}

TEST(TwoDopoWigner, GrowsAboveThreshold) {
  const auto d = wigner_two_dopo_increment({Complex(0.1, 0), Complex(-0.1, 0)},
                                           params(0.6, 0.6), 0.0, 1.0, kNoDraws);
  EXPECT_NEAR(d[0].real(), 0.019, 1e-12);
}

TEST(TwoDopoWigner, FerromagneticSignFlipsCoupling) {
  auto p = params(0.6, 0.4);
  p.phase = CouplingPhase::ferromagnetic;
  const auto d = wigner_two_dopo_increment({Complex(0.1, 0), Complex(0.1, 0)}, p,
                                           0.0, 1.0, kNoDraws);
  EXPECT_NEAR(d[0].real(), -0.001, 1e-12);
}

TEST(TwoDopoWigner, VacuumNoiseBalancesLoss) {
  // At A = 0 the signal and central channels together inject g^2 per unit
  // draw variance, matching unit loss.
  const auto p = params(0.6, 0.0, 0.1);
  TwoDopoWignerDraws s{};
  s.s1 = 1.0;
  TwoDopoWignerDraws c{};
  c.c = 1.0;
  const Complex zero[2] = {0, 0};
  const auto ds = wigner_two_dopo_increment({zero[0], zero[1]}, p, 0, 0.01, s);
  const auto dc = wigner_two_dopo_increment({zero[0], zero[1]}, p, 0, 0.01, c);
  EXPECT_NEAR(std::norm(ds[0]) + std::norm(dc[0]), 0.01, 1e-15);
  EXPECT_NEAR(std::norm(dc[1]), 0.01 * 0.6, 1e-15);
  // Antiferromagnetic central noise enters both arms with the same sign.
  EXPECT_NEAR((dc[0] - dc[1]).real(), 0.0, 1e-15);
}

TEST(TwoDopoWigner, PumpNoiseAmplitude) {
  TwoDopoWignerDraws d{};
  d.p1 = 1.0;
  const auto inc = wigner_two_dopo_increment({Complex(0.5, 0), Complex(0, 0)},
                                             params(0.0, 0.0, 0.1), 0, 0.0, d);
  EXPECT_NEAR(inc[0].real(), 0.1 * std::sqrt(2.0) * 0.5, 1e-15);
}

TEST(TwoDopoWigner, RejectsBadCoupling) {
  EXPECT_THROW(params(1.0, 0.0).validate(), std::invalid_argument);
  EXPECT_THROW(params(-0.1, 0.0).validate(), std::invalid_argument);
  EXPECT_THROW(params(0.5, 0.0, -1.0).validate(), std::invalid_argument);
}

TEST(RingWigner, ZeroStateZeroDrift) {
  std::vector<Complex> a(16), zero(16), out(16);
  wigner_ring_increment(a, params(0.4, 0.0), 0, 0.01, zero, zero, zero, out);
  for (auto v : out) EXPECT_EQ(v, Complex(0, 0));
}

TEST(RingWigner, AlternatingModeMarginalAtThreshold) {
  // drift_j = (-1)^j (-a + E a - a^3 + 2 xi a) with E = 1 - 2 xi.
  const std::size_t n = 16;
  std::vector<Complex> a(n), zero(n), out(n);
  for (std::size_t j = 0; j < n; ++j) a[j] = (j % 2 == 0 ? 0.1 : -0.1);
  wigner_ring_increment(a, params(0.4, 0.2), 0, 1.0, zero, zero, zero, out);
  for (std::size_t j = 0; j < n; ++j) {
    EXPECT_NEAR(out[j].real(), (j % 2 == 0 ? 1.0 : -1.0) * -0.001, 1e-12);
  }
}

TEST(RingWigner, VacuumNoiseBalancesLoss) {
  const std::size_t n = 8;
  const auto p = params(0.4, 0.0, 0.1);
  std::vector<Complex> a(n), zero(n), out(n);
  double total = 0.0;
  for (int channel = 0; channel < 2; ++channel) {
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<Complex> s(n), c(n);
      (channel == 0 ? s : c)[k] = 1.0;
      wigner_ring_increment(a, p, 0, 0.01, s, zero, c, out);
      total += std::norm(out[3]);
    }
  }
  EXPECT_NEAR(total, 0.01, 1e-15);
}

TEST(RingWigner, NeedsXiAtMostHalf) {
  std::vector<Complex> a(4), zero(4), out(4);
  EXPECT_THROW(wigner_ring_increment(a, params(0.6, 0.0), 0, 0.01, zero, zero, zero, out),
               std::invalid_argument);
  std::vector<Complex> b(2), z2(2), o2(2);
  EXPECT_THROW(wigner_ring_increment(b, params(0.4, 0.0), 0, 0.01, z2, z2, z2, o2),
               std::invalid_argument);
}

TEST(PumpSchedule, Evaluation) {
  const auto ramp = PumpSchedule::linear_ramp(1.5, 200);
  EXPECT_DOUBLE_EQ(ramp(200), 1.5);
  EXPECT_DOUBLE_EQ(ramp(0), 0.0);
  EXPECT_DOUBLE_EQ(ramp(300), 1.5);
  EXPECT_DOUBLE_EQ(PumpSchedule::linear_ramp(0.375, 200)(100), 0.1875);
  EXPECT_DOUBLE_EQ(PumpSchedule::constant(0.5)(0), 0.5);
  EXPECT_THROW(pump_schedule_eval(ramp, -1.0), std::invalid_argument);
  EXPECT_THROW(PumpSchedule::linear_ramp(1.0, 0.0), std::invalid_argument);
}

TEST(InitialState, WignerVacuumVariance) {
  RngStream s(2, 0, "init");
  const auto v = sample_initial_state(Representation::wigner, 1000000, 0.01, s);
  double m = 0, q = 0;
  for (auto x : v) {
    m += x.real();
    q += x.real() * x.real();
  }
  m /= v.size();
  EXPECT_NEAR(q / v.size() - m * m, 2.5e-5, 2.5e-5 * 0.02);
}

TEST(InitialState, DegenerateCases) {
  RngStream s(2, 0, "init");
  for (auto x : sample_initial_state(Representation::positive_p, 3, 0.01, s)) {
    EXPECT_EQ(x, Complex(0, 0));
  }
  EXPECT_EQ(sample_initial_state(Representation::positive_p, 3, 0.01, s).size(), 6u);
  for (auto x : sample_initial_state(Representation::wigner, 5, 0.0, s)) {
    EXPECT_EQ(x, Complex(0, 0));
  }
}

TEST(FullRates, NormalizedParametersRoundTrip) {
  const auto r = FullRates::from_normalized(0.01, 0.6, 1.0, 100.0);
  EXPECT_NEAR(r.saturation(), 0.01, 1e-14);
  EXPECT_NEAR(r.coupling(), 0.6, 1e-14);
  EXPECT_NEAR(std::sqrt(r.gamma_s / r.gamma_s_eff()), std::sqrt(1.0 - 0.6), 1e-14);
  EXPECT_NEAR(r.raw_pump(1.0), r.gamma_s_eff() * r.gamma_p / r.kappa, 1e-9);
}

TEST(FiveMode, ZeroIsFixed) {
  auto p = params(0.6, 0.0);
  p.full_rates = FullRates::from_normalized(0.01, 0.6, 1.0, 100.0);
  const auto d = wigner_five_mode_increment(FiveModeState{}, p, 0.0, 0.01, FiveModeDraws{});
  for (auto v : d) EXPECT_EQ(v, Complex(0, 0));
}

TEST(PositivePFull, ZeroIsFixed) {
  auto p = params(0.6, 0.0);
  p.full_rates = FullRates::from_normalized(0.01, 0.6, 1.0, 100.0);
  const auto d = positive_p_full_increment(PositivePFullState{}, p, 0.0, 0.01,
                                           PositivePDraws{0.3, -0.2, 0.1, 0.5});
  for (auto v : d) EXPECT_EQ(v, Complex(0, 0));
}

TEST(PositivePFull, AlphaBetaSwapSymmetry) {
  auto p = params(0.6, 0.8);
  p.full_rates = FullRates::from_normalized(0.05, 0.6, 1.0, 10.0);
  PositivePFullState a;
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = Complex(0.1 * (k + 1), -0.05 * k);
  }
  PositivePFullState swapped;
  for (std::size_t k = 0; k < a.size(); k += 2) {
    swapped[k] = a[k + 1];
    swapped[k + 1] = a[k];
  }
  const PositivePDraws dw{0.2, -0.4, 0.7, 0.1};
  const PositivePDraws dw_swapped{dw[1], dw[0], dw[3], dw[2]};
  const auto d = positive_p_full_increment(a, p, 0.3, 0.01, dw);
  const auto ds = positive_p_full_increment(swapped, p, 0.3, 0.01, dw_swapped);
  for (std::size_t k = 0; k < a.size(); k += 2) {
    EXPECT_NEAR(std::abs(d[k] - ds[k + 1]), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(d[k + 1] - ds[k]), 0.0, 1e-13);
  }
}

TEST(PositivePEliminated, ZeroIsFixed) {
  const auto d = positive_p_eliminated_increment(PositivePEliminatedState{},
                                                 params(0.6, 0.0), 0.0, 0.01,
                                                 PositivePDraws{1.0, 1.0, 1.0, 1.0});
  for (auto v : d) EXPECT_EQ(v, Complex(0, 0));
}

TEST(PositivePEliminated, ReducesToWignerDriftOnRealDiagonal) {
  // With B = A* and no noise the drift equals the Wigner drift.
  const Complex a1(0.1, 0.02), a2(-0.1, 0.01);
  const auto p = params(0.6, 0.6);
  const auto d = positive_p_eliminated_increment({a1, std::conj(a1), a2, std::conj(a2)},
                                                 p, 0, 1.0, PositivePDraws{});
  const auto w = wigner_two_dopo_increment({a1, a2}, p, 0, 1.0, kNoDraws);
  EXPECT_NEAR(std::abs(d[0] - w[0]), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(d[2] - w[1]), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(d[1] - std::conj(w[0])), 0.0, 1e-15);
}

TEST(Systems, StreamsReplay) {
  TwoDopoWignerSystem sys(params(0.6, 0.5));
  auto run = [&] {
    auto st = sys.make_streams(5, 7);
    auto a = sys.initial_state(st);
    for (int i = 0; i < 100; ++i) sys.step(a, i * 0.01, 0.01, st);
    return a;
  };
  EXPECT_EQ(run(), run());
}
