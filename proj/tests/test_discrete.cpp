#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cim/discrete.hpp"
#include "cim/rng.hpp"

using namespace cim;
using namespace cim::discrete;

namespace {

DiscreteParams ring_params(double p = 0.0) {
  DiscreteParams d;
  d.coupling = ring_coupling(d.n, -0.01);
  d.pump_e = p * linear_threshold(d);
  return d;
}

}  // namespace

TEST(DopaStep, FixedPointAndArithmetic) {
  const std::vector<Complex> w = {Complex(0.3, -0.8)};
  EXPECT_EQ(dopa_step(Complex(0, 0), 0.7, 0.01, w), Complex(0, 0));
  const std::vector<Complex> none = {Complex(0, 0)};
  const Complex a = dopa_step(Complex(0.1, 0), 0.5, 0.0, none);
  EXPECT_NEAR(a.real() - 0.1, 0.049, 1e-15);
  EXPECT_EQ(a.imag(), 0.0);
  const Complex b = dopa_step(Complex(0.1, 0), 0.5, 0.0, std::vector<Complex>(4));
  EXPECT_EQ(b.imag(), 0.0);
  EXPECT_THROW(dopa_step(Complex(0.1, 0), 0.5, 0.0, {}), std::invalid_argument);
}

TEST(OutCouple, Arithmetic) {
  const auto full = out_couple(Complex(0.4, 0.1), Complex(-0.2, 0.3), 1.0);
  EXPECT_EQ(full.out, Complex(0.4, 0.1));
  EXPECT_EQ(full.cav, Complex(-0.2, 0.3));
  const auto p = out_couple(Complex(1, 0), Complex(0, 0), 0.1);
  EXPECT_NEAR(p.out.real(), 0.3162, 1e-4);
  EXPECT_NEAR(p.cav.real(), 0.9487, 1e-4);
}

TEST(OutCouple, IsUnitary) {
  RngStream s(1, 0, "u");
  for (int i = 0; i < 100; ++i) {
    const Complex a(s.normal(), s.normal()), f(s.normal(), s.normal());
    const double t_p = 0.01 + 0.98 * s.uniform();
    const auto o = out_couple(a, f, t_p);
    EXPECT_NEAR(std::norm(o.out) + std::norm(o.cav), std::norm(a) + std::norm(f), 1e-12);
  }
}

TEST(PsaReadout, Arithmetic) {
  const auto r = psa_readout(Complex(1, 0), Complex(0, 0), 0.1, 1.0);
  EXPECT_NEAR(r.c_out, 0.3162, 1e-4);
  EXPECT_NEAR(r.c_tilde, 1.0, 1e-12);
  EXPECT_EQ(psa_readout(Complex(0, 0.7), Complex(0, 0), 0.1, 3.0).c_out, 0.0);
  const auto g = psa_readout(Complex(0.2, 0), Complex(0.1, 0.5), 0.3, 7.0);
  EXPECT_NEAR(g.c_tilde, g.c_out / (7.0 * std::sqrt(0.3)), 1e-12);
}

TEST(Feedback, Arithmetic) {
  const auto row = ring_coupling(16, -0.01);
  std::vector<double> c(16, 0.0);
  const std::span<const double> r0(row.data(), 16);
  EXPECT_EQ(feedback_amplitude(c, r0, 1e-4), 0.0);
  c[1] = 1.0;
  c[15] = -1.0;
  EXPECT_NEAR(feedback_amplitude(c, r0, 1e-4), 0.0, 1e-15);
  c[15] = 1.0;
  EXPECT_NEAR(feedback_amplitude(c, r0, 1e-4), -2.0, 1e-12);
}

TEST(Inject, Arithmetic) {
  EXPECT_NEAR(inject(Complex(1, 0), 0.0, 0.19).real(), 0.9, 1e-15);
  EXPECT_NEAR(inject(Complex(1, 0), -2.0, 1e-4).real(), 0.97995, 1e-8);
  EXPECT_THROW(inject(Complex(1, 0), 0.0, 1.0), std::invalid_argument);
}

TEST(Params, ValidationAndWarning) {
  auto d = ring_params();
  EXPECT_NO_THROW(d.validate());
  d.t_i = 0.2;
  EXPECT_TRUE(d.injection_warning());
  d.coupling[0] = 0.1;
  EXPECT_THROW(d.validate(), std::invalid_argument);
  auto e = ring_params();
  e.t_p = 0.0;
  EXPECT_THROW(e.validate(), std::invalid_argument);
  EXPECT_THROW(ring_coupling(2, -0.01), std::invalid_argument);
}

TEST(LinearThreshold, RingValue) {
  // Dominant mode of the -0.01 ring is the alternating one, lambda = 0.02.
  const auto d = ring_params();
  const double expect = (1.0 - 0.02) / std::sqrt((1 - 1e-4) * 0.9) - 1.0;
  EXPECT_NEAR(linear_threshold(d), expect, 1e-12);
  EXPECT_NEAR(linear_threshold(d), 0.03306, 1e-5);
}

TEST(RoundTrip, NoiseBookkeepingFixedPoint) {
  // Below threshold with E = 0 the in-phase variance stays at the
  // reservoir's stationary value reduced by the injection loss:
  // v = (1 - T_i) T_p v_res / (1 - (1 - T_i)(1 - T_p)).
  DiscreteParams d;
  d.n = 4;
  d.coupling.assign(16, 0.0);
  d.rounds = 1;
  d.t_p = 0.1;
  d.t_i = 0.05;
  d.reservoir = ReservoirSpec::squeezed(0.5);
  const DiscreteMachine m(d);
  const int traj = 20000;
  double sum = 0.0;
  for (int t = 0; t < traj; ++t) {
    auto st = m.make_streams(1, t);
    auto a = m.initial_state(st);
    for (int r = 0; r < 100; ++r) ASSERT_TRUE(m.round_trip(a, st, nullptr));
    for (const auto& v : a) sum += std::pow(v.real() / d.mu, 2);
  }
  const double v_res = std::exp(-1.0) / 4.0;
  const double keep = 1 - d.t_i;
  const double expect = keep * d.t_p * v_res / (1 - keep * (1 - d.t_p));
  const double measured = sum / (traj * 4.0);
  EXPECT_NEAR(measured, expect, 4 * expect * std::sqrt(2.0 / (traj * 4.0)));
}

TEST(RoundTrip, RecordAndDeterminism) {
  auto d = ring_params(1.1);
  d.n = 16;
  const DiscreteMachine m(d);
  auto run = [&] {
    auto st = m.make_streams(3, 2);
    auto a = m.initial_state(st);
    RoundTripRecord rec;
    for (int r = 0; r < 50; ++r) m.round_trip(a, st, &rec);
    return std::make_pair(a, rec.c_tilde);
  };
  const auto x = run();
  const auto y = run();
  EXPECT_EQ(x.first, y.first);
  EXPECT_EQ(x.second, y.second);
  EXPECT_EQ(x.second.size(), 16u);
}

TEST(RoundTrip, AboveThresholdOscillates) {
  auto d = ring_params(1.3);
  const DiscreteMachine m(d);
  auto st = m.make_streams(5, 0);
  auto a = m.initial_state(st);
  for (int r = 0; r < 2000; ++r) ASSERT_TRUE(m.round_trip(a, st, nullptr));
  double n = 0.0;
  for (const auto& v : a) n += photon_number(v, d.mu);
  EXPECT_GT(n / 16.0, 30.0);
}

TEST(RoundTrip, DivergenceCap) {
  auto d = ring_params(1.3);
  const DiscreteMachine m(d);
  auto st = m.make_streams(5, 0);
  auto a = m.initial_state(st);
  a[0] = Complex(2000.0, 0.0);
  EXPECT_FALSE(m.round_trip(a, st, nullptr));
}

TEST(Threshold, ConstructedKnee) {
  std::vector<double> eps, n;
  for (double e = 0.5; e < 2.001; e += 0.05) {
    eps.push_back(e);
    n.push_back(e < 1.0 ? e * e : 1e3 * (e - 1.0) + 1.0);
  }
  const auto t = estimate_threshold(eps, n);
  EXPECT_NEAR(t.pump, 1.0, 0.06);
  EXPECT_GT(t.max_slope, 2.0);
}

TEST(Threshold, ScaleInvariantInPhotonNumber) {
  std::vector<double> eps, n, n10;
  for (double e = 0.5; e < 2.001; e += 0.05) {
    eps.push_back(e);
    n.push_back(e < 1.0 ? e * e : 1e3 * (e - 1.0) + 1.0);
    n10.push_back(10.0 * n.back());
  }
  EXPECT_DOUBLE_EQ(estimate_threshold(eps, n).pump, estimate_threshold(eps, n10).pump);
}

TEST(Threshold, FlagsAmbiguousPeaks) {
  std::vector<double> eps, n;
  double v = 1.0;
  for (int k = 0; k < 12; ++k) {
    eps.push_back(std::pow(1.1, k));
    // Two identical jumps well apart.
    v *= (k == 3 || k == 9) ? 10.0 : 1.01;
    n.push_back(v);
  }
  EXPECT_FALSE(estimate_threshold(eps, n).unique);
}

TEST(Threshold, RejectsBadInput) {
  std::vector<double> eps = {1, 2, 3, 4}, n = {1, 2, 3, 4};
  EXPECT_THROW(estimate_threshold(eps, n), std::invalid_argument);
  std::vector<double> e5 = {1, 2, 3, 4, 5}, bad = {1, 2, -3, 4, 5};
  EXPECT_THROW(estimate_threshold(e5, bad), std::invalid_argument);
  std::vector<double> unsorted = {1, 3, 2, 4, 5};
  EXPECT_THROW(estimate_threshold(unsorted, e5), std::invalid_argument);
}
