#include <gtest/gtest.h>

#include <cmath>

#include "cim/reservoir.hpp"
#include "cim/rng.hpp"

using namespace cim;

namespace {

struct Moments {
  double var_re = 0.0, var_im = 0.0, mean_norm = 0.0;
};

Moments sample(const ReservoirSpec& spec, int n) {
  RngStream s(11, 0, "f");
  double mr = 0, mi = 0, rr = 0, ii = 0, nn = 0;
  for (int i = 0; i < n; ++i) {
    const Complex f = sample_noise_field(spec, s);
    mr += f.real();
    mi += f.imag();
    rr += f.real() * f.real();
    ii += f.imag() * f.imag();
    nn += std::norm(f);
  }
  mr /= n;
  mi /= n;
  return {rr / n - mr * mr, ii / n - mi * mi, nn / n};
}

}  // namespace

TEST(Reservoir, QuadratureVariances) {
  const auto v = quadrature_variances(ReservoirSpec::vacuum());
  EXPECT_DOUBLE_EQ(v.x, 0.25);
  EXPECT_DOUBLE_EQ(v.p, 0.25);
  const auto s0 = quadrature_variances(ReservoirSpec::squeezed(0.0));
  EXPECT_DOUBLE_EQ(s0.x, 0.25);
  EXPECT_DOUBLE_EQ(s0.p, 0.25);
  const auto s = quadrature_variances(ReservoirSpec::squeezed(1.2));
  EXPECT_NEAR(s.x, 0.02268, 1e-5);
  EXPECT_NEAR(s.p, 2.7557, 1e-4);
  const auto t = quadrature_variances(ReservoirSpec::thermal(1.0));
  EXPECT_DOUBLE_EQ(t.x, 0.75);
  EXPECT_DOUBLE_EQ(t.p, 0.75);
}

TEST(Reservoir, RejectsInvalidParameters) {
  EXPECT_THROW(ReservoirSpec::thermal(-0.1), std::invalid_argument);
  EXPECT_THROW(ReservoirSpec::squeezed(std::nan("")), std::invalid_argument);
}

TEST(Reservoir, MinimumUncertaintyForPureStates) {
  for (double r : {0.0, 0.3, 1.2}) {
    const auto v = quadrature_variances(ReservoirSpec::squeezed(r));
    EXPECT_NEAR(v.x * v.p, 1.0 / 16.0, 1e-12);
  }
}

TEST(Reservoir, VacuumFieldVariance) {
  const auto m = sample(ReservoirSpec::vacuum(), 1000000);
  EXPECT_NEAR(m.var_re, 0.25, 0.25 * 0.01);
}

TEST(Reservoir, SqueezedFieldProduct) {
  const auto m = sample(ReservoirSpec::squeezed(1.2), 1000000);
  EXPECT_NEAR(m.var_re * m.var_im, 1.0 / 16.0, 1.0 / 16.0 * 0.02);
}

TEST(Reservoir, ThermalPhotonNumber) {
  const auto m = sample(ReservoirSpec::thermal(10.0), 1000000);
  EXPECT_NEAR(m.mean_norm - 0.5, 10.0, 10.0 * 0.02);
}

TEST(Reservoir, BathConventionScalesByFourTimesVariance) {
  const auto c = bath_convention(ReservoirSpec::squeezed(0.5), 0.01);
  EXPECT_NEAR(c.quad_var_scale_x(), std::exp(-1.0), 1e-12);
  EXPECT_NEAR(c.quad_var_scale_p(), std::exp(1.0), 1e-12);
  EXPECT_NEAR(c.sd_x(), std::sqrt(0.005 * std::exp(-1.0)), 1e-12);
}
