#pragma once

#include <string>

#include "cim/rng.hpp"
#include "cim/wiener.hpp"

namespace cim {

/// Statistics of the field entering an open coupler port.
///
/// All variances are symmetric-ordered (Wigner) quadrature variances in the
/// x = (a + a^dag)/2, p = (a - a^dag)/(2i) convention, where vacuum is 1/4.
/// Squeezing is always along x.
class ReservoirSpec {
 public:
  enum class Kind { vacuum, thermal, squeezed };

  ReservoirSpec() = default;

  static ReservoirSpec vacuum() { return {}; }
  static ReservoirSpec thermal(double n_th);
  static ReservoirSpec squeezed(double r);

  Kind kind() const { return kind_; }
  /// n_th for thermal, r for squeezed, 0 for vacuum.
  double parameter() const { return parameter_; }

  std::string describe() const;

  bool operator==(const ReservoirSpec&) const = default;

 private:
  ReservoirSpec(Kind kind, double parameter)
      : kind_(kind), parameter_(parameter) {}

  Kind kind_ = Kind::vacuum;
  double parameter_ = 0.0;
};

struct QuadratureVariances {
  double x;
  double p;
};

QuadratureVariances quadrature_variances(const ReservoirSpec& spec);

/// Wiener convention for a bath increment driven by this reservoir:
/// the vacuum convention with each quadrature scaled by 4 * variance.
WienerConvention bath_convention(const ReservoirSpec& spec, double dt);

/// Draws the noise field f incident on an open port: independent Gaussian
/// quadratures with the reservoir variances.
class NoiseFieldSampler {
 public:
  explicit NoiseFieldSampler(const ReservoirSpec& spec);

  Complex operator()(RngStream& stream) const {
    const double re = sd_x_ * stream.normal();
    const double im = sd_p_ * stream.normal();
    return {re, im};
  }

 private:
  double sd_x_;
  double sd_p_;
};

Complex sample_noise_field(const ReservoirSpec& spec, RngStream& stream);

}  // namespace cim
