#pragma once

#include <complex>

#include "cim/rng.hpp"

namespace cim {

using Complex = std::complex<double>;

/// Complex Wiener increment convention.
///
/// An unscaled increment has independent real and imaginary parts, each a
/// zero-mean Gaussian of variance dt/2. A reservoir rescales the two
/// quadrature variances independently (x by quad_var_scale_x, p by
/// quad_var_scale_p).
class WienerConvention {
 public:
  explicit WienerConvention(double dt, double quad_var_scale_x = 1.0,
                            double quad_var_scale_p = 1.0);

  double dt() const { return dt_; }
  double quad_var_scale_x() const { return scale_x_; }
  double quad_var_scale_p() const { return scale_p_; }

  /// Standard deviations of the real and imaginary parts.
  double sd_x() const { return sd_x_; }
  double sd_p() const { return sd_p_; }

 private:
  double dt_;
  double scale_x_;
  double scale_p_;
  double sd_x_;
  double sd_p_;
};

inline Complex sample_complex_wiener(const WienerConvention& convention,
                                     RngStream& stream) {
  const double re = convention.sd_x() * stream.normal();
  const double im = convention.sd_p() * stream.normal();
  return {re, im};
}

/// Real Wiener increment of variance dt (positive-P noise channels).
inline double sample_real_wiener(double sd, RngStream& stream) {
  return sd * stream.normal();
}

}  // namespace cim
