#include "cim/wiener.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cim {

WienerConvention::WienerConvention(double dt, double quad_var_scale_x,
                                   double quad_var_scale_p)
    : dt_(dt), scale_x_(quad_var_scale_x), scale_p_(quad_var_scale_p) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("Wiener increment requires dt > 0, got " +
                                std::to_string(dt));
  }
  if (!(scale_x_ >= 0.0) || !(scale_p_ >= 0.0)) {
    throw std::invalid_argument("quadrature variance scales must be >= 0");
  }
  sd_x_ = std::sqrt(0.5 * dt_ * scale_x_);
  sd_p_ = std::sqrt(0.5 * dt_ * scale_p_);
}

}  // namespace cim
