#include "cim/reservoir.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cim {

ReservoirSpec ReservoirSpec::thermal(double n_th) {
  if (!(n_th >= 0.0) || !std::isfinite(n_th)) {
    throw std::invalid_argument("thermal occupation n_th must be >= 0");
  }
  return {Kind::thermal, n_th};
}

ReservoirSpec ReservoirSpec::squeezed(double r) {
  if (!std::isfinite(r)) {
    throw std::invalid_argument("squeezing parameter must be finite");
  }
  return {Kind::squeezed, r};
}

std::string ReservoirSpec::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::vacuum:
      out << "vacuum";
      break;
    case Kind::thermal:
      out << "thermal(n_th=" << parameter_ << ")";
      break;
    case Kind::squeezed:
      out << "squeezed(r=" << parameter_ << ")";
      break;
  }
  return out.str();
}

QuadratureVariances quadrature_variances(const ReservoirSpec& spec) {
  switch (spec.kind()) {
    case ReservoirSpec::Kind::vacuum:
      return {0.25, 0.25};
    case ReservoirSpec::Kind::thermal: {
      const double v = (2.0 * spec.parameter() + 1.0) / 4.0;
      return {v, v};
    }
    case ReservoirSpec::Kind::squeezed: {
      const double r = spec.parameter();
      return {std::exp(-2.0 * r) / 4.0, std::exp(2.0 * r) / 4.0};
    }
  }
  throw std::logic_error("unknown reservoir kind");
}

WienerConvention bath_convention(const ReservoirSpec& spec, double dt) {
  const auto v = quadrature_variances(spec);
  return WienerConvention(dt, 4.0 * v.x, 4.0 * v.p);
}

NoiseFieldSampler::NoiseFieldSampler(const ReservoirSpec& spec) {
  const auto v = quadrature_variances(spec);
  sd_x_ = std::sqrt(v.x);
  sd_p_ = std::sqrt(v.p);
}

Complex sample_noise_field(const ReservoirSpec& spec, RngStream& stream) {
  return NoiseFieldSampler(spec)(stream);
}

}  // namespace cim
