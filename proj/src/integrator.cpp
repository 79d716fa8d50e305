#include "cim/integrator.hpp"

#include <stdexcept>
#include <string>

namespace cim {

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("integrator dt must be positive");
  }
  if (!(total_time > 0.0) || !std::isfinite(total_time)) {
    throw std::invalid_argument("integrator total_time must be positive");
  }
  if (!(divergence_cap > 0.0)) {
    throw std::invalid_argument("divergence_cap must be positive");
  }
  double previous = -1.0;
  for (double t : sample_times) {
    if (t < 0.0 || t > total_time + 0.5 * dt) {
      throw std::invalid_argument("sample time " + std::to_string(t) +
                                  " outside [0, total_time]");
    }
    if (t < previous) {
      throw std::invalid_argument("sample times must be ascending");
    }
    previous = t;
  }
}

std::size_t IntegratorConfig::step_count() const {
  return static_cast<std::size_t>(std::llround(total_time / dt));
}

std::vector<std::size_t> IntegratorConfig::sample_steps() const {
  std::vector<std::size_t> steps;
  steps.reserve(sample_times.size());
  const std::size_t n_steps = step_count();
  for (double t : sample_times) {
    auto s = static_cast<std::size_t>(std::llround(t / dt));
    steps.push_back(s > n_steps ? n_steps : s);
  }
  return steps;
}

std::vector<double> uniform_sample_times(double total_time, double spacing) {
  if (!(spacing > 0.0)) {
    throw std::invalid_argument("sample spacing must be positive");
  }
  std::vector<double> times;
  const auto n = static_cast<std::size_t>(std::floor(total_time / spacing + 1e-9));
  times.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    times.push_back(static_cast<double>(k) * spacing);
  }
  return times;
}

}  // namespace cim
