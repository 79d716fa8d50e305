#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <vector>

#include "cim/wiener.hpp"

namespace cim {

struct IntegratorConfig {
  double dt = 1e-3;
  double total_time = 1.0;
  /// Ascending, each <= total_time; snapped to the nearest step.
  std::vector<double> sample_times;
  /// |amplitude| above this marks the path divergent.
  double divergence_cap = 1e3;

  void validate() const;
  std::size_t step_count() const;
  /// Step index at which each sample time is recorded.
  std::vector<std::size_t> sample_steps() const;
};

/// Evenly spaced sample times 0, spacing, 2*spacing, ... up to total_time.
std::vector<double> uniform_sample_times(double total_time, double spacing);

/// A system advances its state by one Ito Euler-Maruyama step, drawing
/// whatever noise it needs from its own stream bundle.
template <class S>
concept SdeSystem = requires(const S& sys, typename S::State& x,
                             typename S::Streams& streams, double t,
                             double dt) {
  { sys.step(x, t, dt, streams) };
};

template <class State>
struct PathResult {
  State final_state;
  bool diverged = false;
  double divergence_time = 0.0;
  std::size_t samples_recorded = 0;
};

template <class State>
bool state_within_cap(const State& x, double cap) {
  for (const auto& v : x) {
    const double re = std::real(v);
    const double im = std::imag(v);
    if (!std::isfinite(re) || !std::isfinite(im)) return false;
    if (re * re + im * im > cap * cap) return false;
  }
  return true;
}

/// Fixed-step Euler-Maruyama driver. The observer is called as
/// observer(sample_index, t, state) at every sample time reached before
/// any divergence; a divergent path is halted where it is detected.
template <SdeSystem System, class Observer>
PathResult<typename System::State> integrate_trajectory(
    const System& system, typename System::State initial_state,
    const IntegratorConfig& config, typename System::Streams& streams,
    Observer&& observer) {
  config.validate();
  const std::size_t n_steps = config.step_count();
  const std::vector<std::size_t> sample_steps = config.sample_steps();

  PathResult<typename System::State> result{std::move(initial_state)};
  auto& x = result.final_state;
  std::size_t next_sample = 0;
  auto emit = [&](std::size_t step) {
    while (next_sample < sample_steps.size() &&
           sample_steps[next_sample] == step) {
      observer(next_sample, static_cast<double>(step) * config.dt,
               static_cast<const typename System::State&>(x));
      ++next_sample;
    }
  };

  if (!state_within_cap(x, config.divergence_cap)) {
    result.diverged = true;
    return result;
  }
  emit(0);
  for (std::size_t n = 0; n < n_steps; ++n) {
    system.step(x, static_cast<double>(n) * config.dt, config.dt, streams);
    if (!state_within_cap(x, config.divergence_cap)) {
      result.diverged = true;
      result.divergence_time = static_cast<double>(n + 1) * config.dt;
      break;
    }
    emit(n + 1);
  }
  result.samples_recorded = next_sample;
  return result;
}

}  // namespace cim
