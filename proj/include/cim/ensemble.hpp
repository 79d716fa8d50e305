#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cim/continuous.hpp"
#include "cim/discrete.hpp"
#include "cim/integrator.hpp"
#include "cim/ising.hpp"
#include "cim/observables.hpp"

/// Trajectory-parallel ensembles with deterministic, index-ordered
/// reductions. Worker count never changes results.
namespace cim::ensemble {

using continuous::Representation;
using obs::Estimate;

/// Resolves a requested worker count: nonzero values are taken as given,
/// zero reads CIM_WORKERS and then falls back to the hardware concurrency.
std::size_t resolve_workers(std::size_t requested);

/// Runs body(i) for i in [0, count) on `workers` threads. Exceptions are
/// rethrown on the calling thread (the first one by index).
template <class Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = count;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Quadratures of one trajectory at one sample time, in photon-amplitude
/// units.
struct QuadratureView {
  Representation rep;
  std::size_t modes;
  const Complex* c;
  const Complex* s;
};

/// Maps a trajectory snapshot to `width` complex features and reduces the
/// features of all surviving trajectories to one estimate per output.
struct Observable {
  std::vector<std::string> outputs;
  std::size_t width = 1;
  std::function<void(const QuadratureView&, Complex*)> extract;
  /// rows: [trajectory][width] for survivors only; the last argument is
  /// the mode count. Returns one entry per output.
  std::function<std::vector<std::optional<Estimate>>(
      std::span<const Complex>, Representation, std::size_t)>
      reduce;
};

namespace observables {
/// Outputs epr_u, epr_v, epr_sum for u = x_a + x_b, v = p_a - p_b. With
/// sign = -1, u = x_a - x_b and v = p_a + p_b, named with a _minus suffix.
Observable epr_pair(std::size_t a = 0, std::size_t b = 1, double sign = 1.0);
/// Outputs ring_u, ring_v, ring_sum. Even mode counts only.
Observable ring_epr();
Observable variance_x(std::size_t mode);
Observable variance_p(std::size_t mode);
Observable photon_number(std::size_t mode);
/// Photon number averaged over all modes.
Observable mean_photon_number();
Observable correlation_xx(std::size_t i, std::size_t j);
Observable correlation_pp(std::size_t i, std::size_t j);
/// Fraction of trajectories whose spin readout lies in `configs`.
Observable config_probability(std::string name,
                              std::vector<obs::SpinConfig> configs);
}  // namespace observables

struct RunOptions {
  std::size_t n_trajectories = 1000;
  std::uint64_t master_seed = 1;
  std::size_t workers = 0;
  bool record_spins = false;
};

struct EnsembleSeries {
  std::vector<double> times;
  std::vector<std::string> names;
  /// [output][time]; empty when the estimator is undefined.
  std::vector<std::vector<std::optional<Estimate>>> values;
  std::size_t n_trajectories = 0;
  std::size_t survivors = 0;
  std::size_t divergent = 0;
  /// More than 1% of trajectories diverged.
  bool unreliable = false;
  /// Spin readouts of surviving trajectories, [trajectory][time], when
  /// requested.
  std::vector<obs::SpinConfig> spins;

  const std::vector<std::optional<Estimate>>& series(
      const std::string& name) const;
  std::size_t time_index(double t) const;  // nearest sample time
};

/// Runs a model over `options.n_trajectories` trajectories. A model
/// provides sample_times(), representation(), modes(), and
/// run(seed, trajectory, observer) returning true on divergence, calling
/// observer(sample_index, QuadratureView) at each sample time.
template <class Model>
EnsembleSeries run_model(const Model& model, const RunOptions& options,
                         const std::vector<Observable>& observables) {
  if (options.n_trajectories < 2) {
    throw std::invalid_argument("ensembles need at least 2 trajectories");
  }
  const std::size_t n_traj = options.n_trajectories;
  const std::vector<double> times = model.sample_times();
  const std::size_t n_times = times.size();
  std::vector<std::size_t> offset(observables.size());
  std::size_t width = 0;
  for (std::size_t k = 0; k < observables.size(); ++k) {
    offset[k] = width;
    width += observables[k].width;
  }

  std::vector<Complex> table(n_times * n_traj * width);
  std::vector<std::uint64_t> spin_bits(
      options.record_spins ? n_traj * n_times : 0);
  std::vector<unsigned char> diverged(n_traj, 0);

  parallel_for(n_traj, resolve_workers(options.workers), [&](std::size_t i) {
    std::vector<double> inphase;
    const bool div = model.run(
        options.master_seed, i,
        [&](std::size_t t, const QuadratureView& view) {
          Complex* row = table.data() + (t * n_traj + i) * width;
          for (std::size_t k = 0; k < observables.size(); ++k) {
            observables[k].extract(view, row + offset[k]);
          }
          if (options.record_spins) {
            inphase.resize(view.modes);
            for (std::size_t j = 0; j < view.modes; ++j) {
              inphase[j] = view.c[j].real();
            }
            spin_bits[i * n_times + t] = obs::spins(inphase).bits();
          }
        });
    diverged[i] = div ? 1 : 0;
  });

  EnsembleSeries out;
  out.times = times;
  out.n_trajectories = n_traj;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n_traj; ++i) {
    if (!diverged[i]) keep.push_back(i);
  }
  out.survivors = keep.size();
  out.divergent = n_traj - keep.size();
  out.unreliable = out.divergent * 100 > n_traj;
  std::vector<std::size_t> first_output(observables.size());
  for (std::size_t k = 0; k < observables.size(); ++k) {
    first_output[k] = out.names.size();
    for (const auto& name : observables[k].outputs) out.names.push_back(name);
  }
  out.values.assign(out.names.size(),
                    std::vector<std::optional<Estimate>>(n_times));

  if (keep.size() >= 2) {
    const Representation rep = model.representation();
    std::vector<Complex> rows;
    for (std::size_t k = 0; k < observables.size(); ++k) {
      const std::size_t w = observables[k].width;
      rows.resize(keep.size() * w);
      for (std::size_t t = 0; t < n_times; ++t) {
        for (std::size_t s = 0; s < keep.size(); ++s) {
          const Complex* src =
              table.data() + (t * n_traj + keep[s]) * width + offset[k];
          std::copy(src, src + w, rows.begin() + s * w);
        }
        auto est = observables[k].reduce(rows, rep, model.modes());
        if (est.size() != observables[k].outputs.size()) {
          throw std::logic_error("observable returned wrong output count");
        }
        for (std::size_t o = 0; o < est.size(); ++o) {
          out.values[first_output[k] + o][t] = est[o];
        }
      }
    }
  }
  if (options.record_spins) {
    out.spins.reserve(keep.size() * n_times);
    for (std::size_t i : keep) {
      for (std::size_t t = 0; t < n_times; ++t) {
        out.spins.emplace_back(spin_bits[i * n_times + t], model.modes());
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model adapters.

/// Maps a continuous-system state to per-mode quadratures.
template <class State>
using QuadratureMap =
    std::function<void(const State&, Complex* c, Complex* s)>;

template <class System>
class ContinuousModel {
 public:
  ContinuousModel(System system, IntegratorConfig integrator,
                  Representation rep, std::size_t modes,
                  QuadratureMap<typename System::State> map)
      : system_(std::move(system)),
        integrator_(std::move(integrator)),
        rep_(rep),
        modes_(modes),
        map_(std::move(map)) {
    integrator_.validate();
  }

  std::vector<double> sample_times() const {
    std::vector<double> out;
    for (std::size_t step : integrator_.sample_steps()) {
      out.push_back(static_cast<double>(step) * integrator_.dt);
    }
    return out;
  }
  Representation representation() const { return rep_; }
  std::size_t modes() const { return modes_; }
  const System& system() const { return system_; }

  template <class Observer>
  bool run(std::uint64_t seed, std::uint64_t trajectory,
           Observer&& observer) const {
    auto streams = system_.make_streams(seed, trajectory);
    auto init = system_.initial_state(streams);
    std::vector<Complex> c(modes_), s(modes_);
    const auto result = integrate_trajectory(
        system_, std::move(init), integrator_, streams,
        [&](std::size_t index, double, const typename System::State& x) {
          map_(x, c.data(), s.data());
          observer(index, QuadratureView{rep_, modes_, c.data(), s.data()});
        });
    return result.diverged;
  }

 private:
  System system_;
  IntegratorConfig integrator_;
  Representation rep_;
  std::size_t modes_;
  QuadratureMap<typename System::State> map_;
};

/// Discrete machine sampled every `stride` round trips (and at the end).
class DiscreteModel {
 public:
  DiscreteModel(discrete::DiscreteParams params, std::size_t stride,
                double divergence_cap = 1e3);

  std::vector<double> sample_times() const;
  Representation representation() const { return Representation::wigner; }
  std::size_t modes() const { return machine_.params().n; }
  const discrete::DiscreteMachine& machine() const { return machine_; }

  template <class Observer>
  bool run(std::uint64_t seed, std::uint64_t trajectory,
           Observer&& observer) const {
    const auto& p = machine_.params();
    auto streams = machine_.make_streams(seed, trajectory);
    auto a = machine_.initial_state(streams);
    std::vector<Complex> c(p.n), s(p.n);
    std::size_t index = 0;
    auto emit = [&] {
      for (std::size_t j = 0; j < p.n; ++j) {
        c[j] = {a[j].real() / p.mu, 0.0};
        s[j] = {a[j].imag() / p.mu, 0.0};
      }
      observer(index++, QuadratureView{Representation::wigner, p.n, c.data(),
                                        s.data()});
    };
    emit();
    for (std::size_t round = 1; round <= p.rounds; ++round) {
      if (!machine_.round_trip(a, streams, nullptr, cap_)) return true;
      if (round % stride_ == 0 || round == p.rounds) emit();
    }
    return false;
  }

 private:
  discrete::DiscreteMachine machine_;
  std::size_t stride_;
  double cap_;
};

/// Quadrature maps for the built-in continuous systems.
QuadratureMap<continuous::TwoDopoWignerState> two_dopo_wigner_map(double g);
QuadratureMap<continuous::PositivePEliminatedState> two_dopo_positive_p_map(
    double g);
QuadratureMap<std::vector<Complex>> ring_wigner_map(double g);
QuadratureMap<continuous::FiveModeState> five_mode_map();
QuadratureMap<continuous::PositivePFullState> positive_p_full_map();

// ---------------------------------------------------------------------------
// Configuration-driven entry point.

enum class ModelKind {
  two_dopo_wigner,
  two_dopo_positive_p,
  ring_wigner,
  five_mode_wigner,
  positive_p_full,
  discrete
};

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct EnsembleConfig {
  std::size_t n_trajectories = 1000;
  std::uint64_t master_seed = 1;
  std::size_t workers = 0;
  ModelKind model = ModelKind::two_dopo_wigner;
  continuous::ContinuousParams continuous;
  std::size_t ring_size = 16;
  IntegratorConfig integrator;
  discrete::DiscreteParams discrete;
  std::size_t round_stride = 10;
  /// Names understood by make_observable.
  std::vector<std::string> observables;
  bool record_spins = false;
  double divergence_cap = 1e3;

  void validate() const;
  std::size_t modes() const;
};

/// Ising couplings J_ij (energy sum_{i<j} J_ij s_i s_j) equivalent to the
/// optical coupling of the configured model.
ising::CouplingMatrix ising_couplings(const EnsembleConfig& config);

/// Builds an observable from its name: epr[:A:B], epr_minus[:A:B], ring,
/// variance_x:K, variance_p:K, photon_number[:K], correlation_xx:I:J,
/// correlation_pp:I:J, success_probability.
Observable make_observable(const std::string& name,
                           const EnsembleConfig& config);

EnsembleSeries run_ensemble(const EnsembleConfig& config);

}  // namespace cim::ensemble
