#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cim/reservoir.hpp"
#include "cim/rng.hpp"
#include "cim/wiener.hpp"

/// Round-trip map for a pulse train in a fiber-ring coherent Ising machine
/// with measurement of the out-coupled field and delay-line feedback.
/// Amplitudes are normalized, A = mu * alpha.
namespace cim::discrete {

/// Where the feedback pulse is injected relative to the DOPA gain step.
enum class InjectionOrder { post_gain, pre_gain };

struct DiscreteParams {
  std::size_t n = 16;
  double mu = 0.01;
  double pump_e = 0.0;      // normalized pump per round trip
  double t_p = 0.1;         // output coupler transmission
  double t_i = 1e-4;        // injection coupler transmission
  double psa_gain = 1.0;
  std::vector<double> coupling;  // n x n row-major, zero diagonal
  ReservoirSpec reservoir;
  std::size_t rounds = 2000;
  std::size_t substeps = 1;
  InjectionOrder order = InjectionOrder::post_gain;

  void validate() const;
  /// True when t_i is large enough that the weak-injection picture fails.
  bool injection_warning() const { return t_i > 0.1; }
};

/// Nearest-neighbour ring, xi_ij = xi_ring for |i - j| = 1 mod n.
std::vector<double> ring_coupling(std::size_t n, double xi_ring);

/// Deterministic linear threshold of the dominant mode of `coupling` (in
/// normalized pump units), from the round-trip gain balance.
double linear_threshold(const DiscreteParams& params);

/// One round trip of DOPA gain, split into `substeps` Ito steps. `dw` holds
/// one unit-variance complex draw per substep (each part variance 1/2).
Complex dopa_step(Complex a, double e, double mu, std::span<const Complex> dw);

struct CoupledPair {
  Complex out;
  Complex cav;
};

CoupledPair out_couple(Complex a_cav, Complex f, double t_p);

struct Readout {
  double c_out;    // amplified in-phase amplitude
  double c_tilde;  // c_out / (G sqrt(T_p))
};

Readout psa_readout(Complex a_cav_before, Complex f, double t_p, double gain);

/// (1/sqrt(T_i)) sum_j xi_ij c_j.
double feedback_amplitude(std::span<const double> c_tilde,
                          std::span<const double> coupling_row, double t_i);

Complex inject(Complex a_cav, double alpha_fb, double t_i);

struct RoundTripRecord {
  std::vector<double> c_tilde;
  std::vector<Complex> out;
};

class DiscreteMachine {
 public:
  using State = std::vector<Complex>;
  struct Streams {
    RngStream reservoir, gain, init;
    // Per-round scratch.
    std::vector<Complex> f, dw;
    std::vector<double> c_tilde;
  };

  explicit DiscreteMachine(DiscreteParams params);

  const DiscreteParams& params() const { return params_; }
  Streams make_streams(std::uint64_t seed, std::uint64_t trajectory) const;
  /// Each pulse starts in the reservoir's stationary state (the E = 0 fixed
  /// point of the out-coupling map).
  State initial_state(Streams& streams) const;
  /// Returns false when an amplitude leaves the divergence cap.
  bool round_trip(State& a, Streams& streams, RoundTripRecord* record,
                  double divergence_cap = 1e3) const;

 private:
  DiscreteParams params_;
  NoiseFieldSampler field_;
};

/// Photon number |A|^2 / mu^2 - 1/2 of one normalized Wigner amplitude.
inline double photon_number(Complex a, double mu) {
  return std::norm(a) / (mu * mu) - 0.5;
}

struct ThresholdEstimate {
  double pump = 0.0;         // refined location of maximum slope
  std::size_t index = 0;     // grid index of maximum slope
  double max_slope = 0.0;    // d log<n> / d log eps there
  bool unique = true;        // false when another grid point ties
};

/// Location of maximum d log<n> / d log eps by central differences with
/// parabolic refinement. Needs >= 5 positive, increasing grid points and
/// positive photon numbers. Ties within `tolerance` (relative) of the peak
/// slope at non-adjacent points clear `unique`.
ThresholdEstimate estimate_threshold(std::span<const double> pump,
                                     std::span<const double> photon_numbers,
                                     double tolerance = 0.02);

}  // namespace cim::discrete
