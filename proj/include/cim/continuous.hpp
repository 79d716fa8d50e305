#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cim/reservoir.hpp"
#include "cim/rng.hpp"
#include "cim/wiener.hpp"

/// Continuous-time c-number SDEs for coupled degenerate optical parametric
/// oscillators. Eliminated models work in normalized amplitude A = g*alpha
/// and normalized time tau; the un-eliminated models (five-mode Wigner and
/// ten-variable positive-P) work in raw amplitudes and lab time t.
namespace cim::continuous {

/// Phase factor exp(i k_c z) of the central coupling path.
enum class CouplingPhase : int { ferromagnetic = 1, antiferromagnetic = -1 };

inline double sign_of(CouplingPhase phase) {
  return static_cast<double>(static_cast<int>(phase));
}

class PumpSchedule {
 public:
  enum class Kind { linear_ramp, constant, abrupt };

  PumpSchedule() = default;

  /// E(tau) = e_max * tau / tau_max, held at e_max after tau_max.
  static PumpSchedule linear_ramp(double e_max, double tau_max);
  static PumpSchedule constant(double e);
  /// Switched on at tau = 0 and held.
  static PumpSchedule abrupt(double e);

  Kind kind() const { return kind_; }
  double e_max() const { return e_max_; }
  double tau_max() const { return tau_max_; }

  double operator()(double tau) const {
    if (kind_ == Kind::linear_ramp) {
      return tau >= tau_max_ ? e_max_ : e_max_ * (tau / tau_max_);
    }
    return e_max_;
  }

 private:
  Kind kind_ = Kind::constant;
  double e_max_ = 0.0;
  double tau_max_ = 1.0;
};

/// Throws on tau < 0.
double pump_schedule_eval(const PumpSchedule& schedule, double tau);

/// Rates of the un-eliminated two-DOPO model.
struct FullRates {
  double gamma_s = 1.0;
  double gamma_p = 100.0;
  double gamma_c = 100.0;
  double kappa = 1.0;
  double zeta = 0.0;

  /// gamma'_s = gamma_s + zeta^2 / gamma_c.
  double gamma_s_eff() const { return gamma_s + zeta * zeta / gamma_c; }
  double saturation() const;        // g
  double coupling() const;          // xi
  /// Raw pump epsilon giving normalized pump E.
  double raw_pump(double e) const;

  /// Rates reproducing (g, xi) with gamma_p = gamma_c = ratio * gamma_s.
  static FullRates from_normalized(double g, double xi, double gamma_s,
                                   double ratio);
};

struct ContinuousParams {
  double g = 0.01;
  double xi = 0.0;
  PumpSchedule pump;
  CouplingPhase phase = CouplingPhase::antiferromagnetic;
  ReservoirSpec reservoir_central;
  std::optional<FullRates> full_rates;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Increments. Each returns drift * dt + noise for one Ito step, given the
// Wiener draws for that step.

struct TwoDopoWignerDraws {
  Complex s1, s2, p1, p2, c;
};

using TwoDopoWignerState = std::array<Complex, 2>;

TwoDopoWignerState wigner_two_dopo_increment(const TwoDopoWignerState& a,
                                             const ContinuousParams& params,
                                             double tau, double dtau,
                                             const TwoDopoWignerDraws& dw);

/// In-place ring increment written to `out` (size N). Draws are indexed by
/// pulse; pulse j sees central draws c[j] and c[j+1 mod N].
void wigner_ring_increment(std::span<const Complex> a,
                           const ContinuousParams& params, double tau,
                           double dtau, std::span<const Complex> dw_s,
                           std::span<const Complex> dw_p,
                           std::span<const Complex> dw_c,
                           std::span<Complex> out);

/// Order: alpha_s1, alpha_s2, alpha_p1, alpha_p2, alpha_c.
using FiveModeState = std::array<Complex, 5>;

struct FiveModeDraws {
  Complex s1, s2, p1, p2, c;
};

FiveModeState wigner_five_mode_increment(const FiveModeState& a,
                                         const ContinuousParams& params,
                                         double t, double dt,
                                         const FiveModeDraws& dw);

/// Order: (alpha, beta) for s1, s2, p1, p2, c.
using PositivePFullState = std::array<Complex, 10>;

namespace ppf {
inline constexpr std::size_t as1 = 0, bs1 = 1, as2 = 2, bs2 = 3, ap1 = 4,
                             bp1 = 5, ap2 = 6, bp2 = 7, ac = 8, bc = 9;
}

/// Real Wiener draws driving alpha_s1, beta_s1, alpha_s2, beta_s2.
using PositivePDraws = std::array<double, 4>;

PositivePFullState positive_p_full_increment(const PositivePFullState& a,
                                             const ContinuousParams& params,
                                             double t, double dt,
                                             const PositivePDraws& dw);

/// Order: A_s1, B_s1, A_s2, B_s2.
using PositivePEliminatedState = std::array<Complex, 4>;

PositivePEliminatedState positive_p_eliminated_increment(
    const PositivePEliminatedState& a, const ContinuousParams& params,
    double tau, double dtau, const PositivePDraws& dw);

enum class Representation { wigner, positive_p };

/// Initial vacuum: Wigner amplitudes with per-quadrature variance g^2/4,
/// positive-P all zeros (2 * mode_count entries, alpha/beta interleaved).
std::vector<Complex> sample_initial_state(Representation representation,
                                          std::size_t mode_count, double g,
                                          RngStream& stream);

// ---------------------------------------------------------------------------
// Systems for integrate_trajectory.

class TwoDopoWignerSystem {
 public:
  using State = TwoDopoWignerState;
  struct Streams {
    RngStream s1, s2, p1, p2, c, init;
  };

  explicit TwoDopoWignerSystem(ContinuousParams params);

  const ContinuousParams& params() const { return params_; }
  Streams make_streams(std::uint64_t seed, std::uint64_t trajectory) const;
  State initial_state(Streams& streams) const;
  void step(State& a, double tau, double dtau, Streams& streams) const;

 private:
  ContinuousParams params_;
  QuadratureVariances central_;
};

class TwoDopoPositivePSystem {
 public:
  using State = PositivePEliminatedState;
  struct Streams {
    RngStream a1, b1, a2, b2;
  };

  explicit TwoDopoPositivePSystem(ContinuousParams params);

  const ContinuousParams& params() const { return params_; }
  Streams make_streams(std::uint64_t seed, std::uint64_t trajectory) const;
  State initial_state(Streams& streams) const;
  void step(State& a, double tau, double dtau, Streams& streams) const;

 private:
  ContinuousParams params_;
};

class RingWignerSystem {
 public:
  using State = std::vector<Complex>;
  struct Streams {
    std::vector<RngStream> s, p, c;
    RngStream init;
    // Scratch for one step's draws and increment.
    std::vector<Complex> dw_s, dw_p, dw_c, increment;
  };

  RingWignerSystem(ContinuousParams params, std::size_t n);

  const ContinuousParams& params() const { return params_; }
  std::size_t size() const { return n_; }
  Streams make_streams(std::uint64_t seed, std::uint64_t trajectory) const;
  State initial_state(Streams& streams) const;
  void step(State& a, double tau, double dtau, Streams& streams) const;

 private:
  ContinuousParams params_;
  std::size_t n_;
  QuadratureVariances central_;
};

/// Five-mode Wigner model in lab time t; pump epsilon(t) follows the
/// normalized schedule through E(gamma'_s t).
class FiveModeWignerSystem {
 public:
  using State = FiveModeState;
  struct Streams {
    RngStream s1, s2, p1, p2, c, init;
  };

  explicit FiveModeWignerSystem(ContinuousParams params);

  const ContinuousParams& params() const { return params_; }
  const FullRates& rates() const { return *params_.full_rates; }
  Streams make_streams(std::uint64_t seed, std::uint64_t trajectory) const;
  /// Vacuum signal and central modes; pump modes at their vacuum
  /// fluctuations around zero.
  State initial_state(Streams& streams) const;
  void step(State& a, double t, double dt, Streams& streams) const;

 private:
  ContinuousParams params_;
  QuadratureVariances central_;
};

class PositivePFullSystem {
 public:
  using State = PositivePFullState;
  struct Streams {
    RngStream a1, b1, a2, b2;
  };

  explicit PositivePFullSystem(ContinuousParams params);

  const ContinuousParams& params() const { return params_; }
  const FullRates& rates() const { return *params_.full_rates; }
  Streams make_streams(std::uint64_t seed, std::uint64_t trajectory) const;
  /// Vacuum signal and central modes; pumps at their initial steady state.
  State initial_state(Streams& streams) const;
  void step(State& a, double t, double dt, Streams& streams) const;

 private:
  ContinuousParams params_;
};

}  // namespace cim::continuous
