#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cim/continuous.hpp"

/// Ensemble estimators. Inputs are per-trajectory quadrature samples in
/// photon-amplitude units (vacuum quadrature variance 1/4). For the Wigner
/// representation c = Re(alpha), s = Im(alpha) and the imaginary parts are
/// zero; for positive-P c = (alpha + beta)/2 and s = (alpha - beta)/(2i) are
/// complex and only their ensemble means are physical.
namespace cim::obs {

using continuous::Representation;

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Jackknife estimate of f(feature means). `features` is row-major
/// [trajectory][feature] with `width` columns.
Estimate jackknife(std::span<const double> features, std::size_t width,
                   const std::function<double(std::span<const double>)>& f);

/// Binomial estimate of a success fraction.
Estimate binomial(std::size_t successes, std::size_t trials);

enum class ErrorKind { jackknife_mean, binomial };

/// SE of the mean of per-trajectory records: jackknife for smooth
/// estimators, binomial for 0/1 outcomes.
double standard_error(std::span<const double> records, ErrorKind kind);

/// Quadrature samples of one ensemble at one time.
class QuadratureEnsemble {
 public:
  QuadratureEnsemble(Representation rep, std::size_t modes);

  Representation representation() const { return rep_; }
  std::size_t modes() const { return modes_; }
  std::size_t size() const { return c_.size() / modes_; }

  /// Wigner amplitudes alpha_j (one per mode).
  void add_wigner(std::span<const Complex> alpha);
  /// Positive-P pairs, interleaved alpha_1, beta_1, alpha_2, beta_2, ...
  void add_positive_p(std::span<const Complex> alpha_beta);

  Complex c(std::size_t trajectory, std::size_t mode) const {
    return c_[trajectory * modes_ + mode];
  }
  Complex s(std::size_t trajectory, std::size_t mode) const {
    return s_[trajectory * modes_ + mode];
  }

  /// Ordering correction added to the variance of a quadrature
  /// combination with the given weights: sum w^2 / 4 for positive-P.
  double ordering_correction(std::span<const double> weights) const;
  double ordering_correction_single() const {
    return rep_ == Representation::positive_p ? 0.25 : 0.0;
  }

 private:
  Representation rep_;
  std::size_t modes_;
  std::vector<Complex> c_;
  std::vector<Complex> s_;
};

enum class Quadrature { x, p };

/// Variance of sum_j w_j q_j from complex per-trajectory combination
/// samples, plus an ordering correction.
Estimate combination_variance(std::span<const Complex> samples,
                              double ordering_correction);

Estimate variance_x(const QuadratureEnsemble& ens, std::size_t mode);
Estimate variance_p(const QuadratureEnsemble& ens, std::size_t mode);

struct EprVariances {
  Estimate u;    // in-phase combination
  Estimate v;    // quadrature-phase combination
  Estimate sum;  // jointly jackknifed
};

/// Joint estimate of Var(u) + Var(v) from combination samples.
EprVariances epr_from_samples(std::span<const Complex> u,
                              std::span<const Complex> v, double correction_u,
                              double correction_v);

/// u+ = x1 + x2, v- = p1 - p2 (modes 0 and 1 unless given).
EprVariances epr_two_variances(const QuadratureEnsemble& ens,
                               std::size_t mode_a = 0, std::size_t mode_b = 1);

/// u1D = sum x_j, v1D = sum (-1)^j p_j with j counted from 1. Even N only.
EprVariances epr_ring_variances(const QuadratureEnsemble& ens);

/// Normalized covariance of two quadrature sample columns, with the
/// ordering correction added to each single-mode variance. `clamp` limits
/// the result to [-1, 1] (Pearson coefficients of real samples).
std::optional<Estimate> correlation_from_samples(std::span<const Complex> a,
                                                 std::span<const Complex> b,
                                                 double correction,
                                                 bool clamp);

/// Mean of the real parts of per-trajectory samples, minus `offset`.
Estimate mean_from_samples(std::span<const Complex> samples, double offset);

/// Normalized covariance of the chosen quadrature between two modes.
/// Returns nullopt when either variance is not positive.
std::optional<Estimate> correlation(const QuadratureEnsemble& ens,
                                    Quadrature q, std::size_t i,
                                    std::size_t j);
std::optional<Estimate> correlation_xx(const QuadratureEnsemble& ens,
                                       std::size_t i, std::size_t j);
std::optional<Estimate> correlation_pp(const QuadratureEnsemble& ens,
                                       std::size_t i, std::size_t j);

/// Mean photon number of one mode (Wigner: <|alpha|^2> - 1/2,
/// positive-P: Re<beta alpha>).
Estimate photon_number(const QuadratureEnsemble& ens, std::size_t mode);

// ---------------------------------------------------------------------------
// Spins

/// Length-N sign string, bit j set for a down spin (pi phase).
class SpinConfig {
 public:
  SpinConfig() = default;
  SpinConfig(std::uint64_t down_bits, std::size_t n);

  static SpinConfig all_up(std::size_t n) { return {0, n}; }
  /// up, down, up, ... (first_up) or its complement.
  static SpinConfig alternating(std::size_t n, bool first_up = true);
  /// Parse "udud" / "+-+-" / "↑↓" strings.
  static SpinConfig parse(const std::string& text);

  std::size_t size() const { return n_; }
  std::uint64_t bits() const { return bits_; }
  bool up(std::size_t j) const { return ((bits_ >> j) & 1u) == 0; }
  int sigma(std::size_t j) const { return up(j) ? 1 : -1; }
  SpinConfig flipped() const;

  std::string to_string() const;  // 'u' / 'd' per spin

  auto operator<=>(const SpinConfig&) const = default;

 private:
  std::uint64_t bits_ = 0;
  std::size_t n_ = 0;
};

/// Operational readout: up when the in-phase amplitude is >= 0.
SpinConfig spins(std::span<const double> inphase);

struct ProbabilityTable {
  std::map<SpinConfig, Estimate> entries;
  std::size_t trials = 0;

  Estimate probability(const SpinConfig& config) const;
  double total() const;
};

ProbabilityTable tabulate(std::span<const SpinConfig> configs);

struct PostSelection {
  /// One table per sample time, among survivors only.
  std::vector<ProbabilityTable> tables;
  std::size_t survivors = 0;
};

/// configs is [trajectory][time] row-major with `n_times` columns. Keeps
/// trajectories whose final-time config satisfies the predicate. Returns
/// nullopt when no trajectory survives.
std::optional<PostSelection> post_select(
    std::span<const SpinConfig> configs, std::size_t n_times,
    const std::function<bool(const SpinConfig&)>& final_predicate);

Estimate success_probability(std::span<const SpinConfig> final_configs,
                             std::span<const SpinConfig> ground_set);

}  // namespace cim::obs
