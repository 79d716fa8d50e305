#include "cim/discrete.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cim::discrete {

void DiscreteParams::validate() const {
  if (n == 0) throw std::invalid_argument("pulse count must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (!(pump_e >= 0.0)) throw std::invalid_argument("pump must be >= 0");
  if (!(t_p > 0.0 && t_p <= 1.0)) {
    throw std::invalid_argument("T_p must lie in (0, 1]");
  }
  if (!(t_i > 0.0 && t_i < 1.0)) {
    throw std::invalid_argument("T_i must lie in (0, 1)");
  }
  if (!(psa_gain >= 1.0)) throw std::invalid_argument("PSA gain must be >= 1");
  if (coupling.size() != n * n) {
    throw std::invalid_argument("coupling must be an n x n matrix");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (coupling[i * n + i] != 0.0) {
      throw std::invalid_argument("coupling diagonal must be zero");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(coupling[i * n + j])) {
        throw std::invalid_argument("coupling entries must be finite");
      }
    }
  }
  if (rounds == 0) throw std::invalid_argument("rounds must be positive");
  if (substeps == 0) throw std::invalid_argument("substeps must be positive");
}

std::vector<double> ring_coupling(std::size_t n, double xi_ring) {
  if (n < 3) throw std::invalid_argument("ring needs at least 3 pulses");
  std::vector<double> c(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    c[i * n + (i + 1) % n] = xi_ring;
    c[i * n + (i + n - 1) % n] = xi_ring;
  }
  return c;
}

double linear_threshold(const DiscreteParams& params) {
  const std::size_t n = params.n;
  if (params.coupling.size() != n * n) {
    throw std::invalid_argument("coupling must be an n x n matrix");
  }
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m(i, j) = 0.5 * (params.coupling[i * n + j] + params.coupling[j * n + i]);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      m, Eigen::EigenvaluesOnly);
  const double lambda = solver.eigenvalues().maxCoeff();
  const double survive = std::sqrt((1.0 - params.t_i) * (1.0 - params.t_p));
  // Per-round in-phase gain of the dominant mode equals one at threshold.
  if (params.order == InjectionOrder::post_gain) {
    return (1.0 - lambda) / survive - 1.0;
  }
  return 1.0 / (survive + lambda) - 1.0;
}

Complex dopa_step(Complex a, double e, double mu,
                  std::span<const Complex> dw) {
  if (dw.empty()) throw std::invalid_argument("dopa_step needs >= 1 draw");
  const double dt = 1.0 / static_cast<double>(dw.size());
  const double noise = std::sqrt(2.0) * mu * std::sqrt(dt);
  for (const Complex& w : dw) {
    const Complex ac = std::conj(a);
    a += (e - a * a) * ac * dt + noise * ac * w;
  }
  return a;
}

CoupledPair out_couple(Complex a_cav, Complex f, double t_p) {
  if (!(t_p > 0.0 && t_p <= 1.0)) {
    throw std::invalid_argument("T_p must lie in (0, 1]");
  }
  const double t = std::sqrt(t_p);
  const double r = std::sqrt(1.0 - t_p);
  return {t * a_cav - r * f, r * a_cav + t * f};
}

Readout psa_readout(Complex a_cav_before, Complex f, double t_p,
                    double gain) {
  const double t = std::sqrt(t_p);
  const double r = std::sqrt(1.0 - t_p);
  const double c_out = gain * (t * a_cav_before - r * f).real();
  // Same quantity without dividing by G sqrt(T_p), so T_p -> small stays
  // well conditioned.
  const double c_tilde = (a_cav_before - (r / t) * f).real();
  return {c_out, c_tilde};
}

double feedback_amplitude(std::span<const double> c_tilde,
                          std::span<const double> coupling_row, double t_i) {
  if (c_tilde.size() != coupling_row.size()) {
    throw std::invalid_argument("feedback row and measurements differ");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < c_tilde.size(); ++j) {
    sum += coupling_row[j] * c_tilde[j];
  }
  return sum / std::sqrt(t_i);
}

Complex inject(Complex a_cav, double alpha_fb, double t_i) {
  if (!(t_i > 0.0 && t_i < 1.0)) {
    throw std::invalid_argument("T_i must lie in (0, 1)");
  }
  return std::sqrt(t_i) * alpha_fb + std::sqrt(1.0 - t_i) * a_cav;
}

// ---------------------------------------------------------------------------

DiscreteMachine::DiscreteMachine(DiscreteParams params)
    : params_(std::move(params)), field_(params_.reservoir) {
  params_.validate();
}

DiscreteMachine::Streams DiscreteMachine::make_streams(
    std::uint64_t seed, std::uint64_t trajectory) const {
  Streams s{RngStream(seed, trajectory, "reservoir"),
            RngStream(seed, trajectory, "gain"),
            RngStream(seed, trajectory, "init"),
            {},
            {},
            {}};
  s.f.resize(params_.n);
  s.dw.resize(params_.n * params_.substeps);
  s.c_tilde.resize(params_.n);
  return s;
}

DiscreteMachine::State DiscreteMachine::initial_state(Streams& streams) const {
  State a(params_.n);
  for (auto& x : a) x = params_.mu * field_(streams.init);
  return a;
}

bool DiscreteMachine::round_trip(State& a, Streams& s, RoundTripRecord* record,
                                 double divergence_cap) const {
  const std::size_t n = params_.n;
  const std::size_t m = params_.substeps;
  const double mu = params_.mu;
  const double e = params_.pump_e;

  for (std::size_t i = 0; i < n; ++i) s.f[i] = mu * field_(s.reservoir);
  const double unit = std::sqrt(0.5);
  for (auto& w : s.dw) {
    const double re = unit * s.gain.normal();
    const double im = unit * s.gain.normal();
    w = {re, im};
  }

  if (record != nullptr) {
    record->c_tilde.resize(n);
    record->out.resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Readout ro = psa_readout(a[i], s.f[i], params_.t_p, params_.psa_gain);
    s.c_tilde[i] = ro.c_tilde;
    const CoupledPair cp = out_couple(a[i], s.f[i], params_.t_p);
    a[i] = cp.cav;
    if (record != nullptr) {
      record->c_tilde[i] = ro.c_tilde;
      record->out[i] = cp.out;
    }
  }

  auto gain = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = dopa_step(a[i], e, mu,
                       std::span<const Complex>(s.dw).subspan(i * m, m));
    }
  };
  auto feed = [&] {
    const double keep = std::sqrt(1.0 - params_.t_i);
    for (std::size_t i = 0; i < n; ++i) {
      const std::span<const double> row(params_.coupling.data() + i * n, n);
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += row[j] * s.c_tilde[j];
      // inject(a, feedback_amplitude(...)) with the 1/sqrt(T_i)
      // amplification and the sqrt(T_i) coupler cancelled.
      a[i] = keep * a[i] + sum;
    }
  };
  if (params_.order == InjectionOrder::post_gain) {
    gain();
    feed();
  } else {
    feed();
    gain();
  }

  for (const Complex& x : a) {
    if (!(std::abs(x.real()) <= divergence_cap &&
          std::abs(x.imag()) <= divergence_cap)) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

ThresholdEstimate estimate_threshold(std::span<const double> pump,
                                     std::span<const double> photon_numbers,
                                     double tolerance) {
  const std::size_t k = pump.size();
  if (k != photon_numbers.size()) {
    throw std::invalid_argument("pump grid and photon numbers differ");
  }
  if (k < 5) throw std::invalid_argument("threshold scan needs >= 5 points");
  for (std::size_t i = 0; i < k; ++i) {
    if (!(pump[i] > 0.0)) throw std::invalid_argument("pump grid must be > 0");
    if (i > 0 && !(pump[i] > pump[i - 1])) {
      throw std::invalid_argument("pump grid must be increasing");
    }
    if (!(photon_numbers[i] > 0.0)) {
      throw std::invalid_argument("photon numbers must be positive");
    }
  }
  std::vector<double> lx(k), ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    lx[i] = std::log(pump[i]);
    ly[i] = std::log(photon_numbers[i]);
  }
  std::vector<double> slope(k, 0.0);
  for (std::size_t i = 1; i + 1 < k; ++i) {
    slope[i] = (ly[i + 1] - ly[i - 1]) / (lx[i + 1] - lx[i - 1]);
  }
  std::size_t best = 1;
  for (std::size_t i = 2; i + 1 < k; ++i) {
    if (slope[i] > slope[best]) best = i;
  }

  ThresholdEstimate est;
  est.index = best;
  est.max_slope = slope[best];
  est.pump = pump[best];
  const double tie = tolerance * std::abs(slope[best]);
  for (std::size_t i = 1; i + 1 < k; ++i) {
    const std::size_t gap = i > best ? i - best : best - i;
    if (gap > 1 && slope[best] - slope[i] <= tie) est.unique = false;
  }

  // Parabola through the neighbouring slopes, in log-pump coordinates.
  if (best >= 2 && best + 2 < k) {
    const double x0 = lx[best - 1], x1 = lx[best], x2 = lx[best + 1];
    const double y0 = slope[best - 1], y1 = slope[best], y2 = slope[best + 1];
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double curv = (d12 - d01) / (x2 - x0);
    if (curv < 0.0) {
      const double vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
      est.pump = std::exp(std::clamp(vertex, x0, x2));
    }
  }
  return est;
}

}  // namespace cim::discrete
