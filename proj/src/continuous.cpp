#include "cim/continuous.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cim::continuous {
namespace {

// Eliminating the pump mode of the five-mode equations leaves pump
// reservoir noise sqrt(2) * g * A * dW_p on the normalized signal.
const double kPumpNoise = std::sqrt(2.0);

void require_xi(double xi) {
  if (!(xi >= 0.0 && xi < 1.0)) {
    throw std::invalid_argument("coupling xi must lie in [0, 1), got " +
                                std::to_string(xi));
  }
}

const FullRates& require_rates(const ContinuousParams& params) {
  if (!params.full_rates) {
    throw std::invalid_argument(
        "un-eliminated model requires full_model_rates");
  }
  return *params.full_rates;
}

}  // namespace

PumpSchedule PumpSchedule::linear_ramp(double e_max, double tau_max) {
  if (!(tau_max > 0.0)) {
    throw std::invalid_argument("linear ramp needs tau_max > 0");
  }
  PumpSchedule s;
  s.kind_ = Kind::linear_ramp;
  s.e_max_ = e_max;
  s.tau_max_ = tau_max;
  return s;
}

PumpSchedule PumpSchedule::constant(double e) {
  PumpSchedule s;
  s.kind_ = Kind::constant;
  s.e_max_ = e;
  return s;
}

PumpSchedule PumpSchedule::abrupt(double e) {
  PumpSchedule s;
  s.kind_ = Kind::abrupt;
  s.e_max_ = e;
  return s;
}

double pump_schedule_eval(const PumpSchedule& schedule, double tau) {
  if (tau < 0.0) {
    throw std::invalid_argument("pump schedule evaluated at negative time");
  }
  return schedule(tau);
}

double FullRates::saturation() const {
  return kappa / std::sqrt(2.0 * gamma_s_eff() * gamma_p);
}

double FullRates::coupling() const {
  return zeta * zeta / (gamma_s_eff() * gamma_c);
}

double FullRates::raw_pump(double e) const {
  return e * gamma_s_eff() * gamma_p / kappa;
}

FullRates FullRates::from_normalized(double g, double xi, double gamma_s,
                                     double ratio) {
  require_xi(xi);
  FullRates r;
  r.gamma_s = gamma_s;
  r.gamma_p = ratio * gamma_s;
  r.gamma_c = ratio * gamma_s;
  const double gamma_eff = gamma_s / (1.0 - xi);
  r.zeta = std::sqrt(xi * gamma_eff * r.gamma_c);
  r.kappa = g * std::sqrt(2.0 * gamma_eff * r.gamma_p);
  return r;
}

void ContinuousParams::validate() const {
  if (!(g >= 0.0) || !std::isfinite(g)) {
    throw std::invalid_argument("saturation parameter g must be >= 0");
  }
  require_xi(xi);
  if (full_rates) {
    const auto& r = *full_rates;
    if (!(r.gamma_s > 0.0 && r.gamma_p > 0.0 && r.gamma_c > 0.0 &&
          r.kappa > 0.0 && r.zeta >= 0.0)) {
      throw std::invalid_argument("full model rates must be positive");
    }
  }
}

TwoDopoWignerState wigner_two_dopo_increment(const TwoDopoWignerState& a,
                                             const ContinuousParams& params,
                                             double tau, double dtau,
                                             const TwoDopoWignerDraws& dw) {
  require_xi(params.xi);
  const double e = params.pump(tau);
  const double sigma = sign_of(params.phase);
  const double xi = params.xi;
  const double g = params.g;
  const double signal = std::sqrt(1.0 - xi);
  const double central = std::sqrt(xi);

  const Complex a1 = a[0];
  const Complex a2 = a[1];
  const Complex drift1 = -a1 + (e - a1 * a1) * std::conj(a1) + sigma * xi * a2;
  const Complex drift2 = -a2 + (e - a2 * a2) * std::conj(a2) + sigma * xi * a1;
  const Complex noise1 = signal * dw.s1 + kPumpNoise * a1 * dw.p1 + central * dw.c;
  const Complex noise2 =
      signal * dw.s2 + kPumpNoise * a2 * dw.p2 - sigma * central * dw.c;
  return {drift1 * dtau + g * noise1, drift2 * dtau + g * noise2};
}

void wigner_ring_increment(std::span<const Complex> a,
                           const ContinuousParams& params, double tau,
                           double dtau, std::span<const Complex> dw_s,
                           std::span<const Complex> dw_p,
                           std::span<const Complex> dw_c,
                           std::span<Complex> out) {
  const std::size_t n = a.size();
  if (n < 3) {
    throw std::invalid_argument("ring topology needs at least 3 DOPOs");
  }
  if (!(params.xi >= 0.0 && params.xi <= 0.5)) {
    // Each pulse loses 2 * xi through its two central paths.
    throw std::invalid_argument("ring coupling xi must lie in [0, 0.5]");
  }
  const double e = params.pump(tau);
  const double sigma = sign_of(params.phase);
  const double xi = params.xi;
  const double g = params.g;
  const double signal = std::sqrt(1.0 - 2.0 * xi);
  const double central = std::sqrt(xi);

  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t prev = (j + n - 1) % n;
    const std::size_t next = (j + 1) % n;
    const Complex aj = a[j];
    const Complex drift =
        -aj + (e - aj * aj) * std::conj(aj) + sigma * xi * (a[prev] + a[next]);
    const Complex noise = signal * dw_s[j] + kPumpNoise * aj * dw_p[j] +
                          central * (dw_c[next] - sigma * dw_c[j]);
    out[j] = drift * dtau + g * noise;
  }
}

FiveModeState wigner_five_mode_increment(const FiveModeState& a,
                                         const ContinuousParams& params,
                                         double t, double dt,
                                         const FiveModeDraws& dw) {
  const FullRates& r = require_rates(params);
  const double sigma = sign_of(params.phase);
  const double eps = r.raw_pump(params.pump(r.gamma_s_eff() * t));
  const Complex s1 = a[0], s2 = a[1], p1 = a[2], p2 = a[3], c = a[4];

  FiveModeState d;
  d[0] = (-r.gamma_s * s1 + r.kappa * p1 * std::conj(s1) + r.zeta * c) * dt +
         std::sqrt(r.gamma_s) * dw.s1;
  d[1] = (-r.gamma_s * s2 + r.kappa * p2 * std::conj(s2) -
          r.zeta * sigma * c) * dt +
         std::sqrt(r.gamma_s) * dw.s2;
  d[2] = (-r.gamma_p * p1 - 0.5 * r.kappa * s1 * s1 + eps) * dt +
         std::sqrt(r.gamma_p) * dw.p1;
  d[3] = (-r.gamma_p * p2 - 0.5 * r.kappa * s2 * s2 + eps) * dt +
         std::sqrt(r.gamma_p) * dw.p2;
  d[4] = (-r.gamma_c * c - r.zeta * s1 + r.zeta * sigma * s2) * dt +
         std::sqrt(r.gamma_c) * dw.c;
  return d;
}

PositivePFullState positive_p_full_increment(const PositivePFullState& a,
                                             const ContinuousParams& params,
                                             double t, double dt,
                                             const PositivePDraws& dw) {
  using namespace ppf;
  const FullRates& r = require_rates(params);
  const double sigma = sign_of(params.phase);
  const double eps = r.raw_pump(params.pump(r.gamma_s_eff() * t));
  const double k = r.kappa;

  PositivePFullState d;
  d[as1] = (-r.gamma_s * a[as1] + k * a[ap1] * a[bs1] + r.zeta * a[ac]) * dt +
           std::sqrt(k * a[ap1]) * dw[0];
  d[bs1] = (-r.gamma_s * a[bs1] + k * a[bp1] * a[as1] + r.zeta * a[bc]) * dt +
           std::sqrt(k * a[bp1]) * dw[1];
  d[as2] = (-r.gamma_s * a[as2] + k * a[ap2] * a[bs2] -
            r.zeta * sigma * a[ac]) * dt +
           std::sqrt(k * a[ap2]) * dw[2];
  d[bs2] = (-r.gamma_s * a[bs2] + k * a[bp2] * a[as2] -
            r.zeta * sigma * a[bc]) * dt +
           std::sqrt(k * a[bp2]) * dw[3];
  d[ap1] = (-r.gamma_p * a[ap1] - 0.5 * k * a[as1] * a[as1] + eps) * dt;
  d[bp1] = (-r.gamma_p * a[bp1] - 0.5 * k * a[bs1] * a[bs1] + eps) * dt;
  d[ap2] = (-r.gamma_p * a[ap2] - 0.5 * k * a[as2] * a[as2] + eps) * dt;
  d[bp2] = (-r.gamma_p * a[bp2] - 0.5 * k * a[bs2] * a[bs2] + eps) * dt;
  d[ac] = (-r.gamma_c * a[ac] - r.zeta * a[as1] + r.zeta * sigma * a[as2]) * dt;
  d[bc] = (-r.gamma_c * a[bc] - r.zeta * a[bs1] + r.zeta * sigma * a[bs2]) * dt;
  return d;
}

PositivePEliminatedState positive_p_eliminated_increment(
    const PositivePEliminatedState& a, const ContinuousParams& params,
    double tau, double dtau, const PositivePDraws& dw) {
  require_xi(params.xi);
  const double e = params.pump(tau);
  const double sigma = sign_of(params.phase);
  const double xi = params.xi;
  const double g = params.g;
  const Complex a1 = a[0], b1 = a[1], a2 = a[2], b2 = a[3];

  PositivePEliminatedState d;
  d[0] = (-a1 + (e - a1 * a1) * b1 + sigma * xi * a2) * dtau +
         g * std::sqrt(e - a1 * a1) * dw[0];
  d[1] = (-b1 + (e - b1 * b1) * a1 + sigma * xi * b2) * dtau +
         g * std::sqrt(e - b1 * b1) * dw[1];
  d[2] = (-a2 + (e - a2 * a2) * b2 + sigma * xi * a1) * dtau +
         g * std::sqrt(e - a2 * a2) * dw[2];
  d[3] = (-b2 + (e - b2 * b2) * a2 + sigma * xi * b1) * dtau +
         g * std::sqrt(e - b2 * b2) * dw[3];
  return d;
}

std::vector<Complex> sample_initial_state(Representation representation,
                                          std::size_t mode_count, double g,
                                          RngStream& stream) {
  if (representation == Representation::positive_p) {
    return std::vector<Complex>(2 * mode_count, Complex{});
  }
  std::vector<Complex> out(mode_count);
  if (g == 0.0) return out;
  const double sd = 0.5 * g;
  for (auto& v : out) {
    const double re = sd * stream.normal();
    const double im = sd * stream.normal();
    v = {re, im};
  }
  return out;
}

// ---------------------------------------------------------------------------

TwoDopoWignerSystem::TwoDopoWignerSystem(ContinuousParams params)
    : params_(std::move(params)) {
  params_.validate();
  central_ = quadrature_variances(params_.reservoir_central);
}

TwoDopoWignerSystem::Streams TwoDopoWignerSystem::make_streams(
    std::uint64_t seed, std::uint64_t trajectory) const {
  return {derive_stream(seed, trajectory, "s1"),
          derive_stream(seed, trajectory, "s2"),
          derive_stream(seed, trajectory, "p1"),
          derive_stream(seed, trajectory, "p2"),
          derive_stream(seed, trajectory, "c"),
          derive_stream(seed, trajectory, "init")};
}

TwoDopoWignerSystem::State TwoDopoWignerSystem::initial_state(
    Streams& streams) const {
  const auto v = sample_initial_state(Representation::wigner, 2, params_.g,
                                      streams.init);
  return {v[0], v[1]};
}

void TwoDopoWignerSystem::step(State& a, double tau, double dtau,
                               Streams& st) const {
  const double sd = std::sqrt(0.5 * dtau);
  const double sd_cx = std::sqrt(2.0 * dtau * central_.x);
  const double sd_cp = std::sqrt(2.0 * dtau * central_.p);
  auto draw = [sd](RngStream& s) {
    const double re = sd * s.normal();
    const double im = sd * s.normal();
    return Complex{re, im};
  };
  TwoDopoWignerDraws dw;
  dw.s1 = draw(st.s1);
  dw.s2 = draw(st.s2);
  dw.p1 = draw(st.p1);
  dw.p2 = draw(st.p2);
  {
    const double re = sd_cx * st.c.normal();
    const double im = sd_cp * st.c.normal();
    dw.c = {re, im};
  }
  const auto d = wigner_two_dopo_increment(a, params_, tau, dtau, dw);
  a[0] += d[0];
  a[1] += d[1];
}

TwoDopoPositivePSystem::TwoDopoPositivePSystem(ContinuousParams params)
    : params_(std::move(params)) {
  params_.validate();
  if (params_.reservoir_central.kind() != ReservoirSpec::Kind::vacuum) {
    throw std::invalid_argument(
        "eliminated positive-P model supports a vacuum central reservoir "
        "only");
  }
}

TwoDopoPositivePSystem::Streams TwoDopoPositivePSystem::make_streams(
    std::uint64_t seed, std::uint64_t trajectory) const {
  return {derive_stream(seed, trajectory, "a1"),
          derive_stream(seed, trajectory, "b1"),
          derive_stream(seed, trajectory, "a2"),
          derive_stream(seed, trajectory, "b2")};
}

TwoDopoPositivePSystem::State TwoDopoPositivePSystem::initial_state(
    Streams&) const {
  return State{};
}

void TwoDopoPositivePSystem::step(State& a, double tau, double dtau,
                                  Streams& st) const {
  const double sd = std::sqrt(dtau);
  const PositivePDraws dw{sd * st.a1.normal(), sd * st.b1.normal(),
                          sd * st.a2.normal(), sd * st.b2.normal()};
  const auto d = positive_p_eliminated_increment(a, params_, tau, dtau, dw);
  for (std::size_t k = 0; k < 4; ++k) a[k] += d[k];
}

RingWignerSystem::RingWignerSystem(ContinuousParams params, std::size_t n)
    : params_(std::move(params)), n_(n) {
  params_.validate();
  if (n_ < 3) {
    throw std::invalid_argument("ring topology needs at least 3 DOPOs");
  }
  if (params_.xi > 0.5) {
    throw std::invalid_argument("ring coupling xi must lie in [0, 0.5]");
  }
  central_ = quadrature_variances(params_.reservoir_central);
}

RingWignerSystem::Streams RingWignerSystem::make_streams(
    std::uint64_t seed, std::uint64_t trajectory) const {
  Streams st{{}, {}, {}, derive_stream(seed, trajectory, "init"),
             std::vector<Complex>(n_), std::vector<Complex>(n_),
             std::vector<Complex>(n_), std::vector<Complex>(n_)};
  st.s.reserve(n_);
  st.p.reserve(n_);
  st.c.reserve(n_);
  for (std::size_t j = 0; j < n_; ++j) {
    const std::string idx = std::to_string(j);
    st.s.push_back(derive_stream(seed, trajectory, "s" + idx));
    st.p.push_back(derive_stream(seed, trajectory, "p" + idx));
    st.c.push_back(derive_stream(seed, trajectory, "c" + idx));
  }
  return st;
}

RingWignerSystem::State RingWignerSystem::initial_state(
    Streams& streams) const {
  return sample_initial_state(Representation::wigner, n_, params_.g,
                              streams.init);
}

void RingWignerSystem::step(State& a, double tau, double dtau,
                            Streams& st) const {
  const double sd = std::sqrt(0.5 * dtau);
  const double sd_cx = std::sqrt(2.0 * dtau * central_.x);
  const double sd_cp = std::sqrt(2.0 * dtau * central_.p);
  for (std::size_t j = 0; j < n_; ++j) {
    double re = sd * st.s[j].normal();
    double im = sd * st.s[j].normal();
    st.dw_s[j] = {re, im};
    re = sd * st.p[j].normal();
    im = sd * st.p[j].normal();
    st.dw_p[j] = {re, im};
    re = sd_cx * st.c[j].normal();
    im = sd_cp * st.c[j].normal();
    st.dw_c[j] = {re, im};
  }
  wigner_ring_increment(a, params_, tau, dtau, st.dw_s, st.dw_p, st.dw_c,
                        st.increment);
  for (std::size_t j = 0; j < n_; ++j) a[j] += st.increment[j];
}

FiveModeWignerSystem::FiveModeWignerSystem(ContinuousParams params)
    : params_(std::move(params)) {
  params_.validate();
  require_rates(params_);
  central_ = quadrature_variances(params_.reservoir_central);
}

FiveModeWignerSystem::Streams FiveModeWignerSystem::make_streams(
    std::uint64_t seed, std::uint64_t trajectory) const {
  return {derive_stream(seed, trajectory, "s1"),
          derive_stream(seed, trajectory, "s2"),
          derive_stream(seed, trajectory, "p1"),
          derive_stream(seed, trajectory, "p2"),
          derive_stream(seed, trajectory, "c"),
          derive_stream(seed, trajectory, "init")};
}

FiveModeWignerSystem::State FiveModeWignerSystem::initial_state(
    Streams& streams) const {
  const auto v =
      sample_initial_state(Representation::wigner, 5, 1.0, streams.init);
  State s;
  for (std::size_t k = 0; k < 5; ++k) s[k] = v[k];
  // The pump starts at its own steady state for the initial pump rate.
  const double eps =
      rates().raw_pump(params_.pump(0.0)) / rates().gamma_p;
  s[2] += eps;
  s[3] += eps;
  return s;
}

void FiveModeWignerSystem::step(State& a, double t, double dt,
                                Streams& st) const {
  const double sd = std::sqrt(0.5 * dt);
  const double sd_cx = std::sqrt(2.0 * dt * central_.x);
  const double sd_cp = std::sqrt(2.0 * dt * central_.p);
  auto draw = [sd](RngStream& s) {
    const double re = sd * s.normal();
    const double im = sd * s.normal();
    return Complex{re, im};
  };
  FiveModeDraws dw;
  dw.s1 = draw(st.s1);
  dw.s2 = draw(st.s2);
  dw.p1 = draw(st.p1);
  dw.p2 = draw(st.p2);
  {
    const double re = sd_cx * st.c.normal();
    const double im = sd_cp * st.c.normal();
    dw.c = {re, im};
  }
  const auto d = wigner_five_mode_increment(a, params_, t, dt, dw);
  for (std::size_t k = 0; k < 5; ++k) a[k] += d[k];
}

PositivePFullSystem::PositivePFullSystem(ContinuousParams params)
    : params_(std::move(params)) {
  params_.validate();
  require_rates(params_);
  if (params_.reservoir_central.kind() != ReservoirSpec::Kind::vacuum) {
    throw std::invalid_argument(
        "positive-P model supports a vacuum central reservoir only");
  }
}

PositivePFullSystem::Streams PositivePFullSystem::make_streams(
    std::uint64_t seed, std::uint64_t trajectory) const {
  return {derive_stream(seed, trajectory, "a1"),
          derive_stream(seed, trajectory, "b1"),
          derive_stream(seed, trajectory, "a2"),
          derive_stream(seed, trajectory, "b2")};
}

PositivePFullSystem::State PositivePFullSystem::initial_state(Streams&) const {
  State s{};
  const double eps = rates().raw_pump(params_.pump(0.0)) / rates().gamma_p;
  s[ppf::ap1] = s[ppf::bp1] = s[ppf::ap2] = s[ppf::bp2] = eps;
  return s;
}

void PositivePFullSystem::step(State& a, double t, double dt,
                               Streams& st) const {
  const double sd = std::sqrt(dt);
  const PositivePDraws dw{sd * st.a1.normal(), sd * st.b1.normal(),
                          sd * st.a2.normal(), sd * st.b2.normal()};
  const auto d = positive_p_full_increment(a, params_, t, dt, dw);
  for (std::size_t k = 0; k < 10; ++k) a[k] += d[k];
}

}  // namespace cim::continuous
