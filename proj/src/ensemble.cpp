#include "cim/ensemble.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace cim::ensemble {

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CIM_WORKERS")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) {
      return static_cast<std::size_t>(v);
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

const std::vector<std::optional<Estimate>>& EnsembleSeries::series(
    const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return values[k];
  }
  throw std::out_of_range("no observable named '" + name + "'");
}

std::size_t EnsembleSeries::time_index(double t) const {
  if (times.empty()) throw std::out_of_range("series has no sample times");
  std::size_t best = 0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
  }
  return best;
}

// ---------------------------------------------------------------------------

namespace observables {
namespace {

double pair_correction(Representation rep) {
  return rep == Representation::positive_p ? 0.5 : 0.0;
}

double single_correction(Representation rep) {
  return rep == Representation::positive_p ? 0.25 : 0.0;
}

std::vector<Complex> column(std::span<const Complex> rows, std::size_t width,
                            std::size_t k) {
  std::vector<Complex> out(rows.size() / width);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rows[i * width + k];
  return out;
}

std::vector<std::optional<Estimate>> epr_outputs(
    std::span<const Complex> rows, double correction) {
  const auto u = column(rows, 2, 0);
  const auto v = column(rows, 2, 1);
  const auto epr = obs::epr_from_samples(u, v, correction, correction);
  return {epr.u, epr.v, epr.sum};
}

Observable single_variance(std::string name, std::size_t mode, bool x) {
  Observable o;
  o.outputs = {std::move(name)};
  o.extract = [mode, x](const QuadratureView& q, Complex* out) {
    out[0] = x ? q.c[mode] : q.s[mode];
  };
  o.reduce = [](std::span<const Complex> rows, Representation rep,
                std::size_t) -> std::vector<std::optional<Estimate>> {
    return {obs::combination_variance(rows, single_correction(rep))};
  };
  return o;
}

Observable pair_correlation(std::string name, std::size_t i, std::size_t j,
                            bool x) {
  Observable o;
  o.outputs = {std::move(name)};
  o.width = 2;
  o.extract = [i, j, x](const QuadratureView& q, Complex* out) {
    out[0] = x ? q.c[i] : q.s[i];
    out[1] = x ? q.c[j] : q.s[j];
  };
  o.reduce = [](std::span<const Complex> rows, Representation rep,
                std::size_t) -> std::vector<std::optional<Estimate>> {
    return {obs::correlation_from_samples(column(rows, 2, 0),
                                          column(rows, 2, 1),
                                          single_correction(rep),
                                          rep == Representation::wigner)};
  };
  return o;
}

std::vector<std::optional<Estimate>> photon_reduce(
    std::span<const Complex> rows, Representation rep, std::size_t) {
  return {obs::mean_from_samples(rows,
                                 rep == Representation::wigner ? 0.5 : 0.0)};
}

}  // namespace

Observable epr_pair(std::size_t a, std::size_t b, double sign) {
  if (a == b) throw std::invalid_argument("EPR pair needs distinct modes");
  const std::string suffix = sign < 0.0 ? "_minus" : "";
  Observable o;
  o.outputs = {"epr_u" + suffix, "epr_v" + suffix, "epr_sum" + suffix};
  o.width = 2;
  o.extract = [a, b, sign](const QuadratureView& q, Complex* out) {
    out[0] = q.c[a] + sign * q.c[b];
    out[1] = q.s[a] - sign * q.s[b];
  };
  o.reduce = [](std::span<const Complex> rows, Representation rep,
                std::size_t) { return epr_outputs(rows, pair_correction(rep)); };
  return o;
}

Observable ring_epr() {
  Observable o;
  o.outputs = {"ring_u", "ring_v", "ring_sum"};
  o.width = 2;
  o.extract = [](const QuadratureView& q, Complex* out) {
    if (q.modes % 2 != 0) {
      throw std::invalid_argument("ring EPR indicator requires even N");
    }
    Complex u{}, v{};
    for (std::size_t j = 0; j < q.modes; ++j) {
      u += q.c[j];
      // (-1)^j with j counted from 1.
      v += (j % 2 == 0 ? -1.0 : 1.0) * q.s[j];
    }
    out[0] = u;
    out[1] = v;
  };
  o.reduce = [](std::span<const Complex> rows, Representation rep,
                std::size_t modes) {
    return epr_outputs(rows,
                       single_correction(rep) * static_cast<double>(modes));
  };
  return o;
}

Observable variance_x(std::size_t mode) {
  return single_variance("variance_x:" + std::to_string(mode), mode, true);
}
Observable variance_p(std::size_t mode) {
  return single_variance("variance_p:" + std::to_string(mode), mode, false);
}

Observable photon_number(std::size_t mode) {
  Observable o;
  o.outputs = {"photon_number:" + std::to_string(mode)};
  o.extract = [mode](const QuadratureView& q, Complex* out) {
    out[0] = q.c[mode] * q.c[mode] + q.s[mode] * q.s[mode];
  };
  o.reduce = photon_reduce;
  return o;
}

Observable mean_photon_number() {
  Observable o;
  o.outputs = {"photon_number"};
  o.extract = [](const QuadratureView& q, Complex* out) {
    Complex sum{};
    for (std::size_t j = 0; j < q.modes; ++j) {
      sum += q.c[j] * q.c[j] + q.s[j] * q.s[j];
    }
    out[0] = sum / static_cast<double>(q.modes);
  };
  o.reduce = photon_reduce;
  return o;
}

Observable correlation_xx(std::size_t i, std::size_t j) {
  return pair_correlation(
      "correlation_xx:" + std::to_string(i) + ":" + std::to_string(j), i, j,
      true);
}
Observable correlation_pp(std::size_t i, std::size_t j) {
  return pair_correlation(
      "correlation_pp:" + std::to_string(i) + ":" + std::to_string(j), i, j,
      false);
}

Observable config_probability(std::string name,
                              std::vector<obs::SpinConfig> configs) {
  if (configs.empty()) {
    throw std::invalid_argument("config probability needs >= 1 config");
  }
  Observable o;
  o.outputs = {std::move(name)};
  o.extract = [configs = std::move(configs)](const QuadratureView& q,
                                             Complex* out) {
    std::uint64_t bits = 0;
    for (std::size_t j = 0; j < q.modes; ++j) {
      if (q.c[j].real() < 0.0) bits |= std::uint64_t{1} << j;
    }
    const obs::SpinConfig s(bits, q.modes);
    const bool hit =
        std::find(configs.begin(), configs.end(), s) != configs.end();
    out[0] = hit ? 1.0 : 0.0;
  };
  o.reduce = [](std::span<const Complex> rows, Representation,
                std::size_t) -> std::vector<std::optional<Estimate>> {
    std::size_t hits = 0;
    for (const Complex& r : rows) hits += r.real() > 0.5 ? 1 : 0;
    return {obs::binomial(hits, rows.size())};
  };
  return o;
}

}  // namespace observables

// ---------------------------------------------------------------------------

DiscreteModel::DiscreteModel(discrete::DiscreteParams params,
                             std::size_t stride, double divergence_cap)
    : machine_(std::move(params)), stride_(stride), cap_(divergence_cap) {
  if (stride == 0) throw std::invalid_argument("round stride must be >= 1");
  if (!(divergence_cap > 0.0)) {
    throw std::invalid_argument("divergence cap must be positive");
  }
}

std::vector<double> DiscreteModel::sample_times() const {
  const std::size_t rounds = machine_.params().rounds;
  std::vector<double> out{0.0};
  for (std::size_t r = 1; r <= rounds; ++r) {
    if (r % stride_ == 0 || r == rounds) out.push_back(static_cast<double>(r));
  }
  return out;
}

QuadratureMap<continuous::TwoDopoWignerState> two_dopo_wigner_map(double g) {
  return [g](const continuous::TwoDopoWignerState& a, Complex* c, Complex* s) {
    for (std::size_t j = 0; j < 2; ++j) {
      c[j] = {a[j].real() / g, 0.0};
      s[j] = {a[j].imag() / g, 0.0};
    }
  };
}

namespace {

void positive_p_quadratures(Complex alpha, Complex beta, Complex& c,
                            Complex& s) {
  c = 0.5 * (alpha + beta);
  s = (alpha - beta) / Complex(0.0, 2.0);
}

}  // namespace

QuadratureMap<continuous::PositivePEliminatedState> two_dopo_positive_p_map(
    double g) {
  return [g](const continuous::PositivePEliminatedState& a, Complex* c,
             Complex* s) {
    positive_p_quadratures(a[0] / g, a[1] / g, c[0], s[0]);
    positive_p_quadratures(a[2] / g, a[3] / g, c[1], s[1]);
  };
}

QuadratureMap<std::vector<Complex>> ring_wigner_map(double g) {
  return [g](const std::vector<Complex>& a, Complex* c, Complex* s) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      c[j] = {a[j].real() / g, 0.0};
      s[j] = {a[j].imag() / g, 0.0};
    }
  };
}

QuadratureMap<continuous::FiveModeState> five_mode_map() {
  return [](const continuous::FiveModeState& a, Complex* c, Complex* s) {
    for (std::size_t j = 0; j < 2; ++j) {
      c[j] = {a[j].real(), 0.0};
      s[j] = {a[j].imag(), 0.0};
    }
  };
}

QuadratureMap<continuous::PositivePFullState> positive_p_full_map() {
  namespace ppf = continuous::ppf;
  return [](const continuous::PositivePFullState& a, Complex* c, Complex* s) {
    positive_p_quadratures(a[ppf::as1], a[ppf::bs1], c[0], s[0]);
    positive_p_quadratures(a[ppf::as2], a[ppf::bs2], c[1], s[1]);
  };
}

// ---------------------------------------------------------------------------

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::two_dopo_wigner:
      return "two_dopo_wigner";
    case ModelKind::two_dopo_positive_p:
      return "two_dopo_positive_p";
    case ModelKind::ring_wigner:
      return "ring_wigner";
    case ModelKind::five_mode_wigner:
      return "five_mode_wigner";
    case ModelKind::positive_p_full:
      return "positive_p_full";
    case ModelKind::discrete:
      return "discrete";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  for (ModelKind k :
       {ModelKind::two_dopo_wigner, ModelKind::two_dopo_positive_p,
        ModelKind::ring_wigner, ModelKind::five_mode_wigner,
        ModelKind::positive_p_full, ModelKind::discrete}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown model '" + name + "'");
}

std::size_t EnsembleConfig::modes() const {
  switch (model) {
    case ModelKind::ring_wigner:
      return ring_size;
    case ModelKind::discrete:
      return discrete.n;
    default:
      return 2;
  }
}

void EnsembleConfig::validate() const {
  if (n_trajectories < 2) {
    throw std::invalid_argument("n_trajectories must be >= 2");
  }
  if (!(divergence_cap > 0.0)) {
    throw std::invalid_argument("divergence_cap must be positive");
  }
  if (model == ModelKind::discrete) {
    discrete.validate();
    if (round_stride == 0) {
      throw std::invalid_argument("round_stride must be >= 1");
    }
  } else {
    continuous.validate();
    integrator.validate();
    if (model == ModelKind::ring_wigner && ring_size < 3) {
      throw std::invalid_argument("ring_size must be >= 3");
    }
    if ((model == ModelKind::five_mode_wigner ||
         model == ModelKind::positive_p_full) &&
        !continuous.full_rates) {
      throw std::invalid_argument("un-eliminated models need full_rates");
    }
  }
  if (modes() > 64) throw std::invalid_argument("at most 64 modes supported");
}

ising::CouplingMatrix ising_couplings(const EnsembleConfig& config) {
  const std::size_t n = config.modes();
  ising::CouplingMatrix j(n);
  if (config.model == ModelKind::discrete) {
    const auto& c = config.discrete.coupling;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const double v = -0.5 * (c[a * n + b] + c[b * n + a]);
        if (v != 0.0) j.set(a, b, v);
      }
    }
    return j;
  }
  // Optical coupling +sigma * xi between neighbours favours alignment for
  // sigma * xi > 0, i.e. J = -sigma * xi.
  const double bond =
      -continuous::sign_of(config.continuous.phase) * config.continuous.xi;
  if (bond == 0.0) return j;
  if (config.model == ModelKind::ring_wigner) {
    for (std::size_t a = 0; a < n; ++a) j.set(a, (a + 1) % n, bond);
  } else {
    j.set(0, 1, bond);
  }
  return j;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::size_t parse_index(const std::string& text, std::size_t modes,
                        const std::string& name) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || text.empty()) {
    throw std::invalid_argument("bad mode index in observable '" + name + "'");
  }
  if (v >= modes) {
    throw std::out_of_range("mode index out of range in observable '" + name +
                            "'");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

Observable make_observable(const std::string& name,
                           const EnsembleConfig& config) {
  const std::size_t modes = config.modes();
  const auto parts = split(name, ':');
  const std::string head = parts.empty() ? std::string() : parts[0];
  auto args = [&](std::size_t count) {
    if (parts.size() != count + 1) {
      throw std::invalid_argument("observable '" + name + "' expects " +
                                  std::to_string(count) + " index argument(s)");
    }
  };
  if (head == "epr" || head == "epr_minus") {
    std::size_t a = 0, b = 1;
    if (parts.size() == 3) {
      a = parse_index(parts[1], modes, name);
      b = parse_index(parts[2], modes, name);
    } else {
      args(0);
    }
    return observables::epr_pair(a, b, head == "epr" ? 1.0 : -1.0);
  }
  if (head == "ring") {
    args(0);
    if (modes % 2 != 0) {
      throw std::invalid_argument("ring EPR indicator requires even N");
    }
    return observables::ring_epr();
  }
  if (head == "variance_x" || head == "variance_p") {
    args(1);
    const std::size_t k = parse_index(parts[1], modes, name);
    return head == "variance_x" ? observables::variance_x(k)
                                : observables::variance_p(k);
  }
  if (head == "photon_number") {
    if (parts.size() == 1) return observables::mean_photon_number();
    args(1);
    return observables::photon_number(parse_index(parts[1], modes, name));
  }
  if (head == "correlation_xx" || head == "correlation_pp") {
    args(2);
    const std::size_t i = parse_index(parts[1], modes, name);
    const std::size_t j = parse_index(parts[2], modes, name);
    return head == "correlation_xx" ? observables::correlation_xx(i, j)
                                    : observables::correlation_pp(i, j);
  }
  if (head == "success_probability") {
    args(0);
    return observables::config_probability(
        "success_probability",
        ising::brute_force_ground_states(ising_couplings(config)));
  }
  throw std::invalid_argument("unknown observable '" + name + "'");
}

EnsembleSeries run_ensemble(const EnsembleConfig& config) {
  config.validate();
  std::vector<Observable> obs;
  for (const auto& name : config.observables) {
    obs.push_back(make_observable(name, config));
  }
  RunOptions options;
  options.n_trajectories = config.n_trajectories;
  options.master_seed = config.master_seed;
  options.workers = config.workers;
  options.record_spins = config.record_spins;

  IntegratorConfig integrator = config.integrator;
  integrator.divergence_cap = config.divergence_cap;
  const double g = config.continuous.g;
  using continuous::Representation;
  switch (config.model) {
    case ModelKind::two_dopo_wigner: {
      ContinuousModel model(continuous::TwoDopoWignerSystem(config.continuous),
                            integrator, Representation::wigner, 2,
                            two_dopo_wigner_map(g));
      return run_model(model, options, obs);
    }
    case ModelKind::two_dopo_positive_p: {
      ContinuousModel model(
          continuous::TwoDopoPositivePSystem(config.continuous), integrator,
          Representation::positive_p, 2, two_dopo_positive_p_map(g));
      return run_model(model, options, obs);
    }
    case ModelKind::ring_wigner: {
      ContinuousModel model(
          continuous::RingWignerSystem(config.continuous, config.ring_size),
          integrator, Representation::wigner, config.ring_size,
          ring_wigner_map(g));
      return run_model(model, options, obs);
    }
    case ModelKind::five_mode_wigner: {
      ContinuousModel model(continuous::FiveModeWignerSystem(config.continuous),
                            integrator, Representation::wigner, 2,
                            five_mode_map());
      return run_model(model, options, obs);
    }
    case ModelKind::positive_p_full: {
      ContinuousModel model(continuous::PositivePFullSystem(config.continuous),
                            integrator, Representation::positive_p, 2,
                            positive_p_full_map());
      return run_model(model, options, obs);
    }
    case ModelKind::discrete: {
      DiscreteModel model(config.discrete, config.round_stride,
                          config.divergence_cap);
      return run_model(model, options, obs);
    }
  }
  throw std::logic_error("unhandled model kind");
}

}  // namespace cim::ensemble
