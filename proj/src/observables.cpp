#include "cim/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cim::obs {

Estimate jackknife(std::span<const double> features, std::size_t width,
                   const std::function<double(std::span<const double>)>& f) {
  if (width == 0 || features.size() % width != 0) {
    throw std::invalid_argument("jackknife: ragged feature table");
  }
  const std::size_t n = features.size() / width;
  if (n < 2) {
    throw std::invalid_argument("jackknife needs at least 2 trajectories");
  }
  std::vector<double> totals(width, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < width; ++k) totals[k] += features[i * width + k];
  }
  std::vector<double> means(width);
  for (std::size_t k = 0; k < width; ++k) {
    means[k] = totals[k] / static_cast<double>(n);
  }
  Estimate est;
  est.value = f(means);

  const double inv = 1.0 / static_cast<double>(n - 1);
  std::vector<double> loo(n);
  std::vector<double> partial(width);
  double loo_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < width; ++k) {
      partial[k] = (totals[k] - features[i * width + k]) * inv;
    }
    loo[i] = f(partial);
    loo_mean += loo[i];
  }
  loo_mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
  est.se = std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n));
  return est;
}

Estimate binomial(std::size_t successes, std::size_t trials) {
  if (trials == 0) {
    throw std::invalid_argument("binomial estimate needs at least one trial");
  }
  const double p = static_cast<double>(successes) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

double standard_error(std::span<const double> records, ErrorKind kind) {
  if (records.size() < 2) {
    throw std::invalid_argument("standard error needs at least 2 records");
  }
  if (kind == ErrorKind::binomial) {
    std::size_t hits = 0;
    for (double r : records) {
      if (r != 0.0 && r != 1.0) {
        throw std::invalid_argument("binomial records must be 0 or 1");
      }
      hits += r == 1.0 ? 1 : 0;
    }
    return binomial(hits, records.size()).se;
  }
  return jackknife(records, 1, [](std::span<const double> m) { return m[0]; })
      .se;
}

// ---------------------------------------------------------------------------

QuadratureEnsemble::QuadratureEnsemble(Representation rep, std::size_t modes)
    : rep_(rep), modes_(modes) {
  if (modes == 0) throw std::invalid_argument("ensemble needs >= 1 mode");
}

void QuadratureEnsemble::add_wigner(std::span<const Complex> alpha) {
  if (rep_ != Representation::wigner || alpha.size() != modes_) {
    throw std::invalid_argument("add_wigner: representation/size mismatch");
  }
  for (const Complex& a : alpha) {
    c_.emplace_back(a.real(), 0.0);
    s_.emplace_back(a.imag(), 0.0);
  }
}

void QuadratureEnsemble::add_positive_p(std::span<const Complex> ab) {
  if (rep_ != Representation::positive_p || ab.size() != 2 * modes_) {
    throw std::invalid_argument("add_positive_p: representation/size mismatch");
  }
  const Complex two_i{0.0, 2.0};
  for (std::size_t j = 0; j < modes_; ++j) {
    const Complex a = ab[2 * j];
    const Complex b = ab[2 * j + 1];
    c_.push_back(0.5 * (a + b));
    s_.push_back((a - b) / two_i);
  }
}

double QuadratureEnsemble::ordering_correction(
    std::span<const double> weights) const {
  if (rep_ != Representation::positive_p) return 0.0;
  double sum = 0.0;
  for (double w : weights) sum += w * w;
  return 0.25 * sum;
}

Estimate combination_variance(std::span<const Complex> samples,
                              double ordering_correction) {
  std::vector<double> f;
  f.reserve(2 * samples.size());
  for (const Complex& q : samples) {
    f.push_back(q.real());
    f.push_back((q * q).real());
  }
  return jackknife(f, 2, [ordering_correction](std::span<const double> m) {
    return m[1] - m[0] * m[0] + ordering_correction;
  });
}

namespace {

std::vector<Complex> mode_column(const QuadratureEnsemble& ens,
                                 std::size_t mode, Quadrature q) {
  if (mode >= ens.modes()) throw std::out_of_range("mode index out of range");
  std::vector<Complex> out(ens.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = q == Quadrature::x ? ens.c(i, mode) : ens.s(i, mode);
  }
  return out;
}

}  // namespace

Estimate variance_x(const QuadratureEnsemble& ens, std::size_t mode) {
  return combination_variance(mode_column(ens, mode, Quadrature::x),
                              ens.ordering_correction_single());
}

Estimate variance_p(const QuadratureEnsemble& ens, std::size_t mode) {
  return combination_variance(mode_column(ens, mode, Quadrature::p),
                              ens.ordering_correction_single());
}

EprVariances epr_from_samples(std::span<const Complex> u,
                              std::span<const Complex> v, double correction_u,
                              double correction_v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("EPR samples must have equal length");
  }
  std::vector<double> f;
  f.reserve(4 * u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    f.push_back(u[i].real());
    f.push_back((u[i] * u[i]).real());
    f.push_back(v[i].real());
    f.push_back((v[i] * v[i]).real());
  }
  auto var_u = [correction_u](std::span<const double> m) {
    return m[1] - m[0] * m[0] + correction_u;
  };
  auto var_v = [correction_v](std::span<const double> m) {
    return m[3] - m[2] * m[2] + correction_v;
  };
  EprVariances out;
  out.u = jackknife(f, 4, var_u);
  out.v = jackknife(f, 4, var_v);
  out.sum = jackknife(f, 4, [&](std::span<const double> m) {
    return var_u(m) + var_v(m);
  });
  return out;
}

EprVariances epr_two_variances(const QuadratureEnsemble& ens,
                               std::size_t mode_a, std::size_t mode_b) {
  if (mode_a >= ens.modes() || mode_b >= ens.modes() || mode_a == mode_b) {
    throw std::invalid_argument("EPR pair needs two distinct modes");
  }
  const std::size_t n = ens.size();
  std::vector<Complex> u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = ens.c(i, mode_a) + ens.c(i, mode_b);
    v[i] = ens.s(i, mode_a) - ens.s(i, mode_b);
  }
  const double w[2] = {1.0, 1.0};
  const double corr = ens.ordering_correction(w);
  return epr_from_samples(u, v, corr, corr);
}

EprVariances epr_ring_variances(const QuadratureEnsemble& ens) {
  const std::size_t modes = ens.modes();
  if (modes % 2 != 0) {
    throw std::invalid_argument("ring EPR indicator requires even N");
  }
  const std::size_t n = ens.size();
  std::vector<Complex> u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    Complex su{}, sv{};
    for (std::size_t j = 0; j < modes; ++j) {
      su += ens.c(i, j);
      // (-1)^j with j = 1..N, i.e. index 0 carries -1.
      sv += (j % 2 == 0 ? -1.0 : 1.0) * ens.s(i, j);
    }
    u[i] = su;
    v[i] = sv;
  }
  const std::vector<double> w(modes, 1.0);
  const double corr = ens.ordering_correction(w);
  return epr_from_samples(u, v, corr, corr);
}

std::optional<Estimate> correlation_from_samples(std::span<const Complex> a,
                                                 std::span<const Complex> b,
                                                 double correction,
                                                 bool clamp) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("correlation columns differ in length");
  }
  std::vector<double> f;
  f.reserve(5 * a.size());
  std::vector<double> means(5, 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double row[5] = {a[k].real(), b[k].real(), (a[k] * a[k]).real(),
                           (b[k] * b[k]).real(), (a[k] * b[k]).real()};
    for (std::size_t c = 0; c < 5; ++c) {
      f.push_back(row[c]);
      means[c] += row[c];
    }
  }
  auto var_a = [correction](std::span<const double> m) {
    return m[2] - m[0] * m[0] + correction;
  };
  auto var_b = [correction](std::span<const double> m) {
    return m[3] - m[1] * m[1] + correction;
  };
  for (double& m : means) m /= static_cast<double>(a.size());
  if (!(var_a(means) > 0.0) || !(var_b(means) > 0.0)) return std::nullopt;
  return jackknife(f, 5, [&](std::span<const double> m) {
    const double va = var_a(m);
    const double vb = var_b(m);
    if (!(va > 0.0) || !(vb > 0.0)) return 0.0;
    const double r = (m[4] - m[0] * m[1]) / std::sqrt(va * vb);
    return clamp ? std::clamp(r, -1.0, 1.0) : r;
  });
}

Estimate mean_from_samples(std::span<const Complex> samples, double offset) {
  std::vector<double> f(samples.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = samples[i].real();
  return jackknife(f, 1, [offset](std::span<const double> m) {
    return m[0] - offset;
  });
}

std::optional<Estimate> correlation(const QuadratureEnsemble& ens,
                                    Quadrature q, std::size_t i,
                                    std::size_t j) {
  return correlation_from_samples(
      mode_column(ens, i, q), mode_column(ens, j, q),
      ens.ordering_correction_single(),
      ens.representation() == Representation::wigner);
}

std::optional<Estimate> correlation_xx(const QuadratureEnsemble& ens,
                                       std::size_t i, std::size_t j) {
  return correlation(ens, Quadrature::x, i, j);
}

std::optional<Estimate> correlation_pp(const QuadratureEnsemble& ens,
                                       std::size_t i, std::size_t j) {
  return correlation(ens, Quadrature::p, i, j);
}

Estimate photon_number(const QuadratureEnsemble& ens, std::size_t mode) {
  if (mode >= ens.modes()) throw std::out_of_range("mode index out of range");
  std::vector<Complex> f(ens.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Complex c = ens.c(i, mode);
    const Complex s = ens.s(i, mode);
    // beta * alpha = (c - i s)(c + i s) = c^2 + s^2.
    f[i] = c * c + s * s;
  }
  return mean_from_samples(
      f, ens.representation() == Representation::wigner ? 0.5 : 0.0);
}

// ---------------------------------------------------------------------------

SpinConfig::SpinConfig(std::uint64_t down_bits, std::size_t n)
    : bits_(down_bits), n_(n) {
  if (n > 64) throw std::invalid_argument("spin configs hold at most 64 spins");
  if (n < 64 && (down_bits >> n) != 0) {
    throw std::invalid_argument("spin bits beyond configuration length");
  }
}

SpinConfig SpinConfig::alternating(std::size_t n, bool first_up) {
  std::uint64_t bits = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const bool up = (j % 2 == 0) == first_up;
    if (!up) bits |= std::uint64_t{1} << j;
  }
  return {bits, n};
}

SpinConfig SpinConfig::parse(const std::string& text) {
  std::uint64_t bits = 0;
  std::size_t n = 0;
  static const std::string kUpArrow = "↑";
  static const std::string kDownArrow = "↓";
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    bool down = false;
    if (ch == 'u' || ch == 'U' || ch == '+') {
      down = false;
    } else if (ch == 'd' || ch == 'D' || ch == '-') {
      down = true;
    } else if (text.compare(i, kUpArrow.size(), kUpArrow) == 0) {
      i += kUpArrow.size() - 1;
      down = false;
    } else if (text.compare(i, kDownArrow.size(), kDownArrow) == 0) {
      i += kDownArrow.size() - 1;
      down = true;
    } else if (ch == ' ' || ch == ',') {
      continue;
    } else {
      throw std::invalid_argument("unrecognized spin symbol in '" + text + "'");
    }
    if (n == 64) throw std::invalid_argument("spin string too long");
    if (down) bits |= std::uint64_t{1} << n;
    ++n;
  }
  return {bits, n};
}

SpinConfig SpinConfig::flipped() const {
  const std::uint64_t mask =
      n_ == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n_) - 1);
  return {~bits_ & mask, n_};
}

std::string SpinConfig::to_string() const {
  std::string out(n_, 'u');
  for (std::size_t j = 0; j < n_; ++j) {
    if (!up(j)) out[j] = 'd';
  }
  return out;
}

SpinConfig spins(std::span<const double> inphase) {
  std::uint64_t bits = 0;
  for (std::size_t j = 0; j < inphase.size(); ++j) {
    if (inphase[j] < 0.0) bits |= std::uint64_t{1} << j;
  }
  return {bits, inphase.size()};
}

Estimate ProbabilityTable::probability(const SpinConfig& config) const {
  auto it = entries.find(config);
  if (it != entries.end()) return it->second;
  return {0.0, 0.0};
}

double ProbabilityTable::total() const {
  double sum = 0.0;
  for (const auto& [config, est] : entries) sum += est.value;
  return sum;
}

ProbabilityTable tabulate(std::span<const SpinConfig> configs) {
  ProbabilityTable table;
  table.trials = configs.size();
  if (configs.empty()) return table;
  std::map<SpinConfig, std::size_t> counts;
  for (const auto& c : configs) ++counts[c];
  for (const auto& [config, count] : counts) {
    table.entries[config] = binomial(count, configs.size());
  }
  return table;
}

std::optional<PostSelection> post_select(
    std::span<const SpinConfig> configs, std::size_t n_times,
    const std::function<bool(const SpinConfig&)>& final_predicate) {
  if (n_times == 0 || configs.size() % n_times != 0) {
    throw std::invalid_argument("post_select: ragged config table");
  }
  const std::size_t n_traj = configs.size() / n_times;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n_traj; ++i) {
    if (final_predicate(configs[i * n_times + n_times - 1])) keep.push_back(i);
  }
  if (keep.empty()) return std::nullopt;
  PostSelection out;
  out.survivors = keep.size();
  out.tables.reserve(n_times);
  std::vector<SpinConfig> column(keep.size());
  for (std::size_t t = 0; t < n_times; ++t) {
    for (std::size_t k = 0; k < keep.size(); ++k) {
      column[k] = configs[keep[k] * n_times + t];
    }
    out.tables.push_back(tabulate(column));
  }
  return out;
}

Estimate success_probability(std::span<const SpinConfig> final_configs,
                             std::span<const SpinConfig> ground_set) {
  if (ground_set.empty()) {
    throw std::invalid_argument("success probability needs a ground set");
  }
  std::size_t hits = 0;
  for (const auto& c : final_configs) {
    if (std::find(ground_set.begin(), ground_set.end(), c) != ground_set.end()) {
      ++hits;
    }
  }
  return binomial(hits, final_configs.size());
}

}  // namespace cim::obs
