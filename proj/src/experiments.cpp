#include "cim/experiments.hpp"

#include <json.hpp>

#include <cmath>
#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#ifndef CIM_VERSION
#define CIM_VERSION "unknown"
#endif

namespace cim::experiments {

using nlohmann::json;
using ensemble::EnsembleConfig;
using ensemble::EnsembleSeries;
using ensemble::ModelKind;
using obs::Estimate;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string label_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// CSV

void ResultTable::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("row width does not match the header");
  }
  rows.push_back(std::move(row));
}

std::size_t ResultTable::column_index(const std::string& column) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == column) return i;
  }
  throw std::out_of_range("no column '" + column + "'");
}

double ResultTable::at(std::size_t row, const std::string& column) const {
  return rows.at(row).at(column_index(column));
}

bool ResultTable::operator==(const ResultTable& other) const {
  if (metadata != other.metadata || columns != other.columns ||
      rows.size() != other.rows.size()) {
    return false;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != other.rows[i].size()) return false;
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      const double a = rows[i][j];
      const double b = other.rows[i][j];
      if (std::isnan(a) != std::isnan(b)) return false;
      if (!std::isnan(a) && a != b) return false;
    }
  }
  return true;
}

void write_csv(const ResultTable& table, std::ostream& out) {
  for (const auto& [key, value] : table.metadata) {
    if (key.find(':') != std::string::npos ||
        key.find('\n') != std::string::npos ||
        value.find('\n') != std::string::npos) {
      throw std::invalid_argument("metadata must be single-line, key without ':'");
    }
    out << "# " << key << ": " << value << '\n';
  }
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    const auto& c = table.columns[i];
    if (c.find(',') != std::string::npos || c.empty() || c[0] == '#') {
      throw std::invalid_argument("invalid column name '" + c + "'");
    }
    out << (i ? "," : "") << c;
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << format_number(row[i]);
    }
    out << '\n';
  }
}

std::string to_csv(const ResultTable& table) {
  std::ostringstream out;
  write_csv(table, out);
  return out.str();
}

ResultTable read_csv(std::istream& in) {
  ResultTable table;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
      const auto comma = s.find(',', start);
      out.push_back(s.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header && !line.empty() && line[0] == '#') {
      const std::string body = line.substr(line[1] == ' ' ? 2 : 1);
      const auto colon = body.find(": ");
      if (colon == std::string::npos) {
        throw std::invalid_argument("malformed metadata on line " +
                                    std::to_string(line_no));
      }
      table.metadata.emplace_back(body.substr(0, colon),
                                  body.substr(colon + 2));
      continue;
    }
    if (!header) {
      table.columns = split(line);
      header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != table.columns.size()) {
      throw std::invalid_argument("row width mismatch on line " +
                                  std::to_string(line_no));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      if (f.empty()) {
        row.push_back(kNaN);
        continue;
      }
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(f, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != f.size()) {
        throw std::invalid_argument("bad number '" + f + "' on line " +
                                    std::to_string(line_no));
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (!header) throw std::invalid_argument("CSV has no header row");
  return table;
}

ResultTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  return read_csv(in);
}

// ---------------------------------------------------------------------------
// Configuration parsing

ConfigError::ConfigError(const std::string& path, const std::string& message)
    : std::invalid_argument((path.empty() ? std::string("<root>") : path) +
                            ": " + message),
      path_(path) {}

namespace {

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

/// Walks one JSON object, checking types and ranges and rejecting unknown
/// keys when finished.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string path(const std::string& key) const {
    return join_path(path_, key);
  }

  double number(const std::string& key, double def, double lo, double hi,
                bool lo_open = false, bool hi_open = false) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    const double x = v.get<double>();
    const bool below = lo_open ? !(x > lo) : !(x >= lo);
    const bool above = hi_open ? !(x < hi) : !(x <= hi);
    if (below || above) {
      throw ConfigError(path(key), "value " + label_number(x) +
                                       " out of range " + (lo_open ? "(" : "[") +
                                       label_number(lo) + ", " +
                                       label_number(hi) + (hi_open ? ")" : "]"));
    }
    return x;
  }

  std::uint64_t integer(const std::string& key, std::uint64_t def,
                        std::uint64_t lo, std::uint64_t hi) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0 &&
                                   !v.is_number_unsigned())) {
      throw ConfigError(path(key), "expected a non-negative integer");
    }
    const auto x = v.get<std::uint64_t>();
    if (x < lo || x > hi) {
      throw ConfigError(path(key), "value " + std::to_string(x) +
                                       " out of range [" + std::to_string(lo) +
                                       ", " + std::to_string(hi) + "]");
    }
    return x;
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    if (!has(key)) return {};
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(path(key), "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        throw ConfigError(path(key) + "[" + std::to_string(i) + "]",
                          "expected a number");
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError(join_path(path_, it.key()), "unknown key");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json parse_json(const std::string& text) {
  bool blank = true;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
  }
  if (blank) return json::object();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
}

ReservoirSpec read_reservoir(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string kind = r.string("kind", "vacuum");
  ReservoirSpec spec;
  if (kind == "vacuum") {
    spec = ReservoirSpec::vacuum();
  } else if (kind == "squeezed") {
    spec = ReservoirSpec::squeezed(r.number("r", 0.0, 0.0, 10.0));
  } else if (kind == "thermal") {
    spec = ReservoirSpec::thermal(r.number("n_th", 0.0, 0.0, 1e6));
  } else {
    throw ConfigError(r.path("kind"), "unknown reservoir kind '" + kind + "'");
  }
  r.finish();
  return spec;
}

continuous::PumpSchedule read_pump(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string kind = r.string("kind", "constant");
  continuous::PumpSchedule pump;
  if (kind == "linear_ramp") {
    const double e_max = r.number("e_max", 1.5, 0.0, 1e6);
    const double tau_max = r.number("tau_max", 200.0, 0.0, 1e9, true);
    pump = continuous::PumpSchedule::linear_ramp(e_max, tau_max);
  } else if (kind == "constant" || kind == "abrupt") {
    const double e = r.number("e", 0.0, 0.0, 1e6);
    pump = kind == "constant" ? continuous::PumpSchedule::constant(e)
                              : continuous::PumpSchedule::abrupt(e);
  } else {
    throw ConfigError(r.path("kind"), "unknown pump kind '" + kind + "'");
  }
  r.finish();
  return pump;
}

void read_integrator(const json& j, const std::string& path,
                     IntegratorConfig& cfg) {
  ObjectReader r(j, path);
  cfg.dt = r.number("dt", cfg.dt, 0.0, 1e3, true);
  cfg.total_time = r.number("total_time", cfg.total_time, 0.0, 1e9, true);
  if (r.has("sample_times")) {
    cfg.sample_times = r.numbers("sample_times");
    if (r.has("sample_spacing")) {
      throw ConfigError(r.path("sample_spacing"),
                        "give sample_times or sample_spacing, not both");
    }
  } else {
    const double spacing =
        r.number("sample_spacing", cfg.total_time / 10.0, 0.0, 1e9, true);
    cfg.sample_times = uniform_sample_times(cfg.total_time, spacing);
  }
  r.finish();
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

void read_discrete(const json& j, const std::string& path,
                   EnsembleConfig& cfg) {
  ObjectReader r(j, path);
  auto& d = cfg.discrete;
  d.n = r.integer("n", d.n, 1, 64);
  d.mu = r.number("mu", d.mu, 0.0, 1e3, true);
  d.t_p = r.number("t_p", d.t_p, 0.0, 1.0, true, false);
  d.t_i = r.number("t_i", d.t_i, 0.0, 1.0, true, true);
  d.psa_gain = r.number("gain", d.psa_gain, 1.0, 1e12);
  d.rounds = r.integer("rounds", d.rounds, 1, 100000000);
  d.substeps = r.integer("substeps", d.substeps, 1, 100000);
  cfg.round_stride = r.integer("round_stride", cfg.round_stride, 1, 100000000);
  const std::string order = r.string("injection", "post_gain");
  if (order == "post_gain") {
    d.order = discrete::InjectionOrder::post_gain;
  } else if (order == "pre_gain") {
    d.order = discrete::InjectionOrder::pre_gain;
  } else {
    throw ConfigError(r.path("injection"), "expected post_gain or pre_gain");
  }
  const bool have_ring = r.has("xi_ring");
  const bool have_triplets = r.has("couplings");
  if (have_ring && have_triplets) {
    throw ConfigError(r.path("couplings"), "give xi_ring or couplings, not both");
  }
  if (have_triplets) {
    const json& t = r.raw("couplings");
    if (!t.is_array()) throw ConfigError(r.path("couplings"), "expected an array");
    d.coupling.assign(d.n * d.n, 0.0);
    for (std::size_t k = 0; k < t.size(); ++k) {
      const std::string p = r.path("couplings") + "[" + std::to_string(k) + "]";
      const json& e = t[k];
      if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
          !e[1].is_number_integer() || !e[2].is_number()) {
        throw ConfigError(p, "expected [i, j, xi_ij]");
      }
      const long long i = e[0].get<long long>();
      const long long jj = e[1].get<long long>();
      if (i < 0 || jj < 0 || static_cast<std::size_t>(i) >= d.n ||
          static_cast<std::size_t>(jj) >= d.n || i == jj) {
        throw ConfigError(p, "indices out of range or on the diagonal");
      }
      const double v = e[2].get<double>();
      d.coupling[static_cast<std::size_t>(i) * d.n + static_cast<std::size_t>(jj)] = v;
      d.coupling[static_cast<std::size_t>(jj) * d.n + static_cast<std::size_t>(i)] = v;
    }
  } else {
    const double xi_ring = r.number("xi_ring", -0.01, -1.0, 1.0, true, true);
    if (d.n < 3) throw ConfigError(r.path("n"), "ring needs n >= 3");
    d.coupling = discrete::ring_coupling(d.n, xi_ring);
  }
  const bool have_e = r.has("pump_e");
  const bool have_p = r.has("p");
  if (have_e && have_p) throw ConfigError(r.path("p"), "give pump_e or p, not both");
  if (have_p) {
    d.pump_e = r.number("p", 0.0, 0.0, 1e6) * discrete::linear_threshold(d);
  } else {
    d.pump_e = r.number("pump_e", 0.0, 0.0, 1e6);
  }
  r.finish();
}

}  // namespace

namespace {

EnsembleConfig config_from_json(const json& root, std::vector<double>* grid) {
  ObjectReader r(root, "");
  EnsembleConfig cfg;
  const std::string model = r.string("model", "two_dopo_wigner");
  try {
    cfg.model = ensemble::parse_model_kind(model);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model", e.what());
  }
  cfg.n_trajectories = r.integer("n_trajectories", cfg.n_trajectories, 2,
                                 1000000000);
  cfg.master_seed = r.integer("master_seed", cfg.master_seed, 0,
                              std::numeric_limits<std::uint64_t>::max());
  cfg.workers = r.integer("workers", cfg.workers, 0, 4096);
  cfg.record_spins = r.boolean("record_spins", false);
  cfg.divergence_cap = r.number("divergence_cap", cfg.divergence_cap, 0.0,
                                1e300, true);

  auto& c = cfg.continuous;
  c.g = r.number("g", c.g, 0.0, 1.0, true);
  c.xi = r.number("xi", c.xi, 0.0, 1.0, false, true);
  const std::string phase = r.string("phase", "antiferromagnetic");
  if (phase == "antiferromagnetic") {
    c.phase = continuous::CouplingPhase::antiferromagnetic;
  } else if (phase == "ferromagnetic") {
    c.phase = continuous::CouplingPhase::ferromagnetic;
  } else {
    throw ConfigError("phase", "expected ferromagnetic or antiferromagnetic");
  }
  if (r.has("pump")) c.pump = read_pump(r.raw("pump"), "pump");
  ReservoirSpec reservoir;
  if (r.has("reservoir")) reservoir = read_reservoir(r.raw("reservoir"), "reservoir");
  c.reservoir_central = reservoir;
  cfg.discrete.reservoir = reservoir;
  if (r.has("full_rates")) {
    ObjectReader fr(r.raw("full_rates"), "full_rates");
    if (fr.has("ratio")) {
      const double ratio = fr.number("ratio", 100.0, 0.0, 1e9, true);
      const double gamma_s = fr.number("gamma_s", 1.0, 0.0, 1e9, true);
      c.full_rates = continuous::FullRates::from_normalized(c.g, c.xi,
                                                            gamma_s, ratio);
    } else {
      continuous::FullRates rates;
      rates.gamma_s = fr.number("gamma_s", rates.gamma_s, 0.0, 1e9, true);
      rates.gamma_p = fr.number("gamma_p", rates.gamma_p, 0.0, 1e9, true);
      rates.gamma_c = fr.number("gamma_c", rates.gamma_c, 0.0, 1e9, true);
      rates.kappa = fr.number("kappa", rates.kappa, 0.0, 1e9, true);
      rates.zeta = fr.number("zeta", rates.zeta, 0.0, 1e9);
      c.full_rates = rates;
    }
    fr.finish();
  }
  cfg.ring_size = r.integer("ring_size", cfg.ring_size, 3, 64);
  cfg.integrator.sample_times =
      uniform_sample_times(cfg.integrator.total_time,
                           cfg.integrator.total_time / 10.0);
  if (r.has("integrator")) {
    read_integrator(r.raw("integrator"), "integrator", cfg.integrator);
  }
  if (cfg.model == ModelKind::discrete) {
    cfg.discrete.coupling = discrete::ring_coupling(cfg.discrete.n, -0.01);
  }
  if (r.has("discrete")) {
    if (cfg.model != ModelKind::discrete) {
      throw ConfigError("discrete", "only valid with model = discrete");
    }
    read_discrete(r.raw("discrete"), "discrete", cfg);
  }
  if (r.has("observables")) {
    const json& o = r.raw("observables");
    if (!o.is_array()) throw ConfigError("observables", "expected an array");
    for (std::size_t i = 0; i < o.size(); ++i) {
      const std::string p = "observables[" + std::to_string(i) + "]";
      if (!o[i].is_string()) throw ConfigError(p, "expected a string");
      cfg.observables.push_back(o[i].get<std::string>());
    }
  }
  if (!r.has("observables")) {
    switch (cfg.model) {
      case ModelKind::ring_wigner:
        cfg.observables = {"ring", "photon_number"};
        break;
      case ModelKind::discrete:
        cfg.observables = {"photon_number", "success_probability"};
        break;
      default:
        cfg.observables = {"epr", "photon_number"};
    }
  }
  if (grid != nullptr) {
    const bool have_e = r.has("pump_grid");
    const bool have_p = r.has("p_grid");
    if (have_e == have_p) {
      throw ConfigError("pump_grid", "give exactly one of pump_grid or p_grid");
    }
    *grid = r.numbers(have_e ? "pump_grid" : "p_grid");
    if (have_p) {
      const double e_lin = discrete::linear_threshold(cfg.discrete);
      for (double& v : *grid) v *= e_lin;
    }
  }
  r.finish();

  if (cfg.model == ModelKind::ring_wigner && c.xi > 0.5) {
    throw ConfigError("xi", "ring model needs xi <= 0.5");
  }
  try {
    cfg.validate();
    for (const auto& name : cfg.observables) {
      (void)ensemble::make_observable(name, cfg);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("", e.what());
  }
  return cfg;
}

json reservoir_json(const ReservoirSpec& r) {
  switch (r.kind()) {
    case ReservoirSpec::Kind::squeezed:
      return {{"kind", "squeezed"}, {"r", r.parameter()}};
    case ReservoirSpec::Kind::thermal:
      return {{"kind", "thermal"}, {"n_th", r.parameter()}};
    default:
      return {{"kind", "vacuum"}};
  }
}

}  // namespace

EnsembleConfig parse_ensemble_config(const std::string& json_text) {
  return config_from_json(parse_json(json_text), nullptr);
}

EnsembleConfig load_ensemble_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ensemble_config(ss.str());
}

std::string describe_config(const EnsembleConfig& cfg) {
  json j;
  j["model"] = ensemble::to_string(cfg.model);
  j["n_trajectories"] = cfg.n_trajectories;
  j["master_seed"] = cfg.master_seed;
  j["observables"] = cfg.observables;
  j["record_spins"] = cfg.record_spins;
  j["divergence_cap"] = cfg.divergence_cap;
  if (cfg.model == ModelKind::discrete) {
    const auto& d = cfg.discrete;
    std::vector<json> triplets;
    for (std::size_t i = 0; i < d.n; ++i) {
      for (std::size_t k = i + 1; k < d.n; ++k) {
        if (d.coupling[i * d.n + k] != 0.0) {
          triplets.push_back(json::array({i, k, d.coupling[i * d.n + k]}));
        }
      }
    }
    j["discrete"] = {{"n", d.n},
                     {"mu", d.mu},
                     {"pump_e", d.pump_e},
                     {"t_p", d.t_p},
                     {"t_i", d.t_i},
                     {"gain", d.psa_gain},
                     {"rounds", d.rounds},
                     {"substeps", d.substeps},
                     {"round_stride", cfg.round_stride},
                     {"injection", d.order == discrete::InjectionOrder::post_gain
                                       ? "post_gain"
                                       : "pre_gain"},
                     {"couplings", triplets}};
    j["reservoir"] = reservoir_json(d.reservoir);
  } else {
    const auto& c = cfg.continuous;
    j["g"] = c.g;
    j["xi"] = c.xi;
    j["phase"] = c.phase == continuous::CouplingPhase::ferromagnetic
                     ? "ferromagnetic"
                     : "antiferromagnetic";
    json pump;
    switch (c.pump.kind()) {
      case continuous::PumpSchedule::Kind::linear_ramp:
        pump = {{"kind", "linear_ramp"},
                {"e_max", c.pump.e_max()},
                {"tau_max", c.pump.tau_max()}};
        break;
      case continuous::PumpSchedule::Kind::abrupt:
        pump = {{"kind", "abrupt"}, {"e", c.pump.e_max()}};
        break;
      default:
        pump = {{"kind", "constant"}, {"e", c.pump.e_max()}};
    }
    j["pump"] = pump;
    j["reservoir"] = reservoir_json(c.reservoir_central);
    if (cfg.model == ModelKind::ring_wigner) j["ring_size"] = cfg.ring_size;
    if (c.full_rates) {
      const auto& f = *c.full_rates;
      j["full_rates"] = {{"gamma_s", f.gamma_s}, {"gamma_p", f.gamma_p},
                         {"gamma_c", f.gamma_c}, {"kappa", f.kappa},
                         {"zeta", f.zeta}};
    }
    j["integrator"] = {{"dt", cfg.integrator.dt},
                       {"total_time", cfg.integrator.total_time},
                       {"sample_times", cfg.integrator.sample_times}};
  }
  return j.dump();
}

ResultTable series_table(const EnsembleSeries& series,
                         const EnsembleConfig& config) {
  ResultTable t;
  t.name = "ensemble";
  t.metadata = {{"version", CIM_VERSION},
                {"config", describe_config(config)},
                {"trajectories", std::to_string(series.n_trajectories)},
                {"divergent", std::to_string(series.divergent)},
                {"unreliable", series.unreliable ? "true" : "false"}};
  t.columns.push_back(config.model == ModelKind::discrete ? "round" : "tau");
  for (const auto& name : series.names) {
    t.columns.push_back(name);
    t.columns.push_back(name + "_se");
  }
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    std::vector<double> row{series.times[i]};
    for (const auto& v : series.values) {
      row.push_back(v[i] ? v[i]->value : kNaN);
      row.push_back(v[i] ? v[i]->se : kNaN);
    }
    t.add_row(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Experiment specs

namespace {

const std::set<std::string>& override_keys() {
  static const std::set<std::string> keys = {
      "g",       "xi",     "dt",           "total_time", "sample_spacing",
      "ring_size", "mu",   "t_p",          "t_i",        "xi_ring",
      "rounds",  "round_stride", "substeps", "e_max",    "tau_max"};
  return keys;
}

bool is_discrete_figure(const std::string& fig) {
  return fig == "fig10" || fig == "fig11" || fig == "fig12" ||
         fig == "fig13" || fig == "fig14";
}

}  // namespace

void ExperimentSpec::validate() const {
  const auto& ids = figure_ids();
  if (std::find(ids.begin(), ids.end(), figure) == ids.end()) {
    throw ConfigError("figure", "unknown figure id '" + figure + "'");
  }
  if (trajectories == 1) {
    throw ConfigError("trajectories", "need at least 2 trajectories");
  }
  for (double v : r) {
    if (!(v >= 0.0 && v <= 10.0)) throw ConfigError("r", "squeezing must lie in [0, 10]");
  }
  for (double v : n_th) {
    if (!(v >= 0.0)) throw ConfigError("n_th", "thermal photon number must be >= 0");
  }
  for (double v : p) {
    if (!(v > 0.0)) throw ConfigError("p", "pump grid must be positive");
  }
  for (const auto& [key, value] : overrides) {
    if (!override_keys().count(key)) {
      throw ConfigError("overrides." + key, "unknown override");
    }
    if (!std::isfinite(value)) {
      throw ConfigError("overrides." + key, "value must be finite");
    }
  }
}

ExperimentSpec parse_experiment_spec(const std::string& json_text) {
  const json root = parse_json(json_text);
  ObjectReader r(root, "");
  ExperimentSpec spec;
  spec.figure = r.string("figure", "");
  spec.out_dir = r.string("out", ".");
  spec.trajectories = r.integer("trajectories", 0, 0, 1000000000);
  spec.seed = r.integer("seed", 1, 0, std::numeric_limits<std::uint64_t>::max());
  spec.workers = r.integer("workers", 0, 0, 4096);
  spec.r = r.numbers("r");
  spec.n_th = r.numbers("n_th");
  spec.p = r.numbers("p");
  if (r.has("overrides")) {
    ObjectReader o(r.raw("overrides"), "overrides");
    for (const auto& key : override_keys()) {
      if (o.has(key)) spec.overrides.emplace_back(key, o.number(key, 0.0, -1e300, 1e300));
    }
    o.finish();
  }
  r.finish();
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

struct Overrides {
  std::map<std::string, double> values;

  explicit Overrides(const ExperimentSpec& spec) {
    for (const auto& [k, v] : spec.overrides) values[k] = v;
  }
  double get(const std::string& key, double def) const {
    auto it = values.find(key);
    return it == values.end() ? def : it->second;
  }
  std::size_t count(const std::string& key, std::size_t def) const {
    const double v = get(key, static_cast<double>(def));
    if (!(v >= 1.0) || v != std::floor(v)) {
      throw ConfigError("overrides." + key, "expected a positive integer");
    }
    return static_cast<std::size_t>(v);
  }
};

std::string version_string() { return CIM_VERSION; }

/// Common column/metadata bookkeeping for one panel.
class PanelBuilder {
 public:
  PanelBuilder(std::string name, const ExperimentSpec& spec) {
    table_.name = std::move(name);
    table_.metadata = {{"figure", spec.figure},
                       {"panel", table_.name},
                       {"version", version_string()},
                       {"seed", std::to_string(spec.seed)}};
  }
  void meta(const std::string& key, const std::string& value) {
    table_.metadata.emplace_back(key, value);
  }
  void column(const std::string& name) { table_.columns.push_back(name); }
  void estimate_columns(const std::string& name) {
    column(name);
    column(name + "_se");
  }
  ResultTable& table() { return table_; }

 private:
  ResultTable table_;
};

void push_estimate(std::vector<double>& row, const std::optional<Estimate>& e) {
  row.push_back(e ? e->value : kNaN);
  row.push_back(e ? e->se : kNaN);
}

void push_estimate(std::vector<double>& row, const Estimate& e) {
  row.push_back(e.value);
  row.push_back(e.se);
}

std::string divergence_note(const EnsembleSeries& s) {
  return std::to_string(s.divergent) + "/" + std::to_string(s.n_trajectories) +
         (s.unreliable ? " (unreliable)" : "");
}

EnsembleConfig continuous_base(const ExperimentSpec& spec, const Overrides& ov,
                               ModelKind model, double xi, double e_max,
                               double tau_max, double total_time,
                               double dt_default) {
  EnsembleConfig cfg;
  cfg.model = model;
  cfg.n_trajectories = spec.trajectories ? spec.trajectories : 20000;
  cfg.master_seed = spec.seed;
  cfg.workers = spec.workers;
  cfg.continuous.g = ov.get("g", 0.01);
  cfg.continuous.xi = ov.get("xi", xi);
  cfg.continuous.phase = continuous::CouplingPhase::antiferromagnetic;
  cfg.continuous.pump = continuous::PumpSchedule::linear_ramp(
      ov.get("e_max", e_max), ov.get("tau_max", tau_max));
  cfg.ring_size = ov.count("ring_size", 16);
  cfg.integrator.dt = ov.get("dt", dt_default);
  cfg.integrator.total_time = ov.get("total_time", total_time);
  cfg.integrator.sample_times = uniform_sample_times(
      cfg.integrator.total_time, ov.get("sample_spacing", 1.0));
  return cfg;
}

EnsembleSeries run_checked(const EnsembleConfig& cfg) {
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("overrides", e.what());
  }
  return ensemble::run_ensemble(cfg);
}

std::vector<double> or_default(const std::vector<double>& v,
                               std::vector<double> def) {
  return v.empty() ? def : v;
}

// --- fig4 / fig5 -----------------------------------------------------------

std::vector<ResultTable> fig4(const ExperimentSpec& spec) {
  const Overrides ov(spec);
  std::vector<ResultTable> panels;
  const std::vector<double> xis =
      ov.values.count("xi") ? std::vector<double>{ov.get("xi", 0.6)}
                            : std::vector<double>{0.6, 0.995};
  for (double xi : xis) {
    PanelBuilder p("fig4_xi" + label_number(xi), spec);
    p.column("tau");
    p.column("E");
    std::vector<EnsembleSeries> runs;
    for (ModelKind m : {ModelKind::two_dopo_wigner, ModelKind::two_dopo_positive_p}) {
      EnsembleConfig cfg = continuous_base(spec, ov, m, xi, 1.5, 200.0, 200.0, 0.005);
      cfg.continuous.xi = xi;
      cfg.observables = {"epr"};
      const std::string tag =
          m == ModelKind::two_dopo_wigner ? "wigner" : "positive_p";
      p.meta("config_" + tag, describe_config(cfg));
      runs.push_back(run_checked(cfg));
      p.meta("divergent_" + tag, divergence_note(runs.back()));
      p.estimate_columns("epr_sum_" + tag);
      p.estimate_columns("epr_u_" + tag);
      p.estimate_columns("epr_v_" + tag);
    }
    const auto& pump = continuous::PumpSchedule::linear_ramp(
        ov.get("e_max", 1.5), ov.get("tau_max", 200.0));
    for (std::size_t t = 0; t < runs[0].times.size(); ++t) {
      std::vector<double> row{runs[0].times[t], pump(runs[0].times[t])};
      for (const auto& s : runs) {
        push_estimate(row, s.series("epr_sum")[t]);
        push_estimate(row, s.series("epr_u")[t]);
        push_estimate(row, s.series("epr_v")[t]);
      }
      p.table().add_row(std::move(row));
    }
    panels.push_back(std::move(p.table()));
  }
  return panels;
}

std::vector<ResultTable> fig5(const ExperimentSpec& spec) {
  const Overrides ov(spec);
  std::vector<ResultTable> panels;
  for (double tau_max : {200.0, 400.0, 800.0}) {
    PanelBuilder p("fig5_tau" + label_number(tau_max), spec);
    EnsembleConfig cfg = continuous_base(spec, ov, ModelKind::two_dopo_wigner,
                                         0.6, 1.5, tau_max, tau_max, 0.005);
    cfg.continuous.pump =
        continuous::PumpSchedule::linear_ramp(ov.get("e_max", 1.5), tau_max);
    cfg.integrator.total_time = tau_max;
    cfg.integrator.sample_times = uniform_sample_times(
        tau_max, ov.get("sample_spacing", tau_max / 200.0));
    cfg.observables = {"photon_number", "epr"};
    p.meta("config", describe_config(cfg));
    const auto s = run_checked(cfg);
    p.meta("divergent", divergence_note(s));
    p.column("tau");
    p.column("E");
    p.estimate_columns("photon_number");
    p.estimate_columns("epr_sum");
    for (std::size_t t = 0; t < s.times.size(); ++t) {
      std::vector<double> row{s.times[t], cfg.continuous.pump(s.times[t])};
      push_estimate(row, s.series("photon_number")[t]);
      push_estimate(row, s.series("epr_sum")[t]);
      p.table().add_row(std::move(row));
    }
    panels.push_back(std::move(p.table()));
  }
  return panels;
}

// --- fig6 / fig9 (ring) ------------------------------------------------------

EnsembleConfig ring_base(const ExperimentSpec& spec, const Overrides& ov,
                         double r) {
  EnsembleConfig cfg = continuous_base(spec, ov, ModelKind::ring_wigner, 0.4,
                                       0.375, 200.0, 200.0, 0.01);
  cfg.continuous.reservoir_central = ReservoirSpec::squeezed(r);
  return cfg;
}

std::vector<ResultTable> fig6(const ExperimentSpec& spec) {
  const Overrides ov(spec);
  const auto rs = or_default(spec.r, {0.0, 0.5, 1.0});
  PanelBuilder p("fig6", spec);
  p.column("tau");
  p.column("E");
  std::vector<EnsembleSeries> runs;
  for (double r : rs) {
    EnsembleConfig cfg = ring_base(spec, ov, r);
    cfg.observables = {"ring"};
    const std::string tag = "r" + label_number(r);
    p.meta("config_" + tag, describe_config(cfg));
    runs.push_back(run_checked(cfg));
    p.meta("divergent_" + tag, divergence_note(runs.back()));
    p.estimate_columns("ring_u_" + tag);
    p.estimate_columns("ring_v_" + tag);
    p.estimate_columns("ring_sum_" + tag);
  }
  const EnsembleConfig base = ring_base(spec, ov, 0.0);
  for (std::size_t t = 0; t < runs[0].times.size(); ++t) {
    std::vector<double> row{runs[0].times[t],
                            base.continuous.pump(runs[0].times[t])};
    for (const auto& s : runs) {
      push_estimate(row, s.series("ring_u")[t]);
      push_estimate(row, s.series("ring_v")[t]);
      push_estimate(row, s.series("ring_sum")[t]);
    }
    p.table().add_row(std::move(row));
  }
  return {std::move(p.table())};
}

/// Keeps trajectories whose final config is in `selected` and tabulates
/// `configs` at every sample time.
std::vector<std::vector<Estimate>> post_selected_probabilities(
    const EnsembleSeries& s, const std::vector<obs::SpinConfig>& selected,
    const std::vector<obs::SpinConfig>& configs, std::size_t* survivors) {
  const std::size_t n_times = s.times.size();
  std::vector<std::vector<Estimate>> out(
      n_times, std::vector<Estimate>(configs.size(), Estimate{kNaN, kNaN}));
  *survivors = 0;
  if (s.spins.empty()) return out;
  const auto ps = obs::post_select(
      s.spins, n_times,
      [&](const obs::SpinConfig& c) {
        return std::find(selected.begin(), selected.end(), c) != selected.end();
      });
  if (!ps) return out;
  *survivors = ps->survivors;
  for (std::size_t t = 0; t < n_times; ++t) {
    for (std::size_t k = 0; k < configs.size(); ++k) {
      out[t][k] = ps->tables[t].probability(configs[k]);
      if (out[t][k].value == 0.0) {
        out[t][k] = obs::binomial(0, ps->survivors);
      }
    }
  }
  return out;
}

std::vector<ResultTable> fig9(const ExperimentSpec& spec) {
  const Overrides ov(spec);
  const auto rs = or_default(spec.r, {0.0, 0.5, 1.0});
  PanelBuilder p("fig9", spec);
  p.column("tau");
  p.column("E");
  const EnsembleConfig base = ring_base(spec, ov, 0.0);
  const std::size_t n = base.ring_size;
  const auto selected = obs::SpinConfig::alternating(n, true);
  const auto unselected = obs::SpinConfig::alternating(n, false);
  p.meta("selected", selected.to_string() + " " + unselected.to_string());
  std::vector<std::vector<std::vector<Estimate>>> probs;
  std::vector<std::size_t> survivor_counts;
  std::vector<double> times;
  for (double r : rs) {
    EnsembleConfig cfg = ring_base(spec, ov, r);
    cfg.record_spins = true;
    const std::string tag = "r" + label_number(r);
    p.meta("config_" + tag, describe_config(cfg));
    const auto s = run_checked(cfg);
    times = s.times;
    std::size_t survivors = 0;
    probs.push_back(post_selected_probabilities(
        s, {selected, unselected}, {selected, unselected}, &survivors));
    p.meta("divergent_" + tag, divergence_note(s));
    p.meta("survivors_" + tag, std::to_string(survivors));
    survivor_counts.push_back(survivors);
    p.estimate_columns("P_ground_" + tag);
    p.estimate_columns("P_" + selected.to_string() + "_" + tag);
    p.estimate_columns("P_" + unselected.to_string() + "_" + tag);
  }
  for (std::size_t t = 0; t < times.size(); ++t) {
    std::vector<double> row{times[t], base.continuous.pump(times[t])};
    for (std::size_t k = 0; k < probs.size(); ++k) {
      const auto& pr = probs[k];
      const std::size_t m = survivor_counts[k];
      const double both = pr[t][0].value + pr[t][1].value;
      if (m == 0) {
        push_estimate(row, std::nullopt);
      } else {
        push_estimate(row, obs::binomial(
                               static_cast<std::size_t>(std::llround(both * m)), m));
      }
      push_estimate(row, pr[t][0]);
      push_estimate(row, pr[t][1]);
    }
    p.table().add_row(std::move(row));
  }
  return {std::move(p.table())};
}

// --- fig7 / fig8 (two-DOPO post-selection) ------------------------------------

EnsembleConfig post_selection_base(const ExperimentSpec& spec,
                                   const Overrides& ov, double r) {
  EnsembleConfig cfg = continuous_base(spec, ov, ModelKind::two_dopo_wigner,
                                       0.6, 1.5, 200.0, 200.0, 0.005);
  cfg.continuous.reservoir_central = ReservoirSpec::squeezed(r);
  cfg.record_spins = true;
  return cfg;
}

std::vector<ResultTable> fig7(const ExperimentSpec& spec) {
  const Overrides ov(spec);
  PanelBuilder p("fig7", spec);
  EnsembleConfig cfg = post_selection_base(spec, ov, 0.0);
  cfg.observables = {"photon_number"};
  p.meta("config", describe_config(cfg));
  const auto s = run_checked(cfg);
  const std::vector<obs::SpinConfig> configs = {
      obs::SpinConfig::parse("uu"), obs::SpinConfig::parse("ud"),
      obs::SpinConfig::parse("du"), obs::SpinConfig::parse("dd")};
  std::size_t survivors = 0;
  const auto probs = post_selected_probabilities(s, {configs[1]}, configs, &survivors);
  p.meta("selected", "ud");
  p.meta("divergent", divergence_note(s));
  p.meta("survivors", std::to_string(survivors));
  p.column("tau");
  p.column("E");
  p.estimate_columns("photon_number");
  for (const char* name : {"P_uu", "P_ud", "P_du", "P_dd"}) p.estimate_columns(name);
  for (std::size_t t = 0; t < s.times.size(); ++t) {
    std::vector<double> row{s.times[t], cfg.continuous.pump(s.times[t])};
    push_estimate(row, s.series("photon_number")[t]);
    for (const auto& e : probs[t]) push_estimate(row, e);
    p.table().add_row(std::move(row));
  }
  return {std::move(p.table())};
}

std::vector<ResultTable> fig8(const ExperimentSpec& spec) {
  const Overrides ov(spec);
  const auto rs = or_default(spec.r, {0.0, 0.5, 1.0});
  PanelBuilder p("fig8", spec);
  p.column("tau");
  p.column("E");
  p.meta("selected", "ud");
  // The figure's pump schedule is taken to be the same ramp as fig4.
  p.meta("pump_assumption", "E = 1.5 (tau / 200)");
  const auto ud = obs::SpinConfig::parse("ud");
  const auto du = obs::SpinConfig::parse("du");
  std::vector<std::vector<std::vector<Estimate>>> probs;
  std::vector<double> times;
  EnsembleConfig base = post_selection_base(spec, ov, 0.0);
  for (double r : rs) {
    EnsembleConfig cfg = post_selection_base(spec, ov, r);
    const std::string tag = "r" + label_number(r);
    p.meta("config_" + tag, describe_config(cfg));
    const auto s = run_checked(cfg);
    times = s.times;
    std::size_t survivors = 0;
    probs.push_back(post_selected_probabilities(s, {ud}, {ud, du}, &survivors));
    p.meta("divergent_" + tag, divergence_note(s));
    p.meta("survivors_" + tag, std::to_string(survivors));
    p.estimate_columns("P_ud_" + tag);
    p.estimate_columns("P_du_" + tag);
  }
  for (std::size_t t = 0; t < times.size(); ++t) {
    std::vector<double> row{times[t], base.continuous.pump(times[t])};
    for (const auto& pr : probs) {
      push_estimate(row, pr[t][0]);
      push_estimate(row, pr[t][1]);
    }
    p.table().add_row(std::move(row));
  }
  return {std::move(p.table())};
}

// --- discrete sweeps (fig10 - fig14) -----------------------------------------

struct DiscreteSeries {
  std::string tag;
  ReservoirSpec reservoir;
};

EnsembleConfig discrete_base(const ExperimentSpec& spec, const Overrides& ov) {
  EnsembleConfig cfg;
  cfg.model = ModelKind::discrete;
  cfg.n_trajectories = spec.trajectories ? spec.trajectories : 4000;
  cfg.master_seed = spec.seed;
  cfg.workers = spec.workers;
  auto& d = cfg.discrete;
  d.n = ov.count("ring_size", 16);
  d.mu = ov.get("mu", 0.01);
  d.t_p = ov.get("t_p", 0.1);
  d.t_i = ov.get("t_i", 1e-4);
  d.rounds = ov.count("rounds", 2000);
  d.substeps = ov.count("substeps", 1);
  if (d.n < 3) throw ConfigError("overrides.ring_size", "ring needs >= 3 pulses");
  d.coupling = discrete::ring_coupling(d.n, ov.get("xi_ring", -0.01));
  cfg.round_stride = d.rounds;
  return cfg;
}

const std::vector<double>& default_p_grid() {
  static const std::vector<double> grid = {
      0.05, 0.2,  0.4, 0.6, 0.8, 0.9, 0.95, 1.0, 1.05,
      1.1,  1.15, 1.2, 1.3, 1.4, 1.6, 1.8, 2.0};
  return grid;
}

/// Threshold from a photon-number curve, using the positive tail.
std::optional<discrete::ThresholdEstimate> curve_threshold(
    const std::vector<double>& pump, const std::vector<double>& n) {
  std::size_t start = n.size();
  while (start > 0 && n[start - 1] > 0.0) --start;
  if (n.size() - start < 5) return std::nullopt;
  const auto est = discrete::estimate_threshold(
      std::span<const double>(pump).subspan(start),
      std::span<const double>(n).subspan(start));
  auto shifted = est;
  shifted.index += start;
  return shifted;
}

/// Runs every (series, pump) point and returns one EnsembleSeries per
/// point, [series][pump].
std::vector<std::vector<EnsembleSeries>> discrete_sweep(
    const EnsembleConfig& base, const std::vector<DiscreteSeries>& series,
    const std::vector<double>& pumps, PanelBuilder& p) {
  std::vector<std::vector<EnsembleSeries>> out;
  for (const auto& s : series) {
    out.emplace_back();
    std::size_t divergent = 0;
    bool unreliable = false;
    for (double e : pumps) {
      EnsembleConfig cfg = base;
      cfg.discrete.pump_e = e;
      cfg.discrete.reservoir = s.reservoir;
      out.back().push_back(run_checked(cfg));
      divergent += out.back().back().divergent;
      unreliable = unreliable || out.back().back().unreliable;
    }
    p.meta("divergent_" + s.tag,
           std::to_string(divergent) + (unreliable ? " (unreliable)" : ""));
  }
  return out;
}

std::vector<ResultTable> discrete_figure(const ExperimentSpec& spec) {
  const Overrides ov(spec);
  EnsembleConfig base = discrete_base(spec, ov);
  const bool thermal = spec.figure == "fig13" || spec.figure == "fig14";
  std::vector<DiscreteSeries> series;
  if (thermal) {
    for (double n : or_default(spec.n_th, {0.0, 1.0, 10.0})) {
      series.push_back({"nth" + label_number(n), ReservoirSpec::thermal(n)});
    }
  } else {
    for (double r : or_default(spec.r, {0.0, 0.3, 0.6, 0.9, 1.2})) {
      series.push_back({"r" + label_number(r), ReservoirSpec::squeezed(r)});
    }
  }

  std::string value;
  if (spec.figure == "fig10") {
    base.observables = {"photon_number"};
  } else if (spec.figure == "fig11") {
    base.observables = {"photon_number", "epr:0:1", "epr_minus:0:1"};
    base.round_stride = ov.count("round_stride", 10);
  } else if (spec.figure == "fig12" || spec.figure == "fig13") {
    base.observables = {"photon_number", "success_probability"};
  } else {
    base.observables = {"photon_number", "correlation_xx:0:1"};
  }

  const double e_lin = discrete::linear_threshold(base.discrete);
  const auto grid = or_default(spec.p, default_p_grid());
  std::vector<double> pumps;
  for (double p : grid) pumps.push_back(p * e_lin);

  PanelBuilder p(spec.figure, spec);
  p.meta("config", describe_config(base));
  p.meta("linear_threshold_E", format_number(e_lin));
  const auto runs = discrete_sweep(base, series, pumps, p);

  // Threshold from the first series' final photon numbers.
  std::vector<double> n0;
  for (const auto& s : runs[0]) {
    const auto& e = s.series("photon_number").back();
    n0.push_back(e ? e->value : kNaN);
  }
  const auto th = curve_threshold(pumps, n0);
  const double eps_th = th ? th->pump : kNaN;
  p.meta("threshold_series", series[0].tag);
  p.meta("threshold_E", format_number(eps_th));
  p.meta("threshold_unique", th ? (th->unique ? "true" : "false") : "n/a");

  p.column("p");
  p.column("p_linear");
  p.column("E");
  for (const auto& s : series) {
    if (spec.figure == "fig10") {
      p.estimate_columns("photon_number_" + s.tag);
    } else if (spec.figure == "fig11") {
      p.estimate_columns("min_epr_u_" + s.tag);
      p.estimate_columns("final_epr_u_" + s.tag);
      p.estimate_columns("min_epr_u_minus_" + s.tag);
      p.estimate_columns("final_epr_u_minus_" + s.tag);
    } else if (spec.figure == "fig12" || spec.figure == "fig13") {
      p.estimate_columns("success_probability_" + s.tag);
    } else {
      p.estimate_columns("correlation_xx_" + s.tag);
    }
  }
  auto min_over_time = [](const std::vector<std::optional<Estimate>>& v) {
    std::optional<Estimate> best;
    for (const auto& e : v) {
      if (e && (!best || e->value < best->value)) best = e;
    }
    return best;
  };
  for (std::size_t k = 0; k < pumps.size(); ++k) {
    std::vector<double> row{pumps[k] / eps_th, grid[k], pumps[k]};
    for (const auto& sr : runs) {
      const EnsembleSeries& s = sr[k];
      if (spec.figure == "fig10") {
        push_estimate(row, s.series("photon_number").back());
      } else if (spec.figure == "fig11") {
        push_estimate(row, min_over_time(s.series("epr_u")));
        push_estimate(row, s.series("epr_u").back());
        push_estimate(row, min_over_time(s.series("epr_u_minus")));
        push_estimate(row, s.series("epr_u_minus").back());
      } else if (spec.figure == "fig12" || spec.figure == "fig13") {
        push_estimate(row, s.series("success_probability").back());
      } else {
        push_estimate(row, s.series("correlation_xx:0:1").back());
      }
    }
    p.table().add_row(std::move(row));
  }
  return {std::move(p.table())};
}

}  // namespace

std::vector<ResultTable> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::string& f = spec.figure;
  std::vector<ResultTable> panels;
  if (f == "fig4") {
    panels = fig4(spec);
  } else if (f == "fig5") {
    panels = fig5(spec);
  } else if (f == "fig6") {
    panels = fig6(spec);
  } else if (f == "fig7") {
    panels = fig7(spec);
  } else if (f == "fig8") {
    panels = fig8(spec);
  } else if (f == "fig9") {
    panels = fig9(spec);
  } else if (is_discrete_figure(f)) {
    panels = discrete_figure(spec);
  }
  for (auto& t : panels) {
    t.metadata.emplace_back("trajectories",
                            std::to_string(spec.trajectories
                                               ? spec.trajectories
                                               : (is_discrete_figure(f) ? 4000 : 20000)));
  }
  return panels;
}

std::vector<std::filesystem::path> write_experiment(
    const ExperimentSpec& spec, const std::vector<ResultTable>& panels,
    double runtime_seconds) {
  std::filesystem::create_directories(spec.out_dir);
  std::vector<std::filesystem::path> written;
  json sidecar;
  sidecar["figure"] = spec.figure;
  sidecar["version"] = version_string();
  sidecar["seed"] = spec.seed;
  sidecar["workers"] = ensemble::resolve_workers(spec.workers);
  sidecar["runtime_seconds"] = runtime_seconds;
  sidecar["panels"] = json::array();
  for (const auto& t : panels) {
    const auto path = spec.out_dir / (t.name + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_csv(t, out);
    written.push_back(path);
    sidecar["panels"].push_back(path.filename().string());
  }
  const auto meta = spec.out_dir / (spec.figure + ".meta.json");
  std::ofstream out(meta);
  if (!out) throw std::runtime_error("cannot write " + meta.string());
  out << sidecar.dump(2) << '\n';
  written.push_back(meta);
  return written;
}

// ---------------------------------------------------------------------------

ThresholdScan threshold_scan(const EnsembleConfig& base,
                             const std::vector<double>& grid) {
  if (base.model != ModelKind::discrete) {
    throw std::invalid_argument("threshold scans need the discrete model");
  }
  if (grid.size() < 5) {
    throw std::invalid_argument("threshold scan needs >= 5 pump values");
  }
  ThresholdScan scan;
  scan.table.name = "threshold_scan";
  scan.table.metadata = {{"version", version_string()},
                         {"config", describe_config(base)}};
  scan.table.columns = {"pump_e", "photon_number", "photon_number_se"};
  std::vector<double> n;
  for (double e : grid) {
    EnsembleConfig cfg = base;
    cfg.discrete.pump_e = e;
    cfg.round_stride = cfg.discrete.rounds;
    cfg.observables = {"photon_number"};
    const auto s = ensemble::run_ensemble(cfg);
    const auto& est = s.series("photon_number").back();
    n.push_back(est ? est->value : kNaN);
    std::vector<double> row{e};
    push_estimate(row, est);
    scan.table.add_row(std::move(row));
  }
  const auto th = curve_threshold(grid, n);
  if (!th) {
    throw std::runtime_error(
        "threshold scan needs >= 5 trailing points with positive photon "
        "number");
  }
  scan.estimate = *th;
  scan.table.metadata.emplace_back("threshold_E", format_number(th->pump));
  scan.table.metadata.emplace_back("threshold_unique",
                                   th->unique ? "true" : "false");
  return scan;
}

ThresholdScan threshold_scan_from_json(const std::string& json_text) {
  std::vector<double> grid;
  const EnsembleConfig cfg = config_from_json(parse_json(json_text), &grid);
  return threshold_scan(cfg, grid);
}

}  // namespace cim::experiments
