#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cim/experiments.hpp"
#include "cim/ising.hpp"

namespace {

using namespace cim;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma - start);
    if (!item.empty()) {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument("bad number '" + item + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_table(const experiments::ResultTable& t, const std::string& out) {
  if (out.empty() || out == "-") {
    experiments::write_csv(t, std::cout);
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out);
  experiments::write_csv(t, f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherent Ising machine trajectory-ensemble simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a figure preset");
  experiments::ExperimentSpec spec;
  std::string out_dir = ".";
  std::string r_list, nth_list, p_list;
  std::vector<std::string> sets;
  run->add_option("figure", spec.figure, "Figure id (fig4 ... fig14)")
      ->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--trajectories", spec.trajectories,
                  "Trajectories per point (0 = preset default)");
  run->add_option("--seed", spec.seed, "Master seed");
  run->add_option("--workers", spec.workers, "Worker threads (0 = auto)");
  run->add_option("--r", r_list, "Squeezing parameters, comma separated");
  run->add_option("--nth", nth_list, "Thermal photon numbers, comma separated");
  run->add_option("--p", p_list, "Pump grid in units of the linear threshold");
  run->add_option("--set", sets, "Override KEY=VALUE (repeatable)");

  auto* ens = app.add_subcommand("ensemble", "Run an ensemble from a JSON config");
  std::string config_path, ens_out;
  ens->add_option("config", config_path, "JSON config")->required();
  ens->add_option("--out", ens_out, "CSV path (default stdout)");

  auto* oracle = app.add_subcommand("oracle", "Brute-force Ising ground states");
  std::size_t n_spins = 0;
  std::string j_path;
  oracle->add_option("N", n_spins, "Number of spins")->required();
  oracle->add_option("J-file", j_path, "Triplets 'i j J_ij', zero based")
      ->required();

  auto* scan = app.add_subcommand("threshold-scan",
                                  "Photon number versus pump and threshold");
  std::string scan_path, scan_out;
  scan->add_option("config", scan_path, "JSON config with pump_grid or p_grid")
      ->required();
  scan->add_option("--out", scan_out, "CSV path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      spec.out_dir = out_dir;
      spec.r = parse_list(r_list);
      spec.n_th = parse_list(nth_list);
      spec.p = parse_list(p_list);
      for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
          throw std::invalid_argument("--set expects KEY=VALUE, got '" + s + "'");
        }
        spec.overrides.emplace_back(s.substr(0, eq), std::stod(s.substr(eq + 1)));
      }
      const auto start = std::chrono::steady_clock::now();
      const auto panels = experiments::run_experiment(spec);
      const double runtime =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count();
      for (const auto& path : experiments::write_experiment(spec, panels, runtime)) {
        std::cout << path.string() << '\n';
      }
    } else if (*ens) {
      const auto config = experiments::load_ensemble_config(config_path);
      const auto series = ensemble::run_ensemble(config);
      write_table(experiments::series_table(series, config), ens_out);
      if (series.unreliable) {
        std::cerr << "warning: " << series.divergent << " of "
                  << series.n_trajectories << " trajectories diverged\n";
      }
    } else if (*oracle) {
      std::ifstream in(j_path);
      if (!in) throw std::runtime_error("cannot open " + j_path);
      const auto j = ising::CouplingMatrix::read_triplets(in, n_spins);
      const auto ground = ising::brute_force_ground_states(j);
      std::cout << "# energy: " << ising::ising_energy(ground.front(), j) << '\n';
      std::cout << "# count: " << ground.size() << '\n';
      for (const auto& g : ground) std::cout << g.to_string() << '\n';
    } else if (*scan) {
      const auto result =
          experiments::threshold_scan_from_json(read_file(scan_path));
      write_table(result.table, scan_out);
      std::cerr << "threshold E = " << result.estimate.pump
                << (result.estimate.unique ? "" : " (not unique)") << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
