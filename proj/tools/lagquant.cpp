#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "lagq/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Convergence scans for lattice quantizers, star products and Berezin-Toeplitz comparisons"};

  std::string experiment;
  std::string config_path;
  std::string out_path;
  int jobs = 1;
  int seed = -1;

  app.add_option("experiment", experiment,
                 "norm-convergence | commutator-rate | star-residual | bt-compare | "
                 "abelian-compare | phase-bound")
      ->required();
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--out", out_path, "output CSV path (overrides the config)");
  app.add_option("--jobs", jobs, "parallel tasks over the k-list")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed override for sampled checks and power iteration");

  CLI11_PARSE(app, argc, argv);

  try {
    lagq::ExperimentConfig cfg = lagq::ExperimentConfig::load_file(config_path, experiment);
    if (seed >= 0) cfg.seed = static_cast<unsigned>(seed);
    if (!out_path.empty()) cfg.out_path = out_path;

    const lagq::ConvergenceRecord rec = lagq::run_experiment(cfg, jobs);

    if (cfg.out_path.empty()) {
      lagq::write_csv(rec, std::cout);
    } else {
      std::ofstream out(cfg.out_path);
      if (!out) throw std::runtime_error("cannot open output file: " + cfg.out_path);
      lagq::write_csv(rec, out);
    }
    return 0;
  } catch (const lagq::InvariantViolation& iv) {
    std::cerr << iv.record().dump() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << nlohmann::json{{"status", "error"}, {"message", ex.what()}}.dump() << '\n';
    return 1;
  }
}
