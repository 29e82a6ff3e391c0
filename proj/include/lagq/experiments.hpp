#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "lagq/star.hpp"
#include "lagq/toeplitz.hpp"

namespace lagq {

struct SlopeFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  int points = 0;
};

/// Least squares on (log k, log value); rows with value <= 0 are skipped.
SlopeFit fit_loglog(const std::vector<std::pair<double, double>>& rows);

struct ConvergenceRecord {
  struct Row {
    int k;
    double value;
    double normalized;
    double slope_so_far;
  };
  std::vector<Row> rows;
  /// Fit over the last ceil(n/2) rows, suppressing preasymptotic transients.
  SlopeFit tail_fit;
  std::string note;
};

void write_csv(const ConvergenceRecord& rec, std::ostream& out);

/// A hard invariant (Hermiticity, norm-bound inequality) failed during a
/// run; carries a machine-readable record.
class InvariantViolation : public std::runtime_error {
public:
  InvariantViolation(const std::string& what, nlohmann::json record);
  const nlohmann::json& record() const { return record_; }

private:
  nlohmann::json record_;
};

struct ExperimentConfig {
  std::string experiment;  // norm-convergence | commutator-rate | star-residual |
                           // bt-compare | abelian-compare | phase-bound
  std::optional<FiberedFunction> f;
  std::optional<FiberedFunction> g;
  SchemeSpec scheme;
  std::optional<SiegelForm> omega;
  std::vector<int> k_list;
  int order = 1;  // star-residual truncation order
  int phase_samples = 500;
  unsigned seed = 42;
  std::string out_path;

  static ExperimentConfig from_json(const nlohmann::json& j, const std::string& experiment,
                                    const std::string& config_dir = "");
  static ExperimentConfig load_file(const std::string& path, const std::string& experiment);
};

/// Runs the experiment over its k-list (one task per k when jobs > 1);
/// results are independent of the worker count.
ConvergenceRecord run_experiment(const ExperimentConfig& cfg, int jobs = 1);

}  // namespace lagq
