#include "lagq/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <random>
#include <sstream>

namespace lagq {

SlopeFit fit_loglog(const std::vector<std::pair<double, double>>& rows) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [k, v] : rows)
    if (v > 0.0) pts.emplace_back(std::log(k), std::log(v));
  SlopeFit fit;
  fit.points = static_cast<int>(pts.size());
  if (pts.size() < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double n = static_cast<double>(pts.size());
  const double den = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (const auto& [x, y] : pts) {
    const double yhat = fit.intercept + fit.slope * x;
    ss_res += (y - yhat) * (y - yhat);
    ss_tot += (y - ybar) * (y - ybar);
  }
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void write_csv(const ConvergenceRecord& rec, std::ostream& out) {
  out << "k,value,normalized,slope_so_far\n";
  if (!rec.note.empty()) out << "# " << rec.note << '\n';
  for (const auto& r : rec.rows)
    out << r.k << ',' << fmt(r.value) << ',' << fmt(r.normalized) << ',' << fmt(r.slope_so_far)
        << '\n';
  out << "# tail_slope=" << fmt(rec.tail_fit.slope) << " r2=" << fmt(rec.tail_fit.r2)
      << " points=" << rec.tail_fit.points << '\n';
}

InvariantViolation::InvariantViolation(const std::string& what, nlohmann::json record)
    : std::runtime_error(what), record_(std::move(record)) {}

namespace {

FiberedFunction load_function(const nlohmann::json& j, const std::string& config_dir) {
  if (j.is_string()) {
    std::filesystem::path p = j.get<std::string>();
    if (p.is_relative() && !config_dir.empty()) p = std::filesystem::path(config_dir) / p;
    return FiberedFunction::from_json_file(p.string());
  }
  return FiberedFunction::from_json(j);
}

const char* kExperiments[] = {"norm-convergence", "commutator-rate", "star-residual",
                              "bt-compare",       "abelian-compare", "phase-bound"};

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j, const std::string& experiment,
                                             const std::string& config_dir) {
  if (j.value("schema", 0) != 1) throw std::invalid_argument("config: expected \"schema\": 1");
  ExperimentConfig cfg;
  cfg.experiment = experiment.empty() ? j.value("experiment", std::string()) : experiment;
  bool known = false;
  for (const char* e : kExperiments) known = known || cfg.experiment == e;
  if (!known) throw std::invalid_argument("config: unknown experiment \"" + cfg.experiment + "\"");

  if (j.contains("f")) cfg.f = load_function(j.at("f"), config_dir);
  if (j.contains("g")) cfg.g = load_function(j.at("g"), config_dir);

  const int n = cfg.f ? cfg.f->n() : 1;
  std::optional<HorizontalField> field;
  if (j.contains("A")) field = HorizontalField::from_json(j.at("A"), n);

  double lo = -4.0, hi = 4.0;
  if (j.contains("window")) {
    lo = j.at("window").at(0).get<double>();
    hi = j.at("window").at(1).get<double>();
  }

  std::string scheme_name = j.value("scheme", std::string());
  if (scheme_name.empty()) {
    if (cfg.experiment == "phase-bound") scheme_name = "general";
    else if (cfg.f && cfg.f->base_kind() == BaseKind::Torus) scheme_name = "torus";
    else scheme_name = "model";
  }
  if (scheme_name == "model") {
    cfg.scheme = SchemeSpec::model(lo, hi);
  } else if (scheme_name == "general") {
    Cover cover = Cover::plane();
    cfg.scheme = SchemeSpec::general(field.value_or(HorizontalField::zero(n)), cover, lo, hi);
  } else if (scheme_name == "torus") {
    cfg.scheme = SchemeSpec::torus(field.value_or(HorizontalField::zero(n)));
    if (j.contains("cover"))
      cfg.scheme.cover = Cover::torus(j.at("cover").value("charts", 4), j.at("cover").value("length", 0.45));
  } else {
    throw std::invalid_argument("config: unknown scheme \"" + scheme_name + "\"");
  }
  if (field && scheme_name == "model")
    throw std::invalid_argument("config: the model scheme takes no horizontal field");
  cfg.scheme.drop_theta = j.value("drop_theta", false);

  if (j.contains("omega")) {
    const auto& oj = j.at("omega");
    Eigen::MatrixXd p(n, n), q(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        p(r, c) = oj.at("P").at(r).at(c).get<double>();
        q(r, c) = oj.at("Q").at(r).at(c).get<double>();
      }
    cfg.omega = SiegelForm(p, q);
  }

  cfg.k_list = j.at("k_list").get<std::vector<int>>();
  if (cfg.k_list.size() < 3) throw std::invalid_argument("config: k_list needs at least 3 entries");
  for (size_t i = 0; i + 1 < cfg.k_list.size(); ++i)
    if (cfg.k_list[i] >= cfg.k_list[i + 1])
      throw std::invalid_argument("config: k_list must be strictly ascending");
  if (cfg.k_list.front() < 1) throw std::invalid_argument("config: k must be positive");

  cfg.order = j.value("l", 1);
  cfg.phase_samples = j.value("phase_samples", 500);
  cfg.seed = j.value("seed", 42u);
  cfg.out_path = j.value("out", std::string());
  return cfg;
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path, const std::string& experiment) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j, experiment, std::filesystem::path(path).parent_path().string());
}

namespace {

// Hard checks every run performs on the operators it builds.
void check_operator_invariants(const BandOperator& op, bool expect_hermitian, double herm_tol,
                               const std::string& label, int k) {
  const double bound = op.band_norm_bound();
  const double norm = op.op_norm();
  if (norm > bound + 1e-12) {
    throw InvariantViolation("norm-bound inequality violated",
                             {{"status", "invariant_violation"},
                              {"check", "norm_bound"},
                              {"operator", label},
                              {"k", k},
                              {"op_norm", norm},
                              {"band_norm_bound", bound}});
  }
  if (expect_hermitian) {
    const double defect = (op - op.adjoint()).max_abs_entry();
    if (defect > herm_tol) {
      throw InvariantViolation("Hermiticity violated", {{"status", "invariant_violation"},
                                                        {"check", "hermiticity"},
                                                        {"operator", label},
                                                        {"k", k},
                                                        {"defect", defect}});
    }
  }
}

double run_norm_convergence_k(const ExperimentConfig& cfg, int k, double sup) {
  const BandOperator op = quantize(*cfg.f, cfg.scheme, k);
  check_operator_invariants(op, cfg.f->real_flag(), 1e-12, "phi(f)", k);
  return std::abs(op.op_norm() - sup);
}

double run_commutator_rate_k(const ExperimentConfig& cfg, int k, const FiberedFunction& bracket) {
  const BandOperator qf = quantize(*cfg.f, cfg.scheme, k);
  const BandOperator qg = quantize(*cfg.g, cfg.scheme, k);
  check_operator_invariants(qf, cfg.f->real_flag(), 1e-12, "phi(f)", k);
  check_operator_invariants(qg, cfg.g->real_flag(), 1e-12, "phi(g)", k);
  const BandOperator qb = quantize(bracket, cfg.scheme, k);
  const BandOperator defect = commutator(qf, qg) + qb.scaled(Complex(0.0, 1.0 / k));
  return defect.op_norm();
}

double run_phase_bound_k(const ExperimentConfig& cfg, int k) {
  const HorizontalField& a = *cfg.scheme.field;
  const double grad = a.grad_norm_bound();
  std::mt19937 gen(cfg.seed * 1000003u + static_cast<unsigned>(k));
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  const int mmax = std::max(1, static_cast<int>(std::floor(std::cbrt(10.0 * k * k))));
  std::uniform_int_distribution<int> um(-mmax, mmax);
  double worst = 0.0;
  for (int s = 0; s < cfg.phase_samples; ++s) {
    Eigen::VectorXd x(a.n());
    for (int d = 0; d < a.n(); ++d) x[d] = ux(gen);
    std::vector<int> m(a.n());
    double mnorm = 0.0;
    do {
      mnorm = 0.0;
      for (int d = 0; d < a.n(); ++d) {
        m[d] = um(gen);
        mnorm += static_cast<double>(m[d]) * m[d];
      }
    } while (mnorm == 0.0);
    mnorm = std::sqrt(mnorm);
    if (std::pow(mnorm, 3) / (static_cast<double>(k) * k) > 10.0) {
      --s;  // keep the sample count; resample inside the admissible range
      continue;
    }
    const double phase = horizontal_phase(a, x, m, k);
    const double bound = (5.0 / 24.0) * grad * std::pow(mnorm, 3) / (static_cast<double>(k) * k);
    worst = std::max(worst, std::abs(phase) / bound);
  }
  return worst;
}

}  // namespace

ConvergenceRecord run_experiment(const ExperimentConfig& cfg, int jobs) {
  const std::string& e = cfg.experiment;

  // per-experiment setup computed once, shared read-only across tasks
  double sup = 0.0;
  std::optional<FiberedFunction> bracket;
  if (e == "norm-convergence") {
    if (!cfg.f) throw std::invalid_argument("config: norm-convergence needs f");
    if (cfg.f->modes().empty()) throw std::invalid_argument("config: empty function input");
    if (cfg.f->base_kind() == BaseKind::Torus)
      sup = sup_norm(*cfg.f, 0.0, 1.0);
    else
      sup = sup_norm(*cfg.f, cfg.scheme.lo, cfg.scheme.hi);
  } else if (e == "commutator-rate" || e == "star-residual") {
    if (!cfg.f || !cfg.g) throw std::invalid_argument("config: experiment needs both f and g");
    if (e == "commutator-rate") bracket = poisson_bracket(*cfg.f, *cfg.g);
  } else if (e == "bt-compare" || e == "abelian-compare") {
    if (!cfg.f) throw std::invalid_argument("config: experiment needs f");
    if (!cfg.omega) throw std::invalid_argument("config: experiment needs omega");
  } else if (e == "phase-bound") {
    if (!cfg.scheme.field) throw std::invalid_argument("config: phase-bound needs a horizontal field A");
  }

  ConvergenceRecord rec;
  if (e == "phase-bound" && cfg.scheme.field->grad_norm_bound() == 0.0) {
    rec.note = "vacuous: zero gradient";
    for (int k : cfg.k_list) rec.rows.push_back({k, 0.0, 0.0, std::numeric_limits<double>::quiet_NaN()});
    return rec;
  }

  auto value_at = [&](int k) -> std::pair<double, double> {
    if (e == "norm-convergence") {
      const double v = run_norm_convergence_k(cfg, k, sup);
      return {v, sup > 0 ? v / sup : v};
    }
    if (e == "commutator-rate") {
      const double v = run_commutator_rate_k(cfg, k, *bracket);
      return {v, v * k * k};
    }
    if (e == "star-residual") {
      const BandOperator qf = quantize(*cfg.f, cfg.scheme, k);
      check_operator_invariants(qf, cfg.f->real_flag(), 1e-12, "phi(f)", k);
      const double v = expansion_residual(*cfg.f, *cfg.g, k, cfg.order, cfg.scheme);
      return {v, v * std::pow(k, cfg.order + 1)};
    }
    if (e == "bt-compare") {
      const HorizontalField a = HorizontalField::constant(cfg.omega->P);
      CoherentFrame frame(k, *cfg.omega, cfg.scheme.lo, cfg.scheme.hi);
      const BandOperator phi =
          quantize_general(*cfg.f, a, Cover::plane(), k, cfg.scheme.lo, cfg.scheme.hi);
      const BandOperator t = bt_operator(*cfg.f, frame);
      check_operator_invariants(phi, cfg.f->real_flag(), 1e-12, "phi(f)", k);
      check_operator_invariants(t, cfg.f->real_flag(), 1e-8, "T(f)", k);
      const double v = (phi - t).op_norm();
      return {v, std::sqrt(static_cast<double>(k)) * v};
    }
    if (e == "abelian-compare") {
      const HorizontalField a = HorizontalField::constant(cfg.omega->P);
      const BandOperator phi = quantize_torus(*cfg.f, a, k);
      const BandOperator t = theta_bt_operator(*cfg.f, *cfg.omega, k);
      check_operator_invariants(phi, cfg.f->real_flag(), 1e-12, "phi(f)", k);
      check_operator_invariants(t, cfg.f->real_flag(), 1e-8, "T(f)", k);
      const double v = (phi - t).op_norm();
      return {v, std::sqrt(static_cast<double>(k)) * v};
    }
    const double v = run_phase_bound_k(cfg, k);
    return {v, v};
  };

  std::vector<std::pair<double, double>> results(cfg.k_list.size());
  if (jobs <= 1) {
    for (size_t i = 0; i < cfg.k_list.size(); ++i) results[i] = value_at(cfg.k_list[i]);
  } else {
    std::vector<std::future<std::pair<double, double>>> futures(cfg.k_list.size());
    size_t next = 0;
    while (next < cfg.k_list.size()) {
      const size_t batch = std::min<size_t>(jobs, cfg.k_list.size() - next);
      for (size_t b = 0; b < batch; ++b) {
        const int k = cfg.k_list[next + b];
        futures[next + b] = std::async(std::launch::async, [&, k] { return value_at(k); });
      }
      for (size_t b = 0; b < batch; ++b) results[next + b] = futures[next + b].get();
      next += batch;
    }
  }

  std::vector<std::pair<double, double>> fit_rows;
  for (size_t i = 0; i < cfg.k_list.size(); ++i) {
    fit_rows.emplace_back(cfg.k_list[i], results[i].first);
    const SlopeFit so_far = fit_loglog(fit_rows);
    rec.rows.push_back({cfg.k_list[i], results[i].first, results[i].second, so_far.slope});
  }
  const size_t tail = (fit_rows.size() + 1) / 2;
  rec.tail_fit = fit_loglog({fit_rows.end() - tail, fit_rows.end()});
  return rec;
}

}  // namespace lagq
