#pragma once

#include <map>
#include <string>
#include <vector>

#include "lagq/coefficient.hpp"

namespace lagq {

enum class BaseKind { Plane, Torus };

/// Band-limited function on R^n x T^n (or its torus quotient), stored as a
/// finite fiberwise Fourier series f(x, theta) = sum_m f_m(x) e^{i<m,theta>}
/// with closed-form coefficient functions f_m.
class FiberedFunction {
public:
  using ModeMap = std::map<std::vector<int>, CoeffPtr>;

  FiberedFunction(int n, BaseKind base, bool real_flag, ModeMap modes);

  int n() const { return n_; }
  BaseKind base_kind() const { return base_; }
  bool real_flag() const { return real_; }
  /// sup-norm band limit: max |m|_inf over stored modes (0 when empty).
  int band_limit() const { return band_limit_; }

  const ModeMap& modes() const { return modes_; }
  /// Stored coefficient for mode m, or nullptr.
  CoeffPtr mode(const std::vector<int>& m) const;

  Complex evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const;

  nlohmann::json to_json() const;
  static FiberedFunction from_json(const nlohmann::json& j);
  static FiberedFunction from_json_file(const std::string& path);

private:
  int n_;
  BaseKind base_;
  bool real_;
  int band_limit_;
  ModeMap modes_;
};

FiberedFunction multiply(const FiberedFunction& f, const FiberedFunction& g);
FiberedFunction poisson_bracket(const FiberedFunction& f, const FiberedFunction& g);
FiberedFunction add(const FiberedFunction& f, const FiberedFunction& g);
FiberedFunction scale(Complex z, const FiberedFunction& f);
FiberedFunction conj(const FiberedFunction& f);

/// Largest violation of f(-m) == conj(f(m)) over sampled x (a real_flag check).
double conjugation_defect(const FiberedFunction& f, int samples = 25, double radius = 3.0);

/// sup |f| over [lo,hi]^n x T^n: dense grid scan followed by local refinement.
double sup_norm(const FiberedFunction& f, double lo, double hi, int grid_per_axis = 512,
                double refine_tol = 1e-8);

}  // namespace lagq
