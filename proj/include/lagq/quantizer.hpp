#pragma once

#include "lagq/band_operator.hpp"

namespace lagq {

/// The matrix field A(x) defining the horizontal distribution
/// H = Span{ d/dx_j + A_j^i d/dtheta_i }. Stored as a constant part plus
/// sine terms A(x) = C + sum_s S_s sin(2 pi <w_s, x> + phi_s), so first and
/// second derivatives are analytic. Entry (i, j) of the matrix is A_j^i.
class HorizontalField {
public:
  struct SineTerm {
    Eigen::MatrixXd amp;
    Eigen::VectorXd w;
    double phase = 0.0;
  };

  HorizontalField(int n, Eigen::MatrixXd constant_part, std::vector<SineTerm> sines);

  static HorizontalField zero(int n);
  static HorizontalField constant(const Eigen::MatrixXd& p);
  /// n = 1 field A(x) = amp * sin(2 pi x).
  static HorizontalField sine_1d(double amp);

  int n() const { return n_; }
  bool is_constant() const { return sines_.empty(); }
  /// 1-periodic in x (all sine frequencies integral, required on the torus).
  bool unit_periodic() const;

  Eigen::MatrixXd at(const Eigen::VectorXd& x) const;
  /// d A / d x_l
  Eigen::MatrixXd partial(int l, const Eigen::VectorXd& x) const;
  Eigen::MatrixXd partial2(int l1, int l2, const Eigen::VectorXd& x) const;

  /// Reported bound on sup_x max_{|u|=1} |(nabla_u A)(u)|; zero for constant
  /// fields, exact for a single 1-d sine term.
  double grad_norm_bound() const;

  /// d A_j^i / d x_l as a closed-form coefficient function.
  CoeffPtr partial_coeff(int i, int j, int l) const;

  const Eigen::MatrixXd& constant_part() const { return constant_; }
  const std::vector<SineTerm>& sine_terms() const { return sines_; }

  static HorizontalField from_json(const nlohmann::json& j, int n);
  nlohmann::json to_json() const;

private:
  int n_;
  Eigen::MatrixXd constant_;
  std::vector<SineTerm> sines_;
};

/// Open cover of the base used by the general construction. On the plane the
/// trivial cover {R^n} makes every pair of points close; on the torus a
/// standard overlapping interval cover (charts_per_axis arcs of the given
/// length per axis) is used, and closeness collapses to the shortest arc.
class Cover {
public:
  static Cover plane();
  static Cover torus(int charts_per_axis = 4, double chart_length = 0.45);

  BaseKind base() const { return base_; }
  int charts_per_axis() const { return charts_; }
  double chart_length() const { return length_; }
  double closeness_radius() const;

private:
  Cover(BaseKind base, int charts, double length) : base_(base), charts_(charts), length_(length) {}

  BaseKind base_;
  int charts_;
  double length_;
};

struct PhaseOptions {
  int min_steps = 64;       // RK4 steps per half segment
  double tol = 1e-10;       // step halving stops once the phase moves less than this
  int refine_factor = 1;    // multiply the step count (used by test oracles)
};

/// Transport phase of the general quantizer: with u = m/|m|, T = |m|/(2k)
/// and alpha'(t) = A(x + m/(2k) + t u) u, alpha(0) = 0, returns
///   k * { -<m/(2k), alpha(T) + alpha(-T)> + int_{-T}^{T} <s u, alpha'(s)> ds }.
/// Identically zero for constant A and for m = 0.
double horizontal_phase(const HorizontalField& a, const Eigen::VectorXd& x, const std::vector<int>& m,
                        int k, const PhaseOptions& opts = {});

/// Model quantizer on R^n x T^n: band p = m per fiber mode, entries
/// f_m(c + m/(2k)). Throws if the window cannot contain the decay radius
/// of the coefficients.
BandOperator quantize_model(const FiberedFunction& f, int k, double lo, double hi);

/// General quantizer with horizontal transport phases:
/// K(x + m/k, x) = e^{i phase(x, m, k)} f_m(x + m/(2k)).
BandOperator quantize_general(const FiberedFunction& f, const HorizontalField& a, const Cover& cover,
                              int k, double lo, double hi);

/// Torus quantizer (k^n-dimensional), entries along shortest-arc lifts.
/// Requires the band limit < k/4 so the shortest arc is unambiguous.
BandOperator quantize_torus(const FiberedFunction& f, const HorizontalField& a, int k);

}  // namespace lagq
