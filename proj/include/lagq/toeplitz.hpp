#pragma once

#include "lagq/quantizer.hpp"

namespace lagq {

namespace quad {

struct Rule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Physicists' Gauss-Hermite rule: int h(y) e^{-y^2} dy ~ sum w_i h(y_i).
const Rule& gauss_hermite(int order);
/// Gauss-Legendre rule on [-1, 1].
const Rule& gauss_legendre(int order);

}  // namespace quad

/// Omega = P + iQ with Q symmetric positive definite; defines the
/// translation-invariant complex structure.
struct SiegelForm {
  Eigen::MatrixXd P;
  Eigen::MatrixXd Q;

  SiegelForm(Eigen::MatrixXd p, Eigen::MatrixXd q);
  static SiegelForm standard(int n);  // P = 0, Q = I
  int n() const { return static_cast<int>(Q.rows()); }
};

/// Level-k coherent-state basis data on a plane lattice window: the
/// normalization a_{k,Q} with a^{-2} = int exp(-k x^T Q x) dx, and the
/// Q-diagonalizing frame used by the quadrature.
class CoherentFrame {
public:
  CoherentFrame(int k, SiegelForm omega, double lo, double hi);

  int k() const { return k_; }
  const SiegelForm& omega() const { return omega_; }
  const Lattice& lattice() const { return lattice_; }
  double normalization() const { return a_kq_; }
  const Eigen::MatrixXd& q_basis() const { return q_basis_; }
  const Eigen::VectorXd& q_eigs() const { return q_eigs_; }

private:
  int k_;
  SiegelForm omega_;
  Lattice lattice_;
  double a_kq_;
  Eigen::MatrixXd q_basis_;
  Eigen::VectorXd q_eigs_;
};

/// <Psi_b, T^k(f) Psi_c> by integer lattice labels (b = row/k, c = col/k);
/// exactly zero when f has no fiber mode row - col.
Complex bt_matrix_element(const FiberedFunction& f, const CoherentFrame& frame,
                          const std::vector<int>& row, const std::vector<int>& col);

/// Berezin-Toeplitz operator in the coherent basis, banded by the fiber
/// modes of f.
BandOperator bt_operator(const FiberedFunction& f, const CoherentFrame& frame);

/// Berezin-Toeplitz operator on the abelian variety in the theta basis
/// (k^n-dimensional). The theta lattice sum truncates to the shortest-arc
/// term for band limits < k/4 (all other shifts miss every stored mode).
BandOperator theta_bt_operator(const FiberedFunction& f, const SiegelForm& omega, int k);

/// || phi^k_{H_P}(f) - T^k(f) || under the basis identification
/// psi_b -> Psi_b. The field must be the constant field P = Re(Omega).
double dq_bt_distance_plane(const FiberedFunction& f, const HorizontalField& a,
                            const CoherentFrame& frame);
double dq_bt_distance_torus(const FiberedFunction& f, const HorizontalField& a,
                            const SiegelForm& omega, int k);

/// The change of coordinates (x, theta) -> (x, theta + P x) on fiber modes:
/// mode m picks up the factor e^{i <P m, x>}. Reduces P != 0 comparisons to
/// P = 0 ones.
FiberedFunction shear(const FiberedFunction& f, const Eigen::MatrixXd& p);

}  // namespace lagq
