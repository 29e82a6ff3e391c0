#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "lagq/fibered.hpp"

namespace lagq {

/// Bohr-Sommerfeld lattice B_k: integer labels l with base point l/k.
/// Plane lattices carry a finite window [lo, hi]^n; torus lattices have
/// exactly k points per axis (residues mod k).
class Lattice {
public:
  static Lattice plane(int n, int k, double lo, double hi);
  static Lattice torus(int n, int k);

  int n() const { return n_; }
  int k() const { return k_; }
  BaseKind base() const { return base_; }
  int lmin() const { return lmin_; }
  int lmax() const { return lmax_; }
  double lo() const { return static_cast<double>(lmin_) / k_; }
  double hi() const { return static_cast<double>(lmax_) / k_; }

  int points_per_axis() const { return base_ == BaseKind::Torus ? k_ : lmax_ - lmin_ + 1; }
  std::int64_t size() const;

  bool contains(const std::vector<int>& l) const;
  /// Flat index of the label; torus labels are wrapped mod k first.
  std::int64_t flat(const std::vector<int>& l) const;
  std::vector<int> unflat(std::int64_t idx) const;
  Eigen::VectorXd point(const std::vector<int>& l) const;  // l / k

  bool operator==(const Lattice& o) const;

private:
  Lattice(int n, int k, BaseKind base, int lmin, int lmax)
      : n_(n), k_(k), base_(base), lmin_(lmin), lmax_(lmax) {}

  int n_;
  int k_;
  BaseKind base_;
  int lmin_, lmax_;  // plane only
};

/// Operator on H_k stored by diagonal bands: band p holds the entries
/// K(x + p/k, x) indexed by the column point x.
class BandOperator {
public:
  explicit BandOperator(Lattice lattice);

  static BandOperator identity(const Lattice& lattice);

  const Lattice& lattice() const { return lattice_; }
  const std::map<std::vector<int>, Eigen::VectorXcd>& bands() const { return bands_; }
  int band_width() const;

  /// Mutable access to band p, created zero-filled on first use.
  Eigen::VectorXcd& band(const std::vector<int>& p);
  /// Entry K(row, col) by integer labels (0 when absent).
  Complex entry(const std::vector<int>& row, const std::vector<int>& col) const;

  BandOperator adjoint() const;
  BandOperator operator+(const BandOperator& o) const;
  BandOperator operator-(const BandOperator& o) const;
  BandOperator scaled(Complex z) const;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
  Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& v) const;
  Eigen::MatrixXcd dense() const;

  /// Largest singular value: dense spectral computation up to dimension
  /// 2048, deterministic power iteration (seeded) beyond.
  double op_norm(double rel_tol = 1e-10, unsigned seed = 42) const;
  /// sum_p sup_x |K(x + p/k, x)|; always >= op_norm.
  double band_norm_bound() const;
  double max_abs_entry() const;

  void export_csv(std::ostream& out) const;

private:
  void check_same_lattice(const BandOperator& o) const;
  bool row_valid(const std::vector<int>& col, const std::vector<int>& p) const;

  Lattice lattice_;
  std::map<std::vector<int>, Eigen::VectorXcd> bands_;

  friend BandOperator compose(const BandOperator& a, const BandOperator& b);
};

BandOperator compose(const BandOperator& a, const BandOperator& b);
BandOperator commutator(const BandOperator& a, const BandOperator& b);

}  // namespace lagq
