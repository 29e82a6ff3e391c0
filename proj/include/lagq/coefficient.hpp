#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>
#include "json.hpp"

#include "lagq/jet.hpp"

namespace lagq {

class CoefficientFunction;
using CoeffPtr = std::shared_ptr<const CoefficientFunction>;

/// Largest jet order any coefficient node supports.
inline constexpr int kMaxJetOrder = 12;

/// A smooth function R^n -> C given as a closed-form expression tree.
/// Every node can produce exact partial derivatives of any order up to
/// kMaxJetOrder, which is what keeps high-order star-product coefficients
/// free of finite-difference noise.
class CoefficientFunction : public std::enable_shared_from_this<CoefficientFunction> {
public:
  explicit CoefficientFunction(int dim) : dim_(dim) {}
  virtual ~CoefficientFunction() = default;

  int dim() const { return dim_; }

  Jet jet(const Eigen::VectorXd& x, int order) const;
  Complex value(const Eigen::VectorXd& x) const { return jet(x, 0).value(); }

  /// Upper bound on |f| over R^n (may be a sampled estimate for composites).
  virtual double sup_bound() const;
  /// Radius r with |f(x)| <= eps whenever |x|_inf >= r; +inf when the
  /// function does not decay.
  virtual double decay_radius(double eps) const;
  virtual bool compact_support() const { return false; }
  /// 1-periodic in every coordinate.
  virtual bool unit_periodic() const { return false; }

  virtual nlohmann::json to_json() const = 0;

protected:
  virtual Jet eval_jet(const Eigen::VectorXd& x, int order) const = 0;

private:
  int dim_;
};

namespace coeff {

struct PolyTerm {
  MultiIndex powers;
  Complex c;
};

struct TrigTerm {
  std::vector<int> w;  // integer frequency vector
  Complex c_cos;
  Complex c_sin;
};

CoeffPtr constant(int dim, Complex v);
CoeffPtr polynomial(int dim, std::vector<PolyTerm> terms);
/// amp * exp(-decay * |x - center|^2)
CoeffPtr gaussian(Eigen::VectorXd center, double decay, Complex amp);
/// p(x - center) * exp(-decay * |x - center|^2)
CoeffPtr poly_gaussian(Eigen::VectorXd center, double decay, std::vector<PolyTerm> poly);
/// amp * prod_i h((x_i - c_i)/radius), h(u) = exp(1 - 1/(1-u^2)) on |u|<1.
CoeffPtr bump(Eigen::VectorXd center, double radius, Complex amp);
/// sum of a*cos(2 pi <w,x>) + b*sin(2 pi <w,x>); 1-periodic.
CoeffPtr trig(int dim, std::vector<TrigTerm> terms);
/// amp * exp(i <freq, x>)
CoeffPtr plane_wave(Eigen::VectorXd freq, Complex amp);

CoeffPtr sum(std::vector<CoeffPtr> children);
CoeffPtr product(std::vector<CoeffPtr> children);
CoeffPtr scale(Complex z, CoeffPtr f);
CoeffPtr derivative(MultiIndex alpha, CoeffPtr f);
CoeffPtr conjugate(CoeffPtr f);

CoeffPtr from_json(const nlohmann::json& j, int dim);

}  // namespace coeff

}  // namespace lagq
