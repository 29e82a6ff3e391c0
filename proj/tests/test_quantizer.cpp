#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "lagq/star.hpp"
#include "test_support.hpp"

using namespace lagq;
using namespace lagq::testing;

namespace {

FiberedFunction single_mode(int m, CoeffPtr c) {
  FiberedFunction::ModeMap modes;
  modes[{m}] = std::move(c);
  return FiberedFunction(1, BaseKind::Plane, false, std::move(modes));
}

}  // namespace

TEST_CASE("quantize_model: single fiber mode gives a single band") {
  const int m = 2, k = 8;
  CoeffPtr fm = coeff::gaussian(vec1(0.3), 2.0, Complex(1.2, -0.4));
  FiberedFunction f = single_mode(m, fm);
  BandOperator op = quantize_model(f, k, -6.0, 6.0);
  REQUIRE(op.bands().size() == 1);
  REQUIRE(op.bands().count({m}) == 1);
  const Lattice& lat = op.lattice();
  for (std::int64_t i = 0; i < lat.size(); ++i) {
    const std::vector<int> col = lat.unflat(i);
    if (!lat.contains({col[0] + m})) continue;
    const double c = static_cast<double>(col[0]) / k;
    const Complex expect = fm->value(vec1(c + m / (2.0 * k)));
    CHECK(std::abs(op.entry({col[0] + m}, col) - expect) == 0.0);
  }
}

TEST_CASE("quantize_model: pullback from the base is the diagonal multiplication operator") {
  const int k = 16;
  CoeffPtr f0 = coeff::bump(vec1(0.0), 2.0, Complex(0.8, 0.0));
  FiberedFunction f = single_mode(0, f0);
  BandOperator op = quantize_model(f, k, -3.0, 3.0);
  REQUIRE(op.bands().size() == 1);
  const Lattice& lat = op.lattice();
  for (std::int64_t i = 0; i < lat.size(); ++i) {
    const std::vector<int> col = lat.unflat(i);
    const Complex expect = f0->value(lat.point(col));
    CHECK(op.entry(col, col) == expect);
  }
}

TEST_CASE("quantize_model: real function gives an exactly Hermitian matrix") {
  std::mt19937 gen(3);
  FiberedFunction f = random_plane_function(gen, 3);
  BandOperator op = quantize_model(f, 8, -6.0, 6.0);
  const Eigen::MatrixXcd d = op.dense();
  CHECK((d - d.adjoint().eval()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("quantize_model: window too small is rejected, not truncated") {
  FiberedFunction f = single_mode(0, coeff::bump(vec1(0.0), 3.0, Complex(1, 0)));
  CHECK_THROWS_AS((void)quantize_model(f, 8, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("quantize_model: doubling an adequate window leaves the norm unchanged") {
  std::mt19937 gen(5);
  FiberedFunction f = random_plane_function(gen, 2);
  const double n1 = quantize_model(f, 16, -6.0, 6.0).op_norm();
  const double n2 = quantize_model(f, 16, -12.0, 12.0).op_norm();
  CHECK(std::abs(n1 - n2) <= 1e-9);
}

TEST_CASE("horizontal_phase: constant field gives zero phase exactly") {
  Eigen::MatrixXd p(1, 1);
  p << 0.7;
  HorizontalField a = HorizontalField::constant(p);
  CHECK(horizontal_phase(a, vec1(0.3), {3}, 8) == 0.0);
  CHECK(a.grad_norm_bound() == 0.0);
}

TEST_CASE("horizontal_phase: zero offset gives zero phase") {
  HorizontalField a = HorizontalField::sine_1d(1.0);
  CHECK(horizontal_phase(a, vec1(0.1), {0}, 4) == 0.0);
}

TEST_CASE("horizontal_phase: 5/24 bound and the refined-step oracle") {
  HorizontalField a = HorizontalField::sine_1d(1.0);
  const double grad = a.grad_norm_bound();
  CHECK(grad == doctest::Approx(2.0 * M_PI).epsilon(1e-12));
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  std::uniform_int_distribution<int> uk(4, 64);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = uk(gen);
    const int mmax = std::max(1, static_cast<int>(std::cbrt(10.0 * k * k)));
    std::uniform_int_distribution<int> um(-mmax, mmax);
    int m = 0;
    while (m == 0) m = um(gen);
    if (std::pow(std::abs(m), 3) / (static_cast<double>(k) * k) > 10.0) continue;
    const Eigen::VectorXd x = vec1(ux(gen));
    const double phase = horizontal_phase(a, x, {m}, k);
    const double bound = (5.0 / 24.0) * grad * std::pow(std::abs(m), 3) / (static_cast<double>(k) * k);
    CHECK(std::abs(phase) <= bound * (1.0 + 1e-12));
    PhaseOptions fine;
    fine.refine_factor = 10;
    CHECK(std::abs(phase - horizontal_phase(a, x, {m}, k, fine)) < 1e-9);
  }
}

TEST_CASE("horizontal field: analytic derivatives match finite differences") {
  HorizontalField::SineTerm t;
  t.amp = Eigen::MatrixXd(2, 2);
  t.amp << 0.4, -0.2, 0.3, 0.1;
  t.w = Eigen::VectorXd(2);
  t.w << 1.0, 2.0;
  t.phase = 0.3;
  Eigen::MatrixXd c(2, 2);
  c << 0.1, 0.0, 0.2, -0.1;
  HorizontalField a(2, c, {t});
  const Eigen::VectorXd x = vec2(0.21, -0.37);
  const double h = 1e-5;
  for (int l = 0; l < 2; ++l) {
    Eigen::VectorXd xp = x, xm = x;
    xp[l] += h;
    xm[l] -= h;
    const Eigen::MatrixXd fd = (a.at(xp) - a.at(xm)) / (2 * h);
    CHECK((a.partial(l, x) - fd).cwiseAbs().maxCoeff() <
          1e-5 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
    for (int l2 = 0; l2 < 2; ++l2) {
      Eigen::VectorXd yp = x, ym = x;
      yp[l2] += h;
      ym[l2] -= h;
      const Eigen::MatrixXd fd2 = (a.partial(l, yp) - a.partial(l, ym)) / (2 * h);
      CHECK((a.partial2(l, l2, x) - fd2).cwiseAbs().maxCoeff() <
            1e-5 * std::max(1.0, fd2.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("quantize_general: zero field reproduces the model quantizer exactly") {
  std::mt19937 gen(11);
  FiberedFunction f = random_plane_function(gen, 2);
  BandOperator model = quantize_model(f, 8, -6.0, 6.0);
  BandOperator gen_op = quantize_general(f, HorizontalField::zero(1), Cover::plane(), 8, -6.0, 6.0);
  CHECK((model.dense() - gen_op.dense()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("quantize_general: constant field reproduces the model quantizer exactly") {
  std::mt19937 gen(13);
  FiberedFunction f = random_plane_function(gen, 2);
  Eigen::MatrixXd p(1, 1);
  p << -1.3;
  BandOperator model = quantize_model(f, 8, -6.0, 6.0);
  BandOperator gen_op = quantize_general(f, HorizontalField::constant(p), Cover::plane(), 8, -6.0, 6.0);
  CHECK((model.dense() - gen_op.dense()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("quantize_general: phases are unimodular") {
  CoeffPtr fm = coeff::gaussian(vec1(0.0), 3.0, Complex(0.9, 0.0));
  FiberedFunction f = single_mode(2, fm);
  HorizontalField a = HorizontalField::sine_1d(1.0);
  BandOperator op = quantize_general(f, a, Cover::plane(), 8, -6.0, 6.0);
  const Lattice& lat = op.lattice();
  for (std::int64_t i = 0; i < lat.size(); ++i) {
    const std::vector<int> col = lat.unflat(i);
    if (!lat.contains({col[0] + 2})) continue;
    const double mid = (col[0] + 1.0) / 8.0;
    CHECK(std::abs(std::abs(op.entry({col[0] + 2}, col)) - std::abs(fm->value(vec1(mid)))) < 1e-14);
  }
}

TEST_CASE("quantize_general rejects a torus cover") {
  std::mt19937 gen(17);
  FiberedFunction f = random_plane_function(gen, 1);
  CHECK_THROWS_AS(
      (void)quantize_general(f, HorizontalField::zero(1), Cover::torus(), 8, -6.0, 6.0),
      std::invalid_argument);
}

TEST_CASE("quantize_torus: pullback of cos(2 pi x) at k = 4") {
  CoeffPtr c = coeff::trig(1, {{{1}, Complex(1, 0), Complex(0, 0)}});
  FiberedFunction::ModeMap modes;
  modes[{0}] = c;
  FiberedFunction f(1, BaseKind::Torus, true, std::move(modes));
  BandOperator op = quantize_torus(f, HorizontalField::zero(1), 4);
  REQUIRE(op.lattice().size() == 4);
  for (int l = 0; l < 4; ++l) {
    const double b = l / 4.0;
    CHECK(std::abs(op.entry({l}, {l}) - Complex(std::cos(2 * M_PI * b), 0.0)) < 1e-15);
  }
}

TEST_CASE("quantize_torus: dimension is k^n") {
  std::mt19937 gen(19);
  FiberedFunction f = random_torus_function(gen, 1);
  BandOperator op = quantize_torus(f, HorizontalField::zero(1), 7);
  CHECK(op.lattice().size() == 7);
  CHECK(op.dense().rows() == 7);
}

TEST_CASE("quantize_torus: random field keeps real functions Hermitian") {
  std::mt19937 gen(23);
  for (int trial = 0; trial < 5; ++trial) {
    FiberedFunction f = random_torus_function(gen, 2);
    HorizontalField::SineTerm t;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    t.amp = Eigen::MatrixXd::Constant(1, 1, u(gen));
    t.w = Eigen::VectorXd::Constant(1, 1.0 + (trial % 2));
    t.phase = u(gen);
    HorizontalField a(1, Eigen::MatrixXd::Constant(1, 1, u(gen)), {t});
    BandOperator op = quantize_torus(f, a, 12);
    const Eigen::MatrixXcd d = op.dense();
    CHECK((d - d.adjoint().eval()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("quantize_torus: band limit >= k/4 is rejected") {
  std::mt19937 gen(29);
  FiberedFunction f = random_torus_function(gen, 2);
  CHECK_THROWS_AS((void)quantize_torus(f, HorizontalField::zero(1), 8), std::invalid_argument);
}

TEST_CASE("adjoint preservation: phi(conj f) equals phi(f)* in every scheme") {
  std::mt19937 gen(31);
  // complex (non-real) function on the plane
  FiberedFunction::ModeMap modes;
  modes[{1}] = coeff::gaussian(vec1(0.2), 2.0, Complex(0.7, 0.4));
  modes[{-2}] = coeff::gaussian(vec1(-0.1), 3.0, Complex(-0.3, 0.9));
  FiberedFunction f(1, BaseKind::Plane, false, std::move(modes));
  FiberedFunction fc = conj(f);

  BandOperator m1 = quantize_model(f, 8, -6.0, 6.0);
  BandOperator m2 = quantize_model(fc, 8, -6.0, 6.0);
  CHECK((m2 - m1.adjoint()).max_abs_entry() <= 1e-13);

  HorizontalField a = HorizontalField::sine_1d(0.8);
  BandOperator g1 = quantize_general(f, a, Cover::plane(), 8, -6.0, 6.0);
  BandOperator g2 = quantize_general(fc, a, Cover::plane(), 8, -6.0, 6.0);
  CHECK((g2 - g1.adjoint()).max_abs_entry() <= 1e-13);

  FiberedFunction::ModeMap tmodes;
  tmodes[{1}] = coeff::trig(1, {{{1}, Complex(0.4, 0.3), Complex(-0.2, 0.6)}});
  tmodes[{2}] = coeff::trig(1, {{{2}, Complex(0.1, -0.5), Complex(0.0, 0.2)}});
  FiberedFunction ft(1, BaseKind::Torus, false, std::move(tmodes));
  BandOperator t1 = quantize_torus(ft, a, 12);
  BandOperator t2 = quantize_torus(conj(ft), a, 12);
  CHECK((t2 - t1.adjoint()).max_abs_entry() <= 1e-13);
}

TEST_CASE("linearity of the quantizers") {
  std::mt19937 gen(37);
  FiberedFunction f = random_plane_function(gen, 2);
  FiberedFunction g = random_plane_function(gen, 2);
  const Complex za(0.3, -0.2), zb(-1.1, 0.5);
  FiberedFunction combo = add(scale(za, f), scale(zb, g));
  BandOperator lhs = quantize_model(combo, 8, -6.0, 6.0);
  BandOperator rhs = quantize_model(f, 8, -6.0, 6.0).scaled(za) +
                     quantize_model(g, 8, -6.0, 6.0).scaled(zb);
  CHECK((lhs - rhs).max_abs_entry() <= 1e-12);
}

TEST_CASE("band structure mirrors the fiber modes") {
  std::mt19937 gen(41);
  FiberedFunction::ModeMap modes;
  modes[{1}] = coeff::gaussian(vec1(0.0), 2.0, Complex(1, 0));
  modes[{3}] = coeff::gaussian(vec1(0.0), 2.0, Complex(0, 1));
  FiberedFunction f(1, BaseKind::Plane, false, std::move(modes));
  BandOperator op = quantize_model(f, 8, -6.0, 6.0);
  CHECK(op.bands().size() == 2);
  CHECK(op.bands().count({1}) == 1);
  CHECK(op.bands().count({3}) == 1);
  CHECK(op.bands().count({2}) == 0);
}

TEST_CASE("horizontal field JSON round-trip") {
  HorizontalField::SineTerm t;
  t.amp = Eigen::MatrixXd::Constant(1, 1, 0.6);
  t.w = Eigen::VectorXd::Constant(1, 2.0);
  t.phase = 0.25;
  HorizontalField a(1, Eigen::MatrixXd::Constant(1, 1, -0.4), {t});
  HorizontalField b = HorizontalField::from_json(a.to_json(), 1);
  for (double x : {-0.3, 0.0, 0.7}) {
    CHECK((a.at(vec1(x)) - b.at(vec1(x))).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.partial(0, vec1(x)) - b.partial(0, vec1(x))).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(a.grad_norm_bound() == b.grad_norm_bound());
}

TEST_CASE("cover independence: admissible torus covers give the same operator exactly") {
  std::mt19937 gen(47);
  FiberedFunction f = random_torus_function(gen, 2);
  HorizontalField a = HorizontalField::sine_1d(0.9);
  SchemeSpec s1 = SchemeSpec::torus(a);
  s1.cover = Cover::torus(4, 0.45);
  SchemeSpec s2 = SchemeSpec::torus(a);
  s2.cover = Cover::torus(5, 0.40);
  const int k = 16;
  CHECK((quantize(f, s1, k).dense() - quantize(f, s2, k).dense()).cwiseAbs().maxCoeff() == 0.0);
  // an inadmissible cover (band wider than the closeness radius) is refused
  SchemeSpec s3 = SchemeSpec::torus(a);
  s3.cover = Cover::torus(8, 0.15);
  CHECK_THROWS_AS((void)quantize(f, s3, k), std::invalid_argument);
}

TEST_CASE("cover admissibility checks") {
  CHECK_THROWS_AS(Cover::torus(3, 0.6), std::invalid_argument);   // chart too long
  CHECK_THROWS_AS(Cover::torus(3, 0.32), std::invalid_argument);  // no overlap
  CHECK(Cover::torus(4, 0.45).closeness_radius() == doctest::Approx(0.2));
  CHECK(std::isinf(Cover::plane().closeness_radius()));
}
