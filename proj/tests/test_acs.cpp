#include <doctest.h>

#include "legfol/acs.hpp"
#include "legfol/acs_io.hpp"
#include "legfol/expr.hpp"

#include <cmath>

using namespace legfol;

namespace {

const Point5 kP{0.3, -0.2, 0.1, 0.4, -0.5};

}  // namespace

TEST_CASE("model matrix of the standard and a sheared structure") {
  const JMatrix J = acs::j_matrix(builtin::standard(), kP);
  CHECK(J * Vec4::Unit(0) == Vec4::Unit(3));
  CHECK(J * Vec4::Unit(2) == -Vec4::Unit(1));
  CHECK(J * Vec4::Unit(1) == Vec4::Unit(2));
  CHECK(J * Vec4::Unit(3) == -Vec4::Unit(0));
  const JMatrix S = acs::j_matrix_from(1, 0, 1, 0, 2);
  CHECK(S * Vec4::Unit(1) == Vec4(0, 1, 2, 0));
  CHECK((S * S + Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  const auto m = acs::read_model(acs::j_matrix_from(0.2, -0.3, 1.4, 0.5, (1 + 0.04 - 0.15) / 1.4));
  CHECK(m.residual < 1e-12);
  CHECK(m.coeffs.delta == doctest::Approx(0.5));
}

TEST_CASE("identity checks pass on the model and catch a corrupted matrix") {
  const auto rep = acs::check_identities(builtin::random_poly(0.2, 4), 2000, 1);
  CHECK(rep.pass);
  CHECK(rep.max_square < 1e-10);
  ACSField bad = builtin::standard();
  Mat4 off = Mat4::Zero();
  off(1, 0) = 0.1;  // J(dx1) += 0.1 dy1
  bad.matrix_offset = off;
  const auto br = acs::check_identities(bad, 2000, 1);
  CHECK_FALSE(br.pass);
  CHECK(br.failure().rfind("lagrangian", 0) == 0);
  CHECK(br.max_lagrangian == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("extended J kills the Reeb field and acts on lifts") {
  const ACSField f = builtin::perturbed(0.1);
  const ContactParams params(0.5);
  const Mat5 J5 = acs::j_extended(f, kP, params);
  CHECK((J5 * contact::reeb(params)).norm() < 1e-14);
  const JMatrix J = acs::j_matrix(f, kP);
  const HVec v(0.3, 1, -2, 0.5);
  const Vec5 lv = contact::lift_vector(kP.base(), kP.t, v, params);
  CHECK((J5 * lv - contact::lift_vector(kP.base(), kP.t, J * v, params)).norm() < 1e-12);
}

TEST_CASE("gamma fallback relabels a structure with vanishing gamma") {
  ACSField f = ACSField::constant(0.0, 1.0, 0.0, -1.0);
  f.kappa = ScalarField5(0.0);
  const acs::Fallback fb = acs::gamma_fallback(f);
  CHECK(fb.rotated);
  CHECK(fb.field.gamma(kP) == doctest::Approx(1.0));
  const Mat4 conj = fb.relabel.transpose() * acs::j_matrix(f, kP) * fb.relabel;
  CHECK((conj - acs::j_matrix(fb.field, kP)).cwiseAbs().maxCoeff() < 1e-12);
  const acs::Fallback same = acs::gamma_fallback(builtin::standard());
  CHECK_FALSE(same.rotated);
  CHECK(same.relabel == Mat4::Identity());
}

TEST_CASE("epsilon estimate") {
  CHECK(acs::epsilon_estimate(ACSField::constant(0.2, 0.1, 1.3, -0.4), 0.5, 100) == 0.0);
  const ACSField lin = builtin::sigma_linear(1.0);
  const double e1 = acs::epsilon_estimate(lin, 0.2, 400);
  const double e2 = acs::epsilon_estimate(lin, 0.1, 400);
  CHECK(e1 > 0.0);
  CHECK(e2 / e1 == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("dilation pulls coefficients back") {
  const ACSField f = builtin::perturbed(0.3);
  const ACSField d = acs::dilated(f, 0.25);
  CHECK(d.beta(kP) == doctest::Approx(f.beta(Point5::from(Vec5(0.25 * kP.vec())))));
  CHECK(d.gamma.gradient(kP)[1] == doctest::Approx(0.25 * 0.3));
  CHECK_THROWS_AS(acs::dilated(f, 1.5), DomainError);
}

TEST_CASE("expression parser") {
  const Point5 p{2, 3, -1, 0.5, 0.25};
  CHECK(Expression::parse("2^3^2")(p) == 512.0);
  CHECK(Expression::parse("-2^2")(p) == -4.0);
  CHECK(Expression::parse("x1*y1 - x2/y2 + t")(p) == doctest::Approx(6 + 2 + 0.25));
  CHECK(Expression::parse("sin(0) + cos(0) + exp(0)")(p) == 2.0);
  CHECK(Expression::parse("(1 + 2) * 3e-1")(p) == doctest::Approx(0.9));
  CHECK_THROWS_AS(Expression::parse("x1 +* 2"), ParseError);
  CHECK_THROWS_AS(Expression::parse("foo(1)"), ParseError);
  CHECK_THROWS_AS(Expression::parse("(x1 + 1"), ParseError);
  CHECK_THROWS_AS(Expression::parse("z3"), ParseError);
  try {
    Expression::parse("1 + )");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
}

TEST_CASE("ACS configs from JSON") {
  const ACSField c = acs_from_json(
      nlohmann::json{{"coeffs", {{"sigma", "0.1*x1"}, {"beta", "0"}, {"gamma", "1 + 0.2*y1"}, {"delta", 0.05}}}});
  const JMatrix J = acs::j_matrix(c, kP);
  const double s = 0.03, g = 1 - 0.04, d = 0.05;
  CHECK((J - acs::j_matrix_from(s, 0, g, d, (1 + s * s) / g)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(c.global);
  const ACSField k = acs_from_json(nlohmann::json{{"builtin", "constant"}, {"params", {{"sigma", 0.5}}}});
  CHECK(k.sigma(kP) == 0.5);
  CHECK_THROWS_AS(acs_from_json(nlohmann::json{{"builtin", "nope"}}), DomainError);
  CHECK_THROWS_AS(acs_from_json(nlohmann::json{{"coeffs", {{"sigma", "x1"}}}}), DomainError);
  CHECK_THROWS_AS(acs_from_json(nlohmann::json::array()), DomainError);
  CHECK_THROWS_AS(acs_from_json(nlohmann::json{{"builtin", "standard"}, {"perturb_matrix", {1, 2}}}), DomainError);
}
