#include <doctest.h>

#include "legfol/contact.hpp"
#include "legfol/forms.hpp"

#include <cmath>
#include <random>

using namespace legfol;

namespace {

Form2H random_form(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  return {g(rng), g(rng), g(rng), g(rng), g(rng), g(rng)};
}

// Hodge star in an oriented orthonormal frame of R^4: *e^{ij} = e^{kl} with
// e^{ijkl} = e^{1234}.
Mat4 star_oracle(const Mat4& W) {
  Mat4 S = Mat4::Zero();
  const int perm[24][4] = {{0, 1, 2, 3}, {0, 1, 3, 2}, {0, 2, 1, 3}, {0, 2, 3, 1}, {0, 3, 1, 2}, {0, 3, 2, 1},
                           {1, 0, 2, 3}, {1, 0, 3, 2}, {1, 2, 0, 3}, {1, 2, 3, 0}, {1, 3, 0, 2}, {1, 3, 2, 0},
                           {2, 0, 1, 3}, {2, 0, 3, 1}, {2, 1, 0, 3}, {2, 1, 3, 0}, {2, 3, 0, 1}, {2, 3, 1, 0},
                           {3, 0, 1, 2}, {3, 0, 2, 1}, {3, 1, 0, 2}, {3, 1, 2, 0}, {3, 2, 0, 1}, {3, 2, 1, 0}};
  for (const auto& p : perm) {
    Mat4 P = Mat4::Zero();
    for (int k = 0; k < 4; ++k) P(k, p[k]) = 1.0;
    const double sgn = P.determinant();
    S(p[2], p[3]) += 0.5 * sgn * W(p[0], p[1]);
  }
  return S;
}

bool same(const Form2H& a, const Form2H& b, double tol = 1e-12) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

TEST_CASE("star matches the permutation oracle and squares to the identity") {
  CHECK(same(forms::star(Form2H::elementary(1, 2)), Form2H::elementary(3, 4)));
  CHECK(same(forms::star(Form2H::dalpha()), Form2H::dalpha()));
  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const Form2H w = random_form(rng);
    CHECK((forms::star(w).matrix() - star_oracle(w.matrix())).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(same(forms::star(forms::star(w)), w, 0.0));
  }
}

TEST_CASE("self-dual splitting") {
  const auto [p, m] = forms::sd_split(Form2H::elementary(1, 2));
  CHECK(same(p, 0.5 * (Form2H::elementary(1, 2) + Form2H::elementary(3, 4))));
  CHECK(same(m, 0.5 * (Form2H::elementary(1, 2) - Form2H::elementary(3, 4))));
  const Form2H sd{0.3, -1, 2, 0, 0, 0};
  CHECK(same(forms::sd_split(sd).first, sd));
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const auto [a, b] = forms::sd_split(random_form(rng));
    CHECK(std::abs(forms::inner(a, b)) < 1e-12);
  }
}

TEST_CASE("wedge coefficients") {
  CHECK(forms::wedge_coeff(Form2H::dalpha(), Form2H::dalpha()) == 2.0);
  const double a = 0.6, b = -1.3;
  const Form2H w{0, a, b, 0, 0, 0};
  CHECK(forms::wedge_coeff(w, w) == doctest::Approx(2 * (a * a + b * b)));
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const auto [sd, asd] = forms::sd_split(random_form(rng));
    CHECK(std::abs(forms::wedge_coeff(sd, asd)) < 1e-12);
  }
}

TEST_CASE("comass closed form against the brute-force and eigenvalue oracles") {
  CHECK(forms::comass(Form2H::dalpha()) == doctest::Approx(1.0));
  CHECK(forms::norm(Form2H::dalpha()) == doctest::Approx(std::sqrt(2.0)));
  CHECK(forms::comass_bruteforce(Form2H{0, 3, 0, 0, 0, 0}) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(forms::comass_bruteforce(Form2H::elementary(1, 2)) == doctest::Approx(1.0).epsilon(1e-6));
  std::mt19937_64 rng(4);
  for (int k = 0; k < 30; ++k) {
    const Form2H w = random_form(rng);
    CHECK(std::abs(forms::comass(w) - forms::comass_bruteforce(w)) < 1e-6);
    CHECK(std::abs(forms::comass(w) - forms::comass_eigen(w.matrix())) < 1e-10);
  }
}

TEST_CASE("J from a self-dual form") {
  const auto j0 = forms::j_from_form(Form2H{0, 1, 0, 0, 0, 0});
  CHECK(j0.theta == doctest::Approx(0.0));
  const Mat4& J = j0.J;
  CHECK((J * Vec4::Unit(0) - Vec4::Unit(2)).norm() < 1e-12);
  CHECK((J * Vec4::Unit(1) + Vec4::Unit(3)).norm() < 1e-12);
  CHECK((J * Vec4::Unit(2) + Vec4::Unit(0)).norm() < 1e-12);
  CHECK((J * Vec4::Unit(3) - Vec4::Unit(1)).norm() < 1e-12);
  const auto j1 = forms::j_from_form(Form2H{0, 0, 1, 0, 0, 0});
  CHECK(j1.theta == doctest::Approx(M_PI / 2));
  CHECK((j1.J * Vec4::Unit(0) - Vec4::Unit(3)).norm() < 1e-12);
  const Form2H mixed{0, 1, 0, 0.5, 0, 0};
  const auto jm = forms::j_from_form(mixed);
  CHECK((jm.J - J).cwiseAbs().maxCoeff() < 1e-12);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int k = 0; k < 20; ++k) {
    const Vec4 v(g(rng), g(rng), g(rng), g(rng));
    CHECK(mixed.eval(v, jm.J * v) > 0.0);
  }
  CHECK_THROWS_AS(forms::j_from_form(Form2H{0.1, 1, 0, 0, 0, 0}), DomainError);
  CHECK_THROWS_AS(forms::j_from_form(Form2H{0, 0.1, 0, 1, 0, 0}), DomainError);
}

TEST_CASE("Omega from J is positive on (v, Jv) and maximal exactly there") {
  const Mat4 J = forms::j_of_theta(0.4);
  const Form2H Om = forms::omega_from_J(J);
  CHECK(Om.eval(Vec4::Unit(0), J * Vec4::Unit(0)) > 0.0);
  // J is orthogonal here, so Omega is self-dual with norm sqrt 2.
  const Mat4& I = forms::frame_I();
  CHECK((I * J + J * I).cwiseAbs().maxCoeff() < 1e-12);
  const auto [sd, asd] = forms::sd_split(Om);
  CHECK(forms::norm(asd) < 1e-12);
  CHECK(forms::norm(Om) == doctest::Approx(std::sqrt(2.0)));
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  const double cm = forms::comass(Om);
  for (int k = 0; k < 20; ++k) {
    const Vec4 v = Vec4(g(rng), g(rng), g(rng), g(rng)).normalized();
    CHECK(Om.eval(v, J * v) == doctest::Approx(cm));
    Vec4 w = Vec4(g(rng), g(rng), g(rng), g(rng));
    w = (w - w.dot(v) * v).normalized();
    if ((w - J * v).norm() > 1e-3) CHECK(Om.eval(v, w) < cm);
  }
}

TEST_CASE("semicalibration verifier") {
  for (double th : {0.0, 0.3, 2.0, -1.1}) {
    const auto rep = forms::verify_semicalibration(Form2H{0, std::cos(th), std::sin(th), 0, 0, 0});
    CHECK(rep.pass);
    REQUIRE(rep.theta);
    CHECK(std::remainder(*rep.theta - th, 2 * M_PI) == doctest::Approx(0.0).epsilon(1e-12));
    // The associated J is Lagrangian for dalpha.
    const Mat4 DJ = contact::dalpha_matrix() * *rep.J;
    CHECK((DJ + DJ.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
  const auto bad = forms::verify_semicalibration(Form2H{0, 1, 0, 0.1, 0, 0});
  CHECK_FALSE(bad.pass);
  CHECK(bad.failure() == "comass_one");
  CHECK_FALSE(forms::verify_semicalibration(Form2H{0, 2, 0, 0, 0, 0}).pass);
  CHECK(forms::verify_semicalibration(Form2H{0, 1, 0, 0.1, 0, 0}).to_json()["pass"] == false);
}
