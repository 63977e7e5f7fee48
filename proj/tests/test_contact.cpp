#include <doctest.h>

#include "legfol/contact.hpp"

#include <random>

using namespace legfol;

namespace {

Vec5 e5(int k) { return Vec5::Unit(k); }
HVec rand4(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return HVec(g(rng), g(rng), g(rng), g(rng));
}

}  // namespace

TEST_CASE("horizontal frame") {
  auto f = contact::horizontal_frame(Point5{}, ContactParams(1.0));
  for (int k = 0; k < 4; ++k) CHECK(f[k] == e5(k));
  const Point5 p{0, 1, 0, 0, 0};
  f = contact::horizontal_frame(p, ContactParams(1.0));
  CHECK(f[0] == e5(0) + e5(4));
  f = contact::horizontal_frame(p, ContactParams(0.5));
  CHECK((f[0] - (e5(0) + 0.5 * e5(4))).norm() < 1e-15);
  // alpha-evaluation oracle on every frame vector
  for (const auto& v : f) CHECK(std::abs(contact::alpha_eval(p, v, ContactParams(0.5))) < 1e-15);
}

TEST_CASE("alpha and dalpha values") {
  const ContactParams one(1.0);
  CHECK(contact::alpha_eval(Point5{0.3, -2, 1, 4, 7}, e5(4), one) == 1.0);
  CHECK(contact::alpha_eval(Point5{1, 2, 0, 0, 0}, e5(0), one) == -2.0);
  CHECK(contact::dalpha_eval(HVec::Unit(0), HVec::Unit(1)) == 1.0);
  CHECK(contact::dalpha_eval(HVec::Unit(0), HVec::Unit(3)) == 0.0);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const HVec u = rand4(rng);
    CHECK(contact::dalpha_eval(u, u) == 0.0);
    CHECK(contact::dalpha_eval(u, contact::standard_I(u)) > 0.0);
    CHECK((contact::standard_I(contact::standard_I(u)) + u).norm() < 1e-15);
  }
  CHECK(contact::standard_I(HVec::Unit(0)) == HVec::Unit(1));
}

TEST_CASE("Reeb field") {
  CHECK(contact::reeb(ContactParams(1.0)) == e5(4));
  const ContactParams half(0.5);
  const Vec5 R = contact::reeb(half);
  CHECK((R - 0.5 * e5(4)).norm() < 1e-15);
  // Defining conditions: alpha(R) = 1 and R has no horizontal part.
  CHECK(contact::alpha_eval(Point5{0.2, 0.4, -1, 3, 0}, R, half) == doctest::Approx(1.0));
  CHECK(R.head<4>().norm() == 0.0);
}

TEST_CASE("horizontal lift and dilation") {
  const ContactParams one(1.0);
  CHECK(contact::lift_vector(Vec4::Zero(), 0.0, HVec(1, 2, 3, 4), one)[4] == 0.0);
  CHECK(contact::lift_vector(Vec4(0, 1, 0, 0), 0.0, HVec::Unit(0), one) == e5(0) + e5(4));
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const Vec4 q = rand4(rng);
    const double r = 0.1 + 0.9 * std::abs(std::tanh(rand4(rng)[0]));
    const Vec5 v = contact::lift_vector(q, 0.7, rand4(rng), ContactParams(r));
    CHECK(std::abs(contact::alpha_eval(Point5::from(q, 0.7), v, ContactParams(r))) < 1e-12);
  }
  CHECK(contact::dilate(Point5{}, 0.3).vec() == Vec5::Zero());
  CHECK(contact::dilate(Point5{1, 1, 1, 1, 1}, 0.5).vec() == Vec5::Constant(2.0));
  const Point5 p{0.3, -0.2, 1.5, 0.9, -4};
  CHECK((contact::dilate(contact::dilate(p, 0.25), 4.0).vec() - p.vec()).norm() < 1e-15);
}

TEST_CASE("volume form is (2/r) det") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  std::array<Vec5, 5> vs;
  Mat5 M;
  for (int k = 0; k < 5; ++k) {
    for (int i = 0; i < 5; ++i) vs[k][i] = g(rng);
    M.col(k) = vs[k];
  }
  for (double r : {1.0, 0.5}) CHECK(contact::volume_form(vs, ContactParams(r)) == doctest::Approx(2.0 / r * M.determinant()));
  std::array<Vec5, 5> basis{e5(0), e5(1), e5(2), e5(3), e5(4)};
  CHECK(contact::volume_form(basis, ContactParams(1.0)) > 0.0);
  CHECK_THROWS_AS(ContactParams(0.0), DomainError);
}
