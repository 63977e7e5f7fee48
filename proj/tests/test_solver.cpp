#include <doctest.h>

#include "legfol/acs_io.hpp"
#include "legfol/solver.hpp"

#include <cmath>

using namespace legfol;

namespace {

SolverConfig small_config() {
  SolverConfig cfg;
  cfg.n = 33;
  return cfg;
}

}  // namespace

TEST_CASE("elliptic operator is exact on a quadratic vanishing on the circle") {
  Eigen::Matrix2d M;
  M << 2.0, 0.3, 0.3, 1.0;
  const auto g = Grid::make(33);
  const EllipticOperator op(M, g);
  const GridFunction exact = GridFunction::sample(g, [](double x, double y) { return x * x + y * y - 1.0; });
  const GridFunction rhs = GridFunction::sample(g, [&](double, double) { return 2.0 * (M(0, 0) + M(1, 1)); });
  const GridFunction u = op.solve(rhs);
  CHECK((u - exact).sup_norm() < 1e-10);
  CHECK(op.ellipticity() == doctest::Approx((3.0 - std::sqrt(1.0 + 4 * 0.09)) / 2));
}

TEST_CASE("inverse norm of the Laplacian approaches the torsion bound 1/4") {
  const EllipticOperator op(Eigen::Matrix2d::Identity(), Grid::make(65));
  CHECK(op.inverse_sup_norm() == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("adapted chart is unitary and puts the structure in model form") {
  const ACSField f = builtin::perturbed(0.2);
  const Point5 P{0.1, -0.2, 0.05, 0.1, 0.3};
  const AdaptedChart ch = adapt_chart(P, PlaneChart(cplx(0.3, -0.4)), f);
  const Mat4& R = ch.rotation;
  CHECK((R.transpose() * R - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  const Mat4& I = contact::standard_I_matrix();
  CHECK((R * I - I * R).cwiseAbs().maxCoeff() < 1e-12);
  const auto m = acs::read_model(ch.adapted_J(acs::j_matrix(f, P)));
  CHECK(m.residual < 1e-10);
  CHECK((ch.to_adapted(ch.to_working(Vec4(0.1, 0.2, 0.3, 0.4))) - Vec4(0.1, 0.2, 0.3, 0.4)).norm() < 1e-14);
  CHECK(ch.to_json().contains("rotation"));
}

TEST_CASE("constant structures have flat disks") {
  for (const ACSField& f : {builtin::standard(), ACSField::constant(0.3, 0.2, 1.2, -0.1)}) {
    const DiskSolution sol = picard_solve(Point5{0.2, 0.1, -0.3, 0.2, 0.4}, PlaneChart(cplx(0.5, 0.2)), f,
                                          small_config());
    CHECK(sol.f.sup_norm() <= 1e-12);
    CHECK(sol.iterations <= 2);
    CHECK(sol.legendrian_residual < 1e-12);
  }
}

TEST_CASE("perturbed disk passes near P, nearly tangent to X") {
  SolverConfig cfg = small_config();
  const ACSField raw = builtin::perturbed(0.05);
  const DilationChoice dc = choose_dilation(raw, cfg);
  CHECK(dc.smallness.holds);
  CHECK(dc.epsilon <= dc.smallness.threshold);
  const ACSField f = acs::dilated(raw, dc.r);
  const Point5 P{0.1, 0.2, -0.1, 0.05, 0.2};
  const PlaneChart X(cplx(0.2, 0.1));
  const DiskSolution sol = picard_solve(P, X, f, cfg, ContactParams(dc.r));
  const int c = sol.f.grid().centre();
  // f vanishes on the boundary only; the offset at the centre is what psi measures.
  const double off = (sol.patch.point(c, c).vec() - P.vec()).norm();
  CHECK(off > 0.0);
  CHECK(off < 1e-3);
  CHECK(tangent_plane(sol.patch, c, c, f).distance(X) < 1e-2);
  CHECK(sol.max_ratio() < 1.0);
  CHECK(sol.legendrian_residual < 1e-5);
  REQUIRE(sol.smallness);
  CHECK(sol.smallness->holds);
}

TEST_CASE("smallness violation is an error when enforced") {
  SolverConfig cfg = small_config();
  const ACSField f = builtin::perturbed(0.5);
  CHECK_THROWS_AS(picard_solve(Point5{}, PlaneChart{}, f, cfg), DomainError);
  cfg.enforce_smallness = false;
  cfg.measure_smallness = false;
  CHECK_NOTHROW(picard_solve(Point5{}, PlaneChart{}, builtin::perturbed(0.05), cfg));
}

TEST_CASE("psi after psi_invert is the identity") {
  SolverConfig cfg = small_config();
  const double r = 0.25;
  const ACSField f = acs::dilated(builtin::perturbed(0.05), r);
  cfg.enforce_smallness = false;
  const Point5 Q{0.2, -0.1, 0.3, 0.1, 0.2};
  const PlaneChart Y(cplx(-0.3, 0.2));
  const PsiInverse inv = psi_invert(Q, Y, f, cfg, ContactParams(r));
  const PsiResult back = psi(inv.P, inv.X, f, cfg, ContactParams(r));
  CHECK((back.Q.vec() - Q.vec()).norm() < 1e-6);
  CHECK(back.Y.distance(Y) < 1e-6);
  CHECK(inv.P.x1 == Q.x1);
  CHECK(inv.P.y2 == Q.y2);
}

TEST_CASE("dilation choice for the standard structure is trivial") {
  const DilationChoice dc = choose_dilation(builtin::standard(), small_config());
  CHECK(dc.r == 1.0);
  CHECK(dc.halvings == 0);
  CHECK(dc.to_json().contains("smallness"));
}
