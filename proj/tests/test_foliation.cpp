#include <doctest.h>

#include "legfol/acs_io.hpp"
#include "legfol/foliation.hpp"

#include <cmath>

using namespace legfol;

namespace {

// Flat leaves of the standard structure: zeta - w z is constant and the
// height is tau + (r/2)(x1 y1 + x2 y2) relative to the disk centre.
double flat_leaf_error(const LeafDisk& d, cplx w, cplx P, const ComplexCoords& cc, double r) {
  const Grid& g = *d.patch.grid;
  const Vec4 c4 = d.centre.base();
  double m = 0.0;
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) {
      if (!g.in_mask(i, j)) continue;
      const Point5 p = d.patch.point(i, j);
      const auto [zeta, z] = cc.of(p);
      const Vec4 u = p.base() - c4;
      const double t = d.tau + 0.5 * r * (u[0] * u[1] + u[2] * u[3]) + r * (c4[1] * u[0] + c4[3] * u[2]);
      m = std::max({m, std::abs(zeta - w * z - P), std::abs(p.t - t)});
    }
  return m;
}

struct Perturbed {
  double r = 0.25;
  ACSField field = acs::dilated(builtin::perturbed(0.05), 0.25);
  FoliationConfig cfg;
  Perturbed() { cfg.params = ContactParams(r); }
};

}  // namespace

TEST_CASE("foliation config defaults and time grid") {
  FoliationConfig cfg;
  CHECK(cfg.solver.n == 33);
  CHECK(cfg.solver.radius == doctest::Approx(1.5));
  auto t = t_grid(cfg);
  REQUIRE(t.size() == 33);
  CHECK(t.front() == -1.0);
  CHECK(t.back() == 1.0);
  CHECK(t[16] == doctest::Approx(0.0).epsilon(1e-15));
  cfg.t_nodes = 1;
  CHECK_THROWS_AS(t_grid(cfg), DomainError);
}

TEST_CASE("standard structure: polar and parallel disks are flat complex lines") {
  const ACSField f = builtin::standard();
  const ComplexCoords cc(f);
  FoliationConfig cfg;
  const PlaneChart X(cplx(0.4, -0.2));
  const LeafDisk polar = polar_disk(X, 0.3, f, cfg);
  CHECK(flat_leaf_error(polar, X.w, 0.0, cc, 1.0) < 1e-9);
  const cplx P(0.2, 0.1);
  const LeafDisk par = parallel_disk(P, X, -0.2, f, cfg);
  CHECK(flat_leaf_error(par, X.w, P, cc, 1.0) < 1e-9);
}

TEST_CASE("standard structure: lookup returns the identity guess") {
  const ACSField f = builtin::standard();
  const ComplexCoords cc(f);
  FoliationConfig cfg;
  const Point5 q = Point5::from(cc.point(cplx(0.1, 0.05), cplx(0.5, -0.3)), 0.2);
  const LookupResult lk = leaf_through_polar(q, f, cfg);
  CHECK(std::abs(lk.X.w - lk.identity_guess) < 1e-9);
  CHECK(lk.residual < cfg.lookup_tol);
  const LookupResult pl = leaf_through_parallel(q, PlaneChart(cplx(0.2, 0.0)), f, cfg);
  CHECK(std::abs(pl.P - pl.identity_guess) < 1e-9);
}

TEST_CASE("lookup rejects points near the zeta line and outside the region") {
  const ACSField f = builtin::standard();
  const ComplexCoords cc(f);
  FoliationConfig cfg;
  CHECK_THROWS_AS(leaf_through_polar(Point5::from(cc.point(0.001, 0.005), 0.0), f, cfg), DomainError);
  CHECK_THROWS_AS(leaf_through_polar(Point5::from(cc.point(0.6, 0.5), 0.0), f, cfg), DomainError);
  CHECK_THROWS_AS(leaf_through_polar(Point5::from(cc.point(0.1, 0.5), 0.8), f, cfg), DomainError);
  CHECK_THROWS_AS(leaf_through_parallel(Point5::from(cc.point(1.2, 0.5), 0.0), PlaneChart(0.0), f, cfg),
                  DomainError);
}

TEST_CASE("perturbed structure: a leaf point is found again on its own leaf") {
  Perturbed s;
  const PlaneChart X(cplx(0.3, 0.1));
  const Leaf leaf = build_polar_leaf(X, s.field, s.cfg);
  const auto smp = leaf.sample(0.1, 0.4, -0.3);
  REQUIRE(smp);
  const Point5 q = smp->p;
  const LookupResult lk = leaf_through_polar(q, s.field, s.cfg);
  CHECK(std::abs(lk.X.w - X.w) < 1e-6);
  CHECK(lk.tau == doctest::Approx(0.1).epsilon(1e-6));
  // Rebuild the disk from scratch and check that it contains q.
  const ComplexCoords cc(s.field);
  const auto [zeta, z] = cc.of(q);
  const LeafDisk d = polar_disk(lk.X, lk.tau, s.field, s.cfg);
  const auto ov = disk_over(d.patch, cc, z);
  REQUIRE(ov);
  CHECK(std::abs(ov->first - zeta) < 1e-6);
  CHECK(std::abs(ov->second - q.t) < 1e-6);

  CHECK(polar_gap(q, X, s.field, s.cfg) < 1e-8);
  CHECK(polar_gap(q, PlaneChart(cplx(0.0, 0.1)), s.field, s.cfg) > 0.05);

  SUBCASE("transverse patch meets the leaf once, positively") {
    const PsiInverse inv = psi_invert(q, PlaneChart(cplx(-0.5, 0.4)), s.field, s.cfg.solver, s.cfg.params);
    const auto recs = intersect(leaf, inv.solution.patch);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].transversal);
    CHECK(recs[0].sign == 1);
    CHECK((recs[0].point.vec() - q.vec()).norm() < 1e-8);
  }
  SUBCASE("regraph vanishes to first order at the centre") {
    const Regraph rg = regraph(leaf.disks[16].patch, X, cc);
    const int c = rg.F_re.grid().centre();
    CHECK(rg.F_re(c, c) == 0.0);
    CHECK(rg.F_im(c, c) == 0.0);
    CHECK(rg.sup_F < 0.01);
  }
}

TEST_CASE("standard structure: regraph of a flat disk is zero") {
  const ACSField f = builtin::standard();
  const ComplexCoords cc(f);
  FoliationConfig cfg;
  const PlaneChart X(cplx(0.25, 0.25));
  const LeafDisk d = polar_disk(X, 0.0, f, cfg);
  const Regraph rg = regraph(d.patch, X, cc);
  CHECK(rg.sup_F < 1e-9);
  CHECK(rg.sup_dF < 1e-8);
  CHECK(std::abs(rg.centre_value) < 1e-9);
}

TEST_CASE("leaf manifest lists every disk") {
  const ACSField f = builtin::standard();
  FoliationConfig cfg;
  cfg.t_nodes = 3;
  const Leaf leaf = build_parallel_leaf(cplx(0.1, 0.0), PlaneChart(0.0), f, cfg);
  const auto m = leaf.manifest();
  CHECK(m["kind"] == "parallel");
  CHECK(m["disks"].size() == 3);
  CHECK(m["disks"][2]["file"] == "disk_002.csv");
  CHECK_FALSE(leaf.sample(1.5, 0.0, 0.0));
}
