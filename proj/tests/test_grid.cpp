#include <doctest.h>

#include "legfol/grid.hpp"

#include <cmath>

using namespace legfol;

TEST_CASE("grid geometry and mask") {
  auto g = Grid::make(17);
  CHECK(g->h() == doctest::Approx(0.125));
  CHECK(g->x(g->centre()) == doctest::Approx(0.0));
  CHECK(g->on_boundary(16, 8));
  CHECK(g->on_boundary(8, 0));
  CHECK(g->interior(8, 8));
  CHECK_FALSE(g->in_mask(0, 0));
  CHECK_THROWS_AS(Grid::make(16), DomainError);
  CHECK_THROWS_AS(Grid::make(15), DomainError);
}

TEST_CASE("second derivatives of cubics are exact in free mode") {
  auto g = Grid::make(33, 1.3);
  auto u = [](double x, double y) { return 0.3 + x - 2 * y + x * x - 0.5 * x * y + 2 * y * y + x * x * x - y * y * x; };
  GridFunction f = GridFunction::sample(g, u);
  double err = 0.0;
  for (int j = 0; j < g->n(); ++j)
    for (int i = 0; i < g->n(); ++i) {
      if (!g->in_mask(i, j)) continue;
      const double x = g->x(i), y = g->y(j);
      const NodeDerivs d = f.derivs(BoundaryMode::Free, i, j);
      err = std::max(err, std::abs(d.f11 - (2 + 6 * x)));
      err = std::max(err, std::abs(d.f22 - (4 - 2 * x)));
      err = std::max(err, std::abs(d.f12 - (-0.5 - 2 * y)));
    }
  CHECK(err < 1e-8);
}

TEST_CASE("Dirichlet stencils are second order on a function vanishing on the circle") {
  auto run = [](int n) {
    auto g = Grid::make(n);
    auto u = [](double x, double y) { return (1 - x * x - y * y) * (x + 0.5 * y * y); };
    GridFunction f = GridFunction::sample(g, u);
    double err = 0.0;
    for (int j = 0; j < g->n(); ++j)
      for (int i = 0; i < g->n(); ++i) {
        if (!g->interior(i, j)) continue;
        const double x = g->x(i), y = g->y(j);
        const NodeDerivs d = f.derivs(BoundaryMode::Dirichlet, i, j);
        // u = x + y^2/2 - x^3 - x y^2 - x^2 y^2/2 - y^4/2
        const double ux = 1 - 3 * x * x - y * y - x * y * y;
        const double uy = y - 2 * x * y - x * x * y - 2 * y * y * y;
        err = std::max(err, std::abs(d.f1 - ux));
        err = std::max(err, std::abs(d.f2 - uy));
      }
    return err;
  };
  const double e1 = run(33), e2 = run(65);
  CHECK(e2 < e1 / 3.0);
}

TEST_CASE("bilinear interpolation reproduces affine data") {
  auto g = Grid::make(17);
  GridFunction f = GridFunction::sample(g, [](double x, double y) { return 2 * x - y + 0.5; });
  auto s = f.bilinear(0.11, -0.27);
  REQUIRE(s);
  CHECK(s->value == doctest::Approx(2 * 0.11 + 0.27 + 0.5));
  CHECK(s->dx == doctest::Approx(2.0));
  CHECK(s->dy == doctest::Approx(-1.0));
  CHECK_FALSE(f.bilinear(0.99, 0.99));
}
