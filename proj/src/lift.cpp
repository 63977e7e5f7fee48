#include "legfol/lift.hpp"

#include <random>

namespace legfol {

Surface4::Surface4(GridPtr g) : grid(std::move(g)) {
  for (auto& c : coords) c = GridFunction(grid);
}

Vec4 Surface4::point(int i, int j) const {
  return Vec4(coords[0](i, j), coords[1](i, j), coords[2](i, j), coords[3](i, j));
}

std::pair<Vec4, Vec4> Surface4::tangents(int i, int j) const {
  Vec4 a, b;
  for (int k = 0; k < 4; ++k) {
    a[k] = coords[static_cast<std::size_t>(k)].derivative(BoundaryMode::Free, Deriv::d1, i, j);
    b[k] = coords[static_cast<std::size_t>(k)].derivative(BoundaryMode::Free, Deriv::d2, i, j);
  }
  return {a, b};
}

Surface4 lagrangian_graph(const GridFunction& f, BoundaryMode mode) {
  Surface4 L(f.grid_ptr());
  const Grid& g = f.grid();
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) {
      if (!g.in_mask(i, j)) continue;
      L.coords[0](i, j) = g.x(i);
      L.coords[1](i, j) = f.derivative(mode, Deriv::d1, i, j);
      L.coords[2](i, j) = -f.derivative(mode, Deriv::d2, i, j);
      L.coords[3](i, j) = g.y(j);
    }
  return L;
}

double closedness_residual(const Surface4& L, const ContactParams& params) {
  const Grid& g = *L.grid;
  double worst = 0.0;
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) {
      if (!g.in_mask(i, j)) continue;
      const auto [a, b] = L.tangents(i, j);
      worst = std::max(worst, params.r * std::abs(contact::dalpha_eval(a, b)));
    }
  return worst;
}

namespace {

double chord(const Vec4& A, const Vec4& B, double r) {
  return r * (0.5 * (A[1] + B[1]) * (B[0] - A[0]) + 0.5 * (A[3] + B[3]) * (B[2] - A[2]));
}

// Staircase sweep from the centre: first along one axis through the centre,
// then along the other axis.
GridFunction sweep(const Surface4& L, double t0, double r, bool x_first) {
  const Grid& g = *L.grid;
  const int c = g.centre();
  const int n = g.n();
  GridFunction t(L.grid);
  auto step = [&](int i0, int j0, int i1, int j1) {
    t(i1, j1) = t(i0, j0) + chord(L.point(i0, j0), L.point(i1, j1), r);
  };
  t(c, c) = t0;
  if (x_first) {
    for (int i = c + 1; i < n; ++i) step(i - 1, c, i, c);
    for (int i = c - 1; i >= 0; --i) step(i + 1, c, i, c);
    for (int i = 0; i < n; ++i) {
      if (!g.in_mask(i, c)) continue;
      for (int j = c + 1; j < n && g.in_mask(i, j); ++j) step(i, j - 1, i, j);
      for (int j = c - 1; j >= 0 && g.in_mask(i, j); --j) step(i, j + 1, i, j);
    }
  } else {
    for (int j = c + 1; j < n; ++j) step(c, j - 1, c, j);
    for (int j = c - 1; j >= 0; --j) step(c, j + 1, c, j);
    for (int j = 0; j < n; ++j) {
      if (!g.in_mask(c, j)) continue;
      for (int i = c + 1; i < n && g.in_mask(i, j); ++i) step(i - 1, j, i, j);
      for (int i = c - 1; i >= 0 && g.in_mask(i, j); --i) step(i + 1, j, i, j);
    }
  }
  return t;
}

}  // namespace

LiftResult legendrian_lift(const Surface4& L, const Point5& start, const ContactParams& params,
                           bool check_closedness) {
  const Grid& g = *L.grid;
  const int c = g.centre();
  const Vec4 centre = L.point(c, c);
  if ((start.base() - centre).norm() > 1e-9 * std::max(1.0, centre.norm())) {
    throw DomainError("legendrian_lift: start point is not over the centre node");
  }
  LiftResult out;
  out.closedness = closedness_residual(L, params);
  const double tol = 10.0 * g.h() * g.h();
  if (check_closedness && out.closedness > tol) {
    throw DomainError("legendrian_lift: closedness residual " + std::to_string(out.closedness) +
                      " exceeds 10 h^2; input surface is not Lagrangian");
  }
  out.t = sweep(L, start.t, params.r, true);
  const GridFunction other = sweep(L, start.t, params.r, false);
  out.sweep_discrepancy = (out.t - other).sup_norm();
  return out;
}

double loop_residual(const Surface4& L, const ContactParams& params, int n_loops, unsigned seed) {
  const Grid& g = *L.grid;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, g.n() - 1);
  auto path = [&](int i0, int j0, int i1, int j1, bool x_first) {
    double acc = 0.0;
    int i = i0, j = j0;
    auto walk_i = [&]() {
      while (i != i1) {
        const int ni = i + (i1 > i ? 1 : -1);
        acc += chord(L.point(i, j), L.point(ni, j), params.r);
        i = ni;
      }
    };
    auto walk_j = [&]() {
      while (j != j1) {
        const int nj = j + (j1 > j ? 1 : -1);
        acc += chord(L.point(i, j), L.point(i, nj), params.r);
        j = nj;
      }
    };
    if (x_first) {
      walk_i();
      walk_j();
    } else {
      walk_j();
      walk_i();
    }
    return acc;
  };
  double worst = 0.0;
  int done = 0;
  for (int attempt = 0; done < n_loops && attempt < 1000 * n_loops; ++attempt) {
    const int i0 = pick(rng), j0 = pick(rng), i1 = pick(rng), j1 = pick(rng);
    if (!g.in_mask(i0, j0) || !g.in_mask(i1, j1) || !g.in_mask(i0, j1) || !g.in_mask(i1, j0)) continue;
    if (i0 == i1 || j0 == j1) continue;
    worst = std::max(worst, std::abs(path(i0, j0, i1, j1, true) - path(i0, j0, i1, j1, false)));
    ++done;
  }
  return worst;
}

Point5 LegendrianPatch::point(int i, int j) const {
  return {coords[0](i, j), coords[1](i, j), coords[2](i, j), coords[3](i, j), coords[4](i, j)};
}

Vec5 LegendrianPatch::t1(int i, int j) const {
  Vec5 v;
  for (int k = 0; k < 5; ++k) v[k] = tangent1[static_cast<std::size_t>(k)](i, j);
  return v;
}

Vec5 LegendrianPatch::t2(int i, int j) const {
  Vec5 v;
  for (int k = 0; k < 5; ++k) v[k] = tangent2[static_cast<std::size_t>(k)](i, j);
  return v;
}

std::optional<LegendrianPatch::Sample> LegendrianPatch::sample(double s1, double s2) const {
  Sample out;
  Vec5 p;
  for (int k = 0; k < 5; ++k) {
    const auto sk = coords[static_cast<std::size_t>(k)].bilinear(s1, s2);
    if (!sk) return std::nullopt;
    p[k] = sk->value;
    out.ds1[k] = sk->dx;
    out.ds2[k] = sk->dy;
    out.t1[k] = tangent1[static_cast<std::size_t>(k)].bilinear(s1, s2)->value;
    out.t2[k] = tangent2[static_cast<std::size_t>(k)].bilinear(s1, s2)->value;
  }
  out.p = Point5::from(p);
  return out;
}

void LegendrianPatch::write_csv(std::ostream& os) const {
  os << "i,j,s1,s2,x1,y1,x2,y2,t\n";
  os.precision(17);
  const Grid& g = *grid;
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) {
      if (!g.in_mask(i, j)) continue;
      os << i << ',' << j << ',' << g.x(i) << ',' << g.y(j);
      for (int k = 0; k < 5; ++k) os << ',' << coords[static_cast<std::size_t>(k)](i, j);
      os << '\n';
    }
}

LegendrianPatch make_patch(const Surface4& L, const GridFunction& t, const Point5& start,
                           const ContactParams& params) {
  LegendrianPatch p;
  p.grid = L.grid;
  p.start = start;
  p.params = params;
  for (int k = 0; k < 4; ++k) p.coords[static_cast<std::size_t>(k)] = L.coords[static_cast<std::size_t>(k)];
  p.coords[4] = t;
  for (int k = 0; k < 5; ++k) {
    p.tangent1[static_cast<std::size_t>(k)] = GridFunction(L.grid);
    p.tangent2[static_cast<std::size_t>(k)] = GridFunction(L.grid);
  }
  const Grid& g = *L.grid;
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) {
      if (!g.in_mask(i, j)) continue;
      for (int k = 0; k < 5; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        p.tangent1[kk](i, j) = p.coords[kk].derivative(BoundaryMode::Free, Deriv::d1, i, j);
        p.tangent2[kk](i, j) = p.coords[kk].derivative(BoundaryMode::Free, Deriv::d2, i, j);
      }
    }
  return p;
}

std::optional<PatchSolve> solve_on_patch(const LegendrianPatch& patch, const Eigen::Matrix<double, 2, 5>& A,
                                         const Eigen::Vector2d& target, double s1, double s2, double tol) {
  auto smp = patch.sample(s1, s2);
  if (!smp) return std::nullopt;
  Eigen::Vector2d F = A * smp->p.vec() - target;
  for (int it = 0; it < 80 && F.norm() > tol; ++it) {
    Eigen::Matrix2d Jac;
    Jac.col(0) = A * smp->ds1;
    Jac.col(1) = A * smp->ds2;
    if (!(std::abs(Jac.determinant()) > 1e-14)) return std::nullopt;
    const Eigen::Vector2d step = Jac.partialPivLu().solve(F);
    double lam = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt, lam *= 0.5) {
      auto trial = patch.sample(s1 - lam * step[0], s2 - lam * step[1]);
      if (!trial) continue;
      const Eigen::Vector2d Ft = A * trial->p.vec() - target;
      if (Ft.norm() < F.norm()) {
        s1 -= lam * step[0];
        s2 -= lam * step[1];
        smp = trial;
        F = Ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!(F.norm() <= std::max(tol, 1e-10))) return std::nullopt;
  return PatchSolve{s1, s2, *smp};
}

double legendrian_residual(const LegendrianPatch& patch) {
  const Grid& g = *patch.grid;
  double worst = 0.0;
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) {
      if (!g.in_mask(i, j)) continue;
      const Point5 p = patch.point(i, j);
      worst = std::max(worst, std::abs(contact::alpha_eval(p, patch.t1(i, j), patch.params)));
      worst = std::max(worst, std::abs(contact::alpha_eval(p, patch.t2(i, j), patch.params)));
    }
  return worst;
}

PlaneChart tangent_plane(const LegendrianPatch& patch, int i, int j, const JMatrix& J) {
  if (!patch.grid->in_mask(i, j)) throw DomainError("tangent_plane: node outside the mask");
  const Vec4 a = patch.t1(i, j).head<4>();
  const Vec4 b = patch.t2(i, j).head<4>();
  const auto [u, v] = orthonormalize(a, b);
  return PlaneChart::from_vectors(u, v, ComplexFrame(J));
}

PlaneChart tangent_plane(const LegendrianPatch& patch, int i, int j, const ACSField& field) {
  return tangent_plane(patch, i, j, acs::j_matrix(field, patch.point(i, j)));
}

}  // namespace legfol
