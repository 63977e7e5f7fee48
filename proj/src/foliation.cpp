#include "legfol/foliation.hpp"

#include "legfol/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace legfol {

namespace {

nlohmann::json point_json(const Point5& p) { return {p.x1, p.y1, p.x2, p.y2, p.t}; }
nlohmann::json cplx_json(cplx c) { return {c.real(), c.imag()}; }

// Rows giving Re z and Im z of the R^4 part of a point.
Eigen::Matrix<double, 2, 5> z_rows(const ComplexCoords& cc) {
  Eigen::Matrix<double, 2, 5> A = Eigen::Matrix<double, 2, 5>::Zero();
  for (int k = 0; k < 4; ++k) {
    Vec4 e = Vec4::Zero();
    e[k] = 1.0;
    const cplx z = cc.frame().to_complex(e).second;
    A(0, k) = z.real();
    A(1, k) = z.imag();
  }
  return A;
}

}  // namespace

ComplexCoords::ComplexCoords(const ACSField& field) : frame_(acs::j_matrix(field, Point5{})) {}

FoliationConfig::FoliationConfig() {
  solver.n = 33;
  solver.radius = 1.5;
  solver.enforce_smallness = false;
  solver.measure_smallness = false;
}

nlohmann::json FoliationConfig::to_json() const {
  return {{"solver", solver.to_json()}, {"t_nodes", t_nodes},       {"t_min", t_min},
          {"t_max", t_max},             {"lookup_tol", lookup_tol}, {"lookup_max_iter", lookup_max_iter},
          {"psi_tol", psi_tol},         {"r", params.r}};
}

HVec adapted_direction(const PlaneChart& X, const Point5& p, const ACSField& field) {
  const JMatrix J = acs::j_matrix(field, p);
  const auto [a, b] = X.basis(J);
  const auto [e, f] = orthonormalize(a, b);
  HVec V = e * e[0] + f * f[0];
  if (V.norm() < 1e-8) throw DomainError("adapted_direction: dx1 projects to zero on the plane");
  return V.normalized();
}

PlaneChart plane_through(const HVec& V, const Point5& p, const ACSField& field) {
  const JMatrix J = acs::j_matrix(field, p);
  return PlaneChart::from_vectors(V, J * V, ComplexFrame(J));
}

namespace {

LeafDisk disk_through(const Point5& c, const PlaneChart& tangent, double tau, const ACSField& field,
                      const FoliationConfig& cfg, std::optional<std::pair<Point5, PlaneChart>> warm) {
  PsiInverse inv = psi_invert(c, tangent, field, cfg.solver, cfg.params, std::move(warm), cfg.psi_tol);
  LeafDisk d;
  d.tau = tau;
  d.centre = c;
  d.tangent = tangent;
  d.P = inv.P;
  d.X = inv.X;
  d.patch = std::move(inv.solution.patch);
  return d;
}

}  // namespace

LeafDisk polar_disk(const PlaneChart& X, double tau, const ACSField& field, const FoliationConfig& cfg,
                    std::optional<std::pair<Point5, PlaneChart>> warm) {
  const HVec V = adapted_direction(X, Point5{}, field);
  Point5 c;
  c.t = tau;
  return disk_through(c, plane_through(V, c, field), tau, field, cfg, std::move(warm));
}

LeafDisk parallel_disk(cplx P, const PlaneChart& X, double tau, const ACSField& field, const FoliationConfig& cfg,
                       std::optional<std::pair<Point5, PlaneChart>> warm) {
  const ComplexCoords cc(field);
  const HVec V = adapted_direction(X, Point5{}, field);
  const Point5 c = Point5::from(cc.point(P, 0.0), tau);
  return disk_through(c, plane_through(V, c, field), tau, field, cfg, std::move(warm));
}

std::vector<double> t_grid(const FoliationConfig& cfg) {
  if (cfg.t_nodes < 2 || !(cfg.t_max > cfg.t_min)) throw DomainError("t_grid: need at least two increasing nodes");
  std::vector<double> t(static_cast<std::size_t>(cfg.t_nodes));
  for (int k = 0; k < cfg.t_nodes; ++k)
    t[static_cast<std::size_t>(k)] = cfg.t_min + (cfg.t_max - cfg.t_min) * k / (cfg.t_nodes - 1);
  return t;
}

Leaf build_polar_leaf(const PlaneChart& X, const ACSField& field, const FoliationConfig& cfg) {
  Leaf leaf;
  leaf.kind = LeafKind::Polar;
  leaf.X = X;
  const auto ts = t_grid(cfg);
  leaf.disks.resize(ts.size());
  parallel_for(static_cast<int>(ts.size()), [&](int k) {
    leaf.disks[static_cast<std::size_t>(k)] = polar_disk(X, ts[static_cast<std::size_t>(k)], field, cfg);
  });
  return leaf;
}

Leaf build_parallel_leaf(cplx P, const PlaneChart& X, const ACSField& field, const FoliationConfig& cfg) {
  Leaf leaf;
  leaf.kind = LeafKind::Parallel;
  leaf.X = X;
  leaf.P = P;
  const auto ts = t_grid(cfg);
  leaf.disks.resize(ts.size());
  parallel_for(static_cast<int>(ts.size()), [&](int k) {
    leaf.disks[static_cast<std::size_t>(k)] = parallel_disk(P, X, ts[static_cast<std::size_t>(k)], field, cfg);
  });
  return leaf;
}

std::optional<Leaf::Sample> Leaf::sample(double tau, double s1, double s2) const {
  if (disks.size() < 2) return std::nullopt;
  const double t0 = disks.front().tau, tN = disks.back().tau;
  if (tau < t0 - 1e-12 || tau > tN + 1e-12) return std::nullopt;
  std::size_t k = 0;
  while (k + 2 < disks.size() && tau > disks[k + 1].tau) ++k;
  const LeafDisk& A = disks[k];
  const LeafDisk& B = disks[k + 1];
  const auto a = A.patch.sample(s1, s2);
  const auto b = B.patch.sample(s1, s2);
  if (!a || !b) return std::nullopt;
  const double dt = B.tau - A.tau;
  const double lam = (tau - A.tau) / dt;
  Sample out;
  out.p = Point5::from(Vec5((1 - lam) * a->p.vec() + lam * b->p.vec()));
  out.d_tau = (b->p.vec() - a->p.vec()) / dt;
  out.d_s1 = (1 - lam) * a->ds1 + lam * b->ds1;
  out.d_s2 = (1 - lam) * a->ds2 + lam * b->ds2;
  return out;
}

nlohmann::json Leaf::manifest() const {
  nlohmann::json j;
  j["kind"] = kind == LeafKind::Polar ? "polar" : "parallel";
  j["X"] = cplx_json(X.w);
  if (kind == LeafKind::Parallel) j["P"] = cplx_json(P);
  j["orientation"] = kOrientation;
  j["disks"] = nlohmann::json::array();
  for (std::size_t k = 0; k < disks.size(); ++k) {
    const auto& d = disks[k];
    std::ostringstream name;
    name << "disk_" << std::setw(3) << std::setfill('0') << k << ".csv";
    j["disks"].push_back({{"tau", d.tau},
                          {"centre", point_json(d.centre)},
                          {"tangent", cplx_json(d.tangent.w)},
                          {"solver_P", point_json(d.P)},
                          {"solver_X", cplx_json(d.X.w)},
                          {"n", d.patch.grid->n()},
                          {"R", d.patch.grid->R()},
                          {"file", name.str()}});
  }
  return j;
}

void Leaf::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  const nlohmann::json m = manifest();
  std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
  for (std::size_t k = 0; k < disks.size(); ++k) {
    std::ofstream os(dir / m["disks"][k]["file"].get<std::string>());
    disks[k].patch.write_csv(os);
  }
}

std::optional<std::pair<cplx, double>> disk_over(const LegendrianPatch& patch, const ComplexCoords& cc, cplx z) {
  const auto hit = solve_on_patch(patch, z_rows(cc), Eigen::Vector2d(z.real(), z.imag()), 0.0, 0.0, 1e-14);
  if (!hit) return std::nullopt;
  const cplx zeta = cc.of(hit->sample.p).first;
  return std::pair{zeta, hit->sample.p.t};
}

nlohmann::json LookupResult::to_json() const {
  return {{"X", cplx_json(X.w)},
          {"P", cplx_json(P)},
          {"tau", tau},
          {"iterations", iterations},
          {"residual", residual},
          {"identity_guess", cplx_json(identity_guess)}};
}

namespace {

void check_growth(double res, double& prev, int& growing, const char* who) {
  growing = res > prev ? growing + 1 : 0;
  prev = res;
  if (growing >= 3) throw ConvergenceError(std::string(who) + ": inversion diverges (epsilon too large)");
}

}  // namespace

LookupResult leaf_through_polar(const Point5& q, const ACSField& field, const FoliationConfig& cfg,
                                std::optional<std::pair<cplx, double>> start) {
  const ComplexCoords cc(field);
  const auto [zq_zeta, zq] = cc.of(q);
  const cplx zetaq = zq_zeta;
  if (std::abs(zq) < 1e-2) throw DomainError("leaf_through_polar: |z_q| < 1e-2 is not supported");
  if (std::abs(zq) > 1.0 + 1e-9 || std::abs(zetaq) > std::abs(zq) * (1.0 + 1e-9) || std::abs(q.t) > 0.5 + 1e-9)
    throw DomainError("leaf_through_polar: q outside the region |zeta| <= |z| <= 1, |t| <= 1/2");
  LookupResult out;
  out.identity_guess = zetaq / zq;
  cplx w = start ? start->first : out.identity_guess;
  double tau = start ? start->second : q.t;
  std::optional<std::pair<Point5, PlaneChart>> warm;
  double prev = std::numeric_limits<double>::infinity();
  int growing = 0;
  for (int it = 0; it < cfg.lookup_max_iter; ++it) {
    const LeafDisk disk = polar_disk(PlaneChart(w), tau, field, cfg, warm);
    warm = std::pair{disk.P, disk.X};
    const auto ov = disk_over(disk.patch, cc, zq);
    if (!ov) throw ConvergenceError("leaf_through_polar: disk does not reach z_q");
    const cplx dz = ov->first - zetaq;
    const double dt = ov->second - q.t;
    const double res = std::max(std::abs(dz), std::abs(dt));
    out.iterations = it + 1;
    out.residual = res;
    if (res < cfg.lookup_tol) {
      out.X = PlaneChart(w);
      out.tau = tau;
      return out;
    }
    check_growth(res, prev, growing, "leaf_through_polar");
    w -= dz / zq;
    tau -= dt;
  }
  throw ConvergenceError("leaf_through_polar: no convergence");
}

LookupResult leaf_through_parallel(const Point5& q, const PlaneChart& X, const ACSField& field,
                                   const FoliationConfig& cfg) {
  const ComplexCoords cc(field);
  const auto [zetaq, zq] = cc.of(q);
  if (std::abs(zq) > 1.0 + 1e-9 || std::abs(zetaq) > 1.0 + 1e-9 || std::abs(q.t) > 0.5 + 1e-9)
    throw DomainError("leaf_through_parallel: q outside the region |zeta| <= 1, |z| <= 1, |t| <= 1/2");
  LookupResult out;
  out.X = X;
  out.identity_guess = zetaq - X.w * zq;
  cplx P = out.identity_guess;
  double tau = q.t;
  std::optional<std::pair<Point5, PlaneChart>> warm;
  double prev = std::numeric_limits<double>::infinity();
  int growing = 0;
  for (int it = 0; it < cfg.lookup_max_iter; ++it) {
    const LeafDisk disk = parallel_disk(P, X, tau, field, cfg, warm);
    warm = std::pair{disk.P, disk.X};
    const auto ov = disk_over(disk.patch, cc, zq);
    if (!ov) throw ConvergenceError("leaf_through_parallel: disk does not reach z_q");
    const cplx dz = ov->first - zetaq;
    const double dt = ov->second - q.t;
    const double res = std::max(std::abs(dz), std::abs(dt));
    out.iterations = it + 1;
    out.residual = res;
    if (res < cfg.lookup_tol) {
      out.P = P;
      out.tau = tau;
      return out;
    }
    check_growth(res, prev, growing, "leaf_through_parallel");
    P -= dz;
    tau -= dt;
  }
  throw ConvergenceError("leaf_through_parallel: no convergence");
}

namespace {

template <class DiskAt>
double vertical_gap(const Point5& q, const ComplexCoords& cc, const FoliationConfig& cfg, DiskAt&& disk_at) {
  const auto [zetaq, zq] = cc.of(q);
  double tau = q.t;
  std::optional<std::pair<Point5, PlaneChart>> warm;
  for (int it = 0; it < cfg.lookup_max_iter; ++it) {
    const LeafDisk disk = disk_at(tau, warm);
    warm = std::pair{disk.P, disk.X};
    const auto ov = disk_over(disk.patch, cc, zq);
    if (!ov) throw ConvergenceError("leaf gap: disk does not reach z_q");
    const double dt = ov->second - q.t;
    if (std::abs(dt) < cfg.lookup_tol) return std::abs(ov->first - zetaq);
    tau -= dt;
  }
  throw ConvergenceError("leaf gap: no convergence in t");
}

}  // namespace

double polar_gap(const Point5& q, const PlaneChart& X, const ACSField& field, const FoliationConfig& cfg) {
  const ComplexCoords cc(field);
  return vertical_gap(q, cc, cfg, [&](double tau, auto warm) { return polar_disk(X, tau, field, cfg, warm); });
}

double parallel_gap(const Point5& q, cplx P, const PlaneChart& X, const ACSField& field, const FoliationConfig& cfg) {
  const ComplexCoords cc(field);
  return vertical_gap(q, cc, cfg, [&](double tau, auto warm) { return parallel_disk(P, X, tau, field, cfg, warm); });
}

Regraph regraph(const LegendrianPatch& patch, const PlaneChart& base, const ComplexCoords& cc, double rho, int n) {
  Regraph out;
  out.base_w = base.w;
  out.rho = rho;
  const Grid& pg = *patch.grid;
  const int c = pg.centre();
  const auto [zeta_c, z_c] = cc.of(patch.point(c, c));
  out.centre_z = z_c;
  out.centre_value = zeta_c - base.w * z_c;
  auto G_of = [&](const Vec4& v) {
    const auto [a, b] = cc.frame().to_complex(v);
    return std::pair{a - base.w * b, b};
  };
  const auto [g1, z1] = G_of(patch.t1(c, c).head<4>());
  const auto [g2, z2] = G_of(patch.t2(c, c).head<4>());
  Eigen::Matrix2d Dz, Dg;
  Dz << z1.real(), z2.real(), z1.imag(), z2.imag();
  Dg << g1.real(), g2.real(), g1.imag(), g2.imag();
  if (std::abs(Dz.determinant()) < 1e-12) throw DomainError("regraph: patch is not a graph over the base plane");
  out.derivative = Dg * Dz.inverse();

  const GridPtr grid = Grid::make(n, rho);
  out.F_re = GridFunction(grid);
  out.F_im = GridFunction(grid);
  for (int j = 0; j < grid->n(); ++j)
    for (int i = 0; i < grid->n(); ++i) {
      if (!grid->in_mask(i, j)) continue;
      const cplx dz(grid->x(i), grid->y(j));
      const auto ov = disk_over(patch, cc, z_c + dz);
      if (!ov) throw DomainError("regraph: patch is not graph-like over the base disk");
      const cplx G = ov->first - base.w * (z_c + dz);
      const Eigen::Vector2d lin = out.derivative * Eigen::Vector2d(dz.real(), dz.imag());
      const cplx F = G - out.centre_value - cplx(lin[0], lin[1]);
      out.F_re(i, j) = F.real();
      out.F_im(i, j) = F.imag();
      out.sup_F = std::max(out.sup_F, std::abs(F));
    }
  for (int j = 0; j < grid->n(); ++j)
    for (int i = 0; i < grid->n(); ++i) {
      if (!grid->in_mask(i, j)) continue;
      for (const auto* F : {&out.F_re, &out.F_im}) {
        out.sup_dF = std::max({out.sup_dF, std::abs(F->derivative(BoundaryMode::Free, Deriv::d1, i, j)),
                               std::abs(F->derivative(BoundaryMode::Free, Deriv::d2, i, j))});
      }
    }
  return out;
}

nlohmann::json IntersectionRecord::to_json() const {
  return {{"point", point_json(point)}, {"sign", sign},   {"rcond", rcond}, {"transversal", transversal},
          {"leaf_params", {tau, a1, a2}}, {"patch_params", {b1, b2}}};
}

std::vector<IntersectionRecord> intersect(const Leaf& leaf, const LegendrianPatch& patch, double rcond_min) {
  std::vector<IntersectionRecord> out;
  if (leaf.disks.size() < 2) return out;
  struct Node {
    double u0, u1, u2;
    Vec5 p;
  };
  // Coarse samples of both surfaces.
  std::vector<Node> L, Pn;
  const Grid& lg = *leaf.disks.front().patch.grid;
  const int ls = std::max(1, (lg.n() - 1) / 8);
  for (const auto& d : leaf.disks)
    for (int j = 0; j < lg.n(); j += ls)
      for (int i = 0; i < lg.n(); i += ls)
        if (lg.in_mask(i, j)) L.push_back({d.tau, lg.x(i), lg.y(j), d.patch.point(i, j).vec()});
  const Grid& pg = *patch.grid;
  const int ps = std::max(1, (pg.n() - 1) / 8);
  for (int j = 0; j < pg.n(); j += ps)
    for (int i = 0; i < pg.n(); i += ps)
      if (pg.in_mask(i, j)) Pn.push_back({0.0, pg.x(i), pg.y(j), patch.point(i, j).vec()});
  const double dtau = leaf.disks[1].tau - leaf.disks[0].tau;
  const double reach = 1.5 * (ls * lg.h() + ps * pg.h()) + dtau;
  std::vector<std::tuple<double, std::size_t, std::size_t>> seeds;
  for (std::size_t a = 0; a < L.size(); ++a)
    for (std::size_t b = 0; b < Pn.size(); ++b) {
      const double d = (L[a].p - Pn[b].p).norm();
      if (d < reach) seeds.emplace_back(d, a, b);
    }
  std::sort(seeds.begin(), seeds.end());

  using Vec5d = Eigen::Matrix<double, 5, 1>;
  auto residual = [&](const Vec5d& x) -> std::optional<Vec5d> {
    const auto ls_ = leaf.sample(x[0], x[1], x[2]);
    const auto ps_ = patch.sample(x[3], x[4]);
    if (!ls_ || !ps_) return std::nullopt;
    return Vec5d(ls_->p.vec() - ps_->p.vec());
  };
  const std::size_t max_seeds = 60;
  for (std::size_t s = 0; s < seeds.size() && s < max_seeds; ++s) {
    const auto& [d0, a, b] = seeds[s];
    (void)d0;
    Vec5d x(L[a].u0, L[a].u1, L[a].u2, Pn[b].u1, Pn[b].u2);
    auto F = residual(x);
    if (!F) continue;
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
      if (F->norm() < 1e-12) {
        ok = true;
        break;
      }
      Eigen::Matrix<double, 5, 5> Jac;
      bool jac_ok = true;
      for (int k = 0; k < 5 && jac_ok; ++k) {
        const double hstep = 1e-7;
        Vec5d xp = x, xm = x;
        xp[k] += hstep;
        xm[k] -= hstep;
        auto Fp = residual(xp), Fm = residual(xm);
        if (Fp && Fm) Jac.col(k) = (*Fp - *Fm) / (2 * hstep);
        else if (Fp) Jac.col(k) = (*Fp - *F) / hstep;
        else if (Fm) Jac.col(k) = (*F - *Fm) / hstep;
        else jac_ok = false;
      }
      if (!jac_ok) break;
      const Vec5d step = Jac.fullPivLu().solve(*F);
      if (!step.allFinite()) break;
      double lam = 1.0;
      bool accepted = false;
      for (int bt = 0; bt < 30; ++bt, lam *= 0.5) {
        const Vec5d xt = x - lam * step;
        auto Ft = residual(xt);
        if (Ft && Ft->norm() < F->norm()) {
          x = xt;
          F = Ft;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        ok = F->norm() < 1e-10;
        break;
      }
    }
    if (!ok) continue;
    const auto lsmp = leaf.sample(x[0], x[1], x[2]);
    const auto psmp = patch.sample(x[3], x[4]);
    bool dup = false;
    for (const auto& r : out) dup = dup || (r.point.vec() - lsmp->p.vec()).norm() < 1e-7;
    if (dup) continue;
    IntersectionRecord rec;
    rec.point = lsmp->p;
    rec.tau = x[0];
    rec.a1 = x[1];
    rec.a2 = x[2];
    rec.b1 = x[3];
    rec.b2 = x[4];
    Mat5 B;
    B.col(0) = lsmp->d_s1;
    B.col(1) = lsmp->d_s2;
    B.col(2) = lsmp->d_tau;
    B.col(3) = psmp->ds1;
    B.col(4) = psmp->ds2;
    Mat5 Bn = B;
    for (int k = 0; k < 5; ++k) Bn.col(k).normalize();
    const Eigen::SelfAdjointEigenSolver<Mat5> es(Bn.transpose() * Bn);
    const Vec5 ev = es.eigenvalues().cwiseMax(0.0);
    rec.rcond = std::sqrt(ev[0] / ev[4]);
    rec.transversal = rec.rcond >= rcond_min;
    rec.sign = rec.transversal ? (B.determinant() > 0 ? 1 : -1) : 0;
    out.push_back(rec);
  }
  return out;
}

}  // namespace legfol
