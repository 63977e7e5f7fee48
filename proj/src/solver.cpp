#include "legfol/solver.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace legfol {

namespace {

nlohmann::json mat_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

nlohmann::json AdaptedChart::to_json() const {
  return {{"origin", {origin.x1, origin.y1, origin.x2, origin.y2, origin.t}},
          {"rotation", mat_json(rotation)},
          {"step1", mat_json(step1)},
          {"chcoord", mat_json(chcoord)},
          {"beta_step1", beta_step1},
          {"gamma_step1", gamma_step1},
          {"sigma0", sigma0},
          {"beta0", beta0},
          {"gamma0", gamma0},
          {"delta0", delta0},
          {"kappa0", kappa0}};
}

AdaptedChart adapt_chart(const Point5& p, const PlaneChart& X, const ACSField& field) {
  const JMatrix J = acs::j_matrix(field, p);
  const auto [a, b] = X.basis(J);
  const auto [e, f] = orthonormalize(a, b);
  Vec4 V = e * e[0] + f * f[0];
  if (V.norm() < 1e-8) throw DomainError("adapt_chart: dx1 is orthogonal to the plane");
  V.normalize();
  const Mat4& I = contact::standard_I_matrix();
  const Vec4 JV = J * V;
  const double s0 = JV.dot(V);
  Vec4 U = JV - s0 * V;
  const double g0 = U.norm();
  if (g0 < 1e-12) throw DomainError("adapt_chart: degenerate plane (J V parallel to V)");
  U /= g0;

  AdaptedChart c;
  c.origin = p;
  c.rotation.col(0) = V;
  c.rotation.col(1) = I * V;
  c.rotation.col(2) = -(I * U);
  c.rotation.col(3) = U;

  // First stage: any unit W orthogonal to span{V, IV}.
  const Vec4 IV = I * V;
  Vec4 W = Vec4::Zero();
  double best = -1.0;
  for (int k = 0; k < 4; ++k) {
    Vec4 ek = Vec4::Zero();
    ek[k] = 1.0;
    const Vec4 w = ek - ek.dot(V) * V - ek.dot(IV) * IV;
    if (w.norm() > best + 1e-12) {
      best = w.norm();
      W = w;
    }
  }
  W.normalize();
  c.step1.col(0) = V;
  c.step1.col(1) = IV;
  c.step1.col(2) = -(I * W);
  c.step1.col(3) = W;
  const JMatrix J1 = c.step1.transpose() * J * c.step1;
  c.beta_step1 = J1(2, 0);
  c.gamma_step1 = J1(3, 0);
  c.chcoord << c.step1.col(2).dot(c.rotation.col(2)), c.step1.col(2).dot(c.rotation.col(3)),
      c.step1.col(3).dot(c.rotation.col(2)), c.step1.col(3).dot(c.rotation.col(3));

  const JMatrix Ja = c.adapted_J(J);
  const auto m = acs::read_model(Ja);
  if (m.residual > 1e-9) throw DomainError("adapt_chart: conjugated J leaves the model");
  c.sigma0 = m.coeffs.sigma;
  c.beta0 = m.coeffs.beta;
  c.gamma0 = m.coeffs.gamma;
  c.delta0 = m.coeffs.delta;
  c.kappa0 = m.coeffs.kappa;
  return c;
}

ACSField pullback_acs(const ACSField& field, const AdaptedChart& chart) {
  auto src = std::make_shared<const ACSField>(field);
  auto ch = std::make_shared<const AdaptedChart>(chart);
  auto Ja = [src, ch](const Point5& u) { return ch->adapted_J(acs::j_matrix(*src, ch->to_working(u.base(), u.t))); };
  ACSField out;
  out.sigma = ScalarField5([Ja](const Point5& u) { return Ja(u)(0, 0); });
  out.beta = ScalarField5([Ja](const Point5& u) { return Ja(u)(2, 0); });
  out.gamma = ScalarField5([Ja](const Point5& u) { return Ja(u)(3, 0); });
  out.delta = ScalarField5([Ja](const Point5& u) { return Ja(u)(0, 2); });
  out.kappa = ScalarField5([Ja](const Point5& u) { return Ja(u)(2, 1); });
  out.radius = field.radius;
  out.global = field.global;
  out.gamma_min = field.gamma_min;

  std::mt19937_64 rng(17);
  for (int s = 0; s < 64; ++s) {
    const Point5 u = s == 0 ? Point5{} : acs::sample_ball(rng, 1.0);
    if (acs::read_model(Ja(u)).residual > 1e-9) {
      throw DomainError("pullback_acs: conjugated matrix leaves the sigma/beta/gamma/delta model");
    }
  }
  return out;
}

Eigen::Matrix2d chart_matrix(const AdaptedChart& chart) {
  Eigen::Matrix2d M;
  M << chart.kappa0, chart.sigma0, chart.sigma0, chart.gamma0;
  return M;
}

EllipticOperator::EllipticOperator(const Eigen::Matrix2d& M, GridPtr grid) : M_(M), grid_(std::move(grid)) {
  if (std::abs(M(0, 1) - M(1, 0)) > 1e-14 * M.norm()) throw DomainError("EllipticOperator: M must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(M);
  k_ = es.eigenvalues().minCoeff();
  if (!(k_ > 0.0)) throw DomainError("EllipticOperator: M is not positive definite");

  const Grid& g = *grid_;
  unknown_.assign(static_cast<std::size_t>(g.size()), -1);
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i)
      if (g.interior(i, j)) {
        unknown_[static_cast<std::size_t>(g.index(i, j))] = static_cast<int>(node_of_.size());
        node_of_.push_back(g.index(i, j));
      }
  const int m = static_cast<int>(node_of_.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m) * 9);
  const std::array<std::pair<Deriv, double>, 3> terms = {
      std::pair{Deriv::d11, M(0, 0)}, {Deriv::d12, 2.0 * M(0, 1)}, {Deriv::d22, M(1, 1)}};
  for (int row = 0; row < m; ++row) {
    const int node = node_of_[static_cast<std::size_t>(row)];
    const int i = node % g.n(), j = node / g.n();
    for (const auto& [d, coef] : terms) {
      if (coef == 0.0) continue;
      for (const auto& [idx, w] : g.stencil(BoundaryMode::Dirichlet, d, i, j)) {
        const int col = unknown_[static_cast<std::size_t>(idx)];
        if (col >= 0) trip.emplace_back(row, col, coef * w);
      }
    }
  }
  A_.resize(m, m);
  A_.setFromTriplets(trip.begin(), trip.end());
  A_.makeCompressed();
  lu_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  lu_->analyzePattern(A_);
  lu_->factorize(A_);
  if (lu_->info() != Eigen::Success) throw ConvergenceError("EllipticOperator: factorization failed");
}

Eigen::VectorXd EllipticOperator::gather(const GridFunction& g) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(node_of_.size()));
  const double* data = g.values().data();
  for (std::size_t k = 0; k < node_of_.size(); ++k) v[static_cast<Eigen::Index>(k)] = data[node_of_[k]];
  return v;
}

GridFunction EllipticOperator::scatter(const Eigen::VectorXd& v) const {
  GridFunction g(grid_);
  double* data = g.values().data();
  for (std::size_t k = 0; k < node_of_.size(); ++k) data[node_of_[k]] = v[static_cast<Eigen::Index>(k)];
  return g;
}

GridFunction EllipticOperator::solve(const GridFunction& rhs) const {
  if (!rhs.finite()) throw DomainError("elliptic_solve: right-hand side is not finite");
  return scatter(lu_->solve(gather(rhs)));
}

GridFunction EllipticOperator::apply(const GridFunction& u) const { return scatter(A_ * gather(u)); }

double EllipticOperator::inverse_sup_norm() const {
  if (inv_norm_) return *inv_norm_;
  // Hager's estimator for ||C||_1 with C = A^{-T}, which equals ||A^{-1}||_inf.
  const Eigen::Index m = A_.rows();
  auto C = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return lu_->transpose().solve(x); };
  auto Ct = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return lu_->solve(x); };
  Eigen::VectorXd x = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  double est = 0.0;
  Eigen::Index last = -1;
  for (int it = 0; it < 6; ++it) {
    const Eigen::VectorXd y = C(x);
    est = std::max(est, y.lpNorm<1>());
    const Eigen::VectorXd xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    const Eigen::VectorXd z = Ct(xi);
    Eigen::Index jmax;
    const double zmax = z.cwiseAbs().maxCoeff(&jmax);
    if (zmax <= z.dot(x) || jmax == last) break;
    last = jmax;
    x.setZero();
    x[jmax] = 1.0;
  }
  Eigen::VectorXd alt(m);
  for (Eigen::Index i = 0; i < m; ++i)
    alt[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + static_cast<double>(i) / std::max<Eigen::Index>(1, m - 1));
  est = std::max(est, 2.0 * C(alt).lpNorm<1>() / (3.0 * static_cast<double>(m)));
  inv_norm_ = est;
  return est;
}

GridFunction elliptic_solve(const EllipticOperator& op, const GridFunction& rhs) { return op.solve(rhs); }

nlohmann::json SolverConfig::to_json() const {
  return {{"n", n},
          {"radius", radius},
          {"tol", tol},
          {"max_iter", max_iter},
          {"enforce_smallness", enforce_smallness},
          {"smallness_samples", smallness_samples},
          {"seed", seed},
          {"n_floor", n_floor}};
}

nlohmann::json SmallnessReport::to_json() const {
  return {{"beta_c2", beta_c2},   {"A_c2", A_c2},         {"N_measured", N_measured},
          {"N_used", N_used},     {"threshold", threshold}, {"ball_radius", ball_radius},
          {"holds", holds}};
}

SmallnessReport measure_smallness(const ACSField& field, const AdaptedChart& chart, const EllipticOperator& op,
                                  const SolverConfig& cfg) {
  // Components: beta, kappa0 - kappa, sigma0 - sigma, gamma0 - gamma.
  auto G = [&](const Vec5& u) {
    const JMatrix Ja = chart.adapted_J(acs::j_matrix(field, chart.to_working(u.head<4>(), u[4])));
    return Eigen::Vector4d(Ja(2, 0), chart.kappa0 - Ja(2, 1), chart.sigma0 - Ja(0, 0), chart.gamma0 - Ja(3, 0));
  };
  const double h1 = 1e-5, h2 = 1e-4;
  std::mt19937_64 rng(cfg.seed);
  Eigen::Vector4d s0 = Eigen::Vector4d::Zero(), s1 = s0, s2 = s0;
  for (int s = 0; s < cfg.smallness_samples; ++s) {
    const Vec5 x = s == 0 ? Vec5(Vec5::Zero()) : acs::sample_ball(rng, 1.0).vec();
    const Eigen::Vector4d gx = G(x);
    s0 = s0.cwiseMax(gx.cwiseAbs());
    for (int k = 0; k < 5; ++k) {
      Vec5 e = Vec5::Zero();
      e[k] = 1.0;
      s1 = s1.cwiseMax(((G(x + h1 * e) - G(x - h1 * e)) / (2 * h1)).cwiseAbs());
      for (int l = k; l < 5; ++l) {
        Vec5 f = Vec5::Zero();
        f[l] = 1.0;
        Eigen::Vector4d d2;
        if (k == l) {
          d2 = (G(x + h2 * e) - 2.0 * gx + G(x - h2 * e)) / (h2 * h2);
        } else {
          d2 = (G(x + h2 * (e + f)) - G(x + h2 * (e - f)) - G(x - h2 * (e - f)) + G(x - h2 * (e + f))) /
               (4 * h2 * h2);
        }
        s2 = s2.cwiseMax(d2.cwiseAbs());
      }
    }
  }
  SmallnessReport r;
  r.beta_c2 = s0[0] + s1[0] + s2[0];
  r.A_c2 = s0.tail<3>().maxCoeff() + s1.tail<3>().maxCoeff() + s2.tail<3>().maxCoeff();
  r.N_measured = op.inverse_sup_norm();
  r.N_used = std::max(cfg.n_floor, r.N_measured);
  const double d = std::max(1.0, std::abs(chart.delta0));
  r.threshold = 1.0 / (24.0 * d * r.N_used * r.N_used);
  r.ball_radius = 1.0 / (48.0 * d * r.N_used);
  r.holds = r.beta_c2 + r.A_c2 <= r.threshold;
  return r;
}

RhsResult assemble_rhs(const GridFunction& h, const AdaptedChart& chart, const ACSField& field,
                       const ContactParams& params) {
  const GridPtr& gp = h.grid_ptr();
  const Grid& g = *gp;
  RhsResult out{GridFunction(gp), Surface4(gp), GridFunction(gp), {}};
  for (auto& c : out.coeffs) c = GridFunction(gp);
  std::vector<NodeDerivs> d(static_cast<std::size_t>(g.size()));
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) {
      if (!g.in_mask(i, j)) continue;
      const NodeDerivs nd = h.derivs(BoundaryMode::Dirichlet, i, j);
      d[static_cast<std::size_t>(g.index(i, j))] = nd;
      const Vec4 q = chart.to_working(Vec4(g.x(i), nd.f1, -nd.f2, g.y(j)));
      for (int k = 0; k < 4; ++k) out.surface.coords[static_cast<std::size_t>(k)](i, j) = q[k];
    }
  const int c = g.centre();
  const Point5 start = Point5::from(out.surface.point(c, c), chart.origin.t);
  out.t = legendrian_lift(out.surface, start, params, false).t;
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) {
      if (!g.in_mask(i, j)) continue;
      const JMatrix Ja = chart.adapted_J(acs::j_matrix(field, Point5::from(out.surface.point(i, j), out.t(i, j))));
      const double sigma = Ja(0, 0), beta = Ja(2, 0), gamma = Ja(3, 0), delta = Ja(0, 2), kappa = Ja(2, 1);
      out.coeffs[0](i, j) = sigma;
      out.coeffs[1](i, j) = beta;
      out.coeffs[2](i, j) = gamma;
      out.coeffs[3](i, j) = delta;
      out.coeffs[4](i, j) = kappa;
      if (!g.interior(i, j)) continue;
      const NodeDerivs& nd = d[static_cast<std::size_t>(g.index(i, j))];
      out.rhs(i, j) = delta * (nd.f12 * nd.f12 - nd.f11 * nd.f22) - beta + (chart.kappa0 - kappa) * nd.f11 +
                      2.0 * (chart.sigma0 - sigma) * nd.f12 + (chart.gamma0 - gamma) * nd.f22;
    }
  return out;
}

double DiskSolution::max_ratio() const {
  return ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
}

nlohmann::json DiskSolution::to_json() const {
  nlohmann::json j;
  j["chart"] = chart.to_json();
  j["grid"] = f.header_json();
  j["r"] = patch.params.r;
  j["iterations"] = iterations;
  j["increments"] = increments;
  j["ratios"] = ratios;
  j["max_ratio"] = max_ratio();
  j["residuals"] = {{"lapl", lapl_residual},
                    {"j_invariance", jinv_residual},
                    {"line2", line2_residual},
                    {"legendrian", legendrian_residual},
                    {"discrete", discrete_residual},
                    {"nodes", residual_nodes}};
  j["f_sup"] = f.sup_norm();
  j["f_c2"] = f_c2;
  j["ellipticity"] = ellipticity;
  if (smallness) {
    j["smallness"] = smallness->to_json();
    j["inside_ball"] = f_c2 <= smallness->ball_radius;
  }
  return j;
}

ResidualReport solution_residuals(const DiskSolution& sol, const ACSField& field) {
  ResidualReport rep;
  const Grid& g = sol.f.grid();
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) {
      if (!g.interior(i, j)) continue;
      const double lam = sol.lambda(i, j), mu = sol.mu(i, j);
      {
        const NodeDerivs d = sol.f.derivs(BoundaryMode::Dirichlet, i, j);
        const double sigma = sol.coeffs[0](i, j), gamma = sol.coeffs[2](i, j);
        rep.line2 = std::max(rep.line2, std::abs(d.f11 * sigma + d.f12 * gamma - (1 + lam) * d.f12 - mu * d.f11));
      }
      const auto w = sol.f.wide_derivs(i, j);
      if (!w) continue;
      ++rep.nodes;
      const JMatrix Ja = sol.chart.adapted_J(acs::j_matrix(field, sol.patch.point(i, j)));
      const double sigma = Ja(0, 0), beta = Ja(2, 0), gamma = Ja(3, 0), delta = Ja(0, 2), kappa = Ja(2, 1);
      const double pde = kappa * w->f11 + 2 * sigma * w->f12 + gamma * w->f22 -
                         delta * (w->f12 * w->f12 - w->f11 * w->f22) + beta;
      rep.lapl = std::max(rep.lapl, std::abs(pde));
      const Vec4 v1(1.0, w->f11, -w->f12, 0.0);
      const Vec4 v2(0.0, w->f12, -w->f22, 1.0);
      rep.jinv = std::max(rep.jinv, (Ja * v1 - (1 + lam) * v2 - mu * v1).cwiseAbs().maxCoeff());
    }
  return rep;
}

DiskSolution picard_solve(const Point5& P, const PlaneChart& X, const ACSField& field, const SolverConfig& cfg,
                          const ContactParams& params) {
  if (!(cfg.tol > 0.0) || cfg.max_iter < 1) throw DomainError("picard_solve: tolerances must be positive");
  DiskSolution sol;
  sol.chart = adapt_chart(P, X, field);
  const GridPtr grid = Grid::make(cfg.n, cfg.radius);
  const EllipticOperator op(chart_matrix(sol.chart), grid);
  sol.ellipticity = op.ellipticity();
  if (cfg.measure_smallness || cfg.enforce_smallness) {
    sol.smallness = measure_smallness(field, sol.chart, op, cfg);
    if (cfg.enforce_smallness && !sol.smallness->holds) {
      std::ostringstream os;
      os << "picard_solve: smallness precondition fails: |beta|_C2 + |A|_C2 = "
         << sol.smallness->beta_c2 + sol.smallness->A_c2 << " > " << sol.smallness->threshold
         << " (N = " << sol.smallness->N_used << "); dilate the field first";
      throw DomainError(os.str());
    }
  }

  GridFunction h(grid);
  int above_one = 0;
  bool converged = false;
  for (int k = 0; k < cfg.max_iter; ++k) {
    const RhsResult r = assemble_rhs(h, sol.chart, field, params);
    GridFunction next = op.solve(r.rhs);
    if (!next.finite()) throw ConvergenceError("picard_solve: iterate is not finite");
    const double inc = (next - h).sup_norm();
    if (!sol.increments.empty() && sol.increments.back() > 0.0) {
      const double ratio = inc / sol.increments.back();
      sol.ratios.push_back(ratio);
      above_one = ratio >= 1.0 ? above_one + 1 : 0;
    }
    sol.increments.push_back(inc);
    h = std::move(next);
    sol.iterations = k + 1;
    if (inc < cfg.tol) {
      converged = true;
      break;
    }
    if (above_one >= 2) {
      std::ostringstream os;
      os << "picard_solve: contraction failed (ratio >= 1 twice in a row; last ratio " << sol.ratios.back()
         << ", increment " << inc << ")";
      throw ConvergenceError(os.str());
    }
  }
  if (!converged) {
    throw ConvergenceError("picard_solve: no convergence in " + std::to_string(cfg.max_iter) + " iterations");
  }

  sol.f = h;
  const RhsResult fin = assemble_rhs(h, sol.chart, field, params);
  sol.t = fin.t;
  sol.coeffs = fin.coeffs;
  sol.discrete_residual = (op.apply(h) - fin.rhs).sup_norm();
  sol.lambda = GridFunction(grid);
  sol.mu = GridFunction(grid);
  for (int j = 0; j < grid->n(); ++j)
    for (int i = 0; i < grid->n(); ++i) {
      if (!grid->in_mask(i, j)) continue;
      const NodeDerivs d = h.derivs(BoundaryMode::Dirichlet, i, j);
      sol.lambda(i, j) = fin.coeffs[2](i, j) - 1.0 + fin.coeffs[3](i, j) * d.f11;
      sol.mu(i, j) = -fin.coeffs[3](i, j) * d.f12 + fin.coeffs[0](i, j);
    }
  const int c = grid->centre();
  sol.patch = make_patch(fin.surface, fin.t, Point5::from(fin.surface.point(c, c), P.t), params);
  sol.legendrian_residual = legendrian_residual(sol.patch);
  sol.f_c2 = h.c2_norm(BoundaryMode::Dirichlet);
  const ResidualReport rep = solution_residuals(sol, field);
  sol.lapl_residual = rep.lapl;
  sol.jinv_residual = rep.jinv;
  sol.line2_residual = rep.line2;
  sol.residual_nodes = rep.nodes;
  return sol;
}

PsiResult locate_on_plane(const LegendrianPatch& patch, const ACSField& field, const Eigen::Vector2d& anchor) {
  Eigen::Matrix<double, 2, 5> A = Eigen::Matrix<double, 2, 5>::Zero();
  A(0, 0) = 1.0;
  A(1, 3) = 1.0;
  const auto hit = solve_on_patch(patch, A, anchor, 0.0, 0.0, 1e-14);
  if (!hit) throw DomainError("locate_on_plane: no intersection found within the patch");
  PsiResult out;
  out.Q = hit->sample.p;
  out.s1 = hit->s1;
  out.s2 = hit->s2;
  const auto [u, v] = orthonormalize(hit->sample.t1.head<4>(), hit->sample.t2.head<4>());
  out.Y = PlaneChart::from_vectors(u, v, ComplexFrame(acs::j_matrix(field, out.Q)));
  return out;
}

namespace {

std::pair<PsiResult, DiskSolution> psi_full(const Point5& P, const PlaneChart& X, const ACSField& field,
                                            const SolverConfig& cfg, const ContactParams& params) {
  DiskSolution sol = picard_solve(P, X, field, cfg, params);
  PsiResult r = locate_on_plane(sol.patch, field, Eigen::Vector2d(P.x1, P.y2));
  return {r, std::move(sol)};
}

}  // namespace

PsiResult psi(const Point5& P, const PlaneChart& X, const ACSField& field, const SolverConfig& cfg,
              const ContactParams& params) {
  return psi_full(P, X, field, cfg, params).first;
}

PsiInverse psi_invert(const Point5& Q, const PlaneChart& Y, const ACSField& field, const SolverConfig& cfg,
                      const ContactParams& params, std::optional<std::pair<Point5, PlaneChart>> warm, double tol,
                      int max_iter) {
  if (std::abs(Y.w) > 2.0) throw DomainError("psi_invert: target plane outside the chart range |w| <= 2");
  Point5 P = warm ? warm->first : Q;
  P.x1 = Q.x1;
  P.y2 = Q.y2;
  PlaneChart X = warm ? warm->second : Y;
  SolverConfig c = cfg;
  PsiInverse out;
  double prev = std::numeric_limits<double>::infinity();
  int growing = 0;
  for (int it = 0; it < max_iter; ++it) {
    auto [img, sol] = psi_full(P, X, field, c, params);
    c.measure_smallness = false;
    c.enforce_smallness = false;
    const Vec5 dP = img.Q.vec() - Q.vec();
    const cplx dX = img.Y.w - Y.w;
    const double inc = std::max(dP.cwiseAbs().maxCoeff(), std::abs(dX));
    out.iterations = it + 1;
    out.final_increment = inc;
    if (inc < tol) {
      out.P = P;
      out.X = X;
      out.solution = std::move(sol);
      out.image = img;
      return out;
    }
    growing = inc > prev ? growing + 1 : 0;
    if (growing >= 3) throw ConvergenceError("psi_invert: iteration diverges (epsilon too large)");
    prev = inc;
    P = Point5::from(Vec5(P.vec() - dP));
    P.x1 = Q.x1;
    P.y2 = Q.y2;
    X = PlaneChart(X.w - dX);
  }
  throw ConvergenceError("psi_invert: no convergence in " + std::to_string(max_iter) + " iterations");
}

nlohmann::json DilationChoice::to_json() const {
  return {{"r", r}, {"halvings", halvings}, {"epsilon", epsilon}, {"smallness", smallness.to_json()}};
}

DilationChoice choose_dilation(const ACSField& field, const SolverConfig& cfg) {
  const AdaptedChart chart0 = adapt_chart(Point5{}, PlaneChart{}, field);
  const EllipticOperator op(chart_matrix(chart0), Grid::make(cfg.n, cfg.radius));
  DilationChoice out;
  double r = 1.0;
  for (int k = 0; k <= 20; ++k, r *= 0.5) {
    const ACSField dil = acs::dilated(field, r);
    const AdaptedChart chart = adapt_chart(Point5{}, PlaneChart{}, dil);
    out.r = r;
    out.halvings = k;
    out.epsilon = acs::epsilon_estimate(field, r, cfg.smallness_samples, cfg.seed);
    out.smallness = measure_smallness(dil, chart, op, cfg);
    if (out.smallness.holds && out.epsilon <= out.smallness.threshold) return out;
  }
  std::ostringstream os;
  os << "choose_dilation: smallness not reached after 20 halvings (epsilon " << out.epsilon << ", |beta|+|A| "
     << out.smallness.beta_c2 + out.smallness.A_c2 << ", threshold " << out.smallness.threshold << ")";
  throw DomainError(os.str());
}

}  // namespace legfol
