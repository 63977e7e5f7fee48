#include "legfol/scenarios.hpp"

#include "legfol/contact.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <random>

namespace legfol {

std::string to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::S5: return "s5";
    case ScenarioId::CyLevelset: return "cy_levelset";
    case ScenarioId::N5: return "n5";
  }
  return "?";
}

ScenarioId scenario_from_string(const std::string& s) {
  if (s == "s5") return ScenarioId::S5;
  if (s == "cy" || s == "cy_levelset") return ScenarioId::CyLevelset;
  if (s == "n5") return ScenarioId::N5;
  throw DomainError("unknown scenario '" + s + "' (expected s5, cy or n5)");
}

bool ScenarioPoint::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

nlohmann::json ScenarioPoint::to_json() const {
  auto vec = [](const VecX& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json frame = nlohmann::json::array();
  for (int k = 0; k < horizontal.cols(); ++k) frame.push_back(vec(horizontal.col(k)));
  return {{"scenario", legfol::to_string(id)},
          {"x", vec(x)},
          {"reeb", vec(reeb)},
          {"horizontal", frame},
          {"omega", {{"p", omega.p}, {"a", omega.a}, {"b", omega.b}, {"A", omega.A}, {"B", omega.B}, {"C", omega.C}}},
          {"normalization", normalization},
          {"raw_reeb_omega", raw_reeb_omega},
          {"checks", checks},
          {"pass", pass()}};
}

namespace scenarios {

MatX null_space(const MatX& C) {
  const Eigen::Index m = C.cols();
  Eigen::ColPivHouseholderQR<MatX> qr(C.transpose());
  const Eigen::Index rank = qr.rank();
  const MatX Q = qr.householderQ() * MatX::Identity(m, m);
  return Q.rightCols(m - rank);
}

MatX exterior_derivative(const std::function<VecX(const VecX&)>& a, const VecX& x, double h) {
  const Eigen::Index m = x.size();
  auto jacobian = [&](double step) {
    MatX Da(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      VecX xp = x, xm = x;
      xp[j] += step;
      xm[j] -= step;
      Da.col(j) = (a(xp) - a(xm)) / (2 * step);
    }
    return Da;
  };
  const MatX Da = (4.0 * jacobian(h) - jacobian(2 * h)) / 3.0;
  // d(a)(u, v) = v^T Da u - u^T Da v
  return Da.transpose() - Da;
}

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
constexpr int kPairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

Mat4 from_vec6(const Vec6& v) {
  Mat4 M = Mat4::Zero();
  for (int k = 0; k < 6; ++k) {
    M(kPairs[k][0], kPairs[k][1]) = v[k];
    M(kPairs[k][1], kPairs[k][0]) = -v[k];
  }
  return M;
}

Vec6 to_vec6(const Mat4& M) {
  Vec6 v;
  for (int k = 0; k < 6; ++k) v[k] = M(kPairs[k][0], kPairs[k][1]);
  return v;
}

}  // namespace

Mat4 semicalibrating_frame(const Mat4& D, const Mat4& W) {
  // Wedge pairing on 2-forms, signature (3, 3).
  Eigen::Matrix<double, 6, 6> G;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      G(i, j) = forms::wedge_coeff(from_vec6(Vec6::Unit(i)), from_vec6(Vec6::Unit(j)));
  const Vec6 d = to_vec6(D), w = to_vec6(W);
  const double qd = d.dot(G * d);
  if (!(qd > 0.0)) throw DomainError("semicalibrating_frame: D is degenerate");
  // Third member of the self-dual triple: orthogonal to D and W, positive.
  MatX C(2, 6);
  C.row(0) = (G * d).transpose();
  C.row(1) = (G * w).transpose();
  const MatX N = null_space(C);
  const Eigen::SelfAdjointEigenSolver<MatX> es(N.transpose() * G * N);
  const Eigen::Index top = es.eigenvalues().size() - 1;
  if (!(es.eigenvalues()[top] > 0.0)) throw DomainError("semicalibrating_frame: W is not positive");
  Vec6 w3 = N * es.eigenvectors().col(top);
  w3 *= std::sqrt(qd / w3.dot(G * w3));
  const Mat4 W3 = from_vec6(w3);

  // J with D(u, J v) = g(u, v); pick the sign that makes g positive.
  Mat4 J = W.partialPivLu().solve(W3);
  Mat4 g = D * J;
  if (g.trace() < 0.0) {
    J = -J;
    g = -g;
  }
  g = 0.5 * (g + g.transpose());
  const Eigen::SelfAdjointEigenSolver<Mat4> gs(g);
  if (!(gs.eigenvalues()[0] > 0.0)) throw DomainError("semicalibrating_frame: no compatible metric");

  auto gdot = [&](const Vec4& u, const Vec4& v) { return u.dot(g * v); };
  Mat4 F;
  Vec4 e1 = Vec4::Unit(0);
  e1 /= std::sqrt(gdot(e1, e1));
  const Vec4 e2 = J * e1;
  Vec4 best = Vec4::Zero();
  for (int k = 1; k < 4; ++k) {
    Vec4 c = Vec4::Unit(k);
    c -= gdot(c, e1) * e1 + gdot(c, e2) * e2;
    if (gdot(c, c) > gdot(best, best)) best = c;
  }
  const Vec4 e3 = best / std::sqrt(gdot(best, best));
  F << e1, e2, e3, J * e3;
  return F;
}

}  // namespace scenarios

namespace {

using Omega = std::function<double(const VecX&, const VecX&)>;

struct Embedding {
  ScenarioId id;
  VecX x;
  MatX constraints;  // rows: normals of the submanifold at x
  std::function<VecX(const VecX&)> alpha;
  Omega omega;       // at x
  std::optional<VecX> reeb;
  std::optional<double> expected_normalization;
  bool ambient_comass_one = false;
  bool project_horizontal = false;
};

void add_check(ScenarioPoint& sp, std::string name, double deviation, double tol) {
  sp.checks.push_back({std::move(name), deviation, tol, deviation <= tol});
}

ScenarioPoint build(const Embedding& E) {
  constexpr double kTight = 1e-10;
  constexpr double kLoose = 1e-8;
  ScenarioPoint sp;
  sp.id = E.id;
  sp.x = E.x;
  sp.tangent = scenarios::null_space(E.constraints);
  if (sp.tangent.cols() != 5) throw DomainError("scenario: tangent space is not 5-dimensional");
  const MatX& T = sp.tangent;
  add_check(sp, "tangent_orthonormal",
            (T.transpose() * T - MatX::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-12);

  const VecX a = E.alpha(E.x);
  sp.alpha_row = (a.transpose() * T);
  const MatX Md = scenarios::exterior_derivative(E.alpha, E.x);

  if (E.reeb) {
    sp.reeb = *E.reeb;
  } else {
    MatX S(6, 5);
    S.topRows(5) = (T.transpose() * Md * T).transpose();
    S.row(5) = sp.alpha_row;
    VecX rhs = VecX::Zero(6);
    rhs[5] = 1.0;
    sp.reeb = T * S.colPivHouseholderQr().solve(rhs);
  }
  const VecX& R = sp.reeb;
  add_check(sp, "reeb_tangent", (E.constraints * R).cwiseAbs().maxCoeff(), kTight);
  add_check(sp, "alpha_reeb", std::abs(a.dot(R) - 1.0), kTight);
  for (int k = 0; k < 5; ++k) sp.raw_reeb_omega = std::max(sp.raw_reeb_omega, std::abs(E.omega(R, T.col(k))));
  Omega omega = E.omega;
  if (E.project_horizontal) {
    // Only the restriction to the contact planes is prescribed.
    omega = [&E, a, R](const VecX& u, const VecX& v) {
      return E.omega(u - a.dot(u) * R, v - a.dot(v) * R);
    };
  }
  double rd = 0.0, ro = 0.0;
  for (int k = 0; k < 5; ++k) {
    rd = std::max(rd, std::abs(R.dot(Md * T.col(k))));
    ro = std::max(ro, std::abs(omega(R, T.col(k))));
  }
  add_check(sp, "reeb_dalpha", rd, kTight);
  add_check(sp, "reeb_omega", ro, kTight);

  MatX CH(E.constraints.rows() + 1, E.x.size());
  CH << E.constraints, a.transpose();
  MatX Hb = scenarios::null_space(CH);
  if (Hb.cols() != 4) throw DomainError("scenario: horizontal space is not 4-dimensional");
  Mat4 D = Hb.transpose() * Md * Hb;
  D = 0.5 * (D - D.transpose());
  // Orient the horizontal basis by dalpha^2.
  if (forms::wedge_coeff(D, D) < 0.0) {
    Hb.col(3) *= -1.0;
    D.row(3) *= -1.0;
    D.col(3) *= -1.0;
  }
  Mat4 W;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) W(i, j) = omega(Hb.col(i), Hb.col(j));
  const double dd = forms::wedge_coeff(D, D), ww = forms::wedge_coeff(W, W);
  if (!(dd > 0.0) || !(ww > 0.0)) throw DomainError("scenario: dalpha or omega degenerate on the horizontal space");
  sp.normalization = std::sqrt(ww / dd);
  if (E.expected_normalization)
    add_check(sp, "normalization", std::abs(sp.normalization - *E.expected_normalization), kLoose);
  if (E.ambient_comass_one) add_check(sp, "comass_ambient", std::abs(forms::comass_eigen(W) - 1.0), kLoose);

  const Mat4 Dn = sp.normalization * D;
  const Mat4 F = scenarios::semicalibrating_frame(Dn, W);
  sp.horizontal = Hb * F;
  const Mat4 WF = F.transpose() * W * F;
  const Mat4 DF = F.transpose() * Dn * F;
  sp.omega = Form2H::from_matrix(WF);
  add_check(sp, "frame_dalpha", (DF - contact::dalpha_matrix()).cwiseAbs().maxCoeff(), kLoose);
  add_check(sp, "wedge_omega_dalpha", std::abs(forms::wedge_coeff(WF, DF)), kLoose);

  const auto rep = forms::verify_semicalibration(sp.omega);
  add_check(sp, "comass_frame", std::abs(forms::comass_eigen(WF) - 1.0), kLoose);
  add_check(sp, "semicalibration", rep.pass ? 0.0 : 1.0, 0.5);
  if (rep.J) {
    const Mat4 DJ = contact::dalpha_matrix() * *rep.J;
    add_check(sp, "lagrangian_defect", (DJ + DJ.transpose()).cwiseAbs().maxCoeff(), kLoose);
  }
  return sp;
}

using cd = std::complex<double>;

Eigen::Vector3cd to_c3(const VecX& v) {
  return {cd(v[0], v[1]), cd(v[2], v[3]), cd(v[4], v[5])};
}

// Multiplication by i on C^3 = R^6.
VecX times_i(const VecX& v) {
  VecX w(6);
  for (int k = 0; k < 3; ++k) {
    w[2 * k] = -v[2 * k + 1];
    w[2 * k + 1] = v[2 * k];
  }
  return w;
}

// iota_N Re(dz1 ^ dz2 ^ dz3) at x.
Omega radial_special_lagrangian(const VecX& x) {
  return [x](const VecX& u, const VecX& v) {
    Eigen::Matrix3cd M;
    M << to_c3(x), to_c3(u), to_c3(v);
    return M.determinant().real();
  };
}

}  // namespace

LevelSet ellipsoid(const Eigen::Vector3d& a) {
  LevelSet L;
  L.value = [a](const VecX& x) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += a[k] * (x[2 * k] * x[2 * k] + x[2 * k + 1] * x[2 * k + 1]);
    return s;
  };
  L.gradient = [a](const VecX& x) {
    VecX g(6);
    for (int k = 0; k < 6; ++k) g[k] = 2.0 * a[k / 2] * x[k];
    return g;
  };
  return L;
}

ScenarioPoint s5_point(const VecX& p) {
  if (p.size() != 6) throw DomainError("s5_point: need 6 real coordinates");
  if (std::abs(p.norm() - 1.0) > 1e-12) throw DomainError("s5_point: |p| != 1");
  Embedding E;
  E.id = ScenarioId::S5;
  E.x = p;
  E.constraints = p.transpose();
  E.alpha = times_i;
  E.omega = radial_special_lagrangian(p);
  E.reeb = times_i(p);
  E.expected_normalization = 0.5;
  E.ambient_comass_one = true;
  return build(E);
}

ScenarioPoint cy_levelset_point(const LevelSet& rho, const VecX& p) {
  if (p.size() != 6) throw DomainError("cy_levelset_point: need 6 real coordinates");
  VecX g;
  if (rho.gradient) {
    g = rho.gradient(p);
  } else {
    g.resize(6);
    const double h = 1e-6;
    for (int k = 0; k < 6; ++k) {
      VecX xp = p, xm = p;
      xp[k] += h;
      xm[k] -= h;
      g[k] = (rho.value(xp) - rho.value(xm)) / (2 * h);
    }
  }
  if (std::abs(g.dot(p)) <= 1e-8 * g.norm() * p.norm())
    throw DomainError("cy_levelset_point: radial field tangent to the level set");
  Embedding E;
  E.id = ScenarioId::CyLevelset;
  E.x = p;
  E.constraints = g.normalized().transpose();
  E.alpha = times_i;
  E.omega = radial_special_lagrangian(p);
  E.project_horizontal = true;
  return build(E);
}

ScenarioPoint n5_point(const Eigen::Vector4d& e1, const Eigen::Vector4d& e2) {
  if (std::abs(e1.norm() - 1.0) > 1e-12 || std::abs(e2.norm() - 1.0) > 1e-12 || std::abs(e1.dot(e2)) > 1e-12)
    throw DomainError("n5_point: (e1, e2) must be orthonormal");
  Embedding E;
  E.id = ScenarioId::N5;
  E.x.resize(8);
  E.x << e1, e2;
  E.constraints = MatX::Zero(3, 8);
  E.constraints.block<1, 4>(0, 0) = e1.transpose();
  E.constraints.block<1, 4>(1, 4) = e2.transpose();
  E.constraints.block<1, 4>(2, 0) = e2.transpose();
  E.constraints.block<1, 4>(2, 4) = e1.transpose();
  E.constraints.row(2) /= std::sqrt(2.0);
  E.alpha = [](const VecX& x) {
    VecX a(8);
    a << -0.5 * x.segment<4>(4), 0.5 * x.segment<4>(0);
    return a;
  };
  E.omega = [e1, e2](const VecX& U, const VecX& V) {
    auto det = [&](const Eigen::Vector4d& c, const Eigen::Vector4d& d) {
      Mat4 M;
      M << e1, e2, c, d;
      return M.determinant();
    };
    return det(U.segment<4>(0), V.segment<4>(4)) - det(V.segment<4>(0), U.segment<4>(4));
  };
  VecX v(8);
  v << -e2, e1;
  E.reeb = v;
  E.expected_normalization = 1.0;
  E.ambient_comass_one = true;
  return build(E);
}

nlohmann::json ScenarioReport::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back(p.to_json());
  nlohmann::json dev = nlohmann::json::object();
  for (const auto& [k, v] : max_deviation) dev[k] = v;
  return {{"scenario", legfol::to_string(id)}, {"n_points", n_points}, {"seed", seed},
          {"max_deviation", dev},              {"pass", pass},         {"points", pts}};
}

ScenarioReport verify_scenario(ScenarioId id, int n_points, unsigned seed) {
  if (n_points < 1) throw DomainError("verify_scenario: n_points must be positive");
  ScenarioReport rep;
  rep.id = id;
  rep.n_points = n_points;
  rep.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  auto gaussian = [&](int m) {
    VecX v(m);
    for (int k = 0; k < m; ++k) v[k] = gauss(rng);
    return v;
  };
  Eigen::Vector3d axes(1, 1, 1);
  if (id == ScenarioId::CyLevelset) {
    std::uniform_real_distribution<double> U(0.5, 2.0);
    for (int k = 0; k < 3; ++k) axes[k] = U(rng);
  }
  const LevelSet ell = ellipsoid(axes);
  for (int n = 0; n < n_points; ++n) {
    switch (id) {
      case ScenarioId::S5: rep.points.push_back(s5_point(gaussian(6).normalized())); break;
      case ScenarioId::CyLevelset: {
        const VecX u = gaussian(6);
        rep.points.push_back(cy_levelset_point(ell, u / std::sqrt(ell.value(u))));
        break;
      }
      case ScenarioId::N5: {
        const Eigen::Vector4d e1 = gaussian(4).normalized();
        Eigen::Vector4d e2 = gaussian(4);
        e2 = (e2 - e2.dot(e1) * e1).normalized();
        rep.points.push_back(n5_point(e1, e2));
        break;
      }
    }
  }
  std::map<std::string, double> worst;
  rep.pass = true;
  for (const auto& p : rep.points) {
    rep.pass = rep.pass && p.pass();
    for (const auto& c : p.checks) worst[c.hypothesis] = std::max(worst[c.hypothesis], c.value);
  }
  rep.max_deviation.assign(worst.begin(), worst.end());
  return rep;
}

}  // namespace legfol
