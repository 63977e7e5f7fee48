#include "legfol/acs.hpp"

#include <algorithm>
#include <sstream>

namespace legfol {

ScalarField5::ScalarField5(Eval f, double fd_step) : eval_(std::move(f)), h_(fd_step) {
  if (!eval_) throw DomainError("ScalarField5: empty evaluation rule");
  if (!(fd_step > 0.0)) throw DomainError("ScalarField5: finite-difference step must be positive");
}

ScalarField5::ScalarField5(double c)
    : eval_([c](const Point5&) { return c; }),
      grad_([](const Point5&) { return Vec5(Vec5::Zero()); }),
      hess_([](const Point5&) { return Mat5(Mat5::Zero()); }) {}

ScalarField5& ScalarField5::with_gradient(Gradient g) {
  grad_ = std::move(g);
  return *this;
}

ScalarField5& ScalarField5::with_hessian(Hessian h) {
  hess_ = std::move(h);
  return *this;
}

Vec5 ScalarField5::gradient(const Point5& p) const {
  if (grad_) return grad_(p);
  Vec5 g;
  const Vec5 x = p.vec();
  for (int k = 0; k < 5; ++k) {
    Vec5 xp = x, xm = x;
    xp[k] += h_;
    xm[k] -= h_;
    g[k] = (eval_(Point5::from(xp)) - eval_(Point5::from(xm))) / (2.0 * h_);
  }
  return g;
}

Mat5 ScalarField5::hessian(const Point5& p) const {
  if (hess_) return hess_(p);
  Mat5 H;
  const Vec5 x = p.vec();
  if (grad_) {
    for (int k = 0; k < 5; ++k) {
      Vec5 xp = x, xm = x;
      xp[k] += h_;
      xm[k] -= h_;
      H.col(k) = (grad_(Point5::from(xp)) - grad_(Point5::from(xm))) / (2.0 * h_);
    }
    return 0.5 * (H + H.transpose());
  }
  // Second differences need a wider step than first ones to stay above rounding.
  const double s = 10.0 * h_;
  const double f0 = eval_(p);
  for (int k = 0; k < 5; ++k) {
    for (int l = k; l < 5; ++l) {
      if (k == l) {
        Vec5 xp = x, xm = x;
        xp[k] += s;
        xm[k] -= s;
        H(k, k) = (eval_(Point5::from(xp)) - 2.0 * f0 + eval_(Point5::from(xm))) / (s * s);
      } else {
        Vec5 pp = x, pm = x, mp = x, mm = x;
        pp[k] += s, pp[l] += s;
        pm[k] += s, pm[l] -= s;
        mp[k] -= s, mp[l] += s;
        mm[k] -= s, mm[l] -= s;
        H(k, l) = (eval_(Point5::from(pp)) - eval_(Point5::from(pm)) - eval_(Point5::from(mp)) +
                   eval_(Point5::from(mm))) /
                  (4.0 * s * s);
        H(l, k) = H(k, l);
      }
    }
  }
  return H;
}

ScalarField5 ScalarField5::composed(const Mat5& A, const Vec5& shift) const {
  auto f = eval_;
  ScalarField5 out([f, A, shift](const Point5& p) { return f(Point5::from(Vec5(A * (p.vec() - shift)))); },
                   h_);
  if (grad_) {
    auto g = grad_;
    out.with_gradient([g, A, shift](const Point5& p) {
      return Vec5(A.transpose() * g(Point5::from(Vec5(A * (p.vec() - shift)))));
    });
  }
  if (hess_) {
    auto hs = hess_;
    out.with_hessian([hs, A, shift](const Point5& p) {
      return Mat5(A.transpose() * hs(Point5::from(Vec5(A * (p.vec() - shift)))) * A);
    });
  }
  return out;
}

ScalarField5 ScalarField5::scaled(double r) const { return composed(r * Mat5::Identity()); }

ScalarField5 ScalarField5::linear(double c0, const Vec5& grad) {
  ScalarField5 f([c0, grad](const Point5& p) { return c0 + grad.dot(p.vec()); });
  f.with_gradient([grad](const Point5&) { return grad; });
  f.with_hessian([](const Point5&) { return Mat5(Mat5::Zero()); });
  return f;
}

ACSField::Coefficients ACSField::coefficients(const Point5& p) const {
  Coefficients c{sigma(p), beta(p), gamma(p), delta(p), 0.0};
  c.kappa = kappa ? (*kappa)(p) : (1.0 + c.sigma * c.sigma + c.beta * c.delta) / c.gamma;
  return c;
}

ACSField ACSField::standard() { return constant(0.0, 0.0, 1.0, 0.0); }

ACSField ACSField::constant(double sigma, double beta, double gamma, double delta) {
  ACSField f;
  f.sigma = ScalarField5(sigma);
  f.beta = ScalarField5(beta);
  f.gamma = ScalarField5(gamma);
  f.delta = ScalarField5(delta);
  f.global = true;
  return f;
}

namespace acs {

JMatrix j_matrix_from(double sigma, double beta, double gamma, double delta, double kappa) {
  JMatrix J;
  J.col(0) << sigma, 0.0, beta, gamma;
  J.col(1) << 0.0, sigma, kappa, delta;
  J.col(2) << delta, -gamma, -sigma, 0.0;
  J.col(3) << -kappa, beta, 0.0, -sigma;
  return J;
}

JMatrix j_matrix_unchecked(const ACSField& field, const Point5& p) {
  const auto c = field.coefficients(p);
  JMatrix J = j_matrix_from(c.sigma, c.beta, c.gamma, c.delta, c.kappa);
  if (field.matrix_offset) J += *field.matrix_offset;
  return J;
}

JMatrix j_matrix(const ACSField& field, const Point5& p) {
  if (!p.finite() || (!field.global && p.vec().norm() > field.radius * (1.0 + 1e-12))) {
    throw DomainError("j_matrix: point outside the domain ball of radius " +
                      std::to_string(field.radius));
  }
  if (!field.kappa && std::abs(field.gamma(p)) < field.gamma_min) {
    throw DomainError("j_matrix: |gamma| below gamma_min; apply gamma_fallback");
  }
  return j_matrix_unchecked(field, p);
}

ModelReading read_model(const JMatrix& J) {
  ModelReading m;
  m.coeffs = {J(0, 0), J(2, 0), J(3, 0), J(0, 2), J(2, 1)};
  const auto& c = m.coeffs;
  m.residual = (J - j_matrix_from(c.sigma, c.beta, c.gamma, c.delta, c.kappa)).cwiseAbs().maxCoeff();
  return m;
}

Mat5 j_extended(const ACSField& field, const Point5& p, const ContactParams& params) {
  const JMatrix J = j_matrix(field, p);
  Mat5 out;
  for (int k = 0; k < 5; ++k) {
    Vec5 e = Vec5::Zero();
    e[k] = 1.0;
    out.col(k) = contact::lift_vector(p.base(), p.t, J * e.head<4>(), params);
  }
  return out;
}

std::string IdentityReport::failure() const {
  if (max_lagrangian >= tolerance) return "lagrangian: dalpha(Jv, v) = 0";
  if (max_anticompat >= tolerance) return "anti_compatibility: dalpha(v, w) = -dalpha(Jv, Jw)";
  if (max_square >= tolerance) return "complex_structure: J^2 = -Id";
  return {};
}

nlohmann::json IdentityReport::to_json() const {
  nlohmann::json j;
  j["checks"] = nlohmann::json::array(
      {forms::HypothesisCheck{"lagrangian", max_lagrangian, tolerance, max_lagrangian < tolerance},
       forms::HypothesisCheck{"anti_compatibility", max_anticompat, tolerance,
                              max_anticompat < tolerance},
       forms::HypothesisCheck{"complex_structure", max_square, tolerance, max_square < tolerance}});
  j["samples"] = samples;
  j["pass"] = pass;
  if (!pass) j["failure"] = failure();
  return j;
}

Point5 sample_ball(std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec5 v;
  for (int k = 0; k < 5; ++k) v[k] = gauss(rng);
  v.normalize();
  return Point5::from(Vec5(v * radius * std::pow(unif(rng), 0.2)));
}

Vec4 sample_unit4(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Vec4 v;
  for (int k = 0; k < 4; ++k) v[k] = gauss(rng);
  return v.normalized();
}

IdentityReport check_identities(const MatrixField& J, double radius, int n_samples, unsigned seed) {
  IdentityReport rep;
  rep.samples = n_samples;
  std::mt19937_64 rng(seed);
  for (int s = 0; s < n_samples; ++s) {
    const Point5 p = sample_ball(rng, radius);
    const Vec4 v = sample_unit4(rng);
    const Vec4 w = sample_unit4(rng);
    const JMatrix Jp = J(p);
    rep.max_lagrangian = std::max(rep.max_lagrangian, std::abs(contact::dalpha_eval(Jp * v, v)));
    rep.max_anticompat = std::max(
        rep.max_anticompat, std::abs(contact::dalpha_eval(v, w) + contact::dalpha_eval(Jp * v, Jp * w)));
    rep.max_square = std::max(rep.max_square, (Jp * Jp + Mat4::Identity()).cwiseAbs().maxCoeff());
  }
  rep.pass = rep.max_lagrangian < rep.tolerance && rep.max_anticompat < rep.tolerance &&
             rep.max_square < rep.tolerance;
  return rep;
}

IdentityReport check_identities(const ACSField& field, int n_samples, unsigned seed) {
  return check_identities([&field](const Point5& p) { return j_matrix_unchecked(field, p); },
                          field.radius, n_samples, seed);
}

Fallback gamma_fallback(const ACSField& field, int n_samples, unsigned seed, double beta_min) {
  std::mt19937_64 rng(seed);
  bool gamma_small = false;
  for (int s = 0; s < n_samples; ++s) {
    const Point5 p = s == 0 ? Point5{} : sample_ball(rng, field.radius);
    const double g = field.gamma(p);
    if (std::abs(g) < field.gamma_min) {
      gamma_small = true;
      if (std::abs(field.beta(p)) < beta_min) {
        throw DomainError("gamma_fallback: beta and gamma both vanish at a sampled point; J^2 = -Id "
                          "cannot hold there");
      }
    }
  }
  Fallback out;
  if (!gamma_small) {
    out.field = field;
    return out;
  }
  for (int s = 0; s < n_samples; ++s) {
    const Point5 p = sample_ball(rng, field.radius);
    if (std::abs(field.beta(p)) < beta_min) {
      throw DomainError("gamma_fallback: |beta| falls below beta_min on the domain");
    }
  }
  // New frame (dx1, dy1, -dy2, dx2) expressed in old coordinates.
  out.relabel.setZero();
  out.relabel(0, 0) = 1.0;
  out.relabel(1, 1) = 1.0;
  out.relabel(3, 2) = -1.0;
  out.relabel(2, 3) = 1.0;
  out.rotated = true;

  ACSField g;
  g.radius = field.radius;
  g.global = field.global;
  g.gamma_min = field.gamma_min;
  g.sigma = field.sigma;
  const ScalarField5 old_gamma = field.gamma;
  g.beta = ScalarField5([old_gamma](const Point5& p) { return -old_gamma(p); }, old_gamma.fd_step());
  g.gamma = field.beta;
  const ACSField src = field;
  g.delta = ScalarField5([src](const Point5& p) { return src.coefficients(p).kappa; },
                         field.sigma.fd_step());
  if (field.matrix_offset) g.matrix_offset = out.relabel.transpose() * *field.matrix_offset * out.relabel;
  out.field = std::move(g);
  return out;
}

namespace {

double max_abs(const Mat4& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

double epsilon_estimate(const ACSField& field, double r, int n_samples, unsigned seed) {
  if (!(r > 0.0) || r > 1.0) throw DomainError("epsilon_estimate: r must lie in (0, 1]");
  const JMatrix J0 = j_matrix_unchecked(field, Point5{});
  const double h1 = 1e-5;
  const double h2 = 1e-4;
  std::mt19937_64 rng(seed);
  const double radius = std::min(r, field.radius);
  double worst = 0.0;
  auto J = [&field](const Vec5& x) { return j_matrix_unchecked(field, Point5::from(x)); };
  for (int s = 0; s < n_samples; ++s) {
    const Point5 p = s == 0 ? Point5{} : sample_ball(rng, radius);
    const Vec5 x = p.vec();
    const JMatrix Jp = J(x);
    double d1 = 0.0, d2 = 0.0;
    for (int k = 0; k < 5; ++k) {
      Vec5 e = Vec5::Zero();
      e[k] = 1.0;
      d1 = std::max(d1, max_abs((J(x + h1 * e) - J(x - h1 * e)) / (2.0 * h1)));
      for (int l = k; l < 5; ++l) {
        Vec5 f = Vec5::Zero();
        f[l] = 1.0;
        Mat4 second;
        if (k == l) {
          second = (J(x + h2 * e) - 2.0 * Jp + J(x - h2 * e)) / (h2 * h2);
        } else {
          second = (J(x + h2 * e + h2 * f) - J(x + h2 * e - h2 * f) - J(x - h2 * e + h2 * f) +
                    J(x - h2 * e - h2 * f)) /
                   (4.0 * h2 * h2);
        }
        d2 = std::max(d2, max_abs(second));
      }
    }
    worst = std::max(worst, max_abs(Jp - J0) + d1 + d2);
  }
  return r * worst;
}

ACSField dilated(const ACSField& field, double r) {
  if (!(r > 0.0) || r > 1.0) throw DomainError("dilated: r must lie in (0, 1]");
  ACSField out = field;
  out.sigma = field.sigma.scaled(r);
  out.beta = field.beta.scaled(r);
  out.gamma = field.gamma.scaled(r);
  out.delta = field.delta.scaled(r);
  if (field.kappa) out.kappa = field.kappa->scaled(r);
  out.radius = field.radius / r;
  return out;
}

}  // namespace acs
}  // namespace legfol
