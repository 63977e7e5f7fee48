#include "legfol/forms.hpp"

#include "legfol/contact.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <random>

namespace legfol {

Mat4 Form2H::matrix() const {
  Mat4 w = Mat4::Zero();
  auto set = [&w](int i, int j, double v) {
    w(i, j) = v;
    w(j, i) = -v;
  };
  set(0, 1, p + A);
  set(2, 3, p - A);
  set(0, 2, a + B);
  set(1, 3, -a + B);
  set(0, 3, b + C);
  set(1, 2, b - C);
  return w;
}

Form2H Form2H::from_matrix(const Mat4& w) {
  Form2H f;
  f.p = 0.5 * (w(0, 1) + w(2, 3));
  f.A = 0.5 * (w(0, 1) - w(2, 3));
  f.a = 0.5 * (w(0, 2) - w(1, 3));
  f.B = 0.5 * (w(0, 2) + w(1, 3));
  f.b = 0.5 * (w(0, 3) + w(1, 2));
  f.C = 0.5 * (w(0, 3) - w(1, 2));
  return f;
}

double Form2H::eval(const Vec4& u, const Vec4& v) const { return u.dot(matrix() * v); }

Form2H Form2H::operator+(const Form2H& o) const {
  return {p + o.p, a + o.a, b + o.b, A + o.A, B + o.B, C + o.C};
}
Form2H Form2H::operator-(const Form2H& o) const {
  return {p - o.p, a - o.a, b - o.b, A - o.A, B - o.B, C - o.C};
}
Form2H Form2H::operator*(double s) const { return {p * s, a * s, b * s, A * s, B * s, C * s}; }

Form2H Form2H::elementary(int i, int j) {
  if (i == j || i < 1 || j < 1 || i > 4 || j > 4) throw DomainError("Form2H::elementary: bad index");
  Mat4 w = Mat4::Zero();
  w(i - 1, j - 1) = 1.0;
  w(j - 1, i - 1) = -1.0;
  return from_matrix(w);
}

namespace forms {

Form2H star(const Form2H& w) { return {w.p, w.a, w.b, -w.A, -w.B, -w.C}; }

std::pair<Form2H, Form2H> sd_split(const Form2H& w) {
  return {Form2H{w.p, w.a, w.b, 0, 0, 0}, Form2H{0, 0, 0, w.A, w.B, w.C}};
}

double inner(const Form2H& u, const Form2H& v) {
  return 2.0 * (u.p * v.p + u.a * v.a + u.b * v.b + u.A * v.A + u.B * v.B + u.C * v.C);
}

double norm(const Form2H& w) { return std::sqrt(inner(w, w)); }

double wedge_coeff(const Mat4& u, const Mat4& v) {
  return u(0, 1) * v(2, 3) + u(2, 3) * v(0, 1) - u(0, 2) * v(1, 3) - u(1, 3) * v(0, 2) +
         u(0, 3) * v(1, 2) + u(1, 2) * v(0, 3);
}

double wedge_coeff(const Form2H& u, const Form2H& v) {
  return 2.0 * (u.p * v.p + u.a * v.a + u.b * v.b) - 2.0 * (u.A * v.A + u.B * v.B + u.C * v.C);
}

double comass(const Form2H& w) {
  const auto [plus, minus] = sd_split(w);
  return (norm(plus) + norm(minus)) / std::sqrt(2.0);
}

double comass_bruteforce(const Form2H& w, int starts, unsigned seed) {
  const Mat4 W = w.matrix();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  auto random_unit = [&] {
    Vec4 v;
    for (int k = 0; k < 4; ++k) v[k] = gauss(rng);
    return Vec4(v.normalized());
  };
  double best = 0.0;
  for (int s = 0; s < starts; ++s) {
    Vec4 u = random_unit();
    Vec4 v = random_unit();
    v -= v.dot(u) * u;
    if (v.norm() < 1e-8) continue;
    v.normalize();
    best = std::max(best, std::abs(u.dot(W * v)));
    // Alternating ascent: for fixed v the best u is W v / |W v|, which is
    // automatically orthogonal to v because W is skew.
    for (int it = 0; it < 200; ++it) {
      const Vec4 wv = W * v;
      if (wv.norm() < 1e-300) break;
      u = wv.normalized();
      const Vec4 wtu = W.transpose() * u;
      if (wtu.norm() < 1e-300) break;
      const Vec4 v_next = wtu.normalized();
      const double delta = (v_next - v).norm();
      v = v_next;
      best = std::max(best, u.dot(W * v));
      if (delta < 1e-15) break;
    }
  }
  return best;
}

double comass_eigen(const Mat4& w) {
  Eigen::JacobiSVD<Mat4> svd(w);
  return svd.singularValues()[0];
}

JMatrix j_of_theta(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  JMatrix J = JMatrix::Zero();
  J.col(0) << 0, 0, c, s;     // J e1 = c e3 + s e4
  J.col(1) << 0, 0, s, -c;    // J e2 = -c e4 + s e3
  J.col(2) << -c, -s, 0, 0;   // J e3 = -c e1 - s e2
  J.col(3) << -s, c, 0, 0;    // J e4 = c e2 - s e1
  return J;
}

JFromForm j_from_form(const Form2H& w, double tol) {
  const double scale = std::max(1.0, norm(w));
  if (std::abs(w.p) > tol * scale) {
    throw DomainError("j_from_form: form is not orthogonal to dalpha (p = " + std::to_string(w.p) +
                      ")");
  }
  const double plus = w.a * w.a + w.b * w.b;
  const double minus = w.A * w.A + w.B * w.B + w.C * w.C;
  if (!(plus > minus)) {
    throw DomainError("j_from_form: positivity a^2 + b^2 > A^2 + B^2 + C^2 fails");
  }
  JFromForm out;
  out.theta = std::atan2(w.b, w.a);
  out.J = j_of_theta(out.theta);
  return out;
}

const Mat4& frame_I() { return contact::standard_I_matrix(); }

Form2H omega_from_J(const JMatrix& J, double tol) {
  const Mat4& D = contact::dalpha_matrix();
  const double sq = (J * J + Mat4::Identity()).cwiseAbs().maxCoeff();
  if (sq > tol) throw DomainError("omega_from_J: J^2 != -Id (defect " + std::to_string(sq) + ")");
  // dalpha(Jv, v) = v^T J^T D v vanishes for all v iff J^T D is skew.
  const Mat4 jd = J.transpose() * D;
  const double lag = (jd + jd.transpose()).cwiseAbs().maxCoeff();
  if (lag > tol) {
    throw DomainError("omega_from_J: dalpha(Jv, v) != 0 (defect " + std::to_string(lag) + ")");
  }
  const Mat4& I = frame_I();
  const Mat4 K = 0.5 * (J * I - I * J);
  const Mat4 omega = D * K;
  return Form2H::from_matrix(0.5 * (omega - omega.transpose()));
}

void to_json(nlohmann::json& j, const HypothesisCheck& c) {
  j = nlohmann::json{{"hypothesis", c.hypothesis},
                     {"value", c.value},
                     {"tolerance", c.tolerance},
                     {"pass", c.pass}};
}

std::string SemicalibrationReport::failure() const {
  for (const auto& c : checks) {
    if (!c.pass) return c.hypothesis;
  }
  return {};
}

nlohmann::json SemicalibrationReport::to_json() const {
  nlohmann::json j;
  j["checks"] = checks;
  j["pass"] = pass;
  if (theta) j["theta"] = *theta;
  return j;
}

SemicalibrationReport verify_semicalibration(const Form2H& w, double tol) {
  SemicalibrationReport rep;
  auto add = [&](std::string name, double value, double target) {
    rep.checks.push_back({std::move(name), value, tol, std::abs(value - target) <= tol});
  };
  add("comass_one", comass(w), 1.0);
  add("wedge_dalpha_zero", wedge_coeff(w, Form2H::dalpha()), 0.0);
  // dalpha^2 = 2 e1234
  add("wedge_square_equals_dalpha_squared", wedge_coeff(w, w), 2.0);
  rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const auto& c) { return c.pass; });
  if (!rep.pass) return rep;

  // Under the three hypotheses -B^2 - C^2 >= 2 A^2, so w is self-dual.
  const double asd = std::sqrt(w.A * w.A + w.B * w.B + w.C * w.C);
  rep.checks.push_back({"self_dual", asd, std::sqrt(tol), asd <= std::sqrt(tol)});
  if (!rep.checks.back().pass) {
    rep.pass = false;
    return rep;
  }
  const auto jf = j_from_form(w, tol);
  rep.theta = jf.theta;
  rep.J = jf.J;
  return rep;
}

}  // namespace forms
}  // namespace legfol
