#include "legfol/contact.hpp"

namespace legfol {

ContactParams::ContactParams(double r_) : r(r_) {
  if (!(r_ > 0.0) || r_ > 1.0) {
    throw DomainError("ContactParams: dilation r must lie in (0, 1], got " + std::to_string(r_));
  }
}

namespace contact {

std::array<Vec5, 4> horizontal_frame(const Point5& p, const ContactParams& params) {
  std::array<Vec5, 4> frame;
  for (int k = 0; k < 4; ++k) {
    HVec e = HVec::Zero();
    e[k] = 1.0;
    frame[k] = lift_vector(p.base(), p.t, e, params);
  }
  return frame;
}

double alpha_eval(const Point5& p, const Vec5& v, const ContactParams& params) {
  return v[4] / params.r - (p.y1 * v[0] + p.y2 * v[2]);
}

double dalpha_eval(const HVec& u, const HVec& v) {
  return u[0] * v[1] - u[1] * v[0] + u[2] * v[3] - u[3] * v[2];
}

const Mat4& dalpha_matrix() {
  static const Mat4 d = [] {
    Mat4 m = Mat4::Zero();
    m(0, 1) = 1.0;
    m(1, 0) = -1.0;
    m(2, 3) = 1.0;
    m(3, 2) = -1.0;
    return m;
  }();
  return d;
}

Vec5 reeb(const ContactParams& params) {
  Vec5 v = Vec5::Zero();
  v[4] = params.r;
  return v;
}

Vec5 lift_vector(const Vec4& q4, double /*t*/, const HVec& v, const ContactParams& params) {
  return lift5(v, params.r * (q4[1] * v[0] + q4[3] * v[2]));
}

Point5 dilate(const Point5& p, double r) {
  if (!(r > 0.0)) throw DomainError("dilate: r must be positive");
  return {p.x1 / r, p.y1 / r, p.x2 / r, p.y2 / r, p.t / r};
}

HVec standard_I(const HVec& v) { return standard_I_matrix() * v; }

const Mat4& standard_I_matrix() {
  static const Mat4 i = [] {
    Mat4 m = Mat4::Zero();
    m(1, 0) = 1.0;   // I dx1 = dy1
    m(0, 1) = -1.0;  // I dy1 = -dx1
    m(3, 2) = 1.0;
    m(2, 3) = -1.0;
    return m;
  }();
  return i;
}

double metric(const Point5& p, const Vec5& u, const Vec5& v, const ContactParams& params) {
  // The horizontal part of u is u - alpha(u) R, whose R^4 projection is u's.
  const HVec hu = u.head<4>();
  const HVec hv = v.head<4>();
  return dalpha_eval(hu, standard_I(hv)) + alpha_eval(p, u, params) * alpha_eval(p, v, params);
}

double volume_form(const std::array<Vec5, 5>& vs, const ContactParams& params) {
  Mat5 m;
  for (int k = 0; k < 5; ++k) m.col(k) = vs[k];
  return 2.0 / params.r * m.determinant();
}

}  // namespace contact
}  // namespace legfol
