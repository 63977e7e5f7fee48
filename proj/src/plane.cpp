#include "legfol/plane.hpp"

namespace legfol {

ComplexFrame::ComplexFrame(const JMatrix& J) : J_(J) {
  const Vec4 ex1(1, 0, 0, 0), ey1(0, 1, 0, 0);
  B_.col(0) = ey1;
  B_.col(1) = J * ey1;
  B_.col(2) = ex1;
  B_.col(3) = J * ex1;
  Eigen::FullPivLU<Mat4> lu(B_);
  if (!lu.isInvertible()) throw DomainError("ComplexFrame: J does not give a complex identification");
  Binv_ = lu.inverse();
}

HVec ComplexFrame::to_real(cplx w1, cplx w2) const {
  return B_ * Vec4(w1.real(), w1.imag(), w2.real(), w2.imag());
}

std::pair<cplx, cplx> ComplexFrame::to_complex(const HVec& v) const {
  const Vec4 c = Binv_ * v;
  return {cplx(c[0], c[1]), cplx(c[2], c[3])};
}

std::pair<HVec, HVec> PlaneChart::basis(const ComplexFrame& frame) const {
  const HVec v = frame.to_real(w, 1.0);
  return {v, frame.J() * v};
}

PlaneChart PlaneChart::from_vectors(const HVec& a, const HVec& b, const ComplexFrame& frame) {
  const auto [za1, za2] = frame.to_complex(a);
  const auto [zb1, zb2] = frame.to_complex(b);
  const double den = std::norm(za2) + std::norm(zb2);
  if (!(den > 1e-24)) throw DomainError("PlaneChart: plane is outside the chart W2 != 0");
  return PlaneChart((za1 * std::conj(za2) + zb1 * std::conj(zb2)) / den);
}

std::pair<HVec, HVec> orthonormalize(const HVec& a, const HVec& b, double tol) {
  const double na = a.norm();
  if (!(na > tol)) throw DomainError("orthonormalize: degenerate first vector");
  const HVec u = a / na;
  HVec v = b - u.dot(b) * u;
  const double nv = v.norm();
  if (!(nv > tol * std::max(1.0, b.norm()))) throw DomainError("orthonormalize: vectors are dependent");
  return {u, v / nv};
}

}  // namespace legfol
