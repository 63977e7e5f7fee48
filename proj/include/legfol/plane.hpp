#pragma once

#include "legfol/forms.hpp"

#include <complex>
#include <utility>

namespace legfol {

using cplx = std::complex<double>;

/// Identification of a horizontal space with C^2 through a complex structure J:
/// dx1 = (0,1), J dx1 = (0,i), dy1 = (1,0), J dy1 = (i,0).
class ComplexFrame {
 public:
  explicit ComplexFrame(const JMatrix& J);

  HVec to_real(cplx w1, cplx w2) const;
  std::pair<cplx, cplx> to_complex(const HVec& v) const;
  const JMatrix& J() const { return J_; }

 private:
  JMatrix J_;
  Mat4 B_;     // columns dy1, J dy1, dx1, J dx1
  Mat4 Binv_;
};

/// A J-invariant plane in the affine chart [w : 1] of CP^1.
struct PlaneChart {
  cplx w{0.0, 0.0};

  PlaneChart() = default;
  explicit PlaneChart(cplx w_) : w(w_) {}

  /// Oriented real basis (v, Jv) with v the real vector of (w, 1).
  std::pair<HVec, HVec> basis(const ComplexFrame& frame) const;
  std::pair<HVec, HVec> basis(const JMatrix& J) const { return basis(ComplexFrame(J)); }

  /// Chart value of the span of a, b. The span need not be exactly
  /// J-invariant; w is the least-squares fit of zeta = w z over {a, b}.
  static PlaneChart from_vectors(const HVec& a, const HVec& b, const ComplexFrame& frame);

  double distance(const PlaneChart& o) const { return std::abs(w - o.w); }
};

/// Orthonormal basis (Euclidean) of span{a, b}; throws on degeneracy.
std::pair<HVec, HVec> orthonormalize(const HVec& a, const HVec& b, double tol = 1e-12);

}  // namespace legfol
