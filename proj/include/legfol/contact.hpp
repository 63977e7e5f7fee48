#pragma once

#include "legfol/types.hpp"

namespace legfol {

/// Dilation parameter of the flattened contact form
/// alpha = (1/r) dt - (y1 dx1 + y2 dx2). r = 1 is the standard structure.
struct ContactParams {
  double r = 1.0;

  ContactParams() = default;
  explicit ContactParams(double r_);
};

namespace contact {

/// Frame (dx1 + r y1 dt, dy1, dx2 + r y2 dt, dy2) of the horizontal hyperplane at p.
std::array<Vec5, 4> horizontal_frame(const Point5& p, const ContactParams& params);

double alpha_eval(const Point5& p, const Vec5& v, const ContactParams& params);

/// d(alpha) = dx1^dy1 + dx2^dy2 on horizontal projections.
double dalpha_eval(const HVec& u, const HVec& v);

/// The 4x4 skew matrix of d(alpha) in the order (x1, y1, x2, y2).
const Mat4& dalpha_matrix();

/// Reeb field: r * d/dt.
Vec5 reeb(const ContactParams& params);

/// Horizontal lift of v based over q4; independent of the fibre coordinate t.
Vec5 lift_vector(const Vec4& q4, double t, const HVec& v, const ContactParams& params);

/// Coordinate-wise division by r.
Point5 dilate(const Point5& p, double r);

/// Standard complex structure: I dx_i = dy_i, I dy_i = -dx_i.
HVec standard_I(const HVec& v);
const Mat4& standard_I_matrix();

/// g = dalpha(., I .) + alpha (x) alpha on R^5.
double metric(const Point5& p, const Vec5& u, const Vec5& v, const ContactParams& params);

/// alpha ^ (dalpha)^2 evaluated on five vectors. Equals (2/r) det[v1..v5].
double volume_form(const std::array<Vec5, 5>& vs, const ContactParams& params);

}  // namespace contact
}  // namespace legfol
