#pragma once

#include "legfol/acs.hpp"
#include "legfol/contact.hpp"
#include "legfol/grid.hpp"
#include "legfol/plane.hpp"

#include <array>

namespace legfol {

/// A surface in R^4 sampled on a masked grid: one 4-point per mask node.
struct Surface4 {
  GridPtr grid;
  std::array<GridFunction, 4> coords;

  explicit Surface4(GridPtr g);
  Vec4 point(int i, int j) const;
  /// Tangents along the two grid directions by free-mode differentiation.
  std::pair<Vec4, Vec4> tangents(int i, int j) const;
};

/// (x1, f1, -f2, y2) over the grid of f.
Surface4 lagrangian_graph(const GridFunction& f, BoundaryMode mode = BoundaryMode::Free);

/// Max over mask nodes of r |dalpha(T1, T2)| for the grid tangents.
double closedness_residual(const Surface4& L, const ContactParams& params);

struct LiftResult {
  GridFunction t;
  /// Max |t_row - t_col| between the two staircase sweep orders.
  double sweep_discrepancy = 0.0;
  double closedness = 0.0;
};

/// Integrates dt = r (y1 dx1 + y2 dx2) over L from the centre node, where
/// t equals start.t. The start must lie over the centre node's 4-point.
LiftResult legendrian_lift(const Surface4& L, const Point5& start, const ContactParams& params,
                           bool check_closedness = true);

/// Max over random rectangular node loops of |closed-path integral of dt|.
double loop_residual(const Surface4& L, const ContactParams& params, int n_loops, unsigned seed = 11);

/// A Legendrian surface on a masked grid with nodal tangents.
struct LegendrianPatch {
  GridPtr grid;
  std::array<GridFunction, 5> coords;
  std::array<GridFunction, 5> tangent1;
  std::array<GridFunction, 5> tangent2;
  Point5 start;
  ContactParams params;

  Point5 point(int i, int j) const;
  Vec5 t1(int i, int j) const;
  Vec5 t2(int i, int j) const;

  struct Sample {
    Point5 p;
    Vec5 ds1;  // derivative of the bilinear interpolant
    Vec5 ds2;
    Vec5 t1;   // interpolated nodal tangents
    Vec5 t2;
  };
  /// Bilinear evaluation at grid parameters (s1, s2); empty outside the mask.
  std::optional<Sample> sample(double s1, double s2) const;

  /// CSV with header "i,j,s1,s2,x1,y1,x2,y2,t".
  void write_csv(std::ostream& os) const;
};

/// Solves A p(s) = target for the bilinear patch parameter s by damped
/// Newton from s0. Empty when no solution is found inside the mask.
struct PatchSolve {
  double s1, s2;
  LegendrianPatch::Sample sample;
};
std::optional<PatchSolve> solve_on_patch(const LegendrianPatch& patch, const Eigen::Matrix<double, 2, 5>& A,
                                         const Eigen::Vector2d& target, double s1 = 0.0, double s2 = 0.0,
                                         double tol = 1e-13);

/// Assembles a patch from a surface and its lift. Tangents are taken by
/// free-mode differentiation of all five coordinate grids.
LegendrianPatch make_patch(const Surface4& L, const GridFunction& t, const Point5& start,
                           const ContactParams& params);

/// Max over nodes and both tangents of |alpha(tangent)|.
double legendrian_residual(const LegendrianPatch& patch);

/// Chart [w : 1] of the tangent plane at a node, using the complex identification of J.
PlaneChart tangent_plane(const LegendrianPatch& patch, int i, int j, const JMatrix& J);
PlaneChart tangent_plane(const LegendrianPatch& patch, int i, int j, const ACSField& field);

}  // namespace legfol
