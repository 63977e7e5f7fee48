#pragma once

#include "legfol/acs.hpp"
#include "legfol/grid.hpp"
#include "legfol/lift.hpp"
#include "legfol/plane.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <memory>
#include <optional>

namespace legfol {

/// Affine change of coordinates adapted to a point and a J-invariant plane.
/// Adapted coordinates (u, s) correspond to working coordinates
/// (origin.base() + rotation u, origin.t + s). The rotation lies in U(2), so
/// dalpha keeps its standard form.
struct AdaptedChart {
  Point5 origin;
  Mat4 rotation = Mat4::Identity();
  /// First-stage frame {dx1, I dx1, -I W, W} with W an arbitrary unit vector
  /// orthogonal to span{V, IV}.
  Mat4 step1 = Mat4::Identity();
  /// Rotation of the (x2, y2) plane taking the first-stage frame to the final one.
  Eigen::Matrix2d chcoord = Eigen::Matrix2d::Identity();
  /// Coefficients of J at the origin in the first-stage frame.
  double beta_step1 = 0.0, gamma_step1 = 1.0;
  /// Coefficients of J at the origin in the final frame.
  double sigma0 = 0.0, beta0 = 0.0, gamma0 = 1.0, delta0 = 0.0, kappa0 = 1.0;

  Vec4 to_working(const Vec4& u) const { return origin.base() + rotation * u; }
  Point5 to_working(const Vec4& u, double s) const { return Point5::from(to_working(u), origin.t + s); }
  Vec4 to_adapted(const Vec4& q) const { return rotation.transpose() * (q - origin.base()); }
  JMatrix adapted_J(const JMatrix& Jw) const { return rotation.transpose() * Jw * rotation; }

  nlohmann::json to_json() const;
};

AdaptedChart adapt_chart(const Point5& p, const PlaneChart& X, const ACSField& field);

/// The field expressed in adapted coordinates (conjugated matrix, re-read in the model).
ACSField pullback_acs(const ACSField& field, const AdaptedChart& chart);

/// Discretization of M11 u11 + 2 M12 u12 + M22 u22 on the masked disk with
/// zero Dirichlet data; interior nodes are the unknowns.
class EllipticOperator {
 public:
  EllipticOperator(const Eigen::Matrix2d& M, GridPtr grid);

  const Eigen::Matrix2d& M() const { return M_; }
  /// Smallest eigenvalue of M.
  double ellipticity() const { return k_; }
  const GridPtr& grid() const { return grid_; }

  GridFunction solve(const GridFunction& rhs) const;
  /// Discrete operator applied to u (interior nodes; boundary entries 0).
  GridFunction apply(const GridFunction& u) const;
  /// Estimated sup-to-sup norm of the discrete inverse.
  double inverse_sup_norm() const;

 private:
  Eigen::VectorXd gather(const GridFunction& g) const;
  GridFunction scatter(const Eigen::VectorXd& v) const;

  Eigen::Matrix2d M_;
  double k_;
  GridPtr grid_;
  std::vector<int> unknown_;  // node index -> unknown index or -1
  std::vector<int> node_of_;  // unknown index -> node index
  Eigen::SparseMatrix<double> A_;
  std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
  mutable std::optional<double> inv_norm_;
};

/// M of the chart: [[kappa0, sigma0], [sigma0, gamma0]].
Eigen::Matrix2d chart_matrix(const AdaptedChart& chart);

struct SolverConfig {
  int n = 65;
  double radius = 1.0;
  double tol = 1e-10;
  int max_iter = 200;
  bool enforce_smallness = true;
  bool measure_smallness = true;
  int smallness_samples = 200;
  unsigned seed = 7;
  /// Lower bound applied to the measured N (the Schauder constant exceeds 2).
  double n_floor = 2.0;

  nlohmann::json to_json() const;
};

struct SmallnessReport {
  double beta_c2 = 0.0;
  double A_c2 = 0.0;
  double N_measured = 0.0;
  double N_used = 0.0;
  double threshold = 0.0;
  double ball_radius = 0.0;
  bool holds = false;

  nlohmann::json to_json() const;
};

/// Discrete C^2 sizes of beta and A over the unit ball of the adapted chart,
/// against 1 / (24 max(1, |delta0|) N^2).
SmallnessReport measure_smallness(const ACSField& field, const AdaptedChart& chart,
                                  const EllipticOperator& op, const SolverConfig& cfg);

/// Right-hand side of the Picard map at the iterate h (adapted coordinates);
/// also returns the lift used to evaluate the coefficients.
struct RhsResult {
  GridFunction rhs;
  Surface4 surface;  // working coordinates
  GridFunction t;
  std::array<GridFunction, 5> coeffs;  // sigma, beta, gamma, delta, kappa at the lifted nodes
};
RhsResult assemble_rhs(const GridFunction& h, const AdaptedChart& chart, const ACSField& field,
                       const ContactParams& params);

GridFunction elliptic_solve(const EllipticOperator& op, const GridFunction& rhs);

struct DiskSolution {
  AdaptedChart chart;
  GridFunction f;
  GridFunction t;
  GridFunction lambda;
  GridFunction mu;
  /// sigma, beta, gamma, delta, kappa (adapted frame) at the lifted nodes.
  std::array<GridFunction, 5> coeffs;
  LegendrianPatch patch;
  std::vector<double> increments;
  std::vector<double> ratios;
  int iterations = 0;
  double lapl_residual = 0.0;
  double jinv_residual = 0.0;
  double line2_residual = 0.0;
  double legendrian_residual = 0.0;
  double discrete_residual = 0.0;
  double f_c2 = 0.0;
  double ellipticity = 0.0;
  std::optional<SmallnessReport> smallness;
  int residual_nodes = 0;

  double max_ratio() const;
  nlohmann::json to_json() const;
};

DiskSolution picard_solve(const Point5& P, const PlaneChart& X, const ACSField& field,
                          const SolverConfig& cfg, const ContactParams& params = ContactParams{});

/// Residuals of the disk equation and of J-invariance, evaluated with wide
/// stencils at nodes whose 2h neighbours lie in the disk.
struct ResidualReport {
  double lapl = 0.0;
  double jinv = 0.0;
  double line2 = 0.0;
  int nodes = 0;
};
ResidualReport solution_residuals(const DiskSolution& sol, const ACSField& field);

/// Where a disk meets the affine 3-plane {x1 = anchor[0], y2 = anchor[1]}.
struct PsiResult {
  Point5 Q;
  PlaneChart Y;
  double s1 = 0.0, s2 = 0.0;  // patch parameters of Q
};
PsiResult locate_on_plane(const LegendrianPatch& patch, const ACSField& field,
                          const Eigen::Vector2d& anchor);

PsiResult psi(const Point5& P, const PlaneChart& X, const ACSField& field, const SolverConfig& cfg,
              const ContactParams& params = ContactParams{});

struct PsiInverse {
  Point5 P;
  PlaneChart X;
  int iterations = 0;
  double final_increment = 0.0;
  DiskSolution solution;
  PsiResult image;
};

/// Finds (P, X) whose disk passes through Q with tangent Y. P stays in the
/// 3-plane {x1 = Q.x1, y2 = Q.y2}.
PsiInverse psi_invert(const Point5& Q, const PlaneChart& Y, const ACSField& field, const SolverConfig& cfg,
                      const ContactParams& params = ContactParams{},
                      std::optional<std::pair<Point5, PlaneChart>> warm = std::nullopt,
                      double tol = 1e-8, int max_iter = 60);

struct DilationChoice {
  double r = 1.0;
  int halvings = 0;
  double epsilon = 0.0;
  SmallnessReport smallness;
  nlohmann::json to_json() const;
};

/// Halves r from 1 until the dilated field meets the smallness precondition
/// at the origin with X = [0:1]; at most 20 halvings.
DilationChoice choose_dilation(const ACSField& field, const SolverConfig& cfg);

}  // namespace legfol
