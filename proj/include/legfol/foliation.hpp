#pragma once

#include "legfol/solver.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace legfol {

/// Complex coordinates (zeta, z) on R^4 from J at the origin.
class ComplexCoords {
 public:
  explicit ComplexCoords(const ACSField& field);
  std::pair<cplx, cplx> of(const Point5& q) const { return frame_.to_complex(q.base()); }
  Vec4 point(cplx zeta, cplx z) const { return frame_.to_real(zeta, z); }
  const ComplexFrame& frame() const { return frame_; }

 private:
  ComplexFrame frame_;
};

struct FoliationConfig {
  SolverConfig solver;
  int t_nodes = 33;
  double t_min = -1.0;
  double t_max = 1.0;
  double lookup_tol = 1e-9;
  int lookup_max_iter = 60;
  double psi_tol = 1e-11;
  ContactParams params;

  FoliationConfig();
  nlohmann::json to_json() const;
};

/// Unit vector of X closest to dx1 (normalized orthogonal projection).
HVec adapted_direction(const PlaneChart& X, const Point5& p, const ACSField& field);

/// Chart at p of the plane V ^ J_p V.
PlaneChart plane_through(const HVec& V, const Point5& p, const ACSField& field);

/// One disk of a leaf: the J-invariant Legendrian through `centre` with tangent `tangent`.
struct LeafDisk {
  double tau = 0.0;
  Point5 centre;
  PlaneChart tangent;
  Point5 P;      // solver parameters returned by psi_invert
  PlaneChart X;
  LegendrianPatch patch;
};

enum class LeafKind { Polar, Parallel };

struct Leaf {
  LeafKind kind = LeafKind::Polar;
  PlaneChart X;
  cplx P{0.0, 0.0};  // parallel leaves only
  std::vector<LeafDisk> disks;
  static constexpr const char* kOrientation =
      "leaf: (V, JV) of each disk followed by +dt; patch: (v, Jv); ambient: alpha ^ dalpha^2";

  /// Point and parameter derivatives at (tau, s1, s2) by linear interpolation between disks.
  struct Sample {
    Point5 p;
    Vec5 d_tau, d_s1, d_s2;
  };
  std::optional<Sample> sample(double tau, double s1, double s2) const;

  nlohmann::json manifest() const;
  /// Writes manifest.json and one CSV per disk into dir.
  void write(const std::filesystem::path& dir) const;
};

/// Disk through (0, tau) with tangent V_X ^ J_(0,tau) V_X.
LeafDisk polar_disk(const PlaneChart& X, double tau, const ACSField& field, const FoliationConfig& cfg,
                    std::optional<std::pair<Point5, PlaneChart>> warm = std::nullopt);
/// Disk through (P, tau) (P in the zeta-line) with tangent V_X ^ J V_X.
LeafDisk parallel_disk(cplx P, const PlaneChart& X, double tau, const ACSField& field, const FoliationConfig& cfg,
                       std::optional<std::pair<Point5, PlaneChart>> warm = std::nullopt);

std::vector<double> t_grid(const FoliationConfig& cfg);
Leaf build_polar_leaf(const PlaneChart& X, const ACSField& field, const FoliationConfig& cfg);
Leaf build_parallel_leaf(cplx P, const PlaneChart& X, const ACSField& field, const FoliationConfig& cfg);

/// Value of the disk over the point z of the complex z-line: returns (zeta, t).
std::optional<std::pair<cplx, double>> disk_over(const LegendrianPatch& patch, const ComplexCoords& cc, cplx z);

struct LookupResult {
  PlaneChart X;   // polar lookup
  cplx P{0, 0};   // parallel lookup
  double tau = 0.0;
  int iterations = 0;
  double residual = 0.0;  // |(zeta, t) of the found disk over z_q minus (zeta_q, t_q)|
  cplx identity_guess{0, 0};
  nlohmann::json to_json() const;
};

LookupResult leaf_through_polar(const Point5& q, const ACSField& field, const FoliationConfig& cfg,
                                std::optional<std::pair<cplx, double>> start = std::nullopt);
LookupResult leaf_through_parallel(const Point5& q, const PlaneChart& X, const ACSField& field,
                                   const FoliationConfig& cfg);

/// |zeta| gap between q and the leaf over (z_q, t_q); zero iff q lies on the leaf.
double polar_gap(const Point5& q, const PlaneChart& X, const ACSField& field, const FoliationConfig& cfg);
double parallel_gap(const Point5& q, cplx P, const PlaneChart& X, const ACSField& field, const FoliationConfig& cfg);

struct Regraph {
  cplx base_w;
  cplx centre_z;
  cplx centre_value;              // G(centre_z)
  Eigen::Matrix2d derivative;     // real derivative of G at centre_z
  double rho = 0.5;
  GridFunction F_re, F_im;        // F = G - H over |z| <= rho
  double sup_F = 0.0;
  double sup_dF = 0.0;
};
/// Writes the patch as zeta = H(z) + F(z) over the base plane zeta = w z.
Regraph regraph(const LegendrianPatch& patch, const PlaneChart& base, const ComplexCoords& cc, double rho = 0.5,
                int n = 17);

struct IntersectionRecord {
  Point5 point;
  int sign = 0;            // +1 / -1, 0 when not transversal
  double rcond = 0.0;      // reciprocal condition number of the matching Jacobian
  bool transversal = false;
  double tau = 0, a1 = 0, a2 = 0, b1 = 0, b2 = 0;
  nlohmann::json to_json() const;
};

std::vector<IntersectionRecord> intersect(const Leaf& leaf, const LegendrianPatch& patch, double rcond_min = 1e-3);

}  // namespace legfol
