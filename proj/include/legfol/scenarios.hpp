#pragma once

#include "legfol/forms.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace legfol {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

enum class ScenarioId { S5, CyLevelset, N5 };

std::string to_string(ScenarioId id);
/// Accepts "s5", "cy", "cy_levelset" and "n5".
ScenarioId scenario_from_string(const std::string& s);

/// One sampled point of an embedded contact 5-manifold, with every
/// pointwise quantity expressed through ambient vectors.
struct ScenarioPoint {
  ScenarioId id = ScenarioId::S5;
  VecX x;
  /// Columns: ambient-orthonormal basis of the tangent space.
  MatX tangent;
  /// alpha on the tangent basis.
  Eigen::Matrix<double, 1, 5> alpha_row;
  VecX reeb;
  /// Columns e1..e4 with lambda dalpha = e12 + e34 and omega self-dual
  /// for the metric making them orthonormal.
  MatX horizontal;
  /// omega in the horizontal frame.
  Form2H omega;
  /// lambda with omega ^ omega = (d(lambda alpha))^2.
  double normalization = 1.0;
  /// max |omega(Reeb, T_k)| of the ambient form before horizontal projection.
  double raw_reeb_omega = 0.0;
  std::vector<forms::HypothesisCheck> checks;

  bool pass() const;
  nlohmann::json to_json() const;
};

/// Point on the unit sphere of C^3 = R^6, coordinates (x1, y1, x2, y2, x3, y3).
ScenarioPoint s5_point(const VecX& p);

/// Level set of a function on C^3; the gradient is taken by central
/// differences when not supplied.
struct LevelSet {
  std::function<double(const VecX&)> value;
  std::function<VecX(const VecX&)> gradient;
};

/// sum a_k |z_k|^2.
LevelSet ellipsoid(const Eigen::Vector3d& a);

ScenarioPoint cy_levelset_point(const LevelSet& rho, const VecX& p);

/// (e1, e2) orthonormal in R^4.
ScenarioPoint n5_point(const Eigen::Vector4d& e1, const Eigen::Vector4d& e2);

struct ScenarioReport {
  ScenarioId id = ScenarioId::S5;
  int n_points = 0;
  unsigned seed = 0;
  std::vector<ScenarioPoint> points;
  /// Worst deviation per check name.
  std::vector<std::pair<std::string, double>> max_deviation;
  bool pass = false;
  nlohmann::json to_json() const;
};

/// Random points of the scenario; cy uses an ellipsoid with axes drawn from the seed.
ScenarioReport verify_scenario(ScenarioId id, int n_points, unsigned seed);

namespace scenarios {

/// Orthonormal basis (columns) of the null space of the rows of C.
MatX null_space(const MatX& C);

/// Ambient 2-form matrix of d(a) for the 1-form with coefficients a(x):
/// central differences with step h, one Richardson step.
MatX exterior_derivative(const std::function<VecX(const VecX&)>& a, const VecX& x, double h = 1e-5);

/// Frame in which D = e12 + e34 and W is self-dual, for 4x4 skew D, W with
/// W ^ D = 0 and W ^ W = D ^ D. Columns are coefficient vectors.
Mat4 semicalibrating_frame(const Mat4& D, const Mat4& W);

}  // namespace scenarios
}  // namespace legfol
