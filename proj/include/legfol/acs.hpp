#pragma once

#include "legfol/contact.hpp"
#include "legfol/forms.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <random>

namespace legfol {

/// A smooth real function of the five coordinates. Derivatives come from the
/// analytic rules when present, central finite differences otherwise.
class ScalarField5 {
 public:
  using Eval = std::function<double(const Point5&)>;
  using Gradient = std::function<Vec5(const Point5&)>;
  using Hessian = std::function<Mat5(const Point5&)>;

  ScalarField5() : ScalarField5(0.0) {}
  explicit ScalarField5(Eval f, double fd_step = 1e-5);
  /// A constant field with exact (zero) derivatives.
  explicit ScalarField5(double c);

  ScalarField5& with_gradient(Gradient g);
  ScalarField5& with_hessian(Hessian h);

  double operator()(const Point5& p) const { return eval_(p); }
  Vec5 gradient(const Point5& p) const;
  Mat5 hessian(const Point5& p) const;

  double fd_step() const { return h_; }
  bool has_analytic_gradient() const { return static_cast<bool>(grad_); }

  /// p -> f(A (p - shift)) for a linear map A on R^5.
  ScalarField5 composed(const Mat5& A, const Vec5& shift = Vec5::Zero()) const;
  /// p -> f(r p); derivatives are rescaled exactly.
  ScalarField5 scaled(double r) const;

  static ScalarField5 linear(double c0, const Vec5& grad);

 private:
  Eval eval_;
  Gradient grad_;
  Hessian hess_;
  double h_ = 1e-5;
};

/// Anti-compatible almost complex structure on a ball of R^5 in the
/// sigma / beta / gamma / delta model:
///   J dx1 = sigma dx1 + beta dx2 + gamma dy2
///   J dx2 = -sigma dx2 + delta dx1 - gamma dy1
///   J dy1 = sigma dy1 + delta dy2 + kappa dx2
///   J dy2 = -sigma dy2 - kappa dx1 + beta dy1
/// with kappa = (1 + sigma^2 + beta delta) / gamma. A separate kappa field may
/// be supplied for structures where gamma vanishes.
struct ACSField {
  ScalarField5 sigma{0.0};
  ScalarField5 beta{0.0};
  ScalarField5 gamma{1.0};
  ScalarField5 delta{0.0};
  std::optional<ScalarField5> kappa;
  /// Ball used by sampling checks; evaluation outside it is rejected unless
  /// the coefficients are closed-form expressions valid everywhere (global).
  double radius = 1.0;
  bool global = false;
  double gamma_min = 1e-3;
  /// Additive perturbation of the matrix (used only to build corrupted fixtures).
  std::optional<Mat4> matrix_offset;

  struct Coefficients {
    double sigma, beta, gamma, delta, kappa;
  };
  Coefficients coefficients(const Point5& p) const;

  static ACSField standard();
  static ACSField constant(double sigma, double beta, double gamma, double delta);
};

/// A general field of 4x4 matrices, for identity checks on data that may
/// leave the model.
using MatrixField = std::function<Mat4(const Point5&)>;

namespace acs {

/// Matrix of J in the frame (dx1, dy1, dx2, dy2), without domain checks.
JMatrix j_matrix_unchecked(const ACSField& field, const Point5& p);

/// Checked version: rejects points outside the ball and |gamma| < gamma_min
/// (unless a kappa field is present).
JMatrix j_matrix(const ACSField& field, const Point5& p);

/// Matrix built directly from coefficient values.
JMatrix j_matrix_from(double sigma, double beta, double gamma, double delta, double kappa);

/// Reads sigma, beta, gamma, delta, kappa back from a matrix; the residual is
/// the max deviation of the matrix from the model form.
struct ModelReading {
  ACSField::Coefficients coeffs;
  double residual;
};
ModelReading read_model(const JMatrix& J);

/// Extension to R^5 with J(Reeb) = 0, acting on coordinate vectors at p.
Mat5 j_extended(const ACSField& field, const Point5& p, const ContactParams& params);

struct IdentityReport {
  double max_lagrangian = 0.0;      // |dalpha(Jv, v)|
  double max_anticompat = 0.0;      // |dalpha(v, w) + dalpha(Jv, Jw)|
  double max_square = 0.0;          // |J^2 + Id|
  double tolerance = 1e-10;
  int samples = 0;
  bool pass = false;

  std::string failure() const;
  nlohmann::json to_json() const;
};

/// Samples points in the ball and unit vectors v, w.
IdentityReport check_identities(const MatrixField& J, double radius, int n_samples, unsigned seed = 1);
IdentityReport check_identities(const ACSField& field, int n_samples, unsigned seed = 1);

struct Fallback {
  ACSField field;
  /// Columns are the new frame vectors in old coordinates; v_new = P^T v_old.
  Mat4 relabel = Mat4::Identity();
  bool rotated = false;
};

/// Swaps the roles of (x2, y2) when gamma gets close to zero somewhere on the
/// sampled ball: old dx2 = new dy2, old dy2 = -new dx2.
Fallback gamma_fallback(const ACSField& field, int n_samples = 2000, unsigned seed = 3,
                        double beta_min = 1e-3);

/// r times the sampled sup over B_r of |J - J0| + |DJ| + |D^2 J| (max-entry norms).
double epsilon_estimate(const ACSField& field, double r, int n_samples, unsigned seed = 5);

/// Pulls the field back by the dilation p -> r p.
ACSField dilated(const ACSField& field, double r);

/// Uniform sample in the closed ball of given radius in R^5.
Point5 sample_ball(std::mt19937_64& rng, double radius);
Vec4 sample_unit4(std::mt19937_64& rng);

}  // namespace acs
}  // namespace legfol
