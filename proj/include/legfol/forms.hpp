#pragma once

#include "legfol/types.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <utility>
#include <vector>

namespace legfol {

/// A horizontal 2-form at a point, written in an orthonormal frame
/// {e1 = X, e2 = IX, e3 = Y, e4 = IY} in which dalpha = e12 + e34.
///
/// Self-dual coefficients:      p (e12 + e34), a (e13 + e42), b (e14 + e23)
/// Anti-self-dual coefficients: A (e12 - e34), B (e13 - e42), C (e14 - e23)
struct Form2H {
  double p = 0.0, a = 0.0, b = 0.0;
  double A = 0.0, B = 0.0, C = 0.0;

  /// Skew matrix W with W(i, j) = w(e_i, e_j).
  Mat4 matrix() const;
  static Form2H from_matrix(const Mat4& w);

  /// w(u, v) on frame coefficient vectors.
  double eval(const Vec4& u, const Vec4& v) const;

  Form2H operator+(const Form2H& o) const;
  Form2H operator-(const Form2H& o) const;
  Form2H operator*(double s) const;

  static Form2H dalpha() { return {1.0, 0, 0, 0, 0, 0}; }
  /// Elementary form e^{ij} (1-based indices, i != j).
  static Form2H elementary(int i, int j);
};

inline Form2H operator*(double s, const Form2H& w) { return w * s; }

using JMatrix = Mat4;

namespace forms {

inline constexpr double kIdentityTol = 1e-12;
inline constexpr double kHypothesisTol = 1e-8;

Form2H star(const Form2H& w);
std::pair<Form2H, Form2H> sd_split(const Form2H& w);

/// Frame inner product; <e12 + e34, e12 + e34> = 2.
double inner(const Form2H& u, const Form2H& v);
double norm(const Form2H& w);

/// Coefficient c with u ^ v = c e1234.
double wedge_coeff(const Form2H& u, const Form2H& v);
/// Same, for arbitrary skew 4x4 matrices.
double wedge_coeff(const Mat4& u, const Mat4& v);

/// Closed-form comass (|w+| + |w-|) / sqrt(2).
double comass(const Form2H& w);

/// Maximum of w(u, v) over orthonormal pairs, found by multi-start
/// alternating ascent. Independent of the self-dual decomposition.
double comass_bruteforce(const Form2H& w, int starts = 64, unsigned seed = 7);

/// Largest singular value of the skew matrix; equals the comass of a 2-form in R^4.
double comass_eigen(const Mat4& w);

struct JFromForm {
  double theta = 0.0;
  JMatrix J;
};

/// Almost complex structure determined by the normalized self-dual part of w.
/// Throws DomainError unless p = 0 and a^2 + b^2 > A^2 + B^2 + C^2.
JFromForm j_from_form(const Form2H& w, double tol = 1e-10);

/// The J-matrix attached to angle theta in the orthonormal frame.
JMatrix j_of_theta(double theta);

/// Omega(X, Y) = dalpha(X, (JI - IJ) Y / 2) with I the frame complex structure.
/// Throws DomainError if J^2 != -Id or dalpha(Jv, v) != 0.
Form2H omega_from_J(const JMatrix& J, double tol = 1e-10);

/// I in the orthonormal frame: I e1 = e2, I e3 = e4.
const Mat4& frame_I();

struct HypothesisCheck {
  std::string hypothesis;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

void to_json(nlohmann::json& j, const HypothesisCheck& c);

struct SemicalibrationReport {
  std::vector<HypothesisCheck> checks;
  bool pass = false;
  std::optional<double> theta;
  std::optional<JMatrix> J;

  /// Name of the first violated hypothesis, empty when all pass.
  std::string failure() const;
  nlohmann::json to_json() const;
};

/// Checks comass 1, w ^ dalpha = 0 and w ^ w = dalpha^2.
SemicalibrationReport verify_semicalibration(const Form2H& w, double tol = kHypothesisTol);

}  // namespace forms
}  // namespace legfol
