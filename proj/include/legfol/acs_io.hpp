#pragma once

#include "legfol/acs.hpp"

#include <nlohmann/json.hpp>

namespace legfol {

/// c0 + g.p + (1/2) p^T H p with exact derivatives.
ScalarField5 quadratic_field(double c0, const Vec5& g, const Mat5& H);

namespace builtin {

ACSField standard();
/// sigma = eps x1, beta = 0, gamma = 1, delta = 0.
ACSField sigma_linear(double eps);
/// sigma = eps x1, beta = eps (x1 - y2 + x2), gamma = 1 + eps y1, delta = eps y2.
ACSField perturbed(double eps);
/// Random quadratic perturbation of the standard structure, size eps.
ACSField random_poly(double eps, unsigned seed);

}  // namespace builtin

/// Builds a field from {"builtin": name, "params": {...}} or
/// {"coeffs": {"sigma": expr, ...}}; optional "radius", "gamma_min",
/// "kappa" (expr) and "perturb_matrix" (4x4 rows).
ACSField acs_from_json(const nlohmann::json& j);

}  // namespace legfol
