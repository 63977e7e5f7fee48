#include "legfol/acs_io.hpp"

#include "legfol/expr.hpp"

#include <random>

namespace legfol {

ScalarField5 quadratic_field(double c0, const Vec5& g, const Mat5& H) {
  const Mat5 S = 0.5 * (H + H.transpose());
  ScalarField5 f([c0, g, S](const Point5& p) {
    const Vec5 x = p.vec();
    return c0 + g.dot(x) + 0.5 * x.dot(S * x);
  });
  f.with_gradient([g, S](const Point5& p) { return Vec5(g + S * p.vec()); });
  f.with_hessian([S](const Point5&) { return S; });
  return f;
}

namespace builtin {

namespace {
Vec5 unit(int k) {
  Vec5 e = Vec5::Zero();
  e[k] = 1.0;
  return e;
}
}  // namespace

ACSField standard() { return ACSField::standard(); }

ACSField sigma_linear(double eps) {
  ACSField f = ACSField::standard();
  f.global = true;
  f.sigma = ScalarField5::linear(0.0, eps * unit(0));
  return f;
}

ACSField perturbed(double eps) {
  ACSField f;
  f.global = true;
  f.sigma = ScalarField5::linear(0.0, eps * unit(0));
  f.beta = ScalarField5::linear(0.0, eps * (unit(0) - unit(3) + unit(2)));
  f.gamma = ScalarField5::linear(1.0, eps * unit(1));
  f.delta = ScalarField5::linear(0.0, eps * unit(3));
  return f;
}

ACSField random_poly(double eps, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto draw = [&](double c0) {
    Vec5 g;
    Mat5 H;
    for (int k = 0; k < 5; ++k) g[k] = eps * u(rng);
    for (int k = 0; k < 5; ++k)
      for (int l = 0; l < 5; ++l) H(k, l) = eps * u(rng);
    return quadratic_field(c0 + eps * u(rng), g, H);
  };
  ACSField f;
  f.global = true;
  f.sigma = draw(0.0);
  f.beta = draw(0.0);
  f.gamma = draw(1.0);
  f.delta = draw(0.0);
  return f;
}

}  // namespace builtin

namespace {

ScalarField5 expr_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw DomainError(std::string("coeffs: missing '") + key + "'");
  const auto& v = j.at(key);
  if (v.is_number()) return ScalarField5(v.get<double>());
  if (!v.is_string()) throw DomainError(std::string("coeffs: '") + key + "' must be a string or number");
  Expression e = Expression::parse(v.get<std::string>());
  return ScalarField5([e](const Point5& p) { return e(p); });
}

double param(const nlohmann::json& params, const char* key, double fallback) {
  if (!params.contains(key)) return fallback;
  return params.at(key).get<double>();
}

}  // namespace

ACSField acs_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("ACS config must be a JSON object");
  ACSField field;
  if (j.contains("builtin")) {
    const std::string name = j.at("builtin").get<std::string>();
    const nlohmann::json params = j.value("params", nlohmann::json::object());
    if (name == "standard") {
      field = builtin::standard();
    } else if (name == "constant") {
      field = ACSField::constant(param(params, "sigma", 0.0), param(params, "beta", 0.0),
                                 param(params, "gamma", 1.0), param(params, "delta", 0.0));
    } else if (name == "sigma_linear") {
      field = builtin::sigma_linear(param(params, "eps", 0.01));
    } else if (name == "perturbed") {
      field = builtin::perturbed(param(params, "eps", 0.01));
    } else if (name == "random_poly") {
      field = builtin::random_poly(param(params, "eps", 0.01),
                                   static_cast<unsigned>(param(params, "seed", 1.0)));
    } else {
      throw DomainError("unknown builtin ACS '" + name + "'");
    }
  } else if (j.contains("coeffs")) {
    const auto& c = j.at("coeffs");
    field.sigma = expr_field(c, "sigma");
    field.beta = expr_field(c, "beta");
    field.gamma = expr_field(c, "gamma");
    field.delta = expr_field(c, "delta");
    if (c.contains("kappa")) field.kappa = expr_field(c, "kappa");
    field.global = true;
  } else {
    throw DomainError("ACS config needs either 'builtin' or 'coeffs'");
  }
  if (j.contains("radius")) field.radius = j.at("radius").get<double>();
  if (j.contains("global")) field.global = j.at("global").get<bool>();
  if (j.contains("gamma_min")) field.gamma_min = j.at("gamma_min").get<double>();
  if (j.contains("perturb_matrix")) {
    const auto& m = j.at("perturb_matrix");
    if (!m.is_array() || m.size() != 4) throw DomainError("perturb_matrix must be 4 rows");
    Mat4 P;
    for (int r = 0; r < 4; ++r) {
      const auto& row = m.at(static_cast<std::size_t>(r));
      if (!row.is_array() || row.size() != 4) throw DomainError("perturb_matrix rows need 4 entries");
      for (int c = 0; c < 4; ++c) P(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    field.matrix_offset = P;
  }
  return field;
}

}  // namespace legfol
