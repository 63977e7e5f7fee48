#include "legfol/grid.hpp"

#include <algorithm>
#include <cmath>

namespace legfol {

namespace {

constexpr double kBoundaryRel = 1e-9;

// Weights of the three-point formulas on nodes at -a, 0, +b.
struct ThreePoint {
  double m, z, p;
};
ThreePoint second_weights(double a, double b) {
  return {2.0 / (a * (a + b)), -2.0 / (a * b), 2.0 / (b * (a + b))};
}
ThreePoint first_weights(double a, double b) {
  return {-b / (a * (a + b)), (b - a) / (a * b), a / (b * (a + b))};
}

// Second-derivative weights at 0 exact for cubics on four distinct nodes.
std::array<double, 4> second_weights_four(const std::array<double, 4>& xs) {
  Eigen::Matrix4d V;
  for (int m = 0; m < 4; ++m)
    for (int k = 0; k < 4; ++k) V(m, k) = std::pow(xs[static_cast<std::size_t>(k)], m);
  const Eigen::Vector4d w = V.fullPivLu().solve(Eigen::Vector4d(0.0, 0.0, 2.0, 0.0));
  return {w[0], w[1], w[2], w[3]};
}

void add(Grid::Stencil& s, int idx, double w) {
  for (auto& e : s) {
    if (e.first == idx) {
      e.second += w;
      return;
    }
  }
  s.emplace_back(idx, w);
}

}  // namespace

std::shared_ptr<const Grid> Grid::make(int n, double R) {
  if (n < 17 || n % 2 == 0) throw DomainError("Grid: n must be odd and at least 17");
  if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("Grid: radius must be positive");
  return std::shared_ptr<const Grid>(new Grid(n, R));
}

Grid::Grid(int n, double R) : n_(n), R_(R), h_(2.0 * R / (n - 1)) {
  mask_.assign(static_cast<std::size_t>(n * n), 0);
  boundary_.assign(static_cast<std::size_t>(n * n), 0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double rho = std::hypot(x(i), y(j));
      const auto k = static_cast<std::size_t>(index(i, j));
      if (rho <= R * (1.0 + 1e-12)) {
        mask_[k] = 1;
        if (rho >= R * (1.0 - kBoundaryRel)) boundary_[k] = 1;
      }
    }
  }
  build_stencils();
}

double Grid::boundary_fraction(int i, int j, int di, int dj) const {
  const double px = x(i), py = y(j);
  const double dx = di * h_, dy = dj * h_;
  const double dd = dx * dx + dy * dy;
  const double pd = px * dx + py * dy;
  const double c = px * px + py * py - R_ * R_;
  const double disc = std::max(0.0, pd * pd - dd * c);
  const double s = (-pd + std::sqrt(disc)) / dd;
  return std::clamp(s, 1e-12, 1.0);
}

const Grid::Stencil& Grid::stencil(BoundaryMode mode, Deriv d, int i, int j) const {
  return stencils_[mode == BoundaryMode::Dirichlet ? 0 : 1][static_cast<int>(d)]
                  [static_cast<std::size_t>(index(i, j))];
}

void Grid::build_stencils() {
  for (auto& mode : stencils_)
    for (auto& kind : mode) kind.assign(static_cast<std::size_t>(size()), {});

  const double h = h_;
  auto least_squares = [&](int i, int j, std::array<Stencil, 5>& out) {
    for (double rad = 3.01; rad < 8.0; rad += 1.0) {
      std::vector<int> nodes;
      std::vector<std::pair<double, double>> offs;
      const int reach = static_cast<int>(rad);
      for (int dj = -reach; dj <= reach; ++dj)
        for (int di = -reach; di <= reach; ++di)
          if (di * di + dj * dj <= rad * rad && in_mask(i + di, j + dj)) {
            nodes.push_back(index(i + di, j + dj));
            offs.emplace_back(di, dj);
          }
      const int m = static_cast<int>(nodes.size());
      if (m < 14) continue;
      Eigen::MatrixXd V(m, 10);
      for (int r = 0; r < m; ++r) {
        const double a = offs[static_cast<std::size_t>(r)].first;
        const double b = offs[static_cast<std::size_t>(r)].second;
        V.row(r) << 1, a, b, a * a, a * b, b * b, a * a * a, a * a * b, a * b * b, b * b * b;
      }
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(V);
      if (cod.rank() < 10) continue;
      const Eigen::MatrixXd P = cod.pseudoInverse();
      const std::array<std::pair<int, double>, 5> rows = {
          std::pair{1, 1.0 / h}, {2, 1.0 / h}, {3, 2.0 / (h * h)}, {4, 1.0 / (h * h)}, {5, 2.0 / (h * h)}};
      for (int k = 0; k < 5; ++k) {
        out[static_cast<std::size_t>(k)].clear();
        for (int r = 0; r < m; ++r) {
          const double w = P(rows[static_cast<std::size_t>(k)].first, r) * rows[static_cast<std::size_t>(k)].second;
          if (w != 0.0) out[static_cast<std::size_t>(k)].emplace_back(nodes[static_cast<std::size_t>(r)], w);
        }
      }
      return;
    }
    throw DomainError("Grid: cannot build a boundary stencil; grid too coarse");
  };

  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i < n_; ++i) {
      if (!in_mask(i, j)) continue;
      const auto k = static_cast<std::size_t>(index(i, j));
      std::array<Stencil, 5> fallback;
      bool have_fallback = false;
      auto get_fallback = [&]() -> const std::array<Stencil, 5>& {
        if (!have_fallback) {
          least_squares(i, j, fallback);
          have_fallback = true;
        }
        return fallback;
      };

      // Free mode.
      bool full = true;
      for (int dj = -1; dj <= 1 && full; ++dj)
        for (int di = -1; di <= 1 && full; ++di) full = in_mask(i + di, j + dj);
      if (full) {
        auto& s = stencils_[1];
        s[0][k] = {{index(i + 1, j), 0.5 / h}, {index(i - 1, j), -0.5 / h}};
        s[1][k] = {{index(i, j + 1), 0.5 / h}, {index(i, j - 1), -0.5 / h}};
        s[2][k] = {{index(i + 1, j), 1 / (h * h)}, {index(i, j), -2 / (h * h)}, {index(i - 1, j), 1 / (h * h)}};
        s[3][k] = {{index(i + 1, j + 1), 0.25 / (h * h)},
                   {index(i + 1, j - 1), -0.25 / (h * h)},
                   {index(i - 1, j + 1), -0.25 / (h * h)},
                   {index(i - 1, j - 1), 0.25 / (h * h)}};
        s[4][k] = {{index(i, j + 1), 1 / (h * h)}, {index(i, j), -2 / (h * h)}, {index(i, j - 1), 1 / (h * h)}};
      } else {
        const auto& fb = get_fallback();
        for (int d = 0; d < 5; ++d) stencils_[1][static_cast<std::size_t>(d)][k] = fb[static_cast<std::size_t>(d)];
      }

      // Dirichlet mode.
      auto& s = stencils_[0];
      if (on_boundary(i, j)) {
        const auto& fb = get_fallback();
        for (int d = 0; d < 5; ++d) s[static_cast<std::size_t>(d)][k] = fb[static_cast<std::size_t>(d)];
        continue;
      }
      // Along direction (di, dj): first and second derivative of s -> u(p + s (di, dj)).
      auto directional = [&](int di, int dj, Stencil& first, Stencil& second, double scale) {
        const bool fwd = in_mask(i + di, j + dj);
        const bool bwd = in_mask(i - di, j - dj);
        const double b = (fwd ? 1.0 : boundary_fraction(i, j, di, dj)) * h;
        const double a = (bwd ? 1.0 : boundary_fraction(i, j, -di, -dj)) * h;
        // One-sided cut: a fourth node on the long side keeps the second
        // derivative exact for cubics.
        const bool fwd2 = in_mask(i + 2 * di, j + 2 * dj);
        const bool bwd2 = in_mask(i - 2 * di, j - 2 * dj);
        if (fwd != bwd && (fwd ? fwd2 : bwd2)) {
          const double sgn = fwd ? 1.0 : -1.0;  // direction of the long side
          const double cut = fwd ? a : b;
          const std::array<double, 4> xs = {0.0, sgn * h, sgn * 2.0 * h, -sgn * cut};
          const std::array<int, 4> ids = {index(i, j), index(i + (fwd ? di : -di), j + (fwd ? dj : -dj)),
                                          index(i + (fwd ? 2 * di : -2 * di), j + (fwd ? 2 * dj : -2 * dj)), -1};
          const std::array<double, 4> w = second_weights_four(xs);
          for (int q = 0; q < 3; ++q) add(second, ids[static_cast<std::size_t>(q)], scale * w[static_cast<std::size_t>(q)]);
        } else {
          const ThreePoint w2 = second_weights(a, b);
          add(second, index(i, j), scale * w2.z);
          if (fwd) add(second, index(i + di, j + dj), scale * w2.p);
          if (bwd) add(second, index(i - di, j - dj), scale * w2.m);
        }
        const ThreePoint w1 = first_weights(a, b);
        add(first, index(i, j), w1.z);
        if (fwd) add(first, index(i + di, j + dj), w1.p);
        if (bwd) add(first, index(i - di, j - dj), w1.m);
      };
      Stencil scratch;
      directional(1, 0, s[0][k], s[2][k], 1.0);
      directional(0, 1, s[1][k], s[4][k], 1.0);
      directional(1, 1, scratch, s[3][k], 0.25);
      scratch.clear();
      directional(1, -1, scratch, s[3][k], -0.25);
    }
  }
}

GridFunction::GridFunction(GridPtr grid) : grid_(std::move(grid)) {
  v_ = Eigen::MatrixXd::Zero(grid_->n(), grid_->n());
}

double GridFunction::sup_norm() const {
  double m = 0.0;
  for (int j = 0; j < grid_->n(); ++j)
    for (int i = 0; i < grid_->n(); ++i)
      if (grid_->in_mask(i, j)) m = std::max(m, std::abs(v_(i, j)));
  return m;
}

bool GridFunction::finite() const { return v_.allFinite(); }

double GridFunction::derivative(BoundaryMode mode, Deriv d, int i, int j) const {
  double acc = 0.0;
  const double* data = v_.data();
  for (const auto& [idx, w] : grid_->stencil(mode, d, i, j)) acc += w * data[idx];
  return acc;
}

NodeDerivs GridFunction::derivs(BoundaryMode mode, int i, int j) const {
  return {derivative(mode, Deriv::d1, i, j), derivative(mode, Deriv::d2, i, j),
          derivative(mode, Deriv::d11, i, j), derivative(mode, Deriv::d12, i, j),
          derivative(mode, Deriv::d22, i, j)};
}

std::array<GridFunction, 5> GridFunction::derivative_grids(BoundaryMode mode) const {
  std::array<GridFunction, 5> out;
  for (auto& g : out) g = GridFunction(grid_);
  for (int j = 0; j < grid_->n(); ++j)
    for (int i = 0; i < grid_->n(); ++i)
      if (grid_->in_mask(i, j))
        for (int d = 0; d < 5; ++d) out[static_cast<std::size_t>(d)](i, j) = derivative(mode, static_cast<Deriv>(d), i, j);
  return out;
}

std::optional<NodeDerivs> GridFunction::wide_derivs(int i, int j) const {
  const Grid& g = *grid_;
  for (int dj = -2; dj <= 2; dj += 2)
    for (int di = -2; di <= 2; di += 2)
      if (!g.in_mask(i + di, j + dj)) return std::nullopt;
  const double h = g.h();
  const auto& u = v_;
  NodeDerivs d;
  d.f1 = (u(i + 2, j) - u(i - 2, j)) / (4 * h);
  d.f2 = (u(i, j + 2) - u(i, j - 2)) / (4 * h);
  d.f11 = (u(i + 2, j) - 2 * u(i, j) + u(i - 2, j)) / (4 * h * h);
  d.f22 = (u(i, j + 2) - 2 * u(i, j) + u(i, j - 2)) / (4 * h * h);
  d.f12 = (u(i + 2, j + 2) - u(i + 2, j - 2) - u(i - 2, j + 2) + u(i - 2, j - 2)) / (16 * h * h);
  return d;
}

std::optional<GridFunction::Sample> GridFunction::bilinear(double x, double y) const {
  const Grid& g = *grid_;
  const double fi = (x + g.R()) / g.h();
  const double fj = (y + g.R()) / g.h();
  if (!std::isfinite(fi) || !std::isfinite(fj)) return std::nullopt;
  const int i0 = std::clamp(static_cast<int>(std::floor(fi)), 0, g.n() - 2);
  const int j0 = std::clamp(static_cast<int>(std::floor(fj)), 0, g.n() - 2);
  const double tx = fi - i0, ty = fj - j0;
  if (tx < -1e-9 || tx > 1 + 1e-9 || ty < -1e-9 || ty > 1 + 1e-9) return std::nullopt;
  if (!g.in_mask(i0, j0) || !g.in_mask(i0 + 1, j0) || !g.in_mask(i0, j0 + 1) || !g.in_mask(i0 + 1, j0 + 1))
    return std::nullopt;
  const double v00 = v_(i0, j0), v10 = v_(i0 + 1, j0), v01 = v_(i0, j0 + 1), v11 = v_(i0 + 1, j0 + 1);
  Sample s;
  s.value = (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 + tx * ty * v11;
  s.dx = ((1 - ty) * (v10 - v00) + ty * (v11 - v01)) / g.h();
  s.dy = ((1 - tx) * (v01 - v00) + tx * (v11 - v10)) / g.h();
  return s;
}

double GridFunction::c2_norm(BoundaryMode mode) const {
  double s0 = 0, s1 = 0, s2 = 0;
  for (int j = 0; j < grid_->n(); ++j)
    for (int i = 0; i < grid_->n(); ++i) {
      if (!grid_->in_mask(i, j)) continue;
      const NodeDerivs d = derivs(mode, i, j);
      s0 = std::max(s0, std::abs(v_(i, j)));
      s1 = std::max({s1, std::abs(d.f1), std::abs(d.f2)});
      s2 = std::max({s2, std::abs(d.f11), std::abs(d.f12), std::abs(d.f22)});
    }
  return s0 + s1 + s2;
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  v_ += o.v_;
  return *this;
}
GridFunction& GridFunction::operator-=(const GridFunction& o) {
  v_ -= o.v_;
  return *this;
}
GridFunction& GridFunction::operator*=(double s) {
  v_ *= s;
  return *this;
}

void GridFunction::write_csv(std::ostream& os, const char* value_name) const {
  os << "i,j,x1,y2," << value_name << '\n';
  os.precision(17);
  for (int j = 0; j < grid_->n(); ++j)
    for (int i = 0; i < grid_->n(); ++i)
      if (grid_->in_mask(i, j))
        os << i << ',' << j << ',' << grid_->x(i) << ',' << grid_->y(j) << ',' << v_(i, j) << '\n';
}

nlohmann::json GridFunction::header_json() const {
  return {{"n", grid_->n()}, {"h", grid_->h()}, {"R", grid_->R()}};
}

}  // namespace legfol
