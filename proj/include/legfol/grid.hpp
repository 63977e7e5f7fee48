#pragma once

#include "legfol/types.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

namespace legfol {

/// Derivative slots, in the order returned by derivative queries.
enum class Deriv { d1 = 0, d2 = 1, d11 = 2, d12 = 3, d22 = 4 };

/// How derivatives treat the edge of the disk.
///   Dirichlet: the function vanishes on the circle; interior nodes use
///              Shortley-Weller stencils that reach the circle itself.
///   Free: no boundary data; nodes without a full 3x3 neighbourhood use a
///         local least-squares cubic fit.
enum class BoundaryMode { Dirichlet, Free };

/// Uniform n x n grid on [-R, R]^2 masked to the closed disk of radius R.
/// Node (i, j) sits at (x1, y2) = (-R + i h, -R + j h).
class Grid {
 public:
  using Stencil = std::vector<std::pair<int, double>>;

  static std::shared_ptr<const Grid> make(int n, double R = 1.0);

  int n() const { return n_; }
  double R() const { return R_; }
  double h() const { return h_; }
  int centre() const { return (n_ - 1) / 2; }
  int index(int i, int j) const { return i + n_ * j; }
  int size() const { return n_ * n_; }
  double x(int i) const { return -R_ + i * h_; }
  double y(int j) const { return -R_ + j * h_; }

  bool in_range(int i, int j) const { return i >= 0 && j >= 0 && i < n_ && j < n_; }
  bool in_mask(int i, int j) const { return in_range(i, j) && mask_[static_cast<std::size_t>(index(i, j))]; }
  bool on_boundary(int i, int j) const {
    return in_mask(i, j) && boundary_[static_cast<std::size_t>(index(i, j))];
  }
  bool interior(int i, int j) const { return in_mask(i, j) && !on_boundary(i, j); }

  /// Derivative stencil of the given kind at a mask node.
  const Stencil& stencil(BoundaryMode mode, Deriv d, int i, int j) const;

  /// Parameter s in (0, 1] at which (x, y) + s h (di, dj) meets the circle.
  double boundary_fraction(int i, int j, int di, int dj) const;

 private:
  Grid(int n, double R);
  void build_stencils();

  int n_;
  double R_;
  double h_;
  std::vector<char> mask_;
  std::vector<char> boundary_;
  // stencils_[mode][deriv][node]
  std::array<std::array<std::vector<Stencil>, 5>, 2> stencils_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Derivatives of a grid function at one node.
struct NodeDerivs {
  double f1 = 0, f2 = 0, f11 = 0, f12 = 0, f22 = 0;
};

/// Nodal values on a masked grid. Values outside the mask are kept at 0.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(GridPtr grid);

  template <class F>
  static GridFunction sample(GridPtr grid, F&& f) {
    GridFunction g(grid);
    for (int j = 0; j < grid->n(); ++j)
      for (int i = 0; i < grid->n(); ++i)
        if (grid->in_mask(i, j)) g(i, j) = f(grid->x(i), grid->y(j));
    return g;
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  double& operator()(int i, int j) { return v_(i, j); }
  double operator()(int i, int j) const { return v_(i, j); }
  Eigen::MatrixXd& values() { return v_; }
  const Eigen::MatrixXd& values() const { return v_; }

  double sup_norm() const;
  bool finite() const;

  double derivative(BoundaryMode mode, Deriv d, int i, int j) const;
  NodeDerivs derivs(BoundaryMode mode, int i, int j) const;
  /// All five derivative grids, in Deriv order.
  std::array<GridFunction, 5> derivative_grids(BoundaryMode mode) const;

  /// Central 2h stencils; available where the 2h cross and 2h diagonals lie in the mask.
  std::optional<NodeDerivs> wide_derivs(int i, int j) const;

  /// Bilinear interpolation at (x, y) with its gradient; empty when the cell leaves the mask.
  struct Sample {
    double value;
    double dx;
    double dy;
  };
  std::optional<Sample> bilinear(double x, double y) const;

  /// Discrete C^2 surrogate: sup |f| + sup |Df| + sup |D^2 f| over mask nodes.
  double c2_norm(BoundaryMode mode) const;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double s);
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

  /// CSV with one-line header "i,j,x1,y2,value", mask nodes only.
  void write_csv(std::ostream& os, const char* value_name = "value") const;
  nlohmann::json header_json() const;

 private:
  GridPtr grid_;
  Eigen::MatrixXd v_;
};

}  // namespace legfol
