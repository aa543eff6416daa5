#pragma once

#include <array>
#include <type_traits>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "orlicz/numerics.hpp"

namespace orlicz {

/// Uniform discretization of an interval or an axis-aligned rectangle with
/// trapezoid quadrature weights and a boundary mask. Immutable; copies share
/// storage.
class Grid {
 public:
  static Grid interval(double a, double b, int n) {
    check_axis(a, b, n);
    auto d = std::make_shared<Data>();
    d->dim = 1;
    d->lo = {a, 0.0};
    d->hi = {b, 0.0};
    d->nodes = {n, 1};
    d->h = {(b - a) / (n - 1), 0.0};
    d->total = n;
    d->weights.resize(static_cast<std::size_t>(n));
    d->boundary.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
      d->weights[static_cast<std::size_t>(i)] = d->h[0] * ((i == 0 || i == n - 1) ? 0.5 : 1.0);
    }
    d->boundary.front() = 1;
    d->boundary.back() = 1;
    return Grid(std::move(d));
  }

  static Grid rectangle(double ax, double bx, int nx, double ay, double by, int ny) {
    check_axis(ax, bx, nx);
    check_axis(ay, by, ny);
    auto d = std::make_shared<Data>();
    d->dim = 2;
    d->lo = {ax, ay};
    d->hi = {bx, by};
    d->nodes = {nx, ny};
    d->h = {(bx - ax) / (nx - 1), (by - ay) / (ny - 1)};
    d->total = nx * ny;
    d->weights.resize(static_cast<std::size_t>(d->total));
    d->boundary.assign(static_cast<std::size_t>(d->total), 0);
    for (int j = 0; j < ny; ++j) {
      const double wy = d->h[1] * ((j == 0 || j == ny - 1) ? 0.5 : 1.0);
      for (int i = 0; i < nx; ++i) {
        const double wx = d->h[0] * ((i == 0 || i == nx - 1) ? 0.5 : 1.0);
        const std::size_t idx = static_cast<std::size_t>(j * nx + i);
        d->weights[idx] = wx * wy;
        d->boundary[idx] = (i == 0 || i == nx - 1 || j == 0 || j == ny - 1) ? 1 : 0;
      }
    }
    return Grid(std::move(d));
  }

  /// Staggered companion: cell midpoints of `g` with uniform cell weights.
  /// Gradient fields sampled on cells live here; weights still sum to the
  /// measure of the domain.
  static Grid cells(const Grid& g) {
    auto d = std::make_shared<Data>();
    d->dim = g.dim();
    if (g.dim() == 1) {
      const int n = g.nodes_per_axis(0) - 1;
      const double h = g.spacing(0);
      d->lo = {g.lower(0) + 0.5 * h, 0.0};
      d->hi = {g.upper(0) - 0.5 * h, 0.0};
      d->nodes = {n, 1};
      d->h = {h, 0.0};
      d->total = n;
      d->weights.assign(static_cast<std::size_t>(n), h);
      d->boundary.assign(static_cast<std::size_t>(n), 0);
    } else {
      const int nx = g.nodes_per_axis(0) - 1, ny = g.nodes_per_axis(1) - 1;
      const double hx = g.spacing(0), hy = g.spacing(1);
      d->lo = {g.lower(0) + 0.5 * hx, g.lower(1) + 0.5 * hy};
      d->hi = {g.upper(0) - 0.5 * hx, g.upper(1) - 0.5 * hy};
      d->nodes = {nx, ny};
      d->h = {hx, hy};
      d->total = nx * ny;
      d->weights.assign(static_cast<std::size_t>(d->total), hx * hy);
      d->boundary.assign(static_cast<std::size_t>(d->total), 0);
    }
    return Grid(std::move(d));
  }

  int dim() const { return d_->dim; }
  int num_nodes() const { return d_->total; }
  int nodes_per_axis(int axis) const { return d_->nodes[static_cast<std::size_t>(axis)]; }
  double spacing(int axis) const { return d_->h[static_cast<std::size_t>(axis)]; }
  double lower(int axis) const { return d_->lo[static_cast<std::size_t>(axis)]; }
  double upper(int axis) const { return d_->hi[static_cast<std::size_t>(axis)]; }
  double weight(int i) const { return d_->weights[static_cast<std::size_t>(i)]; }
  bool is_boundary(int i) const { return d_->boundary[static_cast<std::size_t>(i)] != 0; }
  const std::vector<double>& weights() const { return d_->weights; }

  double measure() const {
    double m = 1.0;
    for (int a = 0; a < dim(); ++a) m *= upper(a) - lower(a);
    return m;
  }

  double diameter() const {
    double s = 0.0;
    for (int a = 0; a < dim(); ++a) {
      const double e = upper(a) - lower(a);
      s += e * e;
    }
    return std::sqrt(s);
  }

  double min_spacing() const {
    double h = spacing(0);
    if (dim() == 2) h = std::min(h, spacing(1));
    return h;
  }

  int index(int i, int j = 0) const { return j * d_->nodes[0] + i; }

  std::array<double, 2> coord(int idx) const {
    if (dim() == 1) return {lower(0) + idx * spacing(0), 0.0};
    const int nx = d_->nodes[0];
    const int i = idx % nx, j = idx / nx;
    return {lower(0) + i * spacing(0), lower(1) + j * spacing(1)};
  }

  bool same_layout(const Grid& o) const {
    if (d_ == o.d_) return true;
    return d_->dim == o.d_->dim && d_->nodes == o.d_->nodes && d_->lo == o.d_->lo &&
           d_->hi == o.d_->hi;
  }

 private:
  struct Data {
    int dim = 1;
    std::array<double, 2> lo{}, hi{};
    std::array<int, 2> nodes{};
    std::array<double, 2> h{};
    int total = 0;
    std::vector<double> weights;
    std::vector<std::uint8_t> boundary;
  };

  explicit Grid(std::shared_ptr<Data> d) : d_(std::move(d)) {}

  static void check_axis(double a, double b, int n) {
    if (!(b > a)) throw std::domain_error("Grid: need upper bound > lower bound");
    if (n < 3) throw std::domain_error("Grid: need at least 3 nodes per axis");
  }

  std::shared_ptr<const Data> d_;
};

/// Sampled real values on a Grid.
class GridFunction {
 public:
  explicit GridFunction(Grid grid, double fill = 0.0)
      : grid_(std::move(grid)), v_(static_cast<std::size_t>(grid_.num_nodes()), fill) {}

  GridFunction(Grid grid, std::vector<double> values)
      : grid_(std::move(grid)), v_(std::move(values)) {
    if (static_cast<int>(v_.size()) != grid_.num_nodes()) {
      throw std::domain_error("GridFunction: value count must equal node count");
    }
  }

  template <class F>
  static GridFunction sample(const Grid& g, F&& f) {
    GridFunction u(g);
    for (int i = 0; i < g.num_nodes(); ++i) {
      const auto xy = g.coord(i);
      if constexpr (std::is_invocable_v<F, double, double>) {
        u[i] = f(xy[0], xy[1]);
      } else {
        u[i] = f(xy[0]);
      }
    }
    return u;
  }

  const Grid& grid() const { return grid_; }
  int size() const { return static_cast<int>(v_.size()); }
  double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

  double min_value() const {
    double m = kInf;
    for (double x : v_) m = std::min(m, x);
    return m;
  }

  bool is_dirichlet(double tol_rel = 1e-12) const {
    const double tol = tol_rel * std::max(1.0, max_abs());
    for (int i = 0; i < size(); ++i) {
      if (grid_.is_boundary(i) && std::abs(v_[static_cast<std::size_t>(i)]) > tol) return false;
    }
    return true;
  }

  GridFunction& operator+=(const GridFunction& o) {
    require_same(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  GridFunction& operator-=(const GridFunction& o) {
    require_same(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  GridFunction& operator*=(double a) {
    for (double& x : v_) x *= a;
    return *this;
  }

  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double a, GridFunction u) { return u *= a; }

  void axpy(double a, const GridFunction& o) {
    require_same(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += a * o.v_[i];
  }

 private:
  void require_same(const GridFunction& o) const {
    if (!grid_.same_layout(o.grid_)) throw std::domain_error("GridFunction: grid mismatch");
  }

  Grid grid_;
  std::vector<double> v_;
};

/// Quadrature sum with fixed summation order; exact for node-wise constants.
inline double integrate(const GridFunction& f) {
  const Grid& g = f.grid();
  double s = 0.0;
  for (int i = 0; i < g.num_nodes(); ++i) s += g.weight(i) * f[i];
  return s;
}

/// Discrete L2 pairing sum_i w_i u_i v_i.
inline double inner(const GridFunction& u, const GridFunction& v) {
  if (!u.grid().same_layout(v.grid())) throw std::domain_error("inner: grid mismatch");
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i) s += u.grid().weight(i) * u[i] * v[i];
  return s;
}

/// Node-located gradient: central differences in the interior, one-sided
/// first-order at the boundary layer. The stencil never reads outside the
/// domain.
struct GradientField {
  std::array<GridFunction, 2> component;
  GridFunction magnitude;
};

inline GradientField gradient(const GridFunction& u) {
  const Grid& g = u.grid();
  for (int a = 0; a < g.dim(); ++a) {
    if (g.nodes_per_axis(a) < 3) throw std::domain_error("gradient: need >= 3 nodes per axis");
  }
  GradientField out{{GridFunction(g), GridFunction(g)}, GridFunction(g)};
  if (g.dim() == 1) {
    const int n = g.nodes_per_axis(0);
    const double h = g.spacing(0);
    for (int i = 0; i < n; ++i) {
      double d;
      if (i == 0) {
        d = (u[1] - u[0]) / h;
      } else if (i == n - 1) {
        d = (u[n - 1] - u[n - 2]) / h;
      } else {
        d = (u[i + 1] - u[i - 1]) / (2.0 * h);
      }
      out.component[0][i] = d;
      out.magnitude[i] = std::abs(d);
    }
    return out;
  }
  const int nx = g.nodes_per_axis(0), ny = g.nodes_per_axis(1);
  const double hx = g.spacing(0), hy = g.spacing(1);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int c = g.index(i, j);
      double dx, dy;
      if (i == 0) {
        dx = (u[g.index(1, j)] - u[c]) / hx;
      } else if (i == nx - 1) {
        dx = (u[c] - u[g.index(nx - 2, j)]) / hx;
      } else {
        dx = (u[g.index(i + 1, j)] - u[g.index(i - 1, j)]) / (2.0 * hx);
      }
      if (j == 0) {
        dy = (u[g.index(i, 1)] - u[c]) / hy;
      } else if (j == ny - 1) {
        dy = (u[c] - u[g.index(i, ny - 2)]) / hy;
      } else {
        dy = (u[g.index(i, j + 1)] - u[g.index(i, j - 1)]) / (2.0 * hy);
      }
      out.component[0][c] = dx;
      out.component[1][c] = dy;
      out.magnitude[c] = std::hypot(dx, dy);
    }
  }
  return out;
}

inline GridFunction gradient_magnitude(const GridFunction& u) {
  return gradient(u).magnitude;
}

inline GridFunction positive_part(const GridFunction& u) {
  GridFunction v = u;
  for (int i = 0; i < v.size(); ++i) v[i] = std::max(u[i], 0.0);
  return v;
}

inline GridFunction negative_part(const GridFunction& u) {
  GridFunction v = u;
  for (int i = 0; i < v.size(); ++i) v[i] = std::max(-u[i], 0.0);
  return v;
}

/// Binary indicator of a union of whole cells: a node carries 1 when any of
/// its adjacent cells is selected. The set's grid measure is
/// integrate(indicator) — the quadrature mass of the selected node set — and
/// scaled indicators keep the modular exactly measure * G(scale).
/// `inside` is evaluated at cell midpoints.
template <class F>
GridFunction indicator_cells(const Grid& g, F&& inside) {
  GridFunction u(g);
  auto probe = [&inside](double x, double y) {
    if constexpr (std::is_invocable_v<F, double, double>) {
      return static_cast<bool>(inside(x, y));
    } else {
      (void)y;
      return static_cast<bool>(inside(x));
    }
  };
  if (g.dim() == 1) {
    const int n = g.nodes_per_axis(0);
    const double h = g.spacing(0);
    auto cell_in = [&](int c) {
      if (c < 0 || c >= n - 1) return false;
      return probe(g.lower(0) + (c + 0.5) * h, 0.0);
    };
    for (int i = 0; i < n; ++i) {
      u[i] = (cell_in(i - 1) || cell_in(i)) ? 1.0 : 0.0;
    }
    return u;
  }
  const int nx = g.nodes_per_axis(0), ny = g.nodes_per_axis(1);
  const double hx = g.spacing(0), hy = g.spacing(1);
  auto cell_in = [&](int ci, int cj) {
    if (ci < 0 || cj < 0 || ci >= nx - 1 || cj >= ny - 1) return false;
    return probe(g.lower(0) + (ci + 0.5) * hx, g.lower(1) + (cj + 0.5) * hy);
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const bool in = cell_in(i - 1, j - 1) || cell_in(i, j - 1) || cell_in(i - 1, j) ||
                      cell_in(i, j);
      u[g.index(i, j)] = in ? 1.0 : 0.0;
    }
  }
  return u;
}

// -- serialization --------------------------------------------------------------

inline void to_csv(const GridFunction& u, std::ostream& os) {
  const Grid& g = u.grid();
  os.precision(17);
  if (g.dim() == 1) {
    os << "x,value\n";
    for (int i = 0; i < g.num_nodes(); ++i) {
      os << g.coord(i)[0] << "," << u[i] << "\n";
    }
  } else {
    os << "x,y,value\n";
    for (int i = 0; i < g.num_nodes(); ++i) {
      const auto xy = g.coord(i);
      os << xy[0] << "," << xy[1] << "," << u[i] << "\n";
    }
  }
}

inline void save_csv(const GridFunction& u, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_csv: cannot open " + path);
  to_csv(u, os);
}

/// Rebuild a GridFunction from coordinate/value CSV rows; the node set must
/// form a uniform grid in row-major order.
inline GridFunction from_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("from_csv: empty input");
  const int dim = line.find("y") != std::string::npos ? 2 : 1;
  std::vector<double> xs, ys, vals;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    if (static_cast<int>(row.size()) != dim + 1) throw std::runtime_error("from_csv: bad row");
    xs.push_back(row[0]);
    if (dim == 2) ys.push_back(row[1]);
    vals.push_back(row.back());
  }
  if (vals.size() < 3) throw std::runtime_error("from_csv: too few rows");
  if (dim == 1) {
    const int n = static_cast<int>(vals.size());
    Grid g = Grid::interval(xs.front(), xs.back(), n);
    return GridFunction(g, std::move(vals));
  }
  int nx = 0;
  while (nx < static_cast<int>(ys.size()) && ys[static_cast<std::size_t>(nx)] == ys[0]) ++nx;
  const int ny = static_cast<int>(vals.size()) / nx;
  if (nx * ny != static_cast<int>(vals.size())) throw std::runtime_error("from_csv: ragged grid");
  Grid g = Grid::rectangle(xs.front(), xs[static_cast<std::size_t>(nx - 1)], nx, ys.front(),
                           ys.back(), ny);
  return GridFunction(g, std::move(vals));
}

inline GridFunction load_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_csv: cannot open " + path);
  return from_csv(is);
}

}  // namespace orlicz
