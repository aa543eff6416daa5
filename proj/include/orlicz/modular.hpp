#pragma once

#include <cmath>
#include <vector>

#include "orlicz/grid.hpp"
#include "orlicz/nfunction.hpp"
#include "orlicz/numerics.hpp"

namespace orlicz {

/// rho(u; G) = \int G(|u|). Overflow at any node reports +infinity rather
/// than throwing, so class membership stays a total predicate.
inline double modular(const GridFunction& u, const NFunction& G) {
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double v = G(std::abs(u[i]));
    if (!std::isfinite(v)) return kInf;
    s += u.grid().weight(i) * v;
  }
  return std::isfinite(s) ? s : kInf;
}

/// Finite modular at this resolution.
inline bool is_in_orlicz_class(const GridFunction& u, const NFunction& G) {
  return std::isfinite(modular(u, G));
}

struct NormResult {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// Gauge of the modular unit ball: inf{ lambda > 0 : rho(u/lambda) <= 1 },
/// by geometric bracketing and bisection on the strictly decreasing map
/// lambda -> rho(u/lambda).
inline NormResult luxemburg_norm_detailed(const GridFunction& u, const NFunction& G) {
  NormResult r;
  if (u.max_abs() == 0.0) return r;

  auto rho = [&](double lambda) {
    double s = 0.0;
    for (int i = 0; i < u.size(); ++i) {
      const double v = G(std::abs(u[i]) / lambda);
      if (!std::isfinite(v)) return kInf;
      s += u.grid().weight(i) * v;
    }
    return s;
  };

  // geometric scan over [1e-12, 1e12] for the sign change of rho(u/.) - 1
  double lo, hi;
  int it = 0;
  if (rho(1.0) <= 1.0) {
    hi = 1.0;
    lo = 0.1;
    while (rho(lo) <= 1.0) {
      hi = lo;
      lo /= 10.0;
      if (++it > 12) {  // norm below the scan floor: return the certified edge
        r.value = hi;
        r.iterations = it;
        r.residual = std::abs(rho(hi) - 1.0);
        return r;
      }
    }
  } else {
    lo = 1.0;
    hi = 10.0;
    while (rho(hi) > 1.0) {
      lo = hi;
      hi *= 10.0;
      if (++it > 12) {
        r.value = kInf;  // no admissible scaling below the cap
        r.iterations = it;
        r.residual = kInf;
        return r;
      }
    }
  }

  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (rho(mid) > 1.0 ? lo : hi) = mid;
    ++it;
    if (hi - lo <= 1e-12 * hi) break;
  }
  r.value = hi;  // certified side: rho(u/hi) <= 1
  r.iterations = it;
  r.residual = std::abs(rho(hi) - 1.0);
  return r;
}

inline double luxemburg_norm(const GridFunction& u, const NFunction& G) {
  return luxemburg_norm_detailed(u, G).value;
}

/// inf_{k>0} (1 + rho(k u)) / k, the Amemiya form of the dual-sup norm.
/// The objective is unimodal in log k for convex G.
inline NormResult orlicz_norm_detailed(const GridFunction& u, const NFunction& G) {
  NormResult r;
  if (u.max_abs() == 0.0) return r;

  auto objective = [&](double k) {
    double s = 0.0;
    for (int i = 0; i < u.size(); ++i) {
      const double v = G(k * std::abs(u[i]));
      if (!std::isfinite(v)) return kInf;
      s += u.grid().weight(i) * v;
    }
    return std::isfinite(s) ? (1.0 + s) / k : kInf;
  };

  // decade scan for the unimodal valley, then golden refinement
  double best_k = 1.0, best_v = kInf;
  for (int e = -12; e <= 12; ++e) {
    const double k = std::pow(10.0, e);
    const double v = objective(k);
    if (v < best_v) {
      best_v = v;
      best_k = k;
    }
  }
  if (!std::isfinite(best_v)) {
    r.value = kInf;
    r.residual = kInf;
    return r;
  }
  const GoldenResult g = golden_min_log(objective, best_k / 10.0, best_k * 10.0, 1e-12, 200);
  r.value = g.value;
  r.iterations = g.iterations + 25;
  r.residual = g.bracket_width;
  return r;
}

inline double orlicz_norm(const GridFunction& u, const NFunction& G) {
  return orlicz_norm_detailed(u, G).value;
}

// -- Hoelder-type inequalities ---------------------------------------------------

/// \int|uv| against the four norm products that bound it.
struct HolderReport {
  double lhs = 0.0;
  double rhs_orlicz_orlicz = 0.0;  // ||u||_G ||v||_{G*}
  double rhs_two_lux_lux = 0.0;    // 2 ||u||_(G) ||v||_(G*)
  double rhs_orlicz_lux = 0.0;     // ||u||_G ||v||_(G*)
  double rhs_lux_orlicz = 0.0;     // ||u||_(G) ||v||_{G*}
  double atol = 0.0;
  bool pass = false;
};

inline HolderReport holder_check(const GridFunction& u, const GridFunction& v,
                                 const NFunction& G, double atol = 1e-8) {
  HolderReport rep;
  rep.atol = atol;
  const NFunction Gs = G.conjugate();
  GridFunction uv = u;
  for (int i = 0; i < uv.size(); ++i) uv[i] = std::abs(u[i] * v[i]);
  rep.lhs = integrate(uv);
  const double u_orl = orlicz_norm(u, G);
  const double u_lux = luxemburg_norm(u, G);
  const double v_orl = orlicz_norm(v, Gs);
  const double v_lux = luxemburg_norm(v, Gs);
  rep.rhs_orlicz_orlicz = u_orl * v_orl;
  rep.rhs_two_lux_lux = 2.0 * u_lux * v_lux;
  rep.rhs_orlicz_lux = u_orl * v_lux;
  rep.rhs_lux_orlicz = u_lux * v_orl;
  rep.pass = rep.lhs <= rep.rhs_orlicz_orlicz + atol && rep.lhs <= rep.rhs_two_lux_lux + atol &&
             rep.lhs <= rep.rhs_orlicz_lux + atol && rep.lhs <= rep.rhs_lux_orlicz + atol;
  return rep;
}

// -- modular vs norm ---------------------------------------------------------------

/// rho(u) <= ||u||_(G) when ||u||_(G) <= 1, reversed above 1, and the Orlicz
/// norm is bounded by rho + 1.
struct ModularNormReport {
  double modular_value = 0.0;
  double luxemburg = 0.0;
  double orlicz = 0.0;
  int branch = 0;  // -1: ||u|| <= 1, +1: ||u|| > 1, 0: within tol of 1
  bool modular_vs_luxemburg = true;
  bool orlicz_le_modular_plus_one = true;
  bool pass = true;
};

inline ModularNormReport modular_norm_inequalities(const GridFunction& u, const NFunction& G,
                                                   double atol = 1e-8) {
  ModularNormReport rep;
  rep.modular_value = modular(u, G);
  rep.luxemburg = luxemburg_norm(u, G);
  rep.orlicz = orlicz_norm(u, G);
  if (std::abs(rep.luxemburg - 1.0) <= atol) {
    rep.branch = 0;  // boundary case: no one-sided assertion
  } else if (rep.luxemburg < 1.0) {
    rep.branch = -1;
    rep.modular_vs_luxemburg = rep.modular_value <= rep.luxemburg + atol;
  } else {
    rep.branch = +1;
    rep.modular_vs_luxemburg = rep.modular_value >= rep.luxemburg - atol;
  }
  rep.orlicz_le_modular_plus_one = rep.orlicz <= rep.modular_value + 1.0 + atol;
  rep.pass = rep.modular_vs_luxemburg && rep.orlicz_le_modular_plus_one;
  return rep;
}

// -- Steklov averaging --------------------------------------------------------------

/// Ball average with constant normalizer: S(u)(x) = (1/m_r) sum of w_j u_j
/// over grid nodes with |x_j - x| < r, where m_r is the largest in-ball
/// quadrature mass over all nodes (the full-ball mass away from the
/// boundary). Values outside the domain count as zero. The operator is then
/// doubly substochastic, so rho(S u) <= rho(u) and both norms contract.
/// Stencils are precomputed per radius; reuse one operator across calls.
class SteklovOperator {
 public:
  SteklovOperator(const Grid& g, double r) : grid_(g), radius_(r) {
    if (!(r > 0.0)) throw std::domain_error("SteklovOperator: radius must be positive");
    if (r < g.min_spacing()) {
      throw std::domain_error("SteklovOperator: radius below grid spacing (empty stencil)");
    }
    const int n = g.num_nodes();
    offsets_.reserve(static_cast<std::size_t>(n) + 1);
    offsets_.push_back(0);
    double max_mass = 0.0;
    // relative coordinates of in-ball lattice offsets are shift invariant
    const int nx = g.nodes_per_axis(0);
    const int ny = g.dim() == 2 ? g.nodes_per_axis(1) : 1;
    const double hx = g.spacing(0);
    const double hy = g.dim() == 2 ? g.spacing(1) : 0.0;
    const int rx = static_cast<int>(std::floor(r / hx));
    const int ry = g.dim() == 2 ? static_cast<int>(std::floor(r / hy)) : 0;
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        double mass = 0.0;
        for (int dj = -ry; dj <= ry; ++dj) {
          const int jj = j + dj;
          if (jj < 0 || jj >= ny) continue;
          for (int di = -rx; di <= rx; ++di) {
            const int ii = i + di;
            if (ii < 0 || ii >= nx) continue;
            const double dist = g.dim() == 2 ? std::hypot(di * hx, dj * hy) : std::abs(di * hx);
            if (dist < r) {
              const int idx = jj * nx + ii;
              neighbors_.push_back(idx);
              mass += g.weight(idx);
            }
          }
        }
        offsets_.push_back(static_cast<int>(neighbors_.size()));
        max_mass = std::max(max_mass, mass);
      }
    }
    normalizer_ = max_mass;
  }

  double radius() const { return radius_; }
  double ball_mass() const { return normalizer_; }

  GridFunction apply(const GridFunction& u) const {
    if (!u.grid().same_layout(grid_)) throw std::domain_error("SteklovOperator: grid mismatch");
    GridFunction out(grid_);
    for (int i = 0; i < grid_.num_nodes(); ++i) {
      double s = 0.0;
      for (int k = offsets_[static_cast<std::size_t>(i)]; k < offsets_[static_cast<std::size_t>(i) + 1]; ++k) {
        const int j = neighbors_[static_cast<std::size_t>(k)];
        s += grid_.weight(j) * u[j];
      }
      out[i] = s / normalizer_;
    }
    return out;
  }

 private:
  Grid grid_;
  double radius_;
  double normalizer_ = 1.0;
  std::vector<int> offsets_;
  std::vector<int> neighbors_;
};

inline GridFunction steklov(const GridFunction& u, double r) {
  return SteklovOperator(u.grid(), r).apply(u);
}

// -- Poincare inequality --------------------------------------------------------------

struct PoincareReport {
  double lhs = 0.0;  // \int G(|u|)
  double rhs = 0.0;  // \int G(d |grad u|)
  double d = 0.0;    // 2 diam(domain)
  bool pass = false;
};

inline PoincareReport poincare_check(const GridFunction& u, const NFunction& G,
                                     double atol = 1e-12) {
  if (!u.is_dirichlet()) {
    throw std::domain_error("poincare_check: input must vanish on the boundary");
  }
  PoincareReport rep;
  rep.d = 2.0 * u.grid().diameter();
  rep.lhs = modular(u, G);
  GridFunction scaled = gradient_magnitude(u);
  scaled *= rep.d;
  rep.rhs = modular(scaled, G);
  rep.pass = rep.lhs <= rep.rhs + atol;
  return rep;
}

}  // namespace orlicz
