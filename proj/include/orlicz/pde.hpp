#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "orlicz/grid.hpp"
#include "orlicz/modular.hpp"
#include "orlicz/nfunction.hpp"
#include "orlicz/numerics.hpp"

namespace orlicz {

/// A run was refused before or during the solve (hypotheses violated, no
/// negative-energy minimizer, degenerate path geometry).
class SolveRefused : public std::runtime_error {
 public:
  explicit SolveRefused(const std::string& what) : std::runtime_error(what) {}
};

struct DescentOptions {
  double tol_res = 1e-6;   // stop when ||grad||_inf <= tol_res
  int max_iter = 50000;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  double step0 = 1.0;
};

struct MountainPassOptions {
  int path_nodes = 21;
  int reequidistribute_every = 10;
  int max_sweeps = 4000;
  double sweep_tol = 1e-3;     // residual at the max-energy node before polish
  int polish_max_iter = 30000;
  double collapse_tol = 1e-3;  // path collapse detection, relative to ||u1||
  int max_retries = 5;
  double retry_noise = 1e-3;
};

/// Data of the two-solution problem: diffusion density phi (N-function
/// density, a(t) = phi(t)/t), exponents q < p, parameter lambda (searched
/// when unset), grid and solver knobs.
struct ProblemSpec {
  NFunction phi;
  double p = 1.5;
  double q = 1.2;
  std::optional<double> lambda;
  Grid grid;
  double eps_a = 1e-8;  // a(t) evaluated at max(t, eps_a)
  std::uint64_t seed = 12345;
  double separation_tol = 1e-2;
  DescentOptions descent;
  MountainPassOptions mp;

  /// The default desk-scale configuration.
  static ProblemSpec default_config() {
    ProblemSpec s{NFunction::power(1.8), 1.5, 1.2, std::nullopt,
                  Grid::rectangle(0.0, 1.0, 33, 0.0, 1.0, 33)};
    return s;
  }
};

// -- growth indices -----------------------------------------------------------------

struct GrowthIndices {
  double lower = 0.0;  // inf of t phi(t)/Phi(t) over probes
  double upper = 0.0;  // sup of the same ratio
};

inline GrowthIndices estimate_growth_indices(const NFunction& Phi,
                                             ProbeRange range = {1e-6, 1e6, 64}) {
  GrowthIndices gi{kInf, -kInf};
  for (double t : range.points()) {
    const double v = Phi(t);
    if (!(v > 0.0) || !std::isfinite(v)) continue;
    const double r = t * Phi.density(t) / v;
    gi.lower = std::min(gi.lower, r);
    gi.upper = std::max(gi.upper, r);
  }
  return gi;
}

/// Structural hypotheses of the two-solution theorem, evaluated on probes.
/// `sqrt_convex` (convexity of t -> Phi(sqrt t)) is reported but not used as
/// a refusal condition: together with the embedding bound it is infeasible
/// in dimension 2 for any Phi, and it backs a compactness argument rather
/// than the discrete algorithm.
struct HypothesisReport {
  double phi0 = 0.0;
  double phi_sup = 0.0;
  double sobolev_limit = 0.0;  // min{ N, N phi0 / (N - phi0) }
  bool ordering_ok = false;    // 1 < q < p < phi0
  bool embedding_ok = false;   // phi_sup < sobolev_limit
  bool sqrt_convex = false;
  bool admissible() const { return ordering_ok && embedding_ok; }
};

inline HypothesisReport check_hypotheses(const ProblemSpec& spec) {
  HypothesisReport h;
  const GrowthIndices gi = estimate_growth_indices(spec.phi);
  h.phi0 = gi.lower;
  h.phi_sup = gi.upper;
  const double N = spec.grid.dim();
  h.sobolev_limit = h.phi0 < N ? std::min(N, N * h.phi0 / (N - h.phi0)) : N;
  h.ordering_ok = 1.0 < spec.q && spec.q < spec.p && spec.p < h.phi0;
  h.embedding_ok = h.phi_sup < h.sobolev_limit;

  h.sqrt_convex = true;
  const std::vector<double> ts = ProbeRange{1e-6, 1e6, 16}.points();
  double prev_slope = -kInf;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double a = ts[i], b = ts[i + 1];
    const double s = (spec.phi(std::sqrt(b)) - spec.phi(std::sqrt(a))) / (b - a);
    if (s < prev_slope * (1.0 - 1e-9) - 1e-300) {
      h.sqrt_convex = false;
      break;
    }
    prev_slope = s;
  }
  return h;
}

// -- discrete energy ----------------------------------------------------------------

namespace detail {

// Diffusion coefficient phi(t)/t evaluated at max(t, eps).
inline double diffusion_coef(const NFunction& phi, double t, double eps) {
  const double m = std::max(t, eps);
  return phi.density(m) / m;
}

// Cell-based diffusion term: forward-difference gradients at cell corners,
// cell quadrature. When `grad` is non-null, accumulates the exact partial
// derivatives dE/du_i into it (raw, not Riesz-scaled).
inline double diffusion_term(const ProblemSpec& spec, const GridFunction& u,
                             std::vector<double>* grad) {
  const Grid& g = spec.grid;
  double E = 0.0;
  if (g.dim() == 1) {
    const int n = g.nodes_per_axis(0);
    const double h = g.spacing(0);
    for (int c = 0; c + 1 < n; ++c) {
      const double d = (u[c + 1] - u[c]) / h;
      const double m = std::abs(d);
      E += h * spec.phi(m);
      if (grad) {
        const double flux = diffusion_coef(spec.phi, m, spec.eps_a) * d;
        (*grad)[static_cast<std::size_t>(c + 1)] += flux;
        (*grad)[static_cast<std::size_t>(c)] -= flux;
      }
    }
    return E;
  }
  const int nx = g.nodes_per_axis(0), ny = g.nodes_per_axis(1);
  const double hx = g.spacing(0), hy = g.spacing(1);
  const double wc = hx * hy;
  for (int cj = 0; cj + 1 < ny; ++cj) {
    for (int ci = 0; ci + 1 < nx; ++ci) {
      const int n00 = g.index(ci, cj);
      const int n10 = g.index(ci + 1, cj);
      const int n01 = g.index(ci, cj + 1);
      const double gx = (u[n10] - u[n00]) / hx;
      const double gy = (u[n01] - u[n00]) / hy;
      const double m = std::hypot(gx, gy);
      E += wc * spec.phi(m);
      if (grad) {
        const double a = diffusion_coef(spec.phi, m, spec.eps_a);
        const double fx = wc * a * gx / hx;
        const double fy = wc * a * gy / hy;
        (*grad)[static_cast<std::size_t>(n10)] += fx;
        (*grad)[static_cast<std::size_t>(n01)] += fy;
        (*grad)[static_cast<std::size_t>(n00)] -= fx + fy;
      }
    }
  }
  return E;
}

inline void require_dirichlet(const GridFunction& u, const char* what) {
  if (!u.is_dirichlet()) {
    throw std::domain_error(std::string(what) + ": input must vanish on the boundary");
  }
}

}  // namespace detail

/// a(t) = phi(t)/t, regularized at max(t, eps_a).
inline double diffusion_coefficient(const ProblemSpec& spec, double t) {
  return detail::diffusion_coef(spec.phi, t, spec.eps_a);
}

/// |grad u| sampled at cell sites (forward differences at the lower corner),
/// as a GridFunction on Grid::cells(u.grid()). This is the field whose
/// modular is the discrete diffusion term.
inline GridFunction cell_gradient_magnitude(const GridFunction& u) {
  const Grid& g = u.grid();
  Grid cg = Grid::cells(g);
  GridFunction out(cg);
  if (g.dim() == 1) {
    const int n = g.nodes_per_axis(0);
    const double h = g.spacing(0);
    for (int c = 0; c + 1 < n; ++c) out[c] = std::abs(u[c + 1] - u[c]) / h;
    return out;
  }
  const int nx = g.nodes_per_axis(0), ny = g.nodes_per_axis(1);
  const double hx = g.spacing(0), hy = g.spacing(1);
  for (int cj = 0; cj + 1 < ny; ++cj) {
    for (int ci = 0; ci + 1 < nx; ++ci) {
      const double gx = (u[g.index(ci + 1, cj)] - u[g.index(ci, cj)]) / hx;
      const double gy = (u[g.index(ci, cj + 1)] - u[g.index(ci, cj)]) / hy;
      out[cg.index(ci, cj)] = std::hypot(gx, gy);
    }
  }
  return out;
}

/// I(u) = \int Phi(|grad u|) - (lambda/p) \int u_+^p + (lambda/q) \int u_+^q.
inline double energy(const ProblemSpec& spec, const GridFunction& u, double lambda) {
  detail::require_dirichlet(u, "energy");
  double E = detail::diffusion_term(spec, u, nullptr);
  const Grid& g = spec.grid;
  for (int i = 0; i < g.num_nodes(); ++i) {
    const double up = std::max(u[i], 0.0);
    if (up > 0.0) {
      E += g.weight(i) * lambda * (std::pow(up, spec.q) / spec.q - std::pow(up, spec.p) / spec.p);
    }
  }
  return E;
}

/// Riesz representer of I'(u) with respect to the grid pairing: interior node
/// i carries -div_h(a(|grad u|) grad u)(i) - lambda u_+^{p-1}(i) + lambda
/// u_+^{q-1}(i); boundary rows are zero. Pairing with any Dirichlet v via
/// inner() equals the directional derivative of energy() exactly.
inline GridFunction energy_gradient(const ProblemSpec& spec, const GridFunction& u,
                                    double lambda) {
  const Grid& g = spec.grid;
  std::vector<double> raw(static_cast<std::size_t>(g.num_nodes()), 0.0);
  detail::diffusion_term(spec, u, &raw);
  GridFunction out(g);
  for (int i = 0; i < g.num_nodes(); ++i) {
    if (g.is_boundary(i)) continue;
    const double up = std::max(u[i], 0.0);
    double v = raw[static_cast<std::size_t>(i)] / g.weight(i);
    if (up > 0.0) {
      v += lambda * (std::pow(up, spec.q - 1.0) - std::pow(up, spec.p - 1.0));
    }
    out[i] = v;
  }
  return out;
}

// -- index chains ---------------------------------------------------------------------

/// The norm-modular chains: with ||u|| the Luxemburg norm of the cell
/// gradient field under Phi and D = \int Phi(|grad u|),
///   ||u|| < 1:  ||u||^{phi_sup} <= D <= ||u||^{phi0}
///   ||u|| > 1:  ||u||^{phi0}    <= D <= ||u||^{phi_sup}
struct IndexChainReport {
  double norm = 0.0;
  double dirichlet_modular = 0.0;
  double phi0 = 0.0;
  double phi_sup = 0.0;
  int branch = 0;  // -1 below 1, +1 above 1, 0 boundary case (no assertion)
  double lower = 0.0;
  double upper = 0.0;
  bool pass = true;
};

inline IndexChainReport norm_modular_bounds(const ProblemSpec& spec, const GridFunction& u,
                                            double rtol = 1e-9) {
  detail::require_dirichlet(u, "norm_modular_bounds");
  IndexChainReport rep;
  const GridFunction field = cell_gradient_magnitude(u);
  rep.norm = luxemburg_norm(field, spec.phi);
  rep.dirichlet_modular = modular(field, spec.phi);
  const GrowthIndices gi = estimate_growth_indices(spec.phi);
  rep.phi0 = gi.lower;
  rep.phi_sup = gi.upper;
  if (std::abs(rep.norm - 1.0) <= 1e-9) {
    rep.branch = 0;
    return rep;
  }
  if (rep.norm < 1.0) {
    rep.branch = -1;
    rep.lower = std::pow(rep.norm, rep.phi_sup);
    rep.upper = std::pow(rep.norm, rep.phi0);
  } else {
    rep.branch = +1;
    rep.lower = std::pow(rep.norm, rep.phi0);
    rep.upper = std::pow(rep.norm, rep.phi_sup);
  }
  const double slack = rtol * std::max(1.0, rep.dirichlet_modular);
  rep.pass = rep.lower <= rep.dirichlet_modular + slack &&
             rep.dirichlet_modular <= rep.upper + slack;
  return rep;
}

// -- descent ---------------------------------------------------------------------------

struct MinimizeResult {
  GridFunction u;
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

/// Gradient descent with Armijo backtracking. The trial step is carried
/// between iterations Barzilai-Borwein style, and the Armijo reference is
/// the largest of the last few energies (a nonmonotone window), which keeps
/// BB steps from being truncated in stiff, nearly flat valleys.
template <class EnergyFn, class GradFn>
MinimizeResult descend(const EnergyFn& energy_fn, const GradFn& grad_fn, GridFunction u,
                       const DescentOptions& opt) {
  MinimizeResult res{std::move(u)};
  double E = energy_fn(res.u);
  GridFunction g = grad_fn(res.u);
  res.residual = g.max_abs();
  double step = opt.step0;
  GridFunction trial = res.u;
  constexpr int kWindow = 10;
  std::array<double, kWindow> recent;
  recent.fill(E);
  int slot = 0;

  for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
    if (res.residual <= opt.tol_res) {
      res.converged = true;
      break;
    }
    const double gg = inner(g, g);
    if (!(gg > 0.0)) break;
    const double E_ref = *std::max_element(recent.begin(), recent.end());
    double alpha = step;
    bool accepted = false;
    double E_new = E;
    for (int bt = 0; bt < 60; ++bt) {
      trial = res.u;
      trial.axpy(-alpha, g);
      E_new = energy_fn(trial);
      if (E_new <= E_ref - opt.armijo_c1 * alpha * gg) {
        accepted = true;
        break;
      }
      alpha *= opt.backtrack;
    }
    if (!accepted) break;  // step collapsed below resolution

    GridFunction g_new = grad_fn(trial);
    // BB1 step from s = -alpha g, y = g_new - g
    double sy = 0.0;
    {
      const Grid& grid = res.u.grid();
      for (int i = 0; i < g.size(); ++i) {
        sy += grid.weight(i) * (-alpha * g[i]) * (g_new[i] - g[i]);
      }
    }
    const double ss = alpha * alpha * gg;
    if (sy > 0.0) {
      step = std::clamp(ss / sy, 1e-14, 1e10);
    } else {
      step = alpha * 2.0;
    }
    res.u = trial;
    E = E_new;
    recent[static_cast<std::size_t>(slot)] = E;
    slot = (slot + 1) % kWindow;
    g = g_new;
    res.residual = g.max_abs();
  }
  res.energy = E;
  res.converged = res.converged || res.residual <= opt.tol_res;
  return res;
}

}  // namespace detail

/// Minimize I over Dirichlet functions from u_init.
inline MinimizeResult global_minimize(const ProblemSpec& spec, const GridFunction& u_init,
                                      double lambda) {
  detail::require_dirichlet(u_init, "global_minimize");
  auto E = [&](const GridFunction& v) { return energy(spec, v, lambda); };
  auto dE = [&](const GridFunction& v) { return energy_gradient(spec, v, lambda); };
  return detail::descend(E, dE, u_init, spec.descent);
}

// -- lambda threshold ------------------------------------------------------------------

/// Plateau profile: t0 on the central half-box, linear ramp to zero at the
/// boundary.
inline GridFunction plateau_profile(const Grid& g, double t0) {
  GridFunction u(g);
  for (int i = 0; i < g.num_nodes(); ++i) {
    const auto xy = g.coord(i);
    double ramp = kInf;
    for (int a = 0; a < g.dim(); ++a) {
      const double margin = 0.25 * (g.upper(a) - g.lower(a));
      const double d = std::min(xy[static_cast<std::size_t>(a)] - g.lower(a),
                                g.upper(a) - xy[static_cast<std::size_t>(a)]);
      ramp = std::min(ramp, d / margin);
    }
    u[i] = t0 * std::clamp(ramp, 0.0, 1.0);
  }
  return u;
}

/// Plateau height with (1/p) t0^p - (1/q) t0^q > 0 and t0 > 1.
inline double plateau_height(double p, double q) {
  return 1.5 * std::pow(p / q, 1.0 / (p - q));
}

namespace detail {

/// Scaling grid for the plateau amplitude scan: the optimal negative-energy
/// scaling grows like a power of the exponent gap, so the scan is log-spaced
/// over a wide range.
inline std::vector<double> amplitude_scan() {
  std::vector<double> ts;
  for (int k = 0; k <= 100; ++k) {
    ts.push_back(std::pow(10.0, -2.0 + 5.0 * k / 100.0));  // 1e-2 .. 1e3
  }
  return ts;
}

}  // namespace detail

/// Smallest lambda in a doubling bracket whose scaled-plateau energy scan
/// goes negative; bisected to relative tolerance.
inline double lambda_star_search(const ProblemSpec& spec, const GridFunction& u0,
                                 double rel_tol = 1e-6) {
  detail::require_dirichlet(u0, "lambda_star_search");
  const std::vector<double> ts = detail::amplitude_scan();
  auto scan_min = [&](double lambda) {
    double best = kInf;
    for (double t : ts) {
      GridFunction v = u0;
      v *= t;
      best = std::min(best, energy(spec, v, lambda));
    }
    return best;
  };

  double hi = 1.0;
  int guard = 0;
  std::string trace;
  while (scan_min(hi) >= 0.0) {
    trace += (trace.empty() ? "" : ", ") + std::to_string(hi);
    hi *= 2.0;
    if (++guard > 60) {
      throw SolveRefused("lambda_star_search: no negative-energy scaling up to lambda cap; "
                         "scanned lambda = " + trace);
    }
  }
  double lo = hi / 2.0;
  if (guard == 0) {
    while (scan_min(lo) < 0.0 && lo > 1e-12) {
      hi = lo;
      lo /= 2.0;
    }
  }
  for (int i = 0; i < 80 && hi - lo > rel_tol * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (scan_min(mid) < 0.0 ? hi : lo) = mid;
  }
  return hi;
}

// -- truncated functional ---------------------------------------------------------------

/// The cut nonlinearity built from the first solution: f vanishes for t < 0,
/// follows t^{p-1} - t^{q-1} up to u1(x) and freezes above it; F is its
/// piecewise primitive, continuous at the joints.
class TruncatedNonlinearity {
 public:
  TruncatedNonlinearity(GridFunction u1, double p, double q)
      : u1_(std::move(u1)), p_(p), q_(q) {}

  const GridFunction& u1() const { return u1_; }

  double f(int i, double t) const {
    if (t < 0.0) return 0.0;
    const double s = std::min(t, cap(i));
    if (s <= 0.0) return 0.0;
    return std::pow(s, p_ - 1.0) - std::pow(s, q_ - 1.0);
  }

  double F(int i, double t) const {
    if (t <= 0.0) return 0.0;
    const double c = cap(i);
    const double s = std::min(t, c);
    double v = s <= 0.0 ? 0.0 : std::pow(s, p_) / p_ - std::pow(s, q_) / q_;
    if (t > c && c > 0.0) {
      v += (std::pow(c, p_ - 1.0) - std::pow(c, q_ - 1.0)) * (t - c);
    }
    return v;
  }

 private:
  double cap(int i) const { return std::max(u1_[i], 0.0); }

  GridFunction u1_;
  double p_, q_;
};

/// J(u) = \int Phi(|grad u|) - lambda \int F(x, u).
inline double truncated_energy(const ProblemSpec& spec, const TruncatedNonlinearity& tn,
                               const GridFunction& u, double lambda) {
  detail::require_dirichlet(u, "truncated_energy");
  double E = detail::diffusion_term(spec, u, nullptr);
  for (int i = 0; i < spec.grid.num_nodes(); ++i) {
    E -= spec.grid.weight(i) * lambda * tn.F(i, u[i]);
  }
  return E;
}

inline GridFunction truncated_gradient(const ProblemSpec& spec, const TruncatedNonlinearity& tn,
                                       const GridFunction& u, double lambda) {
  const Grid& g = spec.grid;
  std::vector<double> raw(static_cast<std::size_t>(g.num_nodes()), 0.0);
  detail::diffusion_term(spec, u, &raw);
  GridFunction out(g);
  for (int i = 0; i < g.num_nodes(); ++i) {
    if (g.is_boundary(i)) continue;
    out[i] = raw[static_cast<std::size_t>(i)] / g.weight(i) - lambda * tn.f(i, u[i]);
  }
  return out;
}

namespace detail {

// Directional second derivative of the cell diffusion term: the flux Jacobian
// dF = a(m) dg + (a'(m)/m)(g . dg) g per cell, with a frozen below eps_a and
// a' taken by a scalar centered difference of the density.
inline double diffusion_coef_slope(const NFunction& phi, double m, double eps) {
  if (m <= eps) return 0.0;  // frozen-coefficient region
  const double d = 1e-7 * (1.0 + m);
  const double phi_p = (phi.density(m + d) - phi.density(std::max(m - d, 0.0))) / (2.0 * d);
  return phi_p / m - phi.density(m) / (m * m);
}

inline void diffusion_hessian_apply(const ProblemSpec& spec, const GridFunction& u,
                                    const GridFunction& v, std::vector<double>& raw) {
  const Grid& g = spec.grid;
  if (g.dim() == 1) {
    const int n = g.nodes_per_axis(0);
    const double h = g.spacing(0);
    for (int c = 0; c + 1 < n; ++c) {
      const double d = (u[c + 1] - u[c]) / h;
      const double dd = (v[c + 1] - v[c]) / h;
      const double m = std::abs(d);
      const double a = diffusion_coef(spec.phi, m, spec.eps_a);
      const double ap = diffusion_coef_slope(spec.phi, m, spec.eps_a);
      const double dF = a * dd + (m > spec.eps_a ? ap / m * (d * dd) * d : 0.0);
      raw[static_cast<std::size_t>(c + 1)] += dF;
      raw[static_cast<std::size_t>(c)] -= dF;
    }
    return;
  }
  const int nx = g.nodes_per_axis(0), ny = g.nodes_per_axis(1);
  const double hx = g.spacing(0), hy = g.spacing(1);
  const double wc = hx * hy;
  for (int cj = 0; cj + 1 < ny; ++cj) {
    for (int ci = 0; ci + 1 < nx; ++ci) {
      const int n00 = g.index(ci, cj);
      const int n10 = g.index(ci + 1, cj);
      const int n01 = g.index(ci, cj + 1);
      const double gx = (u[n10] - u[n00]) / hx;
      const double gy = (u[n01] - u[n00]) / hy;
      const double dgx = (v[n10] - v[n00]) / hx;
      const double dgy = (v[n01] - v[n00]) / hy;
      const double m = std::hypot(gx, gy);
      const double a = diffusion_coef(spec.phi, m, spec.eps_a);
      const double ap = diffusion_coef_slope(spec.phi, m, spec.eps_a);
      const double radial = m > spec.eps_a ? ap / m * (gx * dgx + gy * dgy) : 0.0;
      const double dFx = a * dgx + radial * gx;
      const double dFy = a * dgy + radial * gy;
      raw[static_cast<std::size_t>(n10)] += wc * dFx / hx;
      raw[static_cast<std::size_t>(n01)] += wc * dFy / hy;
      raw[static_cast<std::size_t>(n00)] -= wc * (dFx / hx + dFy / hy);
    }
  }
}

}  // namespace detail

namespace detail {

// Diffusion part of the gradient at one node, recomputed from its incident
// cells only (for scalar node solves).
inline double node_diffusion(const ProblemSpec& spec, const GridFunction& u, int ii, int jj) {
  const Grid& g = spec.grid;
  double raw = 0.0;
  if (g.dim() == 1) {
    const int n = g.nodes_per_axis(0);
    const double h = g.spacing(0);
    if (ii > 0) {
      const double d = (u[ii] - u[ii - 1]) / h;
      raw += diffusion_coef(spec.phi, std::abs(d), spec.eps_a) * d;
    }
    if (ii + 1 < n) {
      const double d = (u[ii + 1] - u[ii]) / h;
      raw -= diffusion_coef(spec.phi, std::abs(d), spec.eps_a) * d;
    }
    return raw / g.weight(ii);
  }
  const int nx = g.nodes_per_axis(0), ny = g.nodes_per_axis(1);
  const double hx = g.spacing(0), hy = g.spacing(1);
  const double wc = hx * hy;
  const int node = g.index(ii, jj);
  for (int cj = jj - 1; cj <= jj; ++cj) {
    for (int ci = ii - 1; ci <= ii; ++ci) {
      if (ci < 0 || cj < 0 || ci + 1 >= nx || cj + 1 >= ny) continue;
      const int n00 = g.index(ci, cj);
      const int n10 = g.index(ci + 1, cj);
      const int n01 = g.index(ci, cj + 1);
      const double gx = (u[n10] - u[n00]) / hx;
      const double gy = (u[n01] - u[n00]) / hy;
      const double a = diffusion_coef(spec.phi, std::hypot(gx, gy), spec.eps_a);
      if (node == n10) raw += wc * a * gx / hx;
      if (node == n01) raw += wc * a * gy / hy;
      if (node == n00) raw -= wc * (a * gx / hx + a * gy / hy);
    }
  }
  return raw / g.weight(node);
}

// Nonlinear Gauss-Seidel sweeps over the collar {u_i < threshold}: each node
// equation is strictly increasing in the node's own value there, so a scalar
// bisection solves it exactly given the neighbors. This resolves the steep
// u^{q-1} interface that defeats Newton models across the kink.
inline void collar_sweep(const ProblemSpec& spec, const TruncatedNonlinearity& tn,
                         GridFunction& u, double lambda, double threshold, int sweeps) {
  const Grid& g = spec.grid;
  const int nx = g.nodes_per_axis(0);
  for (int pass = 0; pass < sweeps; ++pass) {
    for (int i = 0; i < g.num_nodes(); ++i) {
      if (g.is_boundary(i) || !(u[i] < threshold)) continue;
      const int ii = g.dim() == 1 ? i : i % nx;
      const int jj = g.dim() == 1 ? 0 : i / nx;
      auto resid = [&](double x) {
        const double save = u[i];
        u[i] = x;
        const double r = node_diffusion(spec, u, ii, jj) - lambda * tn.f(i, x);
        u[i] = save;
        return r;
      };
      double lo = std::min(-1.0, 2.0 * u[i]);
      double hi = threshold;
      if (resid(hi) < 0.0) continue;  // root beyond the collar: leave to Newton
      int guard = 0;
      while (resid(lo) > 0.0 && ++guard < 16) lo *= 2.0;
      if (guard >= 16) continue;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (resid(mid) > 0.0 ? hi : lo) = mid;
      }
      u[i] = 0.5 * (lo + hi);
    }
  }
}

}  // namespace detail

namespace detail {

inline double truncated_slope(const ProblemSpec& spec, const TruncatedNonlinearity& tn, int i,
                              double t) {
  const double cap = std::max(tn.u1()[i], 0.0);
  if (!(t > 0.0) || t > cap) return 0.0;
  const double fp = (spec.p - 1.0) * std::pow(t, spec.p - 2.0) -
                    (spec.q - 1.0) * std::pow(t, spec.q - 2.0);
  return std::clamp(fp, -1e290, 1e290);
}

}  // namespace detail

/// Generalized second derivative of the truncated functional applied to v
/// (Riesz form, boundary rows zero). At the nonsmooth points of f the
/// one-sided slope from the active branch is used, clamped in magnitude.
inline GridFunction truncated_hessian_apply(const ProblemSpec& spec,
                                            const TruncatedNonlinearity& tn,
                                            const GridFunction& u, double lambda,
                                            const GridFunction& v) {
  const Grid& g = spec.grid;
  std::vector<double> raw(static_cast<std::size_t>(g.num_nodes()), 0.0);
  detail::diffusion_hessian_apply(spec, u, v, raw);
  GridFunction out(g);
  for (int i = 0; i < g.num_nodes(); ++i) {
    if (g.is_boundary(i)) continue;
    out[i] = raw[static_cast<std::size_t>(i)] / g.weight(i) -
             lambda * detail::truncated_slope(spec, tn, i, u[i]) * v[i];
  }
  return out;
}

/// Diagonal of the same operator; used as a Jacobi preconditioner (the
/// near-kink slopes span many orders of magnitude).
inline GridFunction truncated_hessian_diagonal(const ProblemSpec& spec,
                                               const TruncatedNonlinearity& tn,
                                               const GridFunction& u, double lambda) {
  const Grid& g = spec.grid;
  GridFunction diag(g, 1.0);
  std::vector<double> raw(static_cast<std::size_t>(g.num_nodes()), 0.0);
  if (g.dim() == 1) {
    const int n = g.nodes_per_axis(0);
    const double h = g.spacing(0);
    for (int c = 0; c + 1 < n; ++c) {
      const double d = (u[c + 1] - u[c]) / h;
      const double m = std::abs(d);
      const double a = detail::diffusion_coef(spec.phi, m, spec.eps_a);
      const double ap = detail::diffusion_coef_slope(spec.phi, m, spec.eps_a);
      const double A = a + (m > spec.eps_a ? ap * m : 0.0);  // = phi'(m) regularized
      raw[static_cast<std::size_t>(c)] += A / h;
      raw[static_cast<std::size_t>(c + 1)] += A / h;
    }
  } else {
    const int nx = g.nodes_per_axis(0), ny = g.nodes_per_axis(1);
    const double hx = g.spacing(0), hy = g.spacing(1);
    const double wc = hx * hy;
    for (int cj = 0; cj + 1 < ny; ++cj) {
      for (int ci = 0; ci + 1 < nx; ++ci) {
        const int n00 = g.index(ci, cj);
        const int n10 = g.index(ci + 1, cj);
        const int n01 = g.index(ci, cj + 1);
        const double gx = (u[n10] - u[n00]) / hx;
        const double gy = (u[n01] - u[n00]) / hy;
        const double m = std::hypot(gx, gy);
        const double a = detail::diffusion_coef(spec.phi, m, spec.eps_a);
        const double ap = detail::diffusion_coef_slope(spec.phi, m, spec.eps_a);
        const double R = m > spec.eps_a ? ap / m : 0.0;
        raw[static_cast<std::size_t>(n10)] += wc / (hx * hx) * (a + R * gx * gx);
        raw[static_cast<std::size_t>(n01)] += wc / (hy * hy) * (a + R * gy * gy);
        const double s = gx / hx + gy / hy;
        raw[static_cast<std::size_t>(n00)] +=
            wc * (a * (1.0 / (hx * hx) + 1.0 / (hy * hy)) + R * s * s);
      }
    }
  }
  for (int i = 0; i < g.num_nodes(); ++i) {
    if (g.is_boundary(i)) continue;
    diag[i] = raw[static_cast<std::size_t>(i)] / g.weight(i) -
              lambda * detail::truncated_slope(spec, tn, i, u[i]);
  }
  return diag;
}

// -- random Dirichlet fields --------------------------------------------------------------

/// Smooth random Dirichlet field: low sine modes with decaying amplitudes.
inline GridFunction random_dirichlet_modes(const Grid& g, std::mt19937_64& rng, int modes = 4,
                                           double amp = 1.0) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  GridFunction u(g);
  if (g.dim() == 1) {
    std::vector<double> a(static_cast<std::size_t>(modes));
    for (auto& x : a) x = U(rng);
    for (int i = 0; i < g.num_nodes(); ++i) {
      const double xh = (g.coord(i)[0] - g.lower(0)) / (g.upper(0) - g.lower(0));
      double s = 0.0;
      for (int k = 1; k <= modes; ++k) {
        s += a[static_cast<std::size_t>(k - 1)] / k * std::sin(k * M_PI * xh);
      }
      u[i] = amp * s;
    }
    return u;
  }
  std::vector<double> a(static_cast<std::size_t>(modes * modes));
  for (auto& x : a) x = U(rng);
  for (int i = 0; i < g.num_nodes(); ++i) {
    const auto xy = g.coord(i);
    const double xh = (xy[0] - g.lower(0)) / (g.upper(0) - g.lower(0));
    const double yh = (xy[1] - g.lower(1)) / (g.upper(1) - g.lower(1));
    double s = 0.0;
    for (int k = 1; k <= modes; ++k) {
      for (int l = 1; l <= modes; ++l) {
        s += a[static_cast<std::size_t>((k - 1) * modes + (l - 1))] / (k + l) *
             std::sin(k * M_PI * xh) * std::sin(l * M_PI * yh);
      }
    }
    u[i] = amp * s;
  }
  return u;
}

/// Rough random Dirichlet field: independent node values, zero boundary.
inline GridFunction random_dirichlet_noise(const Grid& g, std::mt19937_64& rng,
                                           double amp = 1.0) {
  std::uniform_real_distribution<double> U(-amp, amp);
  GridFunction u(g);
  for (int i = 0; i < g.num_nodes(); ++i) {
    u[i] = g.is_boundary(i) ? 0.0 : U(rng);
  }
  return u;
}

// -- mountain pass -------------------------------------------------------------------------

struct MountainPassResult {
  GridFunction u2;
  double level = 0.0;     // c_discrete = J(u2): an upper bound for the continuum level
  double residual = 0.0;  // ||J'(u2)||_inf
  int sweeps = 0;
  int polish_iterations = 0;
  int retries = 0;
  bool converged = false;
  std::vector<double> path_energies;               // final sweep
  std::vector<std::vector<double>> sweep_history;  // J along the path, per sweep
};

namespace detail {

inline double l2_norm(const GridFunction& u) { return std::sqrt(std::max(inner(u, u), 0.0)); }

/// Approximately solve A x = b for an operator symmetric in the grid inner
/// product (possibly indefinite) by Lanczos with full reorthogonalization,
/// minimizing the residual over the Krylov space (dense Givens solve of the
/// small tridiagonal least-squares problem).
template <class ApplyFn>
GridFunction lanczos_minres(ApplyFn&& A, const GridFunction& b, int max_iter, double rtol) {
  const double beta1 = l2_norm(b);
  GridFunction x(b.grid());
  if (!(beta1 > 0.0)) return x;

  std::vector<GridFunction> V;
  V.reserve(static_cast<std::size_t>(max_iter) + 1);
  GridFunction v = b;
  v *= 1.0 / beta1;
  V.push_back(v);
  std::vector<double> alpha, beta;  // tridiagonal entries

  auto solve_ls = [&](int m) {
    // min || T~ y - beta1 e1 || over y in R^m, T~ the (m+1) x m tridiagonal
    std::vector<double> diag(alpha.begin(), alpha.begin() + m);
    std::vector<double> sup(m, 0.0), supsup(m, 0.0), rhs(static_cast<std::size_t>(m) + 1, 0.0);
    for (int i = 0; i + 1 < m; ++i) sup[static_cast<std::size_t>(i)] = beta[static_cast<std::size_t>(i)];
    rhs[0] = beta1;
    for (int i = 0; i < m; ++i) {
      const double sub = i < static_cast<int>(beta.size()) ? beta[static_cast<std::size_t>(i)] : 0.0;
      const double r = std::hypot(diag[static_cast<std::size_t>(i)], sub);
      if (!(r > 0.0)) continue;
      const double c = diag[static_cast<std::size_t>(i)] / r, s = sub / r;
      diag[static_cast<std::size_t>(i)] = r;
      if (i + 1 < m) {
        const double t1 = sup[static_cast<std::size_t>(i)], t2 = diag[static_cast<std::size_t>(i) + 1];
        sup[static_cast<std::size_t>(i)] = c * t1 + s * t2;
        diag[static_cast<std::size_t>(i) + 1] = -s * t1 + c * t2;
      }
      if (i + 2 < m) {
        const double t1 = supsup[static_cast<std::size_t>(i)], t2 = sup[static_cast<std::size_t>(i) + 1];
        supsup[static_cast<std::size_t>(i)] = c * t1 + s * t2;
        sup[static_cast<std::size_t>(i) + 1] = -s * t1 + c * t2;
      }
      const double r1 = rhs[static_cast<std::size_t>(i)], r2 = rhs[static_cast<std::size_t>(i) + 1];
      rhs[static_cast<std::size_t>(i)] = c * r1 + s * r2;
      rhs[static_cast<std::size_t>(i) + 1] = -s * r1 + c * r2;
    }
    std::vector<double> y(static_cast<std::size_t>(m), 0.0);
    for (int i = m - 1; i >= 0; --i) {
      double v2 = rhs[static_cast<std::size_t>(i)];
      if (i + 1 < m) v2 -= sup[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i) + 1];
      if (i + 2 < m) v2 -= supsup[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i) + 2];
      y[static_cast<std::size_t>(i)] = diag[static_cast<std::size_t>(i)] != 0.0
                                           ? v2 / diag[static_cast<std::size_t>(i)]
                                           : 0.0;
    }
    return std::pair<std::vector<double>, double>(std::move(y),
                                                  std::abs(rhs[static_cast<std::size_t>(m)]));
  };

  int m = 0;
  for (int it = 0; it < max_iter; ++it) {
    GridFunction w = A(V.back());
    const double a = inner(w, V.back());
    alpha.push_back(a);
    w.axpy(-a, V.back());
    if (V.size() >= 2) w.axpy(-beta.back(), V[V.size() - 2]);
    for (const GridFunction& q : V) w.axpy(-inner(w, q), q);  // reorthogonalize
    const double bnext = l2_norm(w);
    m = it + 1;
    if (!(bnext > 1e-14 * beta1)) break;
    beta.push_back(bnext);
    w *= 1.0 / bnext;
    V.push_back(std::move(w));
    if ((it + 1) % 25 == 0) {
      const auto [y, resid] = solve_ls(m);
      (void)y;
      if (resid <= rtol * beta1) break;
    }
  }
  const auto [y, resid] = solve_ls(m);
  (void)resid;
  for (int i = 0; i < m; ++i) x.axpy(y[static_cast<std::size_t>(i)], V[static_cast<std::size_t>(i)]);
  return x;
}

/// Drive ||grad||_inf to tol by damped inexact Newton; converges to critical
/// points of any index. The damping backtracks on the gradient norm.
/// `hess_apply(u, v)` must apply the (generalized) second derivative at u.
template <class GradFn, class HessFn>
MinimizeResult newton_polish(const GradFn& grad_fn, const HessFn& hess_apply, GridFunction u,
                             double tol_res, int max_outer, int krylov_iters) {
  MinimizeResult res{std::move(u)};
  GridFunction g = grad_fn(res.u);
  res.residual = g.max_abs();
  for (res.iterations = 0; res.iterations < max_outer; ++res.iterations) {
    if (res.residual <= tol_res) {
      res.converged = true;
      break;
    }
    const double gnorm = l2_norm(g);
    auto Hv = [&](const GridFunction& d) { return hess_apply(res.u, d); };
    GridFunction rhs = g;
    rhs *= -1.0;
    GridFunction delta = lanczos_minres(Hv, rhs, krylov_iters, 1e-8);

    double t = 1.0;
    GridFunction best = res.u;
    double best_norm = kInf;
    for (int bt = 0; bt < 20; ++bt) {
      GridFunction trial = res.u;
      trial.axpy(t, delta);
      const GridFunction gt = grad_fn(trial);
      const double n = l2_norm(gt);
      if (n < best_norm) {
        best_norm = n;
        best = std::move(trial);
      }
      if (n <= (1.0 - 1e-4 * t) * gnorm) break;
      t *= 0.5;
    }
    if (!(best_norm < gnorm)) break;  // no progress along the Newton direction
    res.u = std::move(best);
    g = grad_fn(res.u);
    res.residual = g.max_abs();
  }
  res.converged = res.residual <= tol_res;
  res.energy = 0.0;  // caller evaluates the functional
  return res;
}

// Redistribute path nodes to equal increments of a log-compressed energy
// metric |dJ| / (b + |J|), b = the barrier level, with a small L2 arc-length
// floor. Plain L2 spacing would starve the barrier region of nodes whenever
// the basins run several orders of magnitude deeper than the barrier.
inline void reequidistribute(std::vector<GridFunction>& path,
                             const std::vector<double>& energies, double barrier_scale) {
  const std::size_t K = path.size();
  std::vector<double> cum(K, 0.0);
  double len = 0.0;
  for (std::size_t k = 1; k < K; ++k) {
    GridFunction d = path[k];
    d -= path[k - 1];
    len += l2_norm(d);
  }
  if (!(len > 0.0)) return;
  const double b = std::max(barrier_scale, 1e-12);
  for (std::size_t k = 1; k < K; ++k) {
    GridFunction d = path[k];
    d -= path[k - 1];
    const double m = std::max(std::abs(energies[k]), std::abs(energies[k - 1]));
    cum[k] = cum[k - 1] + std::abs(energies[k] - energies[k - 1]) / (b + m) +
             1e-3 * l2_norm(d) / len;
  }
  std::vector<GridFunction> fresh;
  fresh.reserve(K);
  fresh.push_back(path.front());
  std::size_t seg = 0;
  for (std::size_t k = 1; k + 1 < K; ++k) {
    const double target = cum.back() * static_cast<double>(k) / static_cast<double>(K - 1);
    while (seg + 2 < K && cum[seg + 1] < target) ++seg;
    const double den = cum[seg + 1] - cum[seg];
    const double theta = den > 0.0 ? std::clamp((target - cum[seg]) / den, 0.0, 1.0) : 0.0;
    GridFunction v = path[seg];
    GridFunction d = path[seg + 1];
    d -= path[seg];
    v.axpy(theta, d);
    fresh.push_back(std::move(v));
  }
  fresh.push_back(path.back());
  path = std::move(fresh);
}

}  // namespace detail

/// Numerical mountain pass for J between 0 and u1: deform a discretized path
/// downhill keeping endpoints fixed, re-equidistribute periodically, then
/// polish the max-energy node to a critical point by driving ||J'||^2 to its
/// local minimum.
inline MountainPassResult mountain_pass(const ProblemSpec& spec, const TruncatedNonlinearity& tn,
                                        const GridFunction& u1, double lambda) {
  const MountainPassOptions& opt = spec.mp;
  auto J = [&](const GridFunction& v) { return truncated_energy(spec, tn, v, lambda); };
  auto dJ = [&](const GridFunction& v) { return truncated_gradient(spec, tn, v, lambda); };

  // Locate the barrier along the ray s * u1 first: the energy maximum may sit
  // many orders of magnitude below ||u1||, and the initial path must resolve
  // that scale or the max-energy node degenerates to an endpoint.
  double s_barrier = 0.0, barrier_level = 0.0;
  for (int k = 0; k <= 240; ++k) {
    const double s = std::pow(10.0, -8.0 + 8.0 * k / 240.0);
    GridFunction v = u1;
    v *= s;
    const double e = J(v);
    if (e > barrier_level) {
      barrier_level = e;
      s_barrier = s;
    }
  }
  if (!(barrier_level > 0.0) || s_barrier >= 0.99) {
    throw SolveRefused("no mountain pass geometry at this lambda (no positive barrier on the ray)");
  }

  // Initial path: 0, then geometric scalings bridging the barrier scale up to
  // u1. Piecewise linear in between, as the deformation only sees the nodes.
  const int K = opt.path_nodes;
  std::vector<GridFunction> path;
  path.reserve(static_cast<std::size_t>(K));
  path.emplace_back(spec.grid);  // zero endpoint
  const double s_lo = s_barrier / 16.0;
  for (int k = 1; k + 1 < K; ++k) {
    const double w = static_cast<double>(k - 1) / (K - 3);
    const double s = s_lo * std::pow(1.0 / s_lo, w);
    GridFunction v = u1;
    v *= s;
    path.push_back(std::move(v));
  }
  path.push_back(u1);

  MountainPassResult res{GridFunction(spec.grid)};
  std::vector<double> node_step(static_cast<std::size_t>(K), spec.descent.step0);
  std::vector<double> energies(static_cast<std::size_t>(K), 0.0);

  // The deformation lowers the barrier node while basin nodes plunge; track
  // the best (lowest) barrier state seen so the polish always starts from a
  // genuine ridge point, even if the discrete path later dissolves.
  GridFunction best_saddle(spec.grid);
  double best_level = kInf;

  for (res.sweeps = 0; res.sweeps < opt.max_sweeps; ++res.sweeps) {
    for (int k = 0; k < K; ++k) energies[static_cast<std::size_t>(k)] = J(path[static_cast<std::size_t>(k)]);
    res.sweep_history.push_back(energies);
    int argmax = 0;
    for (int k = 1; k < K; ++k) {
      if (energies[static_cast<std::size_t>(k)] > energies[static_cast<std::size_t>(argmax)]) argmax = k;
    }
    if (argmax == 0 || argmax == K - 1) break;  // path dissolved; polish from the best state
    if (energies[static_cast<std::size_t>(argmax)] < best_level) {
      best_level = energies[static_cast<std::size_t>(argmax)];
      best_saddle = path[static_cast<std::size_t>(argmax)];
    }
    const GridFunction g_max = dJ(path[static_cast<std::size_t>(argmax)]);
    if (g_max.max_abs() <= opt.sweep_tol) break;

    // one descent step per interior node, endpoints pinned
    for (int k = 1; k + 1 < K; ++k) {
      GridFunction& v = path[static_cast<std::size_t>(k)];
      const GridFunction g = dJ(v);
      const double gg = inner(g, g);
      if (!(gg > 0.0)) continue;
      const double Ev = energies[static_cast<std::size_t>(k)];
      double alpha = node_step[static_cast<std::size_t>(k)];
      for (int bt = 0; bt < 40; ++bt) {
        GridFunction trial = v;
        trial.axpy(-alpha, g);
        if (J(trial) <= Ev - spec.descent.armijo_c1 * alpha * gg) {
          v = std::move(trial);
          break;
        }
        alpha *= spec.descent.backtrack;
      }
      node_step[static_cast<std::size_t>(k)] = std::min(alpha * 1.5, 1e6);
    }
    if (opt.reequidistribute_every > 0 && (res.sweeps + 1) % opt.reequidistribute_every == 0) {
      for (int k = 0; k < K; ++k) energies[static_cast<std::size_t>(k)] = J(path[static_cast<std::size_t>(k)]);
      detail::reequidistribute(path, energies, barrier_level);
    }
  }
  res.path_energies = res.sweep_history.back();
  if (!(best_level < kInf)) {
    throw SolveRefused("no mountain pass geometry at this lambda (path collapsed)");
  }

  // polish the barrier state to a critical point: damped inexact Newton on
  // J' = 0 (gradient-norm minimization with Newton directions; plain descent
  // on ||J'||^2 stalls along near-null Hessian directions)
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  GridFunction start = best_saddle;
  const double u1_inf = u1.max_abs();
  const double start_inf = std::max(start.max_abs(), 1e-12 * u1_inf);

  // The kink of f at u = 0 is steep (the u^{q-1} branch), so the polish
  // alternates exact scalar solves on the near-zero collar with Newton steps
  // on the remaining nodes, the collar pinned. On the collar u < u_star the
  // node equations are strictly monotone in the node value.
  const double u_star =
      std::pow((spec.q - 1.0) / (spec.p - 1.0), 1.0 / (spec.p - spec.q));
  const double collar = 0.9 * u_star;

  for (res.retries = 0; res.retries <= opt.max_retries; ++res.retries) {
    GridFunction u2 = start;
    double jres = kInf;
    const int max_outer = std::max(10, opt.polish_max_iter / 50);
    for (int outer = 0; outer < max_outer; ++outer) {
      detail::collar_sweep(spec, tn, u2, lambda, collar, 2);
      GridFunction g2 = dJ(u2);
      jres = g2.max_abs();
      ++res.polish_iterations;
      if (jres <= spec.descent.tol_res) break;

      // Jacobi-preconditioned Newton step. Nodes whose value sits essentially
      // on the kink are pinned (the scalar sweeps own them; moving them makes
      // the gradient norm nonsmooth at the lambda u^{q-1} scale).
      GridFunction scale = truncated_hessian_diagonal(spec, tn, u2, lambda);
      for (int i = 0; i < scale.size(); ++i) {
        const bool pinned = spec.grid.is_boundary(i) || std::abs(u2[i]) < 1e-8;
        scale[i] = pinned ? 0.0 : 1.0 / std::sqrt(std::max(std::abs(scale[i]), 1e-12));
      }
      auto precond = [&](GridFunction f) {
        for (int i = 0; i < f.size(); ++i) f[i] *= scale[i];
        return f;
      };
      auto Hv = [&](const GridFunction& d) {
        return precond(truncated_hessian_apply(spec, tn, u2, lambda, precond(d)));
      };
      GridFunction rhs = precond(g2);
      rhs *= -1.0;
      const double gnorm = detail::l2_norm(g2);
      GridFunction delta = precond(detail::lanczos_minres(Hv, rhs, 300, 1e-9));

      // fraction-to-boundary: no node may jump across the kink in one step
      double tcap = 1.0;
      for (int i = 0; i < u2.size(); ++i) {
        if (std::abs(u2[i]) < collar && delta[i] != 0.0 &&
            u2[i] * (u2[i] + delta[i]) < 0.0) {
          tcap = std::min(tcap, 0.9 * std::abs(u2[i] / delta[i]));
        }
      }
      double t = std::max(tcap, 1e-8);
      GridFunction best_u = u2;
      double best_norm = kInf;
      for (int bt = 0; bt < 24; ++bt) {
        GridFunction trial = u2;
        trial.axpy(t, delta);
        const double n = detail::l2_norm(dJ(trial));
        if (n < best_norm) {
          best_norm = n;
          best_u = std::move(trial);
        }
        if (n <= (1.0 - 1e-4 * t) * gnorm) break;
        t *= 0.5;
      }
      if (!(best_norm < gnorm)) {
        // Newton exhausted; a few more exact collar solves, then give up
        detail::collar_sweep(spec, tn, u2, lambda, collar, 4);
        jres = dJ(u2).max_abs();
        if (jres > spec.descent.tol_res) break;
      } else {
        u2 = std::move(best_u);
      }
    }

    GridFunction diff = u2;
    diff -= u1;
    const double level = J(u2);
    const bool slid_to_zero = u2.max_abs() < 1e-6 * start_inf;
    const bool slid_to_u1 = diff.max_abs() < 1e-6 * u1_inf;
    if (jres <= spec.descent.tol_res && !slid_to_zero && !slid_to_u1 && level > 0.0) {
      res.u2 = std::move(u2);
      res.level = level;
      res.residual = jres;
      res.converged = true;
      return res;
    }
    // basin slide or stall: perturb the barrier state at its own scale
    GridFunction noise = random_dirichlet_modes(spec.grid, rng, 4, opt.retry_noise * start_inf);
    start = best_saddle;
    start += noise;
  }

  throw SolveRefused("mountain pass polish failed to isolate a positive-level critical point");
}

// -- first-eigenvalue style estimate ----------------------------------------------------------

/// Upper estimate of inf \int Phi(|grad u|) / \int |u|^{phi0} over Dirichlet
/// fields (restricted to ||u|| > 1 in the source); sampled then descended.
/// An estimate only, reported rather than asserted.
struct Lambda1Estimate {
  double value = kInf;
  double best_sample = kInf;
  int samples_above_unit_norm = 0;
  bool final_above_unit_norm = false;
};

inline Lambda1Estimate lambda_1_estimate(const ProblemSpec& spec, int n_samples = 100,
                                         int descent_iters = 400) {
  Lambda1Estimate est;
  std::mt19937_64 rng(spec.seed ^ 0xda3e39cb94b95bdbULL);
  const GrowthIndices gi = estimate_growth_indices(spec.phi);
  const double phi0 = gi.lower;

  auto denom = [&](const GridFunction& u) {
    double s = 0.0;
    for (int i = 0; i < u.size(); ++i) {
      s += u.grid().weight(i) * std::pow(std::abs(u[i]), phi0);
    }
    return s;
  };
  auto ratio = [&](const GridFunction& u) {
    const double d = denom(u);
    if (!(d > 0.0)) return kInf;
    return detail::diffusion_term(spec, u, nullptr) / d;
  };

  GridFunction best(spec.grid);
  for (int s = 0; s < n_samples; ++s) {
    GridFunction u = random_dirichlet_modes(spec.grid, rng, 4, 1.0);
    const double nrm = luxemburg_norm(cell_gradient_magnitude(u), spec.phi);
    if (nrm > 0.0) u *= 1.5 / nrm;  // aim at the ||u|| > 1 regime
    const double r = ratio(u);
    if (luxemburg_norm(cell_gradient_magnitude(u), spec.phi) > 1.0) ++est.samples_above_unit_norm;
    if (r < est.best_sample) {
      est.best_sample = r;
      best = u;
    }
  }

  auto grad_ratio = [&](const GridFunction& u) {
    const Grid& g = spec.grid;
    std::vector<double> raw(static_cast<std::size_t>(g.num_nodes()), 0.0);
    const double D = detail::diffusion_term(spec, u, &raw);
    const double P = denom(u);
    GridFunction out(g);
    for (int i = 0; i < g.num_nodes(); ++i) {
      if (g.is_boundary(i)) continue;
      const double dD = raw[static_cast<std::size_t>(i)] / g.weight(i);
      const double dP = phi0 * std::pow(std::abs(u[i]), phi0 - 1.0) * (u[i] >= 0.0 ? 1.0 : -1.0);
      out[i] = (dD * P - D * dP) / (P * P);
    }
    return out;
  };
  DescentOptions opt = spec.descent;
  opt.max_iter = descent_iters;
  opt.tol_res = 0.0;
  MinimizeResult r = detail::descend(ratio, grad_ratio, best, opt);
  est.value = std::min(est.best_sample, r.energy);
  est.final_above_unit_norm = luxemburg_norm(cell_gradient_magnitude(r.u), spec.phi) > 1.0;
  return est;
}

// -- full pipeline ------------------------------------------------------------------------------

struct SolveReport {
  GridFunction u1, u2;
  double lambda = 0.0;
  double lambda_star_estimate = std::numeric_limits<double>::quiet_NaN();
  Lambda1Estimate lambda_1;
  double energy_u1 = 0.0;
  double energy_u2 = 0.0;
  double level = 0.0;  // c_discrete
  double residual_u1 = 0.0;
  double residual_u2 = 0.0;  // ||I'(u2)||_inf
  double truncated_vs_full_energy_gap = 0.0;  // |J(u2) - I(u2)|
  double separation_inf = 0.0;                // ||u1 - u2||_inf
  double ordering_max_violation = 0.0;        // max(u2 - u1)
  double min_u1 = 0.0;
  double min_u2 = 0.0;
  double weak_residual_max = 0.0;
  int minimize_iterations = 0;
  int sweeps = 0;
  int polish_iterations = 0;
  int retries = 0;
  HypothesisReport hypotheses;
  std::vector<std::vector<double>> path_history;
  bool success = false;
  std::string message;
};

/// Run the whole two-solution experiment: threshold search (when lambda is
/// unset), global minimization, truncation, mountain pass, and the
/// structural verifications on the pair found.
inline SolveReport solve_two_solutions(const ProblemSpec& spec, bool force = false) {
  SolveReport rep{GridFunction(spec.grid), GridFunction(spec.grid)};
  rep.hypotheses = check_hypotheses(spec);
  if (!rep.hypotheses.admissible() && !force) {
    throw SolveRefused("hypotheses violated: need 1 < q < p < phi0 and phi_sup below the "
                       "embedding limit (pass force to override)");
  }

  const double t0 = plateau_height(spec.p, spec.q);
  const GridFunction u0 = plateau_profile(spec.grid, t0);
  if (!spec.lambda) {
    rep.lambda_star_estimate = lambda_star_search(spec, u0);
    rep.lambda = 2.0 * rep.lambda_star_estimate;
  } else {
    rep.lambda = *spec.lambda;
    try {
      rep.lambda_star_estimate = lambda_star_search(spec, u0);
    } catch (const SolveRefused&) {
      // threshold not bracketed; diagnostic only
    }
  }

  // Start from the best plateau scaling so descent begins below zero energy
  // and cannot terminate at the trivial minimizer.
  GridFunction u_init = u0;
  {
    double best = energy(spec, u0, rep.lambda);
    for (double t : detail::amplitude_scan()) {
      GridFunction v = u0;
      v *= t;
      const double e = energy(spec, v, rep.lambda);
      if (e < best) {
        best = e;
        u_init = std::move(v);
      }
    }
  }
  MinimizeResult m = global_minimize(spec, u_init, rep.lambda);
  rep.u1 = m.u;
  rep.energy_u1 = m.energy;
  rep.residual_u1 = m.residual;
  rep.minimize_iterations = m.iterations;
  rep.min_u1 = rep.u1.min_value();
  if (!(rep.energy_u1 < 0.0)) {
    throw SolveRefused("no negative-energy minimizer at this lambda");
  }

  TruncatedNonlinearity tn(rep.u1, spec.p, spec.q);
  MountainPassResult mp = mountain_pass(spec, tn, rep.u1, rep.lambda);
  rep.u2 = mp.u2;
  rep.level = mp.level;
  rep.sweeps = mp.sweeps;
  rep.polish_iterations = mp.polish_iterations;
  rep.retries = mp.retries;
  rep.path_history = std::move(mp.sweep_history);

  rep.energy_u2 = energy(spec, rep.u2, rep.lambda);
  rep.residual_u2 = energy_gradient(spec, rep.u2, rep.lambda).max_abs();
  rep.truncated_vs_full_energy_gap = std::abs(mp.level - rep.energy_u2);
  rep.min_u2 = rep.u2.min_value();

  GridFunction diff = rep.u1;
  diff -= rep.u2;
  rep.separation_inf = diff.max_abs();
  double viol = -kInf;
  for (int i = 0; i < rep.u2.size(); ++i) viol = std::max(viol, rep.u2[i] - rep.u1[i]);
  rep.ordering_max_violation = viol;

  std::mt19937_64 rng(spec.seed ^ 0xc2b2ae3d27d4eb4fULL);
  const GridFunction gI2 = energy_gradient(spec, rep.u2, rep.lambda);
  for (int s = 0; s < 20; ++s) {
    GridFunction v = random_dirichlet_modes(spec.grid, rng, 4, 1.0);
    const double nv = detail::l2_norm(v);
    if (nv > 0.0) v *= 1.0 / nv;
    rep.weak_residual_max = std::max(rep.weak_residual_max, std::abs(inner(gI2, v)));
  }

  rep.lambda_1 = lambda_1_estimate(spec);

  const double tol = 1e-6;
  const bool two_solutions = rep.energy_u1 < 0.0 && rep.energy_u2 > 0.0;
  const bool ordered = rep.ordering_max_violation <= tol && rep.min_u2 >= -tol;
  const bool separated = rep.separation_inf > spec.separation_tol;
  rep.success = two_solutions && ordered && separated && mp.converged &&
                m.residual <= spec.descent.tol_res;
  rep.message = rep.success ? "two distinct nonnegative solutions found"
                            : "solve completed but the two-solution contract failed";
  return rep;
}

}  // namespace orlicz
