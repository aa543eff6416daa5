#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace orlicz {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Iterative routine exhausted its budget without meeting tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// A log-spaced probe window [lo, hi]. Verdicts computed on it are
/// finite-range certificates, never asymptotic statements.
struct ProbeRange {
  double lo = 1e-3;
  double hi = 1e3;
  int per_decade = 256;

  std::vector<double> points() const {
    if (!(lo > 0.0) || !(hi > lo)) throw std::domain_error("ProbeRange: need 0 < lo < hi");
    const double decades = std::log10(hi / lo);
    const int n = std::max(2, static_cast<int>(std::ceil(decades * per_decade)) + 1);
    std::vector<double> ts(static_cast<std::size_t>(n));
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n; ++i) {
      ts[static_cast<std::size_t>(i)] = std::exp(llo + (lhi - llo) * i / (n - 1));
    }
    ts.front() = lo;
    ts.back() = hi;
    return ts;
  }
};

namespace detail {

inline double simpson_rule(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson_rule(a, m, fa, flm, fm);
  const double right = simpson_rule(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b].
template <class F>
double integrate_adaptive(const F& f, double a, double b, double rel_tol = 1e-10,
                          double abs_tol = 1e-14, int max_depth = 40) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = detail::simpson_rule(a, b, fa, fm, fb);
  const double tol = std::max(abs_tol, rel_tol * std::abs(whole));
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// sup{ t >= 0 : f(t) <= target } for nondecreasing f with f(0) <= target.
/// Expanding bracket then bisection; NaN values of f are treated as above
/// target. Returns +infinity when the sup exceeds the representable range.
template <class F>
double monotone_sup_below(const F& f, double target, int max_iter = 200,
                          const char* what = "monotone_sup_below") {
  (void)what;
  double lo = 0.0;
  double hi = 1.0;
  int guard = 0;
  auto above = [&](double v) { return !(v <= target); };  // NaN counts as above
  while (!above(f(hi))) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 1024 || hi > 1e300) return kInf;
  }
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (above(f(mid))) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo <= 1e-15 * std::max(1.0, lo)) break;
  }
  return lo;
}

/// Solve f(t) = y for nondecreasing f with f(0) = 0, y >= 0.
/// Returns t with |f(t) - y| <= rtol * y (tighter than the rtol * max(1, y)
/// contract).
template <class F>
double solve_increasing(const F& f, double y, double rtol = 1e-8, int max_iter = 240,
                        const char* what = "solve_increasing") {
  if (y == 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  int guard = 0;
  while (f(hi) < y) {
    lo = hi;
    hi *= 4.0;
    if (++guard > 600 || hi > 1e300) {
      throw ConvergenceError(std::string(what) + ": bracket expansion exceeded cap");
    }
  }
  double mid = hi;
  for (int i = 0; i < max_iter; ++i) {
    mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double v = f(mid);
    if (std::abs(v - y) <= rtol * y) return mid;
    if (v < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (std::abs(f(mid) - y) > rtol * std::max(1.0, y) * 1e3) {
    throw ConvergenceError(std::string(what) + ": bisection did not meet tolerance");
  }
  return mid;
}

struct GoldenResult {
  double x = 0.0;
  double value = 0.0;
  int iterations = 0;
  double bracket_width = 0.0;  // relative, in the transformed variable
};

/// Minimize a unimodal f over [lo, hi] on a log-x scale by golden-section search.
template <class F>
GoldenResult golden_min_log(const F& f, double lo, double hi, double xrel_tol = 1e-10,
                            int max_iter = 200) {
  const double invphi = 0.6180339887498949;
  double a = std::log(lo), b = std::log(hi);
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(std::exp(c)), fd = f(std::exp(d));
  int it = 0;
  while (b - a > xrel_tol && it < max_iter) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(std::exp(d));
    }
    ++it;
  }
  GoldenResult r;
  r.x = std::exp(0.5 * (a + b));
  r.value = f(r.x);
  r.iterations = it;
  r.bracket_width = b - a;
  return r;
}

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

}  // namespace orlicz
