#pragma once

#include <cmath>
#include <stdexcept>

namespace deflectlab {

namespace detail {

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa,
                            double fb, double fm, double whole, double abs_tol,
                            double rel_tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  const double tol = std::max(abs_tol, rel_tol * std::abs(left + right));
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, fm, flm, left, 0.5 * abs_tol,
                              rel_tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, fb, frm, right, 0.5 * abs_tol,
                              rel_tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b].
template <typename F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-10,
                 double rel_tol = 1e-10, int max_depth = 48) {
  if (!(a < b)) throw std::invalid_argument("integrate: requires a < b");
  // Split at the midpoint up front: symmetric integrands (Gaussians around
  // a mean) otherwise fool the first Simpson estimate.
  const double mid = 0.5 * (a + b);
  double total = 0.0;
  for (const auto& [lo, hi] : {std::pair{a, mid}, std::pair{mid, b}}) {
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += detail::adaptive_simpson_rec(f, lo, hi, fa, fb, fm, whole,
                                          0.5 * abs_tol, rel_tol, max_depth);
  }
  return total;
}

}  // namespace deflectlab
