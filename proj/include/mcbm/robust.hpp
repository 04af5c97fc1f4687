#pragma once

namespace mcbm {

struct RobustConfig {
  double beta = 0.35;  // smoothed-l1 knee
  double s = 0.05;     // Geman-McClure scale
};

// Smoothed l1: 0.5 e^2 / beta for |e| <= beta, |e| - 0.5 beta beyond.
double rho_ja(double eps, double beta);
double d_rho_ja(double eps, double beta);

// Geman-McClure: e^2 / (e^2 + s^2), bounded by 1.
double rho_recon(double eps, double s);
double d_rho_recon(double eps, double s);

namespace detail {
// Unchecked kernels for inner loops; beta > 0 is the caller's responsibility.
inline double rho_ja_unchecked(double eps, double beta) {
  const double a = eps < 0.0 ? -eps : eps;
  return a <= beta ? 0.5 * eps * eps / beta : a - 0.5 * beta;
}
inline double d_rho_ja_unchecked(double eps, double beta) {
  const double a = eps < 0.0 ? -eps : eps;
  if (a <= beta) return eps / beta;
  return eps > 0.0 ? 1.0 : -1.0;
}
}  // namespace detail

}  // namespace mcbm
