#include "mcbm/robust.hpp"

#include <cmath>

#include "mcbm/error.hpp"

namespace mcbm {

namespace {

void check_positive(double v, const char* what) {
  if (!(v > 0.0)) throw ArgumentError(std::string(what) + " must be > 0");
}

}  // namespace

double rho_ja(double eps, double beta) {
  check_positive(beta, "rho_ja: beta");
  return detail::rho_ja_unchecked(eps, beta);
}

double d_rho_ja(double eps, double beta) {
  check_positive(beta, "d_rho_ja: beta");
  return detail::d_rho_ja_unchecked(eps, beta);
}

double rho_recon(double eps, double s) {
  check_positive(s, "rho_recon: s");
  const double e2 = eps * eps;
  return e2 / (e2 + s * s);
}

double d_rho_recon(double eps, double s) {
  check_positive(s, "d_rho_recon: s");
  const double denom = eps * eps + s * s;
  return 2.0 * eps * s * s / (denom * denom);
}

}  // namespace mcbm
