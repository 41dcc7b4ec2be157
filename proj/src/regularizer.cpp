#include "cohere/regularizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cohere/vec.hpp"

namespace cohere {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::domain_error(std::string(what) + " must be finite");
}

void require_params(const RegularizerParams& p) {
  require_finite(p.S, "S");
  require_finite(p.Q, "Q");
  if (p.S <= 0.0) throw std::domain_error("S must be positive");
  if (p.Q < 0.0) throw std::domain_error("Q must be nonnegative");
}

// Argument of W in the middle branch: 2 e^{2Q} S^2 x^2.
double w_argument(double x, const RegularizerParams& p) {
  return 2.0 * std::exp(2.0 * p.Q) * p.S * p.S * x * x;
}

}  // namespace

double lambert_w0(double x) {
  require_finite(x, "lambert_w0 argument");
  if (x < 0.0) throw std::domain_error("lambert_w0 defined on [0, inf)");
  if (x == 0.0) return 0.0;

  double w = std::log1p(x);  // upper bound ln(1+x) >= W(x), a tight seed
  if (x > 1e250) {
    // w*e^w would overflow; iterate on the log-residual g = w + ln w - ln x
    // instead (same root, same Halley scheme, same seed).
    const double lx = std::log(x);
    for (int i = 0; i < 50; ++i) {
      const double g = w + std::log(w) - lx;
      if (std::abs(g) <= 1e-15) break;
      const double g1 = 1.0 + 1.0 / w;
      const double g2 = -1.0 / (w * w);
      w -= g / (g1 - 0.5 * g * g2 / g1);
    }
    return w;
  }

  const double tol = 1e-14 * x;
  for (int i = 0; i < 50; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::abs(f) <= tol) break;
    // Halley step with e^w factored out: the naive f''*f product overflows
    // past x ~ 1e150 and would stall the update at the seed.
    const double q = (w - x / ew) / (w + 1.0);
    const double step = q / (1.0 - 0.5 * q * (w + 2.0) / (w + 1.0));
    w -= step;
    if (w < 0.0) w = 0.0;  // Halley overshoot below the branch; x>0 => W>0
    if (std::abs(step) <= 1e-16 * w) break;  // sub-ulp step: w is grid-converged
  }
  return w;
}

double branch_point(const RegularizerParams& p) {
  require_params(p);
  return 0.5 * std::exp(0.25 * p.S * p.S - p.Q);
}

double psi(double x, const RegularizerParams& p) {
  require_params(p);
  require_finite(x, "x");
  if (x == 0.0) return -std::exp(-p.Q);
  const double ax = std::abs(x);
  if (ax <= branch_point(p)) return psi_w_branch(x, p);
  return psi_loglinear_branch(x, p);
}

double psi_w_branch(double x, const RegularizerParams& p) {
  const double ax = std::abs(x);
  // Floor keeps (W-1)/sqrt(W) finite if the W argument underflows; x -> 0
  // is handled by psi()'s exact-zero case before this branch is reached.
  const double w = std::max(lambert_w0(w_argument(x, p)), 1e-300);
  return p.S * ax * std::sqrt(2.0) * (w - 1.0) / std::sqrt(w);
}

double psi_loglinear_branch(double x, const RegularizerParams& p) {
  const double ax = std::abs(x);
  return 2.0 * ax * std::log(2.0 * ax) + ax * (0.5 * p.S * p.S + 2.0 * p.Q - 2.0);
}

double psi_prime(double x, const RegularizerParams& p) {
  require_params(p);
  require_finite(x, "x");
  if (x == 0.0) return 0.0;
  if (std::abs(x) <= branch_point(p)) return psi_prime_w_branch(x, p);
  return psi_prime_loglinear_branch(x, p);
}

double psi_prime_w_branch(double x, const RegularizerParams& p) {
  const double s = (x > 0.0) ? 1.0 : -1.0;
  return s * p.S * std::sqrt(2.0 * lambert_w0(w_argument(x, p)));
}

double psi_prime_loglinear_branch(double x, const RegularizerParams& p) {
  const double s = (x > 0.0) ? 1.0 : -1.0;
  const double ax = std::abs(x);
  return s * (2.0 * std::log(2.0 * ax) + 0.5 * p.S * p.S + 2.0 * p.Q);
}

double psi_second(double x, const RegularizerParams& p) {
  require_params(p);
  require_finite(x, "x");
  const double ax = std::abs(x);
  const double x0 = branch_point(p);
  if (x == 0.0 || ax == x0)
    throw std::domain_error("psi_second undefined at 0 and at the branch point");
  if (ax < x0) {
    const double w = lambert_w0(w_argument(x, p));
    return std::sqrt(2.0 * p.S * p.S * w) / (ax * (w + 1.0));
  }
  return 2.0 / ax;
}

double psi_star(double theta, const RegularizerParams& p) {
  require_params(p);
  require_finite(theta, "theta");
  if (std::abs(theta) <= p.S * p.S) return psi_star_quad_branch(theta, p);
  return psi_star_exp_branch(theta, p);
}

double psi_star_quad_branch(double theta, const RegularizerParams& p) {
  return std::exp(theta * theta / (4.0 * p.S * p.S) - p.Q);
}

double psi_star_exp_branch(double theta, const RegularizerParams& p) {
  return std::exp(0.5 * std::abs(theta) - 0.25 * p.S * p.S - p.Q);
}

double psi_star_prime(double theta, const RegularizerParams& p) {
  require_params(p);
  require_finite(theta, "theta");
  const double at = std::abs(theta);
  if (at <= p.S * p.S) return theta / (2.0 * p.S * p.S) * psi_star_quad_branch(theta, p);
  const double s = (theta > 0.0) ? 1.0 : -1.0;
  return 0.5 * s * psi_star_exp_branch(theta, p);
}

std::vector<double> grad_phi_star(std::span<const double> theta, const RegularizerParams& p) {
  require_params(p);
  for (double v : theta) require_finite(v, "theta");
  const double nt = norm(theta);
  std::vector<double> out(theta.size(), 0.0);
  if (nt == 0.0) return out;
  const double beta_scale =
      (nt <= p.S * p.S) ? 1.0 / (2.0 * p.S * p.S) : 1.0 / (2.0 * nt);
  const double mag = beta_scale * psi_star(nt, p);
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] = theta[i] * mag;
  return out;
}

}  // namespace cohere
