#pragma once

#include <cmath>
#include <span>
#include <vector>

// Linearithmic regularizer pair psi / psi*.
//
// psi(x, S, Q) is the radial profile of the time-varying regularizer the
// optimizer minimizes against; psi*(theta, S, Q) is its Fenchel conjugate,
// which has a two-branch closed form (quadratic-exponential inside
// |theta| <= S^2, linear-exponential outside). psi itself is recovered
// through the principal Lambert W branch.
//
// All operations are defined for S > 0, Q >= 0 and finite scalar inputs;
// they are numerically trustworthy for S^2 <= 600 (beyond that the
// exp(S^2/4) factors leave double range). Non-finite input or parameters
// outside the domain raise std::domain_error.

namespace cohere {

struct RegularizerParams {
  double S = 2.0;  // scale; the optimizer state tracks S^2 (init 4)
  double Q = 0.0;  // accumulated normalized loss mass

  static RegularizerParams from_s2(double s2, double q) { return {std::sqrt(s2), q}; }
};

// Principal branch W0 on [0, inf): unique w >= 0 with w*e^w = x.
// Halley iteration seeded with ln(1+x); residual |w e^w - x| <= 1e-12 max(1,x).
double lambert_w0(double x);

// Radius where psi's W-branch hands over to the linear-log branch.
double branch_point(const RegularizerParams& p);  // = exp(S^2/4 - Q)/2

double psi(double x, const RegularizerParams& p);
double psi_prime(double x, const RegularizerParams& p);
// Second derivative; undefined at x = 0 and |x| = branch_point (jump).
double psi_second(double x, const RegularizerParams& p);

double psi_star(double theta, const RegularizerParams& p);
double psi_star_prime(double theta, const RegularizerParams& p);

// Gradient of the radial lift's conjugate: beta(theta) * psi*(|theta|) with
// beta = theta/(2S^2) inside |theta| <= S^2 and theta/(2|theta|) outside.
// This is the map from dual state to (centered) iterate.
std::vector<double> grad_phi_star(std::span<const double> theta, const RegularizerParams& p);

// Branch-forced evaluators, exposed so tests can measure continuity at the
// handover points instead of trusting the dispatch in psi()/psi_star().
double psi_w_branch(double x, const RegularizerParams& p);        // 0 < |x| <= x0 formula
double psi_loglinear_branch(double x, const RegularizerParams& p);  // |x| >= x0 formula
double psi_prime_w_branch(double x, const RegularizerParams& p);
double psi_prime_loglinear_branch(double x, const RegularizerParams& p);
double psi_star_quad_branch(double theta, const RegularizerParams& p);  // |theta| <= S^2
double psi_star_exp_branch(double theta, const RegularizerParams& p);   // |theta| >= S^2

}  // namespace cohere
