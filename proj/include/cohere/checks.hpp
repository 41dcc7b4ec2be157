#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>

#include "cohere/regularizer.hpp"
#include "cohere/trace.hpp"

// Mechanical verification of the deterministic inequalities and identities
// behind the optimizer's analysis. Every checker returns a CheckReport with
// the *signed* worst violation (positive means the claim failed by that
// much after tolerance-free evaluation); callers compare against the
// report's tolerance. Checkers never clamp or repair: a failing claim
// surfaces as max_violation > tolerance with a payload describing the worst
// instance.

namespace cohere {

struct CheckReport {
  std::string name;
  std::int64_t instances = 0;
  double max_violation = -std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  std::string worst_case;

  bool passed() const { return instances == 0 || max_violation <= tolerance; }
  void observe(double violation, std::string payload);
  // Fold another report of the same kind into this one.
  void merge(const CheckReport& other);
};

// argmin_{r >= 0} psi(r, p) - theta_norm * r, by bisection on the monotone
// derivative; |psi'(r) - theta_norm| <= 1e-10 * max(1, theta_norm).
double argmin_radial(double theta_norm, const RegularizerParams& p);

// Conjugate-side value of one key-inequality term, for streaming use inside
// a run where x_t = x0 + grad phi*_t(theta_{t-1}) is already in hand:
//   -psi*(||theta_prev||, p_t) + psi*(||theta_next||, p_next) + <l_t, x_t - x0>.
// Equals the primal H-difference form whenever each iterate is the exact
// argmin of its H_t, i.e. on cleanly generated traces.
double key_inequality_term(const Vec& theta_prev, const Vec& theta_next,
                           const Vec& x_centered, const Vec& ell,
                           const RegularizerParams& p_t,
                           const RegularizerParams& p_next);

// Per-step inequality H_t(x_t) - H_{t+1}(x_{t+1}) + <l_t, x_t> <= 0 with
// H_t(x) = psi(||x - x0||, S_{t-1}, Q_{t-1}) - <theta_{t-1}, x - x0>.
// The (S, Q) parameters are recomputed from the recorded loss stream via the
// analysis relations (S_t^2 = S_{t-1}^2 + ||l||^2, Q_t = Q_{t-1} + ||l||^2/S_t^2),
// not read from the trace columns: for cleanly generated traces the two are
// identical, while a trace generated with the transcribed ÷S_t update is
// thereby checked against the regularizer sequence its analysis requires —
// which is exactly where that variant breaks.
CheckReport check_key_inequality(const TraceWindow& w, double tol = 1e-9);

// Exact FTRL regret decomposition against comparator u (raw coordinates):
// sum_t <l_t, x_t - u> = phi_{T+1}(u) - min phi_1 + H_{T+1}(x_{T+1})
//                        - H_{T+1}(u) + sum_t [H_t(x_t) - H_{t+1}(x_{t+1}) + <l_t, x_t>].
// Violation is the identity residual scaled by 1/(1 + |rhs|).
CheckReport check_regret_identity(const TraceWindow& w, std::span<const double> u,
                                  double tol = 1e-8);

// sum_{t=A}^T <l_t, x_t - x_A> <= phi_{T+1}(x_A) - phi_A(x_A), in centered
// coordinates; absolute slack.
CheckReport check_partial_regret(const TraceWindow& w, std::int64_t A, double tol = 1e-9);

// phi_{T+1}(x_A) - phi_A(x_A) <= max{exp(S_T^2/4 - Q_T)/2, ||x_A||} (S_T^2 - S_{A-1}^2).
CheckReport check_diff_regularizers(const TraceWindow& w, std::int64_t A, double tol = 1e-9);

// sum_{k=1}^{T-1} 1/(k(k+1)) sum_{t=T-k}^{T} t^{-2a}  <=  1/T + T^{-2a} + 1/(e(2a-1)T).
CheckReport check_sum_k(std::int64_t T, double alpha, double tol = 1e-12);

// eta_T q_T <= (1/T) sum_t eta_t q_t
//              + sum_{k=1}^{T-1} 1/(k(k+1)) sum_{t=T-k}^{T} eta_t (q_t - q_{T-k}),
// for nonincreasing positive etas and nonnegative qs.
CheckReport check_last_average(std::span<const double> etas, std::span<const double> qs,
                               double tol = 1e-10);

// Two-sided bound on B_phi(x_star, x) for phi(z) = psi(||z||, p), S >= 1:
//   ||x*-x||^2/(S+2) min{1, 1/max(||x*||,||x||)} <= B <= 2||x*-x||^2 (S^2+Q) e^Q.
CheckReport check_bregman_bounds(std::span<const double> x_star, std::span<const double> x,
                                 const RegularizerParams& p, double tol = 1e-9);

// ||x_t|| <= max{||x*|| + sqrt((S_{t-1}+2) B_t), 2||x*||, 4(S_{t-1}+2) B_t}
// at every recorded round (centered coordinates; needs w.x_star).
CheckReport check_iterate_bound(const TraceWindow& w, double tol = 1e-9);

// Finite-difference Hessian of z -> psi(||z||, p) has all eigenvalues inside
// [min, max] of {psi''(r), psi'(r)/r} at r = ||z||; relative tolerance on the
// scale of the analytic envelope.
// fd_step is the base step for unit-magnitude fields; internally it is
// scaled by sqrt(|psi|) so cancellation stays below the 1e-4 envelope when
// the value is large.
CheckReport check_hessian_sandwich(std::span<const double> z, const RegularizerParams& p,
                                   double fd_step = 1e-5, double rel_tol = 1e-4);

// Closed-form trace bounds: S_T <= sqrt(5 + 1/(2a-1)) and
// Q_T <= ln(5 + 1/(2a-1)) for the power schedule, S_T <= sqrt(4 + 1/(2a-1))
// for the adaptive one; plus Q_t <= ln(S_t^2) and monotonicity along the way.
CheckReport check_trace_bounds(const TraceWindow& w, double tol = 1e-12);

}  // namespace cohere
