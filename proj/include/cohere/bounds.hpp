#pragma once

#include <cstdint>

// Closed-form convergence-rate bounds evaluated for a run configuration.
// All three scale as T^{alpha-1}; alpha must lie in (1/2, 1) and G > 0 or a
// std::domain_error is thrown.

namespace cohere {

// Running-average gap bound: G/T^(1-a) * (1 + S*r*(2 ln(1+2r) + 9S)) with
// S = sqrt(5 + 1/(2a-1)); r is the distance ||x* - x0||.
double theorem2_bound(std::int64_t T, double alpha, double G, double r);

// Last-iterate gap bound:
// G/T^(1-a) * (2 + 1/(e(2a-1))) * (exp(S) + 3r + 6(S+2)(2 + S*r*(2 ln(1+2r) + 9S))).
double theorem3_bound(std::int64_t T, double alpha, double G, double r);

// Adaptive-schedule bound on E[(F(x_bar_T) - F*)^(1-a)] for L-smooth F with
// gradient-variance sigma^2; phi_inf_u is the regularizer limit psi(r, S_inf,
// ln S_inf^2) with S_inf = sqrt(4 + 1/(2a-1)), supplied by the caller.
double theoremF_bound(std::int64_t T, double alpha, double G, double sigma, double L,
                      double phi_inf_u);

}  // namespace cohere
