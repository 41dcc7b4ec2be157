#pragma once

#include <cstdint>
#include <span>

#include "cohere/regularizer.hpp"
#include "cohere/vec.hpp"

// FTRL with rescaled gradients. The state is the sufficient statistic of the
// whole history: anchor x0, dual accumulator theta = -sum of rescaled losses,
// the scale S^2 = 4 + sum ||l||^2, and the normalized mass Q = sum ||l||^2/S_i^2.
// Iterates are read out of the dual state through grad_phi_star; all internal
// math lives in coordinates centered at x0.

namespace cohere {

struct OptimizerState {
  Vec x0;
  Vec theta;        // same dimension as x0, starts at zero
  double S2 = 4.0;  // sum of squared rescaled losses, offset by the init 4
  double Q = 0.0;
  std::int64_t t = 0;  // completed steps
};

OptimizerState make_state(Vec x0);

inline RegularizerParams state_params(const OptimizerState& s) {
  return RegularizerParams::from_s2(s.S2, s.Q);
}

// x_{t+1} = x0 + grad phi*_{t+1}(theta_t); the argmin of the current
// regularized objective in closed form.
Vec next_iterate(const OptimizerState& s);

// One round: l = eta*g must satisfy ||l|| <= 1 (a tiny roundoff slack is
// tolerated); throws std::invalid_argument otherwise. Updates S^2, Q, theta, t.
OptimizerState step(const OptimizerState& s, std::span<const double> g, double eta);

enum class ScheduleKind { power, adaptive };

struct Schedule {
  ScheduleKind kind = ScheduleKind::power;
  double G = 1.0;      // gradient-norm budget; ||g_t|| <= G
  double alpha = 0.75; // exponent, must lie in (1/2, 1)
};

// Learning rate for round t (1-based). The power schedule is 1/(G t^alpha);
// the adaptive one is G^(2a-1)/(2G^2 + sum_{i<t} ||g_i||^2)^a and reads the
// first t-1 entries of grad_norm_history.
double lr(const Schedule& sched, std::int64_t t,
          std::span<const double> grad_norm_history = {});
// Streaming form of the same rate: sumsq_prev = sum_{i<t} ||g_i||^2.
double lr_from_sumsq(const Schedule& sched, std::int64_t t, double sumsq_prev);

// ---- generic engine (pluggable regularizer) ---------------------------

// A time-varying regularizer phi_t presented through the three calls the
// engine needs. advance() moves phi_t to phi_{t+1} after seeing l_t.
class GenericRegularizer {
 public:
  virtual ~GenericRegularizer() = default;
  virtual double value(std::span<const double> x) const = 0;           // phi_t(x), centered x
  virtual Vec conjugate_grad(std::span<const double> theta) const = 0; // grad phi*_t(theta)
  virtual void advance(std::span<const double> ell) = 0;
};

// The radial lift of psi with the running (S^2, Q) statistics. Its engine
// trace is arithmetically identical to step()/next_iterate().
class LinearithmicRegularizer final : public GenericRegularizer {
 public:
  double value(std::span<const double> x) const override;
  Vec conjugate_grad(std::span<const double> theta) const override;
  void advance(std::span<const double> ell) override;
  double s2() const { return s2_; }
  double q() const { return q_; }

 private:
  double s2_ = 4.0;
  double q_ = 0.0;
};

// phi_t(x) = ||x||^2 / 2 for all t; the engine then reproduces plain SGD.
class QuadraticRegularizer final : public GenericRegularizer {
 public:
  double value(std::span<const double> x) const override;
  Vec conjugate_grad(std::span<const double> theta) const override;
  void advance(std::span<const double> ell) override {}
};

struct GenericStepResult {
  Vec iterate;  // x_t = x0 + grad phi*_t(theta_{t-1}), played this round
  Vec theta;    // theta_t = theta_{t-1} - eta*g
};

GenericStepResult ftrl_generic_step(GenericRegularizer& reg, std::span<const double> x0,
                                    std::span<const double> theta,
                                    std::span<const double> g, double eta);

}  // namespace cohere
