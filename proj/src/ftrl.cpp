#include "cohere/ftrl.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace cohere {

namespace {

void require_finite_vec(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " must be finite");
}

void require_state(const OptimizerState& s) {
  if (s.x0.size() != s.theta.size())
    throw std::invalid_argument("state dimension mismatch between x0 and theta");
  if (!(s.S2 >= 4.0) || !std::isfinite(s.S2))
    throw std::invalid_argument("state S2 must be finite and >= 4");
  if (!(s.Q >= 0.0) || !std::isfinite(s.Q))
    throw std::invalid_argument("state Q must be finite and >= 0");
  if (s.t < 0) throw std::invalid_argument("state t must be >= 0");
}

void require_schedule(const Schedule& sched) {
  if (!(sched.G > 0.0) || !std::isfinite(sched.G))
    throw std::invalid_argument("schedule G must be finite and positive");
  if (!(sched.alpha > 0.5) || !(sched.alpha < 1.0))
    throw std::invalid_argument("schedule alpha must lie in (1/2, 1)");
}

// Roundoff slack on the ||l|| <= 1 contract: eta = 1/G with ||g|| = G lands
// exactly on the boundary and must not be rejected for a last-bit overshoot.
constexpr double kUnitSlack = 1e-12;

}  // namespace

OptimizerState make_state(Vec x0) {
  require_finite_vec(x0, "x0");
  OptimizerState s;
  s.theta.assign(x0.size(), 0.0);
  s.x0 = std::move(x0);
  return s;
}

Vec next_iterate(const OptimizerState& s) {
  require_state(s);
  Vec x = grad_phi_star(s.theta, state_params(s));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += s.x0[i];
  return x;
}

OptimizerState step(const OptimizerState& s, std::span<const double> g, double eta) {
  require_state(s);
  require_finite_vec(g, "g");
  if (g.size() != s.theta.size()) throw std::invalid_argument("gradient dimension mismatch");
  if (!std::isfinite(eta) || eta < 0.0)
    throw std::invalid_argument("eta must be finite and nonnegative");

  // Arithmetic mirrors LinearithmicRegularizer::advance() exactly so the
  // generic-engine trace is bit-for-bit identical to this one.
  OptimizerState out = s;
  Vec ell(g.begin(), g.end());
  for (auto& v : ell) v *= eta;
  const double l2 = norm2(ell);
  if (l2 > (1.0 + kUnitSlack) * (1.0 + kUnitSlack))
    throw std::invalid_argument("rescaled loss exceeds unit norm: contract violation");
  out.S2 = s.S2 + l2;
  out.Q = s.Q + l2 / out.S2;
  axpy(out.theta, -1.0, ell);
  out.t = s.t + 1;
  return out;
}

double lr(const Schedule& sched, std::int64_t t, std::span<const double> grad_norm_history) {
  if (sched.kind == ScheduleKind::power) {
    require_schedule(sched);
    if (t < 1) throw std::invalid_argument("t must be >= 1");
    return 1.0 / (sched.G * std::pow(static_cast<double>(t), sched.alpha));
  }
  if (t >= 1 && std::cmp_less(grad_norm_history.size(), t - 1))
    throw std::invalid_argument("adaptive schedule needs ||g_i|| for all i < t");
  double sumsq = 0.0;
  for (std::int64_t i = 0; i < t - 1; ++i) {
    const double n = grad_norm_history[static_cast<std::size_t>(i)];
    if (!std::isfinite(n) || n < 0.0)
      throw std::invalid_argument("gradient norms must be finite and nonnegative");
    sumsq += n * n;
  }
  return lr_from_sumsq(sched, t, sumsq);
}

double lr_from_sumsq(const Schedule& sched, std::int64_t t, double sumsq_prev) {
  require_schedule(sched);
  if (t < 1) throw std::invalid_argument("t must be >= 1");
  if (!(sumsq_prev >= 0.0)) throw std::invalid_argument("sumsq_prev must be >= 0");
  if (sched.kind == ScheduleKind::power)
    return 1.0 / (sched.G * std::pow(static_cast<double>(t), sched.alpha));
  return std::pow(sched.G, 2.0 * sched.alpha - 1.0) /
         std::pow(2.0 * sched.G * sched.G + sumsq_prev, sched.alpha);
}

double LinearithmicRegularizer::value(std::span<const double> x) const {
  return psi(norm(x), RegularizerParams::from_s2(s2_, q_));
}

Vec LinearithmicRegularizer::conjugate_grad(std::span<const double> theta) const {
  return grad_phi_star(theta, RegularizerParams::from_s2(s2_, q_));
}

void LinearithmicRegularizer::advance(std::span<const double> ell) {
  require_finite_vec(ell, "ell");
  const double l2 = norm2(ell);
  if (l2 > (1.0 + kUnitSlack) * (1.0 + kUnitSlack))
    throw std::invalid_argument("rescaled loss exceeds unit norm: contract violation");
  s2_ = s2_ + l2;
  q_ = q_ + l2 / s2_;
}

double QuadraticRegularizer::value(std::span<const double> x) const { return 0.5 * norm2(x); }

Vec QuadraticRegularizer::conjugate_grad(std::span<const double> theta) const {
  return Vec(theta.begin(), theta.end());
}

GenericStepResult ftrl_generic_step(GenericRegularizer& reg, std::span<const double> x0,
                                    std::span<const double> theta,
                                    std::span<const double> g, double eta) {
  require_finite_vec(g, "g");
  if (x0.size() != theta.size() || g.size() != theta.size())
    throw std::invalid_argument("dimension mismatch");
  if (!std::isfinite(eta) || eta < 0.0)
    throw std::invalid_argument("eta must be finite and nonnegative");

  GenericStepResult r;
  r.iterate = reg.conjugate_grad(theta);
  for (std::size_t i = 0; i < r.iterate.size(); ++i) r.iterate[i] += x0[i];
  Vec ell(g.begin(), g.end());
  for (auto& v : ell) v *= eta;
  reg.advance(ell);
  r.theta.assign(theta.begin(), theta.end());
  axpy(r.theta, -1.0, ell);
  return r;
}

}  // namespace cohere
