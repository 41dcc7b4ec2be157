#include "cohere/trace.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cohere {

void advance_raw(RawState& s, const Vec& ell, QUpdateRule q) {
  const double l2 = norm2(ell);
  if (l2 > (1.0 + 1e-12) * (1.0 + 1e-12))
    throw std::invalid_argument("rescaled loss exceeds unit norm: contract violation");
  s.S2 = s.S2 + l2;
  s.Q = s.Q + (q == QUpdateRule::reconciled ? l2 / s.S2 : l2 / std::sqrt(s.S2));
  axpy(s.theta, -1.0, ell);
}

Vec iterate_of(const RawState& s, const Vec& x0) {
  Vec x = grad_phi_star(s.theta, RegularizerParams::from_s2(s.S2, s.Q));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += x0[i];
  return x;
}

RegularizerParams TraceWindow::params_before(std::int64_t t) const {
  if (t < 1 || t > horizon() + 1) throw std::out_of_range("round index out of range");
  if (t == 1) return RegularizerParams::from_s2(4.0, 0.0);
  const auto& r = steps[static_cast<std::size_t>(t - 2)];
  return RegularizerParams::from_s2(r.S2, r.Q);
}

Vec TraceWindow::theta_before(std::int64_t t) const {
  if (t < 1 || t > horizon() + 1) throw std::out_of_range("round index out of range");
  if (t == 1) return Vec(x0.size(), 0.0);
  return steps[static_cast<std::size_t>(t - 2)].theta;
}

Vec TraceWindow::next_after_end() const {
  RawState s;
  if (steps.empty()) {
    s.theta.assign(x0.size(), 0.0);
  } else {
    s.theta = steps.back().theta;
    s.S2 = steps.back().S2;
    s.Q = steps.back().Q;
  }
  return iterate_of(s, x0);
}

TraceWindow simulate(const Problem& p, const Schedule& sched, const NoiseModel& noise,
                     std::int64_t T, std::string_view experiment_id, std::uint64_t seed,
                     QUpdateRule q) {
  if (T < 0) throw std::invalid_argument("T must be >= 0");
  TraceWindow w;
  w.x0.assign(static_cast<std::size_t>(p.dim), 0.0);
  w.x_star = p.x_star;
  w.G = sched.G;
  w.alpha = sched.alpha;
  w.schedule = sched.kind;
  w.q_rule = q;
  w.steps.reserve(static_cast<std::size_t>(T));

  RawState s;
  s.theta.assign(static_cast<std::size_t>(p.dim), 0.0);
  double sumsq = 0.0;
  for (std::int64_t t = 1; t <= T; ++t) {
    StepRecord rec;
    rec.t = t;
    rec.x = iterate_of(s, w.x0);
    rec.eta = lr_from_sumsq(sched, t, sumsq);
    CounterRng rng(experiment_id, seed, static_cast<std::uint64_t>(t));
    rec.g = sample_gradient(p, noise, rec.x, rng);
    sumsq += norm2(rec.g);
    rec.ell = rec.g;
    for (auto& v : rec.ell) v *= rec.eta;
    advance_raw(s, rec.ell, q);
    rec.theta = s.theta;
    rec.S2 = s.S2;
    rec.Q = s.Q;
    w.steps.push_back(std::move(rec));
  }
  return w;
}

TraceWindow replay_losses(const std::vector<Vec>& ells, QUpdateRule q) {
  TraceWindow w;
  const std::size_t dim = ells.empty() ? 1 : ells.front().size();
  w.x0.assign(dim, 0.0);
  w.q_rule = q;
  RawState s;
  s.theta.assign(dim, 0.0);
  std::int64_t t = 0;
  for (const auto& ell : ells) {
    if (ell.size() != dim) throw std::invalid_argument("loss dimension mismatch");
    StepRecord rec;
    rec.t = ++t;
    rec.x = iterate_of(s, w.x0);
    rec.eta = 1.0;
    rec.g = ell;
    rec.ell = ell;
    advance_raw(s, rec.ell, q);
    rec.theta = s.theta;
    rec.S2 = s.S2;
    rec.Q = s.Q;
    w.steps.push_back(std::move(rec));
  }
  return w;
}

void verify_consistency(const TraceWindow& w) {
  RawState s;
  s.theta.assign(w.x0.size(), 0.0);
  std::int64_t t = 0;
  for (const auto& rec : w.steps) {
    ++t;
    if (rec.t != t) throw std::invalid_argument("trace rounds are not contiguous");
    const Vec x = iterate_of(s, w.x0);
    if (x != rec.x) throw std::invalid_argument("trace iterate mismatch at round " + std::to_string(t));
    Vec ell = rec.g;
    for (auto& v : ell) v *= rec.eta;
    if (ell != rec.ell) throw std::invalid_argument("trace loss mismatch at round " + std::to_string(t));
    advance_raw(s, ell, w.q_rule);
    if (s.theta != rec.theta || s.S2 != rec.S2 || s.Q != rec.Q)
      throw std::invalid_argument("trace state mismatch at round " + std::to_string(t));
  }
}

}  // namespace cohere
