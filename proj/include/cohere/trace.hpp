#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "cohere/ftrl.hpp"
#include "cohere/problems.hpp"

// Full per-step recordings of a run, the raw material for the mechanical
// inequality checks. Records keep raw (uncentered) iterates; checkers
// translate into coordinates centered at x0, where all the identities live.

namespace cohere {

// Which Q update generated a trace. `printed` is the variant dividing by
// S_t instead of S_t^2 — a known-bad rule kept so the checkers have a
// detectable failure mode to demonstrate.
enum class QUpdateRule { reconciled, printed };

struct StepRecord {
  std::int64_t t = 0;  // 1-based round index
  Vec x;               // iterate played this round
  Vec g;               // stochastic gradient received at x
  double eta = 0.0;
  Vec ell;             // eta * g
  Vec theta;           // dual state after the round
  double S2 = 0.0;     // scale statistic after the round
  double Q = 0.0;      // mass statistic after the round
};

struct TraceWindow {
  Vec x0;
  std::optional<Vec> x_star;
  double G = 0.0;
  double alpha = 0.0;
  ScheduleKind schedule = ScheduleKind::power;
  QUpdateRule q_rule = QUpdateRule::reconciled;
  std::vector<StepRecord> steps;

  std::int64_t horizon() const { return static_cast<std::int64_t>(steps.size()); }
  // Regularizer parameters in force when round t (1-based) was played,
  // i.e. (S_{t-1}, Q_{t-1}).
  RegularizerParams params_before(std::int64_t t) const;
  Vec theta_before(std::int64_t t) const;  // theta_{t-1}
  // The iterate the dynamics would play after the last recorded round.
  Vec next_after_end() const;
};

// Minimal dynamics state shared by simulate(), replay_losses() and the
// experiment runner. advance_raw mirrors ftrl::step arithmetic exactly for
// the reconciled rule, so traces are bitwise comparable across modules.
struct RawState {
  Vec theta;
  double S2 = 4.0;
  double Q = 0.0;
};
void advance_raw(RawState& s, const Vec& ell, QUpdateRule q);
Vec iterate_of(const RawState& s, const Vec& x0);

// Run the optimizer against a problem, recording every step.
TraceWindow simulate(const Problem& p, const Schedule& sched, const NoiseModel& noise,
                     std::int64_t T, std::string_view experiment_id, std::uint64_t seed,
                     QUpdateRule q = QUpdateRule::reconciled);

// Drive the dynamics from a raw rescaled-loss stream (each ||ell|| <= 1),
// starting at x0 = 0 in the given dimension.
TraceWindow replay_losses(const std::vector<Vec>& ells,
                          QUpdateRule q = QUpdateRule::reconciled);

// Recompute every derived column from (x0, g, eta) under w.q_rule and compare
// with the stored values; throws std::invalid_argument on any mismatch.
void verify_consistency(const TraceWindow& w);

}  // namespace cohere
