#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "cohere/rng.hpp"
#include "cohere/vec.hpp"

// Benchmark objectives. All three have optimum value 0 at x_star, a known
// sup-norm gradient budget, and a closed-form gradient. Noise is uniform on
// the sigma-ball (zero mean, ||xi|| <= sigma almost surely), so the oracle
// norm budget G = grad_sup + sigma is hard, not just in expectation.

namespace cohere {

enum class ProblemKind { convex, variationally_coherent };

struct Problem {
  std::string name;
  int dim = 1;
  Vec x_star;
  double optimum = 0.0;   // F(x_star)
  double grad_sup = 1.0;  // sup_x ||grad F(x)||
  ProblemKind kind = ProblemKind::convex;
  std::function<double(std::span<const double>)> value;
  std::function<Vec(std::span<const double>)> grad;
};

struct NoiseModel {
  double sigma = 0.0;
};

// Registry: "pseudo_huber" (convex, grad_sup < 1), "log_coherent"
// (non-convex but variationally coherent, grad_sup = 1), "smoothed_linear"
// (piecewise huber per coordinate, grad_sup = sqrt(dim)).
Problem make_problem(std::string_view name, int dim, Vec x_star);
std::vector<std::string> problem_names();

inline double gradient_budget(const Problem& p, const NoiseModel& n) {
  return p.grad_sup + n.sigma;
}

// grad F(x) + uniform-ball noise; exact gradient when sigma == 0.
Vec sample_gradient(const Problem& p, const NoiseModel& n, std::span<const double> x,
                    CounterRng& rng);

}  // namespace cohere
