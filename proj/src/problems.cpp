#include "cohere/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace cohere {

namespace {

Vec centered(std::span<const double> x, const Vec& x_star) {
  if (x.size() != x_star.size()) throw std::invalid_argument("point dimension mismatch");
  Vec z(x.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] - x_star[i];
  return z;
}

double huber(double z) {
  const double az = std::abs(z);
  return az <= 1.0 ? 0.5 * z * z : az - 0.5;
}

}  // namespace

Problem make_problem(std::string_view name, int dim, Vec x_star) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (std::cmp_not_equal(x_star.size(), dim))
    throw std::invalid_argument("x_star size must equal dim");

  Problem p;
  p.name = std::string(name);
  p.dim = dim;
  p.x_star = std::move(x_star);
  const Vec xs = p.x_star;  // captured by value in the closures

  if (name == "pseudo_huber") {
    // F(x) = sqrt(1 + ||x - x*||^2) - 1; convex, ||grad F|| < 1 everywhere.
    p.grad_sup = 1.0;
    p.kind = ProblemKind::convex;
    p.value = [xs](std::span<const double> x) {
      return std::sqrt(1.0 + norm2(centered(x, xs))) - 1.0;
    };
    p.grad = [xs](std::span<const double> x) {
      Vec z = centered(x, xs);
      const double c = 1.0 / std::sqrt(1.0 + norm2(z));
      for (auto& v : z) v *= c;
      return z;
    };
  } else if (name == "log_coherent") {
    // F(x) = ln(1 + ||x - x*||^2); non-convex, variationally coherent:
    // <grad F(x), x - x*> = 2||x-x*||^2/(1+||x-x*||^2) > 0 for x != x*.
    p.grad_sup = 1.0;  // max of 2r/(1+r^2) at r = 1
    p.kind = ProblemKind::variationally_coherent;
    p.value = [xs](std::span<const double> x) { return std::log1p(norm2(centered(x, xs))); };
    p.grad = [xs](std::span<const double> x) {
      Vec z = centered(x, xs);
      const double c = 2.0 / (1.0 + norm2(z));
      for (auto& v : z) v *= c;
      return z;
    };
  } else if (name == "smoothed_linear") {
    // F(x) = sum_i huber(x_i - x*_i), unit slope with curvature knee at 1.
    p.grad_sup = std::sqrt(static_cast<double>(dim));
    p.kind = ProblemKind::convex;
    p.value = [xs](std::span<const double> x) {
      const Vec z = centered(x, xs);
      double s = 0.0;
      for (double v : z) s += huber(v);
      return s;
    };
    p.grad = [xs](std::span<const double> x) {
      Vec z = centered(x, xs);
      for (auto& v : z) v = std::clamp(v, -1.0, 1.0);
      return z;
    };
  } else {
    throw std::invalid_argument("unknown problem '" + std::string(name) +
                                "'; expected one of pseudo_huber, log_coherent, "
                                "smoothed_linear");
  }
  p.optimum = 0.0;
  return p;
}

std::vector<std::string> problem_names() {
  return {"pseudo_huber", "log_coherent", "smoothed_linear"};
}

Vec sample_gradient(const Problem& p, const NoiseModel& n, std::span<const double> x,
                    CounterRng& rng) {
  if (!(n.sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  Vec g = p.grad(x);
  if (n.sigma > 0.0) {
    const Vec xi = rng.next_in_ball(p.dim, n.sigma);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += xi[i];
  }
  return g;
}

}  // namespace cohere
