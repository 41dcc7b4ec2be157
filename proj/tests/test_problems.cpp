#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "cohere/problems.hpp"
#include "oracles.hpp"

using namespace cohere;

namespace {

// Random point with coordinates in [-hw, hw], nudged off the huber kinks so
// central differences stay on one smooth piece.
Vec random_point(CounterRng& rng, const Vec& x_star, double hw) {
  Vec x(x_star.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = (rng.next_double() - 0.5) * 2.0 * hw;
    const double z = x[i] - x_star[i];
    if (std::abs(std::abs(z) - 1.0) < 1e-4) x[i] += 3e-4;
  }
  return x;
}

Vec fd_gradient(const Problem& p, const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (p.value(xp) - p.value(xm)) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("frozen objective/gradient values") {
  const auto ph = make_problem("pseudo_huber", 1, {0.0});
  CHECK(ph.value(Vec{0.0}) == 0.0);
  CHECK(ph.value(Vec{1.0}) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-15));
  CHECK(ph.grad(Vec{1.0})[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(ph.optimum == 0.0);

  const auto lc = make_problem("log_coherent", 1, {0.0});
  CHECK(lc.value(Vec{3.0}) == doctest::Approx(std::log(10.0)).epsilon(1e-15));
  CHECK(lc.grad(Vec{3.0})[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(lc.kind == ProblemKind::variationally_coherent);

  const auto sl = make_problem("smoothed_linear", 2, {0.0, 0.0});
  CHECK(sl.value(Vec{0.5, 2.0}) == doctest::Approx(0.125 + 1.5).epsilon(1e-15));
  const auto g = sl.grad(Vec{0.5, 2.0});
  CHECK(g[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sl.grad_sup == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("gradients match finite differences at random points") {
  CounterRng rng("fd", 0, 0);
  for (const auto& name : problem_names()) {
    Vec xs{0.3, -1.2, 0.7};
    const auto p = make_problem(name, 3, xs);
    for (int i = 0; i < 100; ++i) {
      const Vec x = random_point(rng, xs, 5.0);
      const Vec g = p.grad(x);
      const Vec fg = fd_gradient(p, x);
      for (std::size_t k = 0; k < 3; ++k)
        CHECK(g[k] == doctest::Approx(fg[k]).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("variational coherence and minimizer identification") {
  CounterRng rng("vc", 1, 0);
  for (const auto& name : problem_names()) {
    Vec xs{1.0, -2.0};
    const auto p = make_problem(name, 2, xs);
    CHECK(p.value(xs) == p.optimum);
    for (double v : p.grad(xs)) CHECK(v == 0.0);
    for (int i = 0; i < 2000; ++i) {
      const Vec x = random_point(rng, xs, 20.0);
      const Vec g = p.grad(x);
      double inner = 0.0;
      for (std::size_t k = 0; k < 2; ++k) inner += g[k] * (x[k] - xs[k]);
      const double d = dist(x, xs);
      if (d > 1e-9) CHECK(inner > 0.0);
      CHECK(p.value(x) >= p.optimum);
    }
  }
}

TEST_CASE("gradient norms respect the declared supremum") {
  CounterRng rng("sup", 2, 0);
  for (const auto& name : problem_names()) {
    Vec xs{0.0, 0.0, 0.0, 0.0};
    const auto p = make_problem(name, 4, xs);
    double seen = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const Vec x = random_point(rng, xs, 50.0);
      const double gn = norm(p.grad(x));
      seen = std::max(seen, gn);
      CHECK(gn <= p.grad_sup + 1e-12);
    }
    CHECK(seen > 0.5 * p.grad_sup);  // the budget is not vacuously loose
  }
}

TEST_CASE("sample_gradient: exact at sigma 0, bounded and unbiased otherwise") {
  const auto p = make_problem("pseudo_huber", 3, {0.0, 0.0, 0.0});
  const Vec x{0.4, -0.2, 1.0};
  CounterRng rng0("noise", 3, 1);
  const Vec exact = sample_gradient(p, {0.0}, x, rng0);
  CHECK(exact == p.grad(x));

  const NoiseModel nm{0.5};
  const double budget = gradient_budget(p, nm);
  CHECK(budget == doctest::Approx(1.5).epsilon(1e-16));

  const Vec base = p.grad(x);
  Vec mean(3, 0.0);
  double mean_sq = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    CounterRng rng("noise", 3, static_cast<std::uint64_t>(i + 2));
    const Vec g = sample_gradient(p, nm, x, rng);
    double n2 = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const double xi = g[k] - base[k];
      mean[k] += xi;
      n2 += xi * xi;
    }
    CHECK(n2 <= nm.sigma * nm.sigma * (1.0 + 1e-12));  // ball support
    CHECK(norm(g) <= budget + 1e-12);
    mean_sq += n2;
  }
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(std::abs(mean[k] / n) <= 3.0 * nm.sigma / std::sqrt(static_cast<double>(n)));
  // E||xi||^2 = sigma^2 d/(d+2) for the uniform ball
  CHECK(mean_sq / n == doctest::Approx(0.25 * 3.0 / 5.0).epsilon(5e-3));
}

TEST_CASE("sampling is reproducible per (experiment, seed, step) key") {
  const auto p = make_problem("log_coherent", 2, {1.0, 1.0});
  const Vec x{0.0, 3.0};
  CounterRng a("exp-a", 11, 7), b("exp-a", 11, 7), c("exp-a", 11, 8);
  const Vec ga = sample_gradient(p, {0.3}, x, a);
  const Vec gb = sample_gradient(p, {0.3}, x, b);
  const Vec gc = sample_gradient(p, {0.3}, x, c);
  CHECK(ga == gb);
  CHECK(ga != gc);
}

TEST_CASE("registry errors") {
  CHECK_THROWS_AS(make_problem("quadratic_bowl", 2, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_problem("pseudo_huber", 2, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_problem("pseudo_huber", 0, {}), std::invalid_argument);
  CHECK(problem_names().size() == 3);
}
