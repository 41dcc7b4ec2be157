#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "cohere/checks.hpp"
#include "cohere/trace.hpp"
#include "oracles.hpp"

using namespace cohere;

namespace {

Problem std_problem(std::string_view name, int dim, double radius = 5.0) {
  Vec xs(dim, radius / std::sqrt(static_cast<double>(dim)));
  return make_problem(name, dim, xs);
}

TraceWindow run_trace(std::string_view pname, ScheduleKind kind, double sigma, double alpha,
                      std::int64_t T, std::uint64_t seed, int dim = 2,
                      QUpdateRule q = QUpdateRule::reconciled) {
  Problem prob = std_problem(pname, dim);
  NoiseModel noise{sigma};
  Schedule sched{kind, gradient_budget(prob, noise), alpha};
  return simulate(prob, sched, noise, T, "test_checks", seed, q);
}

}  // namespace

TEST_CASE("argmin_radial: frozen points and derivative self-consistency") {
  const RegularizerParams p{2.0, 0.0};
  CHECK(argmin_radial(0.0, p) == 0.0);
  // psi'(e/2) = 4 and psi'(10) = 2 ln 20 + 2 for S=2, Q=0.
  CHECK(argmin_radial(4.0, p) == doctest::Approx(std::exp(1.0) / 2.0).epsilon(1e-8));
  CHECK(argmin_radial(2.0 * std::log(20.0) + 2.0, p) == doctest::Approx(10.0).epsilon(1e-8));
  CHECK_THROWS_AS(argmin_radial(-1.0, p), std::domain_error);
  CHECK_THROWS_AS(argmin_radial(std::nan(""), p), std::domain_error);

  CounterRng rng("argmin_radial", 11, 0);
  for (int i = 0; i < 200; ++i) {
    const double s2 = 4.0 + 3.29 * rng.next_double();
    const RegularizerParams pp = RegularizerParams::from_s2(s2, rng.next_double() * std::log(s2));
    const double tn = std::pow(10.0, -3.0 + 4.5 * rng.next_double());
    const double r = argmin_radial(tn, pp);
    CHECK(std::abs(psi_prime(r, pp) - tn) <= 1e-9 * std::max(1.0, tn));
    const Vec theta{tn, 0.0, 0.0};
    const double via_grad = norm(grad_phi_star(theta, pp));
    CHECK(r == doctest::Approx(via_grad).epsilon(1e-6));
  }
}

TEST_CASE("key inequality: zero-loss trace gives exactly zero terms") {
  const std::vector<Vec> ells(10, Vec(3, 0.0));
  const auto w = replay_losses(ells);
  const auto rep = check_key_inequality(w);
  CHECK(rep.instances == 10);
  CHECK(rep.max_violation == 0.0);
  CHECK(rep.passed());
}

TEST_CASE("key inequality: clean runs pass across problems, schedules, noise") {
  for (const auto& pname : problem_names())
    for (auto kind : {ScheduleKind::power, ScheduleKind::adaptive})
      for (double sigma : {0.0, 0.5}) {
        const auto w = run_trace(pname, kind, sigma, 0.75, 250, 3);
        const auto rep = check_key_inequality(w);
        INFO(pname << " sigma=" << sigma << " worst: " << rep.worst_case);
        CHECK(rep.instances == 250);
        CHECK(rep.max_violation <= 1e-9);
        CHECK(rep.passed());
      }
}

TEST_CASE("key inequality: traces from the transcribed Q update are flagged") {
  // The S_t (instead of S_t^2) denominator produces iterates that are not
  // the argmins of the regularizer sequence the analysis prescribes; the
  // per-step terms go decisively positive well before t = 1000.
  const auto w = run_trace("pseudo_huber", ScheduleKind::power, 0.0, 0.6, 1000, 1, 2,
                           QUpdateRule::printed);
  const auto rep = check_key_inequality(w);
  CHECK_FALSE(rep.passed());
  CHECK(rep.max_violation == doctest::Approx(0.176051).epsilon(1e-3));
  CHECK(rep.worst_case.find("t=") != std::string::npos);

  for (const auto& pname : problem_names())
    for (auto kind : {ScheduleKind::power, ScheduleKind::adaptive}) {
      const auto wp = run_trace(pname, kind, 0.3, 0.75, 1000, 1, 2, QUpdateRule::printed);
      const auto rp = check_key_inequality(wp);
      INFO(pname << " worst: " << rp.worst_case);
      CHECK_FALSE(rp.passed());
      CHECK(rp.max_violation > 1e-3);
    }
}

TEST_CASE("key inequality: streaming conjugate term matches the primal form") {
  const auto w = run_trace("log_coherent", ScheduleKind::adaptive, 0.3, 0.75, 120, 5);
  const Vec x_end = w.next_after_end();
  for (std::int64_t t = 1; t <= w.horizon(); ++t) {
    const auto& rec = w.steps[static_cast<std::size_t>(t - 1)];
    const auto pt = w.params_before(t);
    const auto pn = w.params_before(t + 1);
    const Vec x_c = sub(rec.x, w.x0);
    const Vec& x_next = (t == w.horizon()) ? x_end : w.steps[static_cast<std::size_t>(t)].x;
    const Vec xn_c = sub(x_next, w.x0);
    const Vec th_prev = w.theta_before(t);
    const double primal = (psi(norm(x_c), pt) - dot(th_prev, x_c)) -
                          (psi(norm(xn_c), pn) - dot(rec.theta, xn_c)) + dot(rec.ell, x_c);
    const double conj = key_inequality_term(th_prev, rec.theta, x_c, rec.ell, pt, pn);
    CHECK(primal == doctest::Approx(conj).epsilon(1e-9));
    CHECK(conj <= 1e-9);
  }
}

TEST_CASE("regret identity: empty horizon is exactly zero") {
  const auto w = run_trace("pseudo_huber", ScheduleKind::power, 0.0, 0.75, 0, 1);
  const Vec u{0.7, -1.3};
  const auto rep = check_regret_identity(w, u);
  CHECK(rep.instances == 1);
  CHECK(rep.max_violation == 0.0);
}

TEST_CASE("regret identity: holds against named and random comparators") {
  CounterRng rng("regret_u", 2, 0);
  for (const auto& pname : problem_names())
    for (auto kind : {ScheduleKind::power, ScheduleKind::adaptive}) {
      const auto w = run_trace(pname, kind, 0.5, 0.75, 150, 9, 3);
      CheckReport all;
      all.tolerance = 1e-8;
      all.merge(check_regret_identity(w, *w.x_star));
      all.merge(check_regret_identity(w, Vec(3, 0.0)));
      for (int i = 0; i < 3; ++i) all.merge(check_regret_identity(w, rng.next_in_ball(3, 8.0)));
      INFO(pname << " worst: " << all.worst_case);
      CHECK(all.instances == 5);
      CHECK(all.passed());
    }
}

TEST_CASE("regret identity: also exact on transcribed-rule traces") {
  // Telescoping plus conjugacy at t = 1 only — an identity of the trace's own
  // regularizer sequence, so it holds under either Q update. This separates
  // it from the key inequality, which is a statement about the analysis
  // sequence and does fail on these traces.
  const auto w = run_trace("smoothed_linear", ScheduleKind::power, 0.3, 0.6, 100, 4, 2,
                           QUpdateRule::printed);
  const auto rep = check_regret_identity(w, *w.x_star);
  CHECK(rep.passed());
}

TEST_CASE("partial regret: window starts across the trace") {
  for (const auto& pname : problem_names()) {
    const auto w = run_trace(pname, ScheduleKind::power, 0.3, 0.75, 160, 2);
    CheckReport all;
    all.tolerance = 1e-9;
    for (std::int64_t A : {1, 2, 80, 159, 160}) all.merge(check_partial_regret(w, A));
    INFO(pname << " worst: " << all.worst_case);
    CHECK(all.instances == 5);
    CHECK(all.passed());
    CHECK_THROWS_AS(check_partial_regret(w, 0), std::invalid_argument);
    CHECK_THROWS_AS(check_partial_regret(w, 161), std::invalid_argument);
  }
}

TEST_CASE("difference of regularizers bound") {
  for (const auto& pname : problem_names()) {
    const auto w = run_trace(pname, ScheduleKind::adaptive, 0.3, 0.6, 160, 6);
    CheckReport all;
    all.tolerance = 1e-9;
    for (std::int64_t A : {1, 40, 160}) all.merge(check_diff_regularizers(w, A));
    INFO(pname << " worst: " << all.worst_case);
    CHECK(all.passed());
  }
}

TEST_CASE("sum_k: hand arithmetic at T=2 and a broad grid") {
  const auto rep = check_sum_k(2, 0.75);
  const double lhs = 0.5 * (1.0 + std::pow(2.0, -1.5));
  const double rhs = 0.5 + std::pow(2.0, -1.5) + 1.0 / std::exp(1.0);
  CHECK(rep.max_violation == doctest::Approx(lhs - rhs).epsilon(1e-14));
  CHECK(rep.passed());

  for (std::int64_t T : {2, 3, 4, 5, 8, 16, 64, 256, 1024, 2000})
    for (double alpha : {0.51, 0.55, 0.6, 0.75, 0.9, 0.99}) {
      const auto r = check_sum_k(T, alpha);
      INFO("T=" << T << " alpha=" << alpha << " " << r.worst_case);
      CHECK(r.passed());
    }
  CHECK_THROWS_AS(check_sum_k(1, 0.75), std::invalid_argument);
  CHECK_THROWS_AS(check_sum_k(10, 0.5), std::invalid_argument);
}

TEST_CASE("last average: equalities, frozen margin, random sequences, contract") {
  {
    const Vec e{0.75}, q{1.25};
    const auto rep = check_last_average(e, q);
    CHECK(rep.max_violation == 0.0);  // T = 1 reduces to lhs == rhs
  }
  {
    const Vec e(6, 0.5), q(6, 0.25);  // constant sequences: equality, exact in binary
    const auto rep = check_last_average(e, q);
    CHECK(rep.max_violation == 0.0);
  }
  {
    const Vec e{1.0, 0.5}, q{1.0, 1.0};
    const auto rep = check_last_average(e, q);
    CHECK(rep.max_violation == doctest::Approx(-0.25).epsilon(1e-15));
  }
  CounterRng rng("last_avg", 3, 0);
  for (int i = 0; i < 300; ++i) {
    const std::size_t T = 1 + static_cast<std::size_t>(rng.next_double() * 40);
    Vec e(T), q(T);
    for (auto& v : e) v = rng.next_double();
    std::sort(e.begin(), e.end(), std::greater<>());
    for (auto& v : q) v = 2.0 * rng.next_double();
    const auto rep = check_last_average(e, q);
    INFO("i=" << i << " " << rep.worst_case);
    CHECK(rep.passed());
  }
  CHECK_THROWS_AS(check_last_average(Vec{1.0}, Vec{1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(check_last_average(Vec{1.0, 2.0}, Vec{0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(check_last_average(Vec{1.0, 0.5}, Vec{0.5, -0.1}), std::invalid_argument);
}

TEST_CASE("bregman bounds: trivial, random, collinear, contract") {
  const RegularizerParams p{2.0, 0.5};
  {
    const Vec x{1.0, -2.0, 0.5};
    const auto rep = check_bregman_bounds(x, x, p);
    CHECK(rep.max_violation <= 0.0);
  }
  CounterRng rng("bregman", 8, 0);
  CheckReport all;
  all.tolerance = 1e-9;
  for (int i = 0; i < 2000; ++i) {
    const double S = 2.0 + 0.7 * rng.next_double();
    const RegularizerParams pp{S, 2.0 * std::log(S) * rng.next_double()};
    all.merge(check_bregman_bounds(rng.next_in_ball(3, 5.0), rng.next_in_ball(3, 5.0), pp));
  }
  INFO("worst: " << all.worst_case);
  CHECK(all.instances == 2000);
  CHECK(all.passed());

  CheckReport col;
  col.tolerance = 1e-9;
  for (int i = 0; i < 200; ++i) {
    const Vec a{10.0 * (rng.next_double() - 0.5)}, b{10.0 * (rng.next_double() - 0.5)};
    col.merge(check_bregman_bounds(a, b, p));
  }
  CHECK(col.passed());

  CHECK_THROWS_AS(check_bregman_bounds(Vec{1.0}, Vec{0.0}, RegularizerParams{0.9, 0.0}),
                  std::domain_error);
  CHECK_THROWS_AS(check_bregman_bounds(Vec{1.0, 2.0}, Vec{0.0}, p), std::invalid_argument);
}

TEST_CASE("iterate bound on recorded traces") {
  for (const auto& pname : problem_names())
    for (auto kind : {ScheduleKind::power, ScheduleKind::adaptive})
      for (double sigma : {0.0, 0.5}) {
        const auto w = run_trace(pname, kind, sigma, 0.75, 200, 12, 3);
        const auto rep = check_iterate_bound(w);
        INFO(pname << " sigma=" << sigma << " worst: " << rep.worst_case);
        CHECK(rep.instances == 200);
        CHECK(rep.passed());
      }
  const auto bare = replay_losses(std::vector<Vec>(4, Vec(2, 0.1)));
  CHECK_THROWS_AS(check_iterate_bound(bare), std::invalid_argument);
}

TEST_CASE("hessian sandwich: 1-D exact, random dim 3, outer sphere, domain errors") {
  const RegularizerParams p{2.0, 0.0};
  CHECK(check_hessian_sandwich(Vec{0.3}, p).passed());
  CHECK(check_hessian_sandwich(Vec{10.0}, p).passed());

  CounterRng rng("hessian", 21, 0);
  CheckReport all;
  all.tolerance = 1e-4;
  for (int i = 0; i < 100; ++i) {
    const RegularizerParams pp{1.5 + rng.next_double(), 0.5 * rng.next_double()};
    const double x0 = branch_point(pp);
    const double r = (i % 2 == 0) ? (0.05 + 0.75 * rng.next_double()) * x0
                                  : (1.3 + 1.7 * rng.next_double()) * x0;
    Vec z = rng.next_in_ball(3, 1.0);
    const double nz = norm(z);
    for (auto& c : z) c *= r / nz;
    all.merge(check_hessian_sandwich(z, pp));
  }
  INFO("worst: " << all.worst_case);
  CHECK(all.passed());

  // Outer branch, radius 10: envelope is [2/10, psi'(10)/10].
  Vec z10 = rng.next_in_ball(3, 1.0);
  const double n10 = norm(z10);
  for (auto& c : z10) c *= 10.0 / n10;
  CHECK(check_hessian_sandwich(z10, p).passed());

  CHECK_THROWS_AS(check_hessian_sandwich(Vec{0.0, 0.0}, p), std::domain_error);
  CHECK_THROWS_AS(check_hessian_sandwich(Vec{branch_point(p)}, p), std::domain_error);
  CHECK_THROWS_AS(check_hessian_sandwich(Vec{}, p), std::invalid_argument);
  CHECK_THROWS_AS(check_hessian_sandwich(Vec(17, 1.0), p), std::invalid_argument);
}

TEST_CASE("trace bounds on clean runs") {
  for (const auto& pname : problem_names())
    for (auto kind : {ScheduleKind::power, ScheduleKind::adaptive})
      for (double alpha : {0.6, 0.75}) {
        const auto w = run_trace(pname, kind, 0.5, alpha, 400, 17);
        const auto rep = check_trace_bounds(w);
        INFO(pname << " alpha=" << alpha << " worst: " << rep.worst_case);
        CHECK(rep.passed());
      }
  const auto bare = replay_losses(std::vector<Vec>(4, Vec(2, 0.1)));
  CHECK_THROWS_AS(check_trace_bounds(bare), std::invalid_argument);  // alpha unset
}

TEST_CASE("report mechanics: observe, merge, passed") {
  CheckReport r;
  CHECK(r.passed());  // vacuous
  r.tolerance = 1e-9;
  r.observe(-1.0, "a");
  r.observe(2.0, "b");
  r.observe(1.5, "c");
  CHECK(r.instances == 3);
  CHECK(r.max_violation == 2.0);
  CHECK(r.worst_case == "b");
  CHECK_FALSE(r.passed());

  CheckReport s;
  s.tolerance = 1e-8;
  s.observe(3.0, "d");
  r.merge(s);
  CHECK(r.instances == 4);
  CHECK(r.max_violation == 3.0);
  CHECK(r.worst_case == "d");
  CHECK(r.tolerance == 1e-8);
}
