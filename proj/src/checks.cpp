#include "cohere/checks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cohere {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Vec centered(std::span<const double> x, const Vec& x0) {
  Vec z(x.begin(), x.end());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] -= x0[i];
  return z;
}

// H_t evaluated at a raw point: psi(||x - x0||, p) - <theta_prev, x - x0>.
double hat_value(std::span<const double> x_raw, const Vec& x0, const Vec& theta_prev,
                 const RegularizerParams& p) {
  const Vec z = centered(x_raw, x0);
  return psi(norm(z), p) - dot(theta_prev, z);
}

// Bregman divergence of the radial lift: phi(a) - phi(b) - <grad phi(b), a-b>.
double bregman(std::span<const double> a, std::span<const double> b,
               const RegularizerParams& p) {
  const double nb = norm(b);
  double inner = 0.0;
  if (nb > 0.0) {
    const double slope = psi_prime(nb, p) / nb;
    for (std::size_t i = 0; i < a.size(); ++i) inner += slope * b[i] * (a[i] - b[i]);
  }
  return psi(norm(a), p) - psi(nb, p) - inner;
}

// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> m) {
  const std::size_t n = m.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += m[i][j] * m[i][j];
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(m[p][q]) < 1e-300) continue;
        const double theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q];
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = m[k][p], mkq = m[k][q];
          m[k][p] = c * mkp - s * mkq;
          m[k][q] = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = m[p][k], mqk = m[q][k];
          m[p][k] = c * mpk - s * mqk;
          m[q][k] = s * mpk + c * mqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = m[i][i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

// (S_{t-1}^2, Q_{t-1}) and (S_t^2, Q_t) recomputed from the loss stream via
// the analysis relations, independent of the trace's stored Q column.
struct AnalysisParams {
  std::vector<double> s2;  // s2[t] = S_t^2, t = 0..T
  std::vector<double> q;   // q[t]  = Q_t
};

AnalysisParams analysis_params(const TraceWindow& w) {
  AnalysisParams a;
  const std::size_t T = w.steps.size();
  a.s2.resize(T + 1);
  a.q.resize(T + 1);
  a.s2[0] = 4.0;
  a.q[0] = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    const double l2 = norm2(w.steps[t - 1].ell);
    a.s2[t] = a.s2[t - 1] + l2;
    a.q[t] = a.q[t - 1] + l2 / a.s2[t];
  }
  return a;
}

}  // namespace

void CheckReport::observe(double violation, std::string payload) {
  ++instances;
  if (violation > max_violation) {
    max_violation = violation;
    worst_case = std::move(payload);
  }
}

void CheckReport::merge(const CheckReport& other) {
  instances += other.instances;
  tolerance = std::max(tolerance, other.tolerance);
  if (other.max_violation > max_violation) {
    max_violation = other.max_violation;
    worst_case = other.worst_case;
  }
}

double key_inequality_term(const Vec& theta_prev, const Vec& theta_next,
                           const Vec& x_centered, const Vec& ell,
                           const RegularizerParams& p_t,
                           const RegularizerParams& p_next) {
  return -psi_star(norm(theta_prev), p_t) + psi_star(norm(theta_next), p_next) +
         dot(ell, x_centered);
}

double argmin_radial(double theta_norm, const RegularizerParams& p) {
  if (!std::isfinite(theta_norm) || theta_norm < 0.0)
    throw std::domain_error("theta_norm must be finite and nonnegative");
  if (theta_norm == 0.0) return 0.0;
  double hi = std::max(1.0, branch_point(p));
  while (psi_prime(hi, p) < theta_norm) hi *= 2.0;
  double lo = 0.0;
  const double resid_tol = 1e-10 * std::max(1.0, theta_norm);
  double mid = 0.5 * hi;
  for (int i = 0; i < 200; ++i) {
    mid = 0.5 * (lo + hi);
    const double d = psi_prime(mid, p) - theta_norm;
    if (std::abs(d) <= resid_tol) break;
    (d < 0.0 ? lo : hi) = mid;
  }
  return mid;
}

CheckReport check_key_inequality(const TraceWindow& w, double tol) {
  verify_consistency(w);
  CheckReport rep{.name = "key_inequality", .tolerance = tol};
  const std::int64_t T = w.horizon();
  if (T == 0) return rep;
  const AnalysisParams a = analysis_params(w);
  const Vec x_end = w.next_after_end();
  for (std::int64_t t = 1; t <= T; ++t) {
    const auto& rec = w.steps[static_cast<std::size_t>(t - 1)];
    const auto pt = RegularizerParams::from_s2(a.s2[static_cast<std::size_t>(t - 1)],
                                               a.q[static_cast<std::size_t>(t - 1)]);
    const auto pn = RegularizerParams::from_s2(a.s2[static_cast<std::size_t>(t)],
                                               a.q[static_cast<std::size_t>(t)]);
    const Vec& x_next = (t == T) ? x_end : w.steps[static_cast<std::size_t>(t)].x;
    const double v = hat_value(rec.x, w.x0, w.theta_before(t), pt) -
                     hat_value(x_next, w.x0, rec.theta, pn) +
                     dot(rec.ell, centered(rec.x, w.x0));
    rep.observe(v, "t=" + std::to_string(t) + " term=" + fmt(v));
  }
  return rep;
}

CheckReport check_regret_identity(const TraceWindow& w, std::span<const double> u,
                                  double tol) {
  verify_consistency(w);
  if (u.size() != w.x0.size()) throw std::invalid_argument("comparator dimension mismatch");
  CheckReport rep{.name = "regret_identity", .tolerance = tol};
  const std::int64_t T = w.horizon();
  const Vec u_c = centered(u, w.x0);
  const Vec x_end = w.next_after_end();
  const auto p_end = w.params_before(T + 1);
  const Vec theta_T = w.theta_before(T + 1);

  double lhs = 0.0, brackets = 0.0;
  for (std::int64_t t = 1; t <= T; ++t) {
    const auto& rec = w.steps[static_cast<std::size_t>(t - 1)];
    const Vec x_c = centered(rec.x, w.x0);
    lhs += dot(rec.ell, x_c) - dot(rec.ell, u_c);
    const Vec& x_next = (t == T) ? x_end : w.steps[static_cast<std::size_t>(t)].x;
    brackets += hat_value(rec.x, w.x0, w.theta_before(t), w.params_before(t)) -
                hat_value(x_next, w.x0, rec.theta, w.params_before(t + 1)) +
                dot(rec.ell, x_c);
  }
  const double min_phi1 = psi(0.0, w.params_before(1));
  const double rhs = psi(norm(u_c), p_end) - min_phi1 +
                     hat_value(x_end, w.x0, theta_T, p_end) -
                     (psi(norm(u_c), p_end) - dot(theta_T, u_c)) + brackets;
  const double scale = 1.0 + std::abs(rhs);
  rep.observe(std::abs(lhs - rhs) / scale,
              "lhs=" + fmt(lhs) + " rhs=" + fmt(rhs) + " T=" + std::to_string(T));
  return rep;
}

CheckReport check_partial_regret(const TraceWindow& w, std::int64_t A, double tol) {
  verify_consistency(w);
  const std::int64_t T = w.horizon();
  if (A < 1 || A > T) throw std::invalid_argument("window start A out of range");
  CheckReport rep{.name = "partial_regret", .tolerance = tol};
  const Vec& xA = w.steps[static_cast<std::size_t>(A - 1)].x;
  const Vec xA_c = centered(xA, w.x0);
  double lhs = 0.0;
  for (std::int64_t t = A; t <= T; ++t) {
    const auto& rec = w.steps[static_cast<std::size_t>(t - 1)];
    lhs += dot(rec.ell, sub(rec.x, xA));
  }
  const double rhs =
      psi(norm(xA_c), w.params_before(T + 1)) - psi(norm(xA_c), w.params_before(A));
  rep.observe(lhs - rhs,
              "A=" + std::to_string(A) + " lhs=" + fmt(lhs) + " rhs=" + fmt(rhs));
  return rep;
}

CheckReport check_diff_regularizers(const TraceWindow& w, std::int64_t A, double tol) {
  verify_consistency(w);
  const std::int64_t T = w.horizon();
  if (A < 1 || A > T) throw std::invalid_argument("window start A out of range");
  CheckReport rep{.name = "diff_regularizers", .tolerance = tol};
  const Vec xA_c = centered(w.steps[static_cast<std::size_t>(A - 1)].x, w.x0);
  const auto pT = w.params_before(T + 1);
  const auto pA = w.params_before(A);
  const double lhs = psi(norm(xA_c), pT) - psi(norm(xA_c), pA);
  const double cap = std::max(branch_point(pT), norm(xA_c));
  const double rhs = cap * (pT.S * pT.S - pA.S * pA.S);
  rep.observe(lhs - rhs,
              "A=" + std::to_string(A) + " lhs=" + fmt(lhs) + " rhs=" + fmt(rhs));
  return rep;
}

CheckReport check_sum_k(std::int64_t T, double alpha, double tol) {
  if (T < 2) throw std::invalid_argument("T must be >= 2");
  if (!(alpha > 0.5) || !(alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (1/2, 1)");
  CheckReport rep{.name = "sum_k", .tolerance = tol};
  // suffix[j] = sum_{t=j}^{T} t^{-2a}
  std::vector<double> suffix(static_cast<std::size_t>(T) + 2, 0.0);
  for (std::int64_t t = T; t >= 1; --t)
    suffix[static_cast<std::size_t>(t)] = suffix[static_cast<std::size_t>(t) + 1] +
                                          std::pow(static_cast<double>(t), -2.0 * alpha);
  double lhs = 0.0;
  for (std::int64_t k = 1; k <= T - 1; ++k)
    lhs += suffix[static_cast<std::size_t>(T - k)] /
           (static_cast<double>(k) * static_cast<double>(k + 1));
  const double rhs = 1.0 / static_cast<double>(T) +
                     std::pow(static_cast<double>(T), -2.0 * alpha) +
                     1.0 / (std::exp(1.0) * (2.0 * alpha - 1.0) * static_cast<double>(T));
  rep.observe(lhs - rhs, "T=" + std::to_string(T) + " alpha=" + fmt(alpha) +
                             " lhs=" + fmt(lhs) + " rhs=" + fmt(rhs));
  return rep;
}

CheckReport check_last_average(std::span<const double> etas, std::span<const double> qs,
                               double tol) {
  const std::size_t T = etas.size();
  if (T == 0 || qs.size() != T) throw std::invalid_argument("need equal nonempty sequences");
  for (std::size_t i = 0; i < T; ++i) {
    if (!(etas[i] >= 0.0) || !std::isfinite(etas[i]))
      throw std::invalid_argument("etas must be nonnegative");
    if (i > 0 && etas[i] > etas[i - 1] * (1.0 + 1e-15))
      throw std::invalid_argument("etas must be nonincreasing");
    if (!(qs[i] >= 0.0) || !std::isfinite(qs[i]))
      throw std::invalid_argument("qs must be nonnegative");
  }
  CheckReport rep{.name = "last_average", .tolerance = tol};
  // suffix sums of eta*q and eta over t = j..T (1-based j)
  std::vector<double> seq(T + 2, 0.0), se(T + 2, 0.0);
  for (std::size_t j = T; j >= 1; --j) {
    seq[j] = seq[j + 1] + etas[j - 1] * qs[j - 1];
    se[j] = se[j + 1] + etas[j - 1];
  }
  double rhs = seq[1] / static_cast<double>(T);
  for (std::size_t k = 1; k + 1 <= T; ++k) {
    const std::size_t j = T - k;  // window start T-k (1-based)
    rhs += (seq[j] - qs[j - 1] * se[j]) / (static_cast<double>(k) * static_cast<double>(k + 1));
  }
  const double lhs = etas[T - 1] * qs[T - 1];
  rep.observe(lhs - rhs, "T=" + std::to_string(T) + " lhs=" + fmt(lhs) + " rhs=" + fmt(rhs));
  return rep;
}

CheckReport check_bregman_bounds(std::span<const double> x_star, std::span<const double> x,
                                 const RegularizerParams& p, double tol) {
  if (x_star.size() != x.size()) throw std::invalid_argument("point dimension mismatch");
  if (p.S < 1.0) throw std::domain_error("bounds require S >= 1");
  CheckReport rep{.name = "bregman_bounds", .tolerance = tol};
  const double B = bregman(x_star, x, p);
  const double d2 = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x_star[i] - x[i];
      s += d * d;
    }
    return s;
  }();
  const double nmax = std::max(norm(x_star), norm(x));
  const double lower = d2 / (p.S + 2.0) * std::min(1.0, nmax > 0.0 ? 1.0 / nmax : kInf);
  const double upper = 2.0 * d2 * (p.S * p.S + p.Q) * std::exp(p.Q);
  const double v = std::max(lower - B, B - upper);
  rep.observe(v, "B=" + fmt(B) + " lower=" + fmt(lower) + " upper=" + fmt(upper));
  return rep;
}

CheckReport check_iterate_bound(const TraceWindow& w, double tol) {
  verify_consistency(w);
  if (!w.x_star) throw std::invalid_argument("trace has no x_star");
  CheckReport rep{.name = "iterate_bound", .tolerance = tol};
  const Vec xs_c = centered(*w.x_star, w.x0);
  const double ns = norm(xs_c);
  for (std::int64_t t = 1; t <= w.horizon(); ++t) {
    const Vec x_c = centered(w.steps[static_cast<std::size_t>(t - 1)].x, w.x0);
    const auto pt = w.params_before(t);
    const double B = bregman(xs_c, x_c, pt);
    const double s1 = pt.S + 2.0;
    const double bound =
        std::max({ns + std::sqrt(std::max(0.0, s1 * B)), 2.0 * ns, 4.0 * s1 * B});
    const double v = (norm(x_c) - bound) / (1.0 + bound);
    rep.observe(v, "t=" + std::to_string(t) + " |x|=" + fmt(norm(x_c)) +
                       " bound=" + fmt(bound));
  }
  return rep;
}

CheckReport check_hessian_sandwich(std::span<const double> z, const RegularizerParams& p,
                                   double fd_step, double rel_tol) {
  const std::size_t d = z.size();
  if (d == 0 || d > 16) throw std::invalid_argument("dimension must be in [1, 16]");
  const double r = norm(z);
  if (r == 0.0) throw std::domain_error("sandwich undefined at the origin");
  CheckReport rep{.name = "hessian_sandwich", .tolerance = rel_tol};

  const auto f = [&](const Vec& x) { return psi(norm(x), p); };
  std::vector<std::vector<double>> H(d, std::vector<double>(d, 0.0));
  Vec base(z.begin(), z.end());
  // Scale the step with the field magnitude: the stencil divides rounding
  // noise of size eps*|psi| by h^2, so h must grow like sqrt(|psi|) once the
  // value leaves O(1) (outer branch at large radius) or the 1e-4 envelope
  // drowns in cancellation.
  const double h = fd_step * std::max(1.0, std::sqrt(std::abs(f(base))));
  for (std::size_t i = 0; i < d; ++i) {
    Vec xp = base, xm = base;
    xp[i] += h;
    xm[i] -= h;
    H[i][i] = (f(xp) - 2.0 * f(base) + f(xm)) / (h * h);
    for (std::size_t j = i + 1; j < d; ++j) {
      Vec a = base, b = base, c = base, e = base;
      a[i] += h; a[j] += h;
      b[i] += h; b[j] -= h;
      c[i] -= h; c[j] += h;
      e[i] -= h; e[j] -= h;
      H[i][j] = H[j][i] = (f(a) - f(b) - f(c) + f(e)) / (4.0 * h * h);
    }
  }
  const auto ev = symmetric_eigenvalues(std::move(H));
  const double lo_env = std::min(psi_second(r, p), psi_prime(r, p) / r);
  const double hi_env = std::max(psi_second(r, p), psi_prime(r, p) / r);
  const double scale = std::max({std::abs(lo_env), std::abs(hi_env), 1e-12});
  const double v = std::max(lo_env - ev.front(), ev.back() - hi_env) / scale;
  rep.observe(v, "r=" + fmt(r) + " eig=[" + fmt(ev.front()) + "," + fmt(ev.back()) +
                     "] env=[" + fmt(lo_env) + "," + fmt(hi_env) + "]");
  return rep;
}

CheckReport check_trace_bounds(const TraceWindow& w, double tol) {
  verify_consistency(w);
  if (!(w.alpha > 0.5) || !(w.alpha < 1.0))
    throw std::invalid_argument("trace alpha must lie in (1/2, 1)");
  CheckReport rep{.name = "trace_bounds", .tolerance = tol};
  const double cap2 = (w.schedule == ScheduleKind::power ? 5.0 : 4.0) +
                      1.0 / (2.0 * w.alpha - 1.0);
  double prev_s2 = 4.0, prev_q = 0.0;
  for (const auto& rec : w.steps) {
    rep.observe(prev_s2 - rec.S2, "t=" + std::to_string(rec.t) + " S2 decreased");
    rep.observe(prev_q - rec.Q, "t=" + std::to_string(rec.t) + " Q decreased");
    rep.observe(rec.Q - std::log(rec.S2),
                "t=" + std::to_string(rec.t) + " Q=" + fmt(rec.Q) +
                    " ln(S2)=" + fmt(std::log(rec.S2)));
    prev_s2 = rec.S2;
    prev_q = rec.Q;
  }
  if (!w.steps.empty()) {
    const double sT = std::sqrt(w.steps.back().S2);
    rep.observe(sT - std::sqrt(cap2), "S_T=" + fmt(sT) + " cap=" + fmt(std::sqrt(cap2)));
    if (w.schedule == ScheduleKind::power)
      rep.observe(w.steps.back().Q - std::log(cap2),
                  "Q_T=" + fmt(w.steps.back().Q) + " cap=" + fmt(std::log(cap2)));
  }
  return rep;
}

}  // namespace cohere
