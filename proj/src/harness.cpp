#include "cohere/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "cohere/sgd.hpp"

namespace cohere {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

bool record_at(std::int64_t t, std::int64_t stride, std::int64_t T) {
  if (t == T) return true;
  if (stride > 0) return t % stride == 0;
  return (t & (t - 1)) == 0;  // powers of two
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double stderr_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1)) /
         std::sqrt(static_cast<double>(v.size()));
}

struct Stat {
  std::vector<double> vals;
  double mean() const {
    double s = 0.0;
    for (double v : vals) s += v;
    return s / static_cast<double>(vals.size());
  }
};

}  // namespace

void validate(const ExperimentConfig& c) {
  const auto names = problem_names();
  if (std::find(names.begin(), names.end(), c.problem) == names.end())
    throw std::invalid_argument("unknown problem: " + c.problem);
  if (c.dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (!(c.r >= 0.0) || !std::isfinite(c.r)) throw std::invalid_argument("r must be >= 0");
  if (!(c.alpha > 0.5) || !(c.alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (1/2, 1)");
  if (!(c.sigma >= 0.0) || !std::isfinite(c.sigma))
    throw std::invalid_argument("sigma must be >= 0");
  if (c.T < 1) throw std::invalid_argument("T must be >= 1");
  if (c.seeds.empty()) throw std::invalid_argument("seeds must be nonempty");
  for (std::size_t i = 0; i < c.seeds.size(); ++i)
    for (std::size_t j = i + 1; j < c.seeds.size(); ++j)
      if (c.seeds[i] == c.seeds[j]) throw std::invalid_argument("seeds must be distinct");
  if (c.record_stride < 0) throw std::invalid_argument("record_stride must be >= 0");
  if (c.algo != "ftrl" && c.algo != "sgd")
    throw std::invalid_argument("algo must be ftrl or sgd");
}

std::string experiment_id(const ExperimentConfig& c) {
  std::string id = c.problem + "-d" + std::to_string(c.dim) + "-r" + fmt_short(c.r) +
                   (c.schedule == ScheduleKind::power ? "-pow" : "-ada") + "-a" +
                   fmt_short(c.alpha) + "-s" + fmt_short(c.sigma) + "-T" +
                   std::to_string(c.T);
  if (c.q_update == QUpdateRule::printed) id += "-qprinted";
  if (c.algo != "ftrl") id += "-" + c.algo;
  return id;
}

Problem config_problem(const ExperimentConfig& c) {
  Vec xs(static_cast<std::size_t>(c.dim),
         c.r / std::sqrt(static_cast<double>(c.dim)));
  return make_problem(c.problem, c.dim, std::move(xs));
}

Schedule config_schedule(const ExperimentConfig& c) {
  const Problem p = config_problem(c);
  return Schedule{c.schedule, gradient_budget(p, NoiseModel{c.sigma}), c.alpha};
}

RunOutput run_one(const ExperimentConfig& c, std::uint64_t seed) {
  validate(c);
  const Problem p = config_problem(c);
  const NoiseModel noise{c.sigma};
  const Schedule sched = config_schedule(c);
  const std::string id = c.id.empty() ? experiment_id(c) : c.id;
  const std::size_t d = static_cast<std::size_t>(c.dim);
  const bool ftrl = c.algo == "ftrl";

  RunOutput out;
  out.summary.id = id;
  out.summary.seed = seed;
  out.window.x0.assign(d, 0.0);
  out.window.x_star = p.x_star;
  out.window.G = sched.G;
  out.window.alpha = sched.alpha;
  out.window.schedule = sched.kind;
  out.window.q_rule = c.q_update;

  RawState s;
  s.theta.assign(d, 0.0);
  SgdState sgd{Vec(d, 0.0), 0};
  Vec xbar(d, 0.0);
  double sumsq = 0.0;
  std::int64_t violations = 0;

  // Inline key-inequality state: the (S^2, Q) pair the analysis prescribes
  // (always the /S_t^2 increment, independent of c.q_update) plus the
  // H_t(x_t) and <l_t, x_t> pieces of the previous round's term.
  double s2a = 4.0, qa = 0.0;
  double pending_H = 0.0, pending_dot = 0.0;
  bool have_pending = false;
  const double key_tol = 1e-9;

  const auto key_term = [&](std::int64_t t_prev, double H_next) {
    const double v = pending_H - H_next + pending_dot;
    if (v > key_tol)
      throw RunAbort("key inequality violated: experiment=" + id + " seed=" +
                     std::to_string(seed) + " t=" + std::to_string(t_prev) +
                     " term=" + fmt(v) + " tol=" + fmt(key_tol));
  };

  Vec x;
  for (std::int64_t t = 1; t <= c.T; ++t) {
    x = ftrl ? iterate_of(s, out.window.x0) : sgd.x;

    double H_here = 0.0;
    if (ftrl && c.checks_enabled) {
      H_here = psi(norm(x), RegularizerParams::from_s2(s2a, qa)) - dot(s.theta, x);
      if (have_pending) key_term(t - 1, H_here);
    }

    const double eta = lr_from_sumsq(sched, t, sumsq);
    CounterRng rng(id, seed, static_cast<std::uint64_t>(t));
    const Vec g = sample_gradient(p, noise, x, rng);
    sumsq += norm2(g);
    Vec ell = g;
    for (auto& v : ell) v *= eta;

    if (ftrl && c.checks_enabled) {
      pending_H = H_here;
      pending_dot = dot(ell, x);
      have_pending = true;
    }

    if (ftrl) {
      advance_raw(s, ell, c.q_update);
      const double l2 = norm2(ell);
      s2a += l2;
      qa += l2 / s2a;
      if (c.checks_enabled && s.Q > std::log(s.S2) + 1e-12) ++violations;
    } else {
      sgd = sgd_step(sgd, g, eta);
    }
    for (std::size_t i = 0; i < d; ++i)
      xbar[i] += (x[i] - xbar[i]) / static_cast<double>(t);

    if (record_at(t, c.record_stride, c.T)) {
      CsvRow row;
      row.t = t;
      row.eta = eta;
      row.f_gap_last = p.value(x) - p.optimum;
      row.f_gap_avg = p.value(xbar) - p.optimum;
      row.dist_to_opt = dist(x, p.x_star);
      row.S2 = ftrl ? s.S2 : 0.0;
      row.Q = ftrl ? s.Q : 0.0;
      row.theta_norm = ftrl ? norm(s.theta) : 0.0;
      row.check_violations = violations;
      out.rows.push_back(row);

      StepRecord rec;
      rec.t = t;
      rec.x = x;
      rec.g = g;
      rec.eta = eta;
      rec.ell = std::move(ell);
      rec.theta = s.theta;
      rec.S2 = s.S2;
      rec.Q = s.Q;
      out.window.steps.push_back(std::move(rec));
    }
  }

  if (ftrl && c.checks_enabled && have_pending) {
    const Vec x_end = iterate_of(s, out.window.x0);
    const double H_end =
        psi(norm(x_end), RegularizerParams::from_s2(s2a, qa)) - dot(s.theta, x_end);
    key_term(c.T, H_end);
  }
  if (ftrl && c.checks_enabled) {
    const double cap2 =
        (c.schedule == ScheduleKind::power ? 5.0 : 4.0) + 1.0 / (2.0 * c.alpha - 1.0);
    if (std::sqrt(s.S2) > std::sqrt(cap2) + 1e-12) ++violations;
    if (c.schedule == ScheduleKind::power && s.Q > std::log(cap2) + 1e-12) ++violations;
    if (!out.rows.empty()) out.rows.back().check_violations = violations;
  }

  out.summary.f_gap_last = p.value(x) - p.optimum;
  out.summary.f_gap_avg = p.value(xbar) - p.optimum;
  out.summary.dist_to_opt = dist(x, p.x_star);
  out.summary.S2_T = ftrl ? s.S2 : 0.0;
  out.summary.Q_T = ftrl ? s.Q : 0.0;
  out.summary.check_violations = violations;
  return out;
}

RunSummary aggregate(const std::vector<SeedSummary>& per_seed, const ExperimentConfig& c) {
  if (per_seed.empty()) throw std::invalid_argument("nothing to aggregate");
  RunSummary s;
  s.id = per_seed.front().id;
  for (const auto& ps : per_seed)
    if (ps.id != s.id)
      throw std::invalid_argument("heterogeneous summaries: " + ps.id + " vs " + s.id);
  s.per_seed = per_seed;

  Stat last, avg, dst;
  for (const auto& ps : per_seed) {
    last.vals.push_back(ps.f_gap_last);
    avg.vals.push_back(ps.f_gap_avg);
    dst.vals.push_back(ps.dist_to_opt);
    s.max_S2 = std::max(s.max_S2, ps.S2_T);
    s.max_Q = std::max(s.max_Q, ps.Q_T);
    s.check_violations += ps.check_violations;
  }
  s.mean_gap_last = last.mean();
  s.median_gap_last = median_of(last.vals);
  s.stderr_gap_last = stderr_of(last.vals, s.mean_gap_last);
  s.mean_gap_avg = avg.mean();
  s.median_gap_avg = median_of(avg.vals);
  s.stderr_gap_avg = stderr_of(avg.vals, s.mean_gap_avg);
  s.mean_dist = dst.mean();
  s.median_dist = median_of(dst.vals);
  s.stderr_dist = stderr_of(dst.vals, s.mean_dist);

  const double G = config_schedule(c).G;
  s.bound2 = theorem2_bound(c.T, c.alpha, G, c.r);
  s.bound3 = theorem3_bound(c.T, c.alpha, G, c.r);
  return s;
}

double rate_slope(const std::vector<std::pair<double, double>>& gaps) {
  if (gaps.size() < 3) throw std::invalid_argument("rate_slope needs >= 3 horizons");
  std::vector<std::pair<double, double>> pts;
  for (const auto& [T, gap] : gaps) {
    if (!(gap > 0.0) || !(T > 0.0)) {
      std::fprintf(stderr, "rate_slope: excluding nonpositive point (T=%g, gap=%g)\n", T,
                   gap);
      continue;
    }
    pts.emplace_back(std::log(T), std::log(gap));
  }
  if (pts.size() < 2) throw std::invalid_argument("rate_slope: fewer than 2 usable points");
  double mu = 0.0, mv = 0.0;
  for (const auto& [u, v] : pts) {
    mu += u;
    mv += v;
  }
  mu /= static_cast<double>(pts.size());
  mv /= static_cast<double>(pts.size());
  double num = 0.0, den = 0.0;
  for (const auto& [u, v] : pts) {
    num += (u - mu) * (v - mv);
    den += (u - mu) * (u - mu);
  }
  if (den == 0.0) throw std::invalid_argument("rate_slope: degenerate horizons");
  return num / den;
}

void write_csv(std::ostream& out, const std::vector<RunOutput>& runs) {
  out << "experiment_id,seed,t,eta,f_gap_last,f_gap_avg,dist_to_opt,S2,Q,theta_norm,"
         "check_violations\n";
  for (const auto& run : runs)
    for (const auto& r : run.rows)
      out << run.summary.id << ',' << run.summary.seed << ',' << r.t << ',' << fmt(r.eta)
          << ',' << fmt(r.f_gap_last) << ',' << fmt(r.f_gap_avg) << ','
          << fmt(r.dist_to_opt) << ',' << fmt(r.S2) << ',' << fmt(r.Q) << ','
          << fmt(r.theta_norm) << ',' << r.check_violations << '\n';
}

void write_summary(std::ostream& out, const RunSummary& s, const ExperimentConfig& c) {
  out << "experiment_id,seeds,T,mean_gap_last,median_gap_last,stderr_gap_last,"
         "mean_gap_avg,median_gap_avg,stderr_gap_avg,mean_dist,median_dist,stderr_dist,"
         "max_S2,max_Q,check_violations,theorem2_bound,theorem3_bound\n";
  out << s.id << ',' << s.per_seed.size() << ',' << c.T << ',' << fmt(s.mean_gap_last)
      << ',' << fmt(s.median_gap_last) << ',' << fmt(s.stderr_gap_last) << ','
      << fmt(s.mean_gap_avg) << ',' << fmt(s.median_gap_avg) << ','
      << fmt(s.stderr_gap_avg) << ',' << fmt(s.mean_dist) << ',' << fmt(s.median_dist)
      << ',' << fmt(s.stderr_dist) << ',' << fmt(s.max_S2) << ',' << fmt(s.max_Q) << ','
      << s.check_violations << ',' << fmt(s.bound2) << ',' << fmt(s.bound3) << '\n';
}

void write_svg_plot(std::ostream& out, const std::string& title,
                    const std::vector<PlotSeries>& series) {
  constexpr double W = 720, H = 480, L = 70, R = 20, Tm = 40, B = 50;
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (const auto& sr : series)
    for (const auto& [x, y] : sr.points) {
      if (!(x > 0.0) || !(y > 0.0)) continue;
      xlo = std::min(xlo, std::log10(x));
      xhi = std::max(xhi, std::log10(x));
      ylo = std::min(ylo, std::log10(y));
      yhi = std::max(yhi, std::log10(y));
    }
  if (xlo > xhi) {
    xlo = ylo = 0.0;
    xhi = yhi = 1.0;
  }
  if (xhi - xlo < 1e-9) xhi = xlo + 1.0;
  if (yhi - ylo < 1e-9) yhi = ylo + 1.0;
  const auto px = [&](double lx) { return L + (lx - xlo) / (xhi - xlo) * (W - L - R); };
  const auto py = [&](double ly) { return H - B - (ly - ylo) / (yhi - ylo) * (H - Tm - B); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" "
         "font-size=\"14\">"
      << title << "</text>\n"
      << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << W - L - R << "\" height=\""
      << H - Tm - B << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(std::ceil(xlo)); e <= static_cast<int>(std::floor(xhi)); ++e)
    out << "<line x1=\"" << px(e) << "\" y1=\"" << Tm << "\" x2=\"" << px(e) << "\" y2=\""
        << H - B << "\" stroke=\"#ddd\"/>\n<text x=\"" << px(e) << "\" y=\"" << H - B + 18
        << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">1e" << e
        << "</text>\n";
  for (int e = static_cast<int>(std::ceil(ylo)); e <= static_cast<int>(std::floor(yhi)); ++e)
    out << "<line x1=\"" << L << "\" y1=\"" << py(e) << "\" x2=\"" << W - R << "\" y2=\""
        << py(e) << "\" stroke=\"#ddd\"/>\n<text x=\"" << L - 6 << "\" y=\"" << py(e) + 4
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">1e" << e
        << "</text>\n";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  int ci = 0;
  for (const auto& sr : series) {
    const char* col = colors[ci % 6];
    out << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : sr.points)
      if (x > 0.0 && y > 0.0) out << px(std::log10(x)) << ',' << py(std::log10(y)) << ' ';
    out << "\"/>\n<text x=\"" << W - R - 8 << "\" y=\"" << Tm + 16 + 14 * ci
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\" fill=\"" << col
        << "\">" << sr.name << "</text>\n";
    ++ci;
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 14
      << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">t</text>\n"
      << "<text x=\"16\" y=\"" << (Tm + H - B) / 2
      << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" "
         "transform=\"rotate(-90 16 "
      << (Tm + H - B) / 2 << ")\">F gap</text>\n</svg>\n";
}

ExperimentResult run_experiment(const ExperimentConfig& c, int jobs) {
  validate(c);
  const std::size_t n = c.seeds.size();
  if (jobs <= 0) {
    const unsigned hc = std::thread::hardware_concurrency();
    jobs = hc ? static_cast<int>(hc) : 1;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);

  ExperimentResult res;
  res.runs.resize(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex err_mx;

  const auto work = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        res.runs[i] = run_one(c, c.seeds[i]);
      } catch (...) {
        std::scoped_lock lk(err_mx);
        if (!first_error) first_error = std::current_exception();
        stop.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<SeedSummary> per_seed;
  per_seed.reserve(n);
  for (const auto& r : res.runs) per_seed.push_back(r.summary);
  res.summary = aggregate(per_seed, c);
  return res;
}

}  // namespace cohere
