#include "cohere/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cohere/bounds.hpp"
#include "cohere/checks.hpp"
#include "cohere/harness.hpp"
#include "cohere/regularizer.hpp"
#include "cohere/trace.hpp"

namespace cohere {

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  const auto one = [](const std::string& tok) -> std::uint64_t {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (tok.empty() || used != tok.size() || tok[0] == '-' || tok[0] == '+')
      throw std::invalid_argument("bad seed token: '" + tok + "'");
    return v;
  };

  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, comma - pos);
    const std::size_t dots = item.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(one(item));
    } else {
      const std::uint64_t a = one(item.substr(0, dots));
      const std::uint64_t b = one(item.substr(dots + 2));
      if (a > b) throw std::invalid_argument("empty seed range: '" + item + "'");
      if (b - a >= 10'000'000) throw std::invalid_argument("seed range too large: '" + item + "'");
      for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
    }
    pos = comma + 1;
  }
  return seeds;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int env_jobs() {
  const char* s = std::getenv("COHERE_OPT_JOBS");
  if (!s) return 0;
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  return (end != s && *end == '\0' && v > 0 && v < 1 << 16) ? static_cast<int>(v) : 0;
}

// ---- run ---------------------------------------------------------------

struct RunOpts {
  ExperimentConfig cfg;
  std::string config_file;
  std::string schedule = "power";
  std::string q_update = "reconciled";
  std::string seeds = "1";
  std::string out_dir = ".";
  bool no_checks = false;
  bool plot = false;
  bool dump = false;
  int jobs = env_jobs();

  RunOpts() { cfg.T = 0; }  // sentinel: --T must come from a flag or the config
};

std::string trimmed(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Plain key=value config. Values already given on the command line win;
// unknown keys are errors. CLI11's own config hook only fires on the root
// app, never on subcommands, hence the manual application.
void apply_config(CLI::App* cmd, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot read config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::string s = trimmed(line);
    if (s.empty() || s[0] == '#') continue;
    const auto where = [&] { return path + ":" + std::to_string(lineno); };
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(where() + ": expected key=value, got '" + s + "'");
    const std::string key = trimmed(s.substr(0, eq));
    std::string val = trimmed(s.substr(eq + 1));
    if (val.size() >= 2 && (val.front() == '"' || val.front() == '\'') &&
        val.back() == val.front())
      val = val.substr(1, val.size() - 2);
    CLI::Option* op = cmd->get_option_no_throw("--" + key);
    if (op == nullptr || key == "config")
      throw std::invalid_argument(where() + ": unknown config key '" + key + "'");
    if (op->count() > 0) continue;  // command line overrides the file
    op->add_result(val);
    op->run_callback();
  }
}

void add_run_options(CLI::App* cmd, RunOpts& o) {
  cmd->add_option("--config", o.config_file, "read key=value defaults from a file")
      ->configurable(false);
  cmd->add_option("--problem", o.cfg.problem, "objective name")
      ->check(CLI::IsMember(problem_names()))
      ->capture_default_str();
  cmd->add_option("--dim", o.cfg.dim, "ambient dimension")->capture_default_str();
  cmd->add_option("--r", o.cfg.r, "distance from the anchor x0 to the optimum")
      ->capture_default_str();
  cmd->add_option("--schedule", o.schedule, "step-size schedule")
      ->check(CLI::IsMember({"power", "adaptive"}))
      ->capture_default_str();
  cmd->add_option("--alpha", o.cfg.alpha, "schedule exponent, in (1/2, 1)")
      ->capture_default_str();
  cmd->add_option("--sigma", o.cfg.sigma, "gradient noise level")->capture_default_str();
  cmd->add_option("--T", o.cfg.T, "horizon (number of rounds); required")
      ->capture_default_str();
  cmd->add_option("--seeds", o.seeds, "seed list: N, A..B inclusive, comma-combinable")
      ->capture_default_str();
  cmd->add_option("--record-stride", o.cfg.record_stride,
                  "CSV row stride; 0 records powers of two plus T")
      ->capture_default_str();
  cmd->add_option("--q-update", o.q_update, "Q increment rule")
      ->check(CLI::IsMember({"reconciled", "printed"}))
      ->capture_default_str();
  cmd->add_option("--algo", o.cfg.algo, "optimizer to run")
      ->check(CLI::IsMember({"ftrl", "sgd"}))
      ->capture_default_str();
  cmd->add_flag("--no-checks", o.no_checks, "disable the inline per-step checks");
  cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
  cmd->add_flag("--plot", o.plot, "also write an SVG log-log gap plot");
  cmd->add_option("--jobs", o.jobs, "worker threads; 0 = logical cores (env COHERE_OPT_JOBS)")
      ->capture_default_str();
  cmd->add_option("--id", o.cfg.id, "override the derived experiment id");
  cmd->add_flag("--dump-config", o.dump, "print the effective key=value config and exit")
      ->configurable(false);
}

int do_run(RunOpts& o, CLI::App* cmd, std::ostream& out, std::ostream& err) {
  if (!o.config_file.empty()) apply_config(cmd, o.config_file);
  if (o.cfg.T == 0 && !o.dump) {
    err << "error: --T is required\n\n" << cmd->help();
    return 2;
  }
  o.cfg.schedule = o.schedule == "adaptive" ? ScheduleKind::adaptive : ScheduleKind::power;
  o.cfg.q_update = o.q_update == "printed" ? QUpdateRule::printed : QUpdateRule::reconciled;
  o.cfg.checks_enabled = !o.no_checks;
  o.cfg.seeds = parse_seeds(o.seeds);
  if (o.dump) {
    out << cmd->config_to_str(true, false);
    return 0;
  }
  validate(o.cfg);

  const ExperimentResult res = run_experiment(o.cfg, o.jobs);

  namespace fs = std::filesystem;
  fs::create_directories(o.out_dir);
  const std::string id = o.cfg.id.empty() ? experiment_id(o.cfg) : o.cfg.id;
  const fs::path csv_path = fs::path(o.out_dir) / (id + ".csv");
  {
    std::ofstream f(csv_path);
    write_csv(f, res.runs);
    if (!f) throw std::runtime_error("cannot write " + csv_path.string());
  }
  const fs::path sum_path = fs::path(o.out_dir) / (id + ".summary.csv");
  {
    std::ofstream f(sum_path);
    write_summary(f, res.summary, o.cfg);
    if (!f) throw std::runtime_error("cannot write " + sum_path.string());
  }
  err << "wrote " << csv_path.string() << "\nwrote " << sum_path.string() << "\n";

  if (o.plot) {
    PlotSeries last{"last iterate", {}}, avg{"running average", {}};
    const auto& rows0 = res.runs.front().rows;
    for (std::size_t k = 0; k < rows0.size(); ++k) {
      double ml = 0.0, ma = 0.0;
      for (const auto& run : res.runs) {
        ml += run.rows[k].f_gap_last;
        ma += run.rows[k].f_gap_avg;
      }
      const double n = static_cast<double>(res.runs.size());
      last.points.emplace_back(static_cast<double>(rows0[k].t), ml / n);
      avg.points.emplace_back(static_cast<double>(rows0[k].t), ma / n);
    }
    const fs::path svg_path = fs::path(o.out_dir) / (id + ".svg");
    std::ofstream f(svg_path);
    write_svg_plot(f, id, {last, avg});
    if (!f) throw std::runtime_error("cannot write " + svg_path.string());
    err << "wrote " << svg_path.string() << "\n";
  }

  write_summary(out, res.summary, o.cfg);
  return 0;
}

// ---- verify ------------------------------------------------------------

struct VerifyOpts {
  std::string only;
  std::string q_update = "reconciled";
  int runs = 100;
  std::int64_t T = 1000;
};

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {
      "key_inequality", "regret_identity",  "partial_regret", "diff_regularizers",
      "sum_k",          "last_average",     "bregman_bounds", "iterate_bound",
      "hessian_sandwich", "trace_bounds"};
  return names;
}

void add_verify_options(CLI::App* cmd, VerifyOpts& o) {
  cmd->add_option("--only", o.only, "run a single checker")
      ->check(CLI::IsMember(check_names()));
  cmd->add_option("--runs", o.runs, "number of random runs / instance budget scale")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--T", o.T, "horizon of the generated runs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--q-update", o.q_update, "Q increment rule for the generated runs")
      ->check(CLI::IsMember({"reconciled", "printed"}))
      ->capture_default_str();
}

// Unit-direction scaled to norm `r`; rejection-free (normal coordinates).
Vec on_sphere(CounterRng& rng, int dim, double r) {
  Vec z(static_cast<std::size_t>(dim));
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (auto& v : z) {
      v = rng.next_normal();
      n2 += v * v;
    }
  } while (n2 < 1e-30);
  const double scale = r / std::sqrt(n2);
  for (auto& v : z) v *= scale;
  return z;
}

int do_verify(const VerifyOpts& o, std::ostream& out, std::ostream& err) {
  const QUpdateRule q =
      o.q_update == "printed" ? QUpdateRule::printed : QUpdateRule::reconciled;
  const auto want = [&](const char* name) { return o.only.empty() || o.only == name; };

  // Shared pool of recorded runs, cycling over the full benchmark grid.
  const bool need_traces = want("key_inequality") || want("regret_identity") ||
                           want("partial_regret") || want("diff_regularizers") ||
                           want("iterate_bound") || want("trace_bounds");
  std::vector<TraceWindow> traces;
  if (need_traces) {
    struct Cell {
      std::string problem;
      ScheduleKind kind;
      double alpha, sigma;
      int dim;
    };
    std::vector<Cell> grid;
    for (const auto& pname : problem_names())
      for (ScheduleKind k : {ScheduleKind::power, ScheduleKind::adaptive})
        for (double a : {0.6, 0.75})
          for (double sg : {0.0, 0.3})
            for (int dim : {2, 5}) grid.push_back({pname, k, a, sg, dim});
    traces.reserve(static_cast<std::size_t>(o.runs));
    for (int i = 0; i < o.runs; ++i) {
      const Cell& c = grid[static_cast<std::size_t>(i) % grid.size()];
      const Vec xs(static_cast<std::size_t>(c.dim),
                   5.0 / std::sqrt(static_cast<double>(c.dim)));
      const Problem p = make_problem(c.problem, c.dim, xs);
      const NoiseModel noise{c.sigma};
      const Schedule sched{c.kind, gradient_budget(p, noise), c.alpha};
      traces.push_back(
          simulate(p, sched, noise, o.T, "verify", static_cast<std::uint64_t>(1 + i), q));
    }
  }

  std::vector<CheckReport> reports;

  if (want("key_inequality")) {
    CheckReport rep{.name = "key_inequality"};
    for (const auto& w : traces) rep.merge(check_key_inequality(w));
    reports.push_back(std::move(rep));
  }

  if (want("regret_identity")) {
    CheckReport rep{.name = "regret_identity"};
    const std::size_t n = std::min<std::size_t>(traces.size(), 24);
    for (std::size_t i = 0; i < n; ++i) {
      const TraceWindow& w = traces[i];
      std::vector<Vec> comparators{w.x0};
      if (w.x_star) comparators.push_back(*w.x_star);
      CounterRng rng("verify-regret", i, 0);
      for (int k = 0; k < 3; ++k)
        comparators.push_back(rng.next_in_ball(static_cast<int>(w.x0.size()), 10.0));
      for (const auto& u : comparators) rep.merge(check_regret_identity(w, u));
    }
    reports.push_back(std::move(rep));
  }

  if (want("partial_regret") || want("diff_regularizers")) {
    CheckReport part{.name = "partial_regret"}, diff{.name = "diff_regularizers"};
    for (const auto& w : traces) {
      const std::int64_t T = w.horizon();
      for (std::int64_t A : {std::int64_t{1}, T / 4, T / 2, T}) {
        if (A < 1) continue;
        if (want("partial_regret")) part.merge(check_partial_regret(w, A));
        if (want("diff_regularizers")) diff.merge(check_diff_regularizers(w, A));
      }
    }
    if (want("partial_regret")) reports.push_back(std::move(part));
    if (want("diff_regularizers")) reports.push_back(std::move(diff));
  }

  if (want("sum_k")) {
    CheckReport rep{.name = "sum_k"};
    for (std::int64_t T : {2, 3, 4, 5, 8, 16, 37, 100, 250, 500, 1000, 2000})
      for (double a : {0.51, 0.55, 0.6, 0.675, 0.75, 0.9, 0.99})
        rep.merge(check_sum_k(T, a));
    reports.push_back(std::move(rep));
  }

  if (want("last_average")) {
    CheckReport rep{.name = "last_average"};
    const int n = o.runs * 100;
    for (int i = 0; i < n; ++i) {
      CounterRng rng("verify-last-average", static_cast<std::uint64_t>(i), 0);
      const int L = 1 + static_cast<int>(rng.next_u64() % 40);
      std::vector<double> etas(static_cast<std::size_t>(L)),
          qs(static_cast<std::size_t>(L));
      for (auto& e : etas) e = rng.next_double();
      std::sort(etas.rbegin(), etas.rend());
      if (i % 7 == 0)  // exercise the eta -> 0 tail
        for (std::size_t j = etas.size() - std::min<std::size_t>(etas.size(), 2);
             j < etas.size(); ++j)
          etas[j] = 0.0;
      for (auto& v : qs) v = 3.0 * rng.next_double();
      rep.merge(check_last_average(etas, qs));
    }
    reports.push_back(std::move(rep));
  }

  if (want("bregman_bounds")) {
    CheckReport rep{.name = "bregman_bounds"};
    const int n = o.runs * 100;
    for (int i = 0; i < n; ++i) {
      CounterRng rng("verify-bregman", static_cast<std::uint64_t>(i), 0);
      const int dim = 1 + static_cast<int>(rng.next_u64() % 5);
      const double s2 = 1.0 + 6.0 * rng.next_double();
      const double qq = rng.next_double() * std::log(s2);
      const auto p = RegularizerParams::from_s2(s2, qq);
      const Vec xs = rng.next_in_ball(dim, 5.0);
      const Vec x = rng.next_in_ball(dim, 5.0);
      rep.merge(check_bregman_bounds(xs, x, p));
    }
    reports.push_back(std::move(rep));
  }

  if (want("iterate_bound")) {
    CheckReport rep{.name = "iterate_bound"};
    for (const auto& w : traces) rep.merge(check_iterate_bound(w));
    reports.push_back(std::move(rep));
  }

  if (want("hessian_sandwich")) {
    CheckReport rep{.name = "hessian_sandwich"};
    const int n = o.runs * 10;
    for (int i = 0; i < n; ++i) {
      CounterRng rng("verify-hessian", static_cast<std::uint64_t>(i), 0);
      const int dim = 1 + static_cast<int>(rng.next_u64() % 5);
      const double s2 = 1.0 + 6.0 * rng.next_double();
      const double qq = rng.next_double() * std::log(s2);
      const auto p = RegularizerParams::from_s2(s2, qq);
      // Stay clear of the branch radius, where the envelope jumps.
      const double f = i % 2 ? 0.05 + 0.75 * rng.next_double()
                             : 1.3 + 1.7 * rng.next_double();
      rep.merge(check_hessian_sandwich(on_sphere(rng, dim, f * branch_point(p)), p));
    }
    reports.push_back(std::move(rep));
  }

  if (want("trace_bounds")) {
    CheckReport rep{.name = "trace_bounds"};
    for (const auto& w : traces) rep.merge(check_trace_bounds(w));
    reports.push_back(std::move(rep));
  }

  char line[160];
  std::snprintf(line, sizeof line, "%-18s %12s %15s %11s  %s\n", "check", "instances",
                "max_violation", "tolerance", "status");
  out << line;
  bool all_passed = true;
  for (const auto& rep : reports) {
    std::snprintf(line, sizeof line, "%-18s %12lld %15.3e %11.0e  %s\n", rep.name.c_str(),
                  static_cast<long long>(rep.instances),
                  rep.instances ? rep.max_violation : 0.0, rep.tolerance,
                  rep.passed() ? "PASS" : "FAIL");
    out << line;
    all_passed = all_passed && rep.passed();
  }
  for (const auto& rep : reports)
    if (!rep.passed()) err << "worst " << rep.name << ": " << rep.worst_case << "\n";
  return all_passed ? 0 : 1;
}

// ---- bounds ------------------------------------------------------------

struct BoundsOpts {
  std::int64_t T = 0;
  double alpha = 0.0, G = 0.0, r = 0.0;
  double sigma = 0.0, smooth = 0.0;
};

void add_bounds_options(CLI::App* cmd, BoundsOpts& o, CLI::Option** smooth_opt) {
  cmd->add_option("--T", o.T, "horizon")->required();
  cmd->add_option("--alpha", o.alpha, "schedule exponent, in (1/2, 1)")->required();
  cmd->add_option("--G", o.G, "gradient-norm budget")->required();
  cmd->add_option("--r", o.r, "distance from the anchor to the optimum")->required();
  cmd->add_option("--sigma", o.sigma, "gradient noise level (smooth-case bound)")
      ->capture_default_str();
  *smooth_opt = cmd->add_option("--smooth", o.smooth,
                                "smoothness constant L; enables the smooth-case bound");
}

int do_bounds(const BoundsOpts& o, bool smooth_set, std::ostream& out) {
  const double b2 = theorem2_bound(o.T, o.alpha, o.G, o.r);
  const double b3 = theorem3_bound(o.T, o.alpha, o.G, o.r);
  out << "theorem2 " << fmt(b2) << "\n";
  out << "theorem3 " << fmt(b3) << "\n";
  if (smooth_set) {
    const double s2_inf = 4.0 + 1.0 / (2.0 * o.alpha - 1.0);
    const double phi_inf =
        psi(o.r, RegularizerParams::from_s2(s2_inf, std::log(s2_inf)));
    const double bF = theoremF_bound(o.T, o.alpha, o.G, o.sigma, o.smooth, phi_inf);
    out << "theoremF " << fmt(bF) << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"benchmark and verification driver for rescaled-gradient FTRL"};
  app.name("cohere-opt");
  app.require_subcommand(1);

  RunOpts ro;
  VerifyOpts vo;
  BoundsOpts bo;
  CLI::Option* smooth_opt = nullptr;
  CLI::App* run_cmd =
      app.add_subcommand("run", "run an experiment; write CSV, summary, optional SVG");
  add_run_options(run_cmd, ro);
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "mechanically check the analysis inequalities");
  add_verify_options(verify_cmd, vo);
  CLI::App* bounds_cmd = app.add_subcommand("bounds", "print the theorem bound values");
  add_bounds_options(bounds_cmd, bo, &smooth_opt);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (run_cmd->parsed()) return do_run(ro, run_cmd, out, err);
    if (verify_cmd->parsed()) return do_verify(vo, out, err);
    return do_bounds(bo, smooth_opt->count() > 0, out);
  } catch (const RunAbort& e) {
    err << "aborted: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace cohere
