#include "rlxa/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rlxa/attractor.hpp"
#include "rlxa/decomposition.hpp"
#include "rlxa/evolution.hpp"
#include "rlxa/functionals.hpp"
#include "rlxa/snapshot.hpp"

namespace fs = std::filesystem;

namespace rlxa {

namespace {

std::atomic<int> g_level{static_cast<int>(LogLevel::warn)};

const char* level_name(LogLevel l) {
  switch (l) {
    case LogLevel::error: return "error";
    case LogLevel::warn: return "warn";
    case LogLevel::info: return "info";
    case LogLevel::debug: return "debug";
  }
  return "?";
}

std::string out_dir(const ExperimentConfig& cfg, const RunContext& ctx) {
  const std::string dir = ctx.out.empty() ? cfg.out : ctx.out;
  fs::create_directories(dir);
  return dir;
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

const Domain& require_domain(const ExperimentConfig& cfg) {
  if (!cfg.domain) throw ConfigError("config", 0, "missing mesh: no `domain` given");
  return *cfg.domain;
}

SeedOptions seed_options(const ExperimentConfig& cfg, const RunContext& ctx) {
  SeedOptions s;
  s.n_seeds = cfg.n_seeds;
  s.levels = cfg.levels;
  s.seed = ctx.seed.value_or(cfg.seed);
  s.velocity = cfg.velocity == "zero" ? Velocity::zero
               : cfg.velocity == "well_prepared" ? Velocity::well_prepared
                                                 : Velocity::random;
  return s;
}

NewtonOptions newton(const ExperimentConfig& cfg) {
  NewtonOptions n;
  n.tol = cfg.tol;
  return n;
}

Snapshot trajectory_snapshot(const Discretization& disc, const std::vector<double>& t,
                             const std::vector<std::pair<std::string, const std::vector<Vec>*>>& fields) {
  Snapshot s;
  s.dim = static_cast<std::uint64_t>(disc.mesh.dim);
  s.n_nodes = static_cast<std::uint64_t>(disc.size());
  s.n_boundary = disc.mesh.boundary_nodes.size();
  s.columns.push_back("t");
  for (const auto& [name, _] : fields)
    for (int i = 0; i < disc.size(); ++i) s.columns.push_back(name + std::to_string(i));
  std::vector<double> row;
  for (std::size_t j = 0; j < t.size(); ++j) {
    row.assign(1, t[j]);
    for (const auto& [_, vecs] : fields) row.insert(row.end(), (*vecs)[j].data(), (*vecs)[j].data() + disc.size());
    s.add_row(row);
  }
  return s;
}

double sup_abs(const std::vector<Vec>& xs) {
  double m = 0.0;
  for (const auto& x : xs) m = std::max(m, x.cwiseAbs().maxCoeff());
  return m;
}

std::string kv(const std::string& k, double v) { return k + "=" + format_double(v); }

}  // namespace

LogLevel log_level_from_env() {
  const char* env = std::getenv("RLXA_LOG");
  if (!env) return LogLevel::warn;
  const std::string s(env);
  if (s == "error") return LogLevel::error;
  if (s == "info") return LogLevel::info;
  if (s == "debug") return LogLevel::debug;
  return LogLevel::warn;
}

void set_log_level(LogLevel level) { g_level = static_cast<int>(level); }

void log(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) <= g_level.load()) std::cerr << "[rlxa " << level_name(level) << "] " << msg << "\n";
}

CommandResult cmd_solve(const ExperimentConfig& cfg, const RunContext& ctx) {
  const auto disc = make_discretization(require_domain(cfg), cfg.n);
  const PoincareResult pr = poincare_constant(disc->ops);
  resolve_params(cfg, pr.lambda, cfg.eps, cfg.beta.value_or(default_shift(cfg.f, 1.0)));
  const std::string dir = out_dir(cfg, ctx);
  const SeedOptions seeds = seed_options(cfg, ctx);
  const HypState s0 = seed_state(*disc, cfg.f, cfg.eps, seeds, 0);
  log(LogLevel::info, "solve: n_nodes=" + std::to_string(disc->size()) + " eps=" + format_double(cfg.eps));

  TrajectoryOptions opts;
  opts.T = cfg.T;
  opts.dt = cfg.dt;
  opts.sample_stride = cfg.stride;
  opts.newton = newton(cfg);
  const bool hyperbolic = cfg.eps > 0.0;
  const TrajectoryRecord rec = hyperbolic
                                   ? solve_hyperbolic(disc, cfg.f, s0, opts)
                                   : solve_parabolic(disc, cfg.f, make_parabolic_state(*disc, s0.u, s0.u), opts);

  EnergyLedger steps({"E", "diss_increment", "residual", "newton_iters"});
  steps.add_row(0.0, {rec.initial_energy, 0.0, 0.0, 0.0});
  for (const auto& st : rec.steps) steps.add_row(st.t, {st.energy, st.dissipation, st.residual, double(st.newton_iters)});

  EnergyLedger samples({"norm_sq", "E"});
  const auto& nm = disc->norms;
  for (std::size_t j = 0; j < rec.times.size(); ++j) {
    const double nsq = hyperbolic ? nm.hyp_sq(rec.u[j], rec.v[j], cfg.eps) : nm.l2_sq(rec.u[j]) + nm.boundary_sq(rec.u[j]);
    samples.add_row(rec.times[j], {nsq, discrete_energy(*disc, cfg.f, rec.u[j], rec.v[j], cfg.eps)});
  }

  CommandResult res;
  const std::string steps_path = join(dir, "steps.csv");
  const std::string samples_path = join(dir, hyperbolic ? "hyperbolic.csv" : "parabolic.csv");
  const std::string snap_path = join(dir, "trajectory.rlxa");
  write_csv(steps_path, steps);
  write_csv(samples_path, samples);
  write_snapshot(snap_path, trajectory_snapshot(*disc, rec.times, {{"u", &rec.u}, {"v", &rec.v}}));
  res.files = {steps_path, samples_path, snap_path};
  std::ostringstream os;
  os << "solve: " << kv("eps", cfg.eps) << " samples=" << rec.times.size() << " steps=" << rec.steps.size() << " "
     << kv("max_step_defect", rec.max_step_defect()) << " " << kv("cumulative_defect", rec.cumulative_defect());
  res.summary = os.str();
  return res;
}

CommandResult cmd_eigen(const ExperimentConfig& cfg, const RunContext& ctx) {
  const auto disc = make_discretization(require_domain(cfg), cfg.n);
  const PoincareResult pr = poincare_constant(disc->ops);
  double dense = pr.dense_lambda;
  if (std::isnan(dense) && disc->size() <= 3000) dense = smallest_generalized_dense(disc->ops.robin(), disc->ops.mass);
  const std::string dir = out_dir(cfg, ctx);
  const std::string path = join(dir, "eigen.txt");
  std::ofstream out(path, std::ios::trunc);
  out << "n_nodes = " << disc->size() << "\n"
      << "lambda = " << format_double(pr.lambda) << "\n"
      << "lumped_lambda = " << format_double(pr.lumped_lambda) << "\n"
      << "dense_lambda = " << format_double(dense) << "\n"
      << "iterations = " << pr.iterations << "\n"
      << "used_dense = " << (pr.used_dense ? "true" : "false") << "\n";
  CommandResult res;
  res.files = {path};
  std::ostringstream os;
  os << "eigen: n_nodes=" << disc->size() << " " << kv("lambda", pr.lambda) << " " << kv("dense_lambda", dense)
     << " iterations=" << pr.iterations;
  res.summary = os.str();
  return res;
}

CommandResult cmd_split(const ExperimentConfig& cfg, const RunContext& ctx) {
  if (!(cfg.eps > 0.0)) throw ConfigError("config", 0, "split needs eps > 0");
  const auto disc = make_discretization(require_domain(cfg), cfg.n);
  const PoincareResult pr = poincare_constant(disc->ops);
  const SeedOptions seeds = seed_options(cfg, ctx);
  const HypState s0 = seed_state(*disc, cfg.f, cfg.eps, seeds, 0);

  TrajectoryOptions probe;
  probe.T = cfg.T;
  probe.dt = cfg.dt;
  probe.sample_stride = 1;
  probe.newton = newton(cfg);
  const double s_max = std::max(1.0, 1.25 * sup_abs(solve_hyperbolic(disc, cfg.f, s0, probe).u));
  const FunctionalParams p = resolve_params(cfg, pr.lambda, cfg.eps, default_shift(cfg.f, s_max));
  log(LogLevel::info, "split: " + p.describe());

  SplitOptions so;
  so.T = cfg.T;
  so.dt = cfg.dt;
  so.sample_stride = cfg.stride;
  so.newton = newton(cfg);
  const SplitTrajectory sp = solve_split(disc, cfg.f, s0, p, so);
  const auto& nm = disc->norms;

  EnergyLedger samples({"z_sq", "velocity_sq", "reconstruction", "k_regular", "W", "V"});
  for (std::size_t j = 0; j < sp.times.size(); ++j)
    samples.add_row(sp.times[j], {sp.z_norm[j] * sp.z_norm[j], nm.l2_sq(sp.u_t[j]) + nm.l2_sq(sp.w_t[j]),
                                  sp.reconstruction[j], sp.k_regular[j], sp.W[j], sp.V[j]});
  const double v_eta = 0.25 * p.rates(0.0).omega3;
  EnergyLedger steps({"V", "velocity_sq", "eta"});
  for (std::size_t j = 0; j < sp.step_times.size(); ++j)
    steps.add_row(sp.step_times[j], {sp.step_V[j], sp.step_velocity_sq[j], v_eta});

  const std::string dir = out_dir(cfg, ctx);
  CommandResult res;
  res.files = {join(dir, "split.csv"), join(dir, "split_steps.csv"), join(dir, "split.rlxa")};
  write_csv(res.files[0], samples);
  write_csv(res.files[1], steps);
  write_snapshot(res.files[2], trajectory_snapshot(*disc, sp.times, {{"u", &sp.u}, {"v", &sp.v}, {"w", &sp.w}}));

  const LogFit zf = fit_z_decay(sp, std::min(1.0, 0.1 * cfg.T));
  const RegularityReport kr = measure_K_regularity(*disc, sp);
  std::ostringstream os;
  os << "split: " << kv("eps", cfg.eps) << " " << kv("beta", p.beta()) << " "
     << kv("max_reconstruction", sp.max_reconstruction()) << " " << kv("z_rate", -zf.slope) << " "
     << kv("sup_K", kr.sup);

  if (cfg.difference) {
    const HypState t0 = seed_state(*disc, cfg.f, cfg.eps, seeds, 1);
    DifferenceOptions dopt;
    dopt.t_max = cfg.t_max;
    dopt.dt = cfg.dt;
    dopt.scan_step = cfg.scan_step;
    dopt.newton = newton(cfg);
    const DifferenceSplit ds = difference_split(disc, cfg.f, s0, t0, dopt);
    EnergyLedger diff({"alpha", "lambda", "reconstruction"});
    for (std::size_t j = 0; j < ds.times.size(); ++j)
      diff.add_row(ds.times[j], {ds.alpha_curve[j], ds.lambda_curve[j], ds.reconstruction[j]});
    res.files.push_back(join(dir, "difference.csv"));
    write_csv(res.files.back(), diff);
    os << " t_star=" << (ds.found ? format_double(ds.t_star) : std::string("none"));
  }
  res.summary = os.str();
  return res;
}

CommandResult cmd_limit(const ExperimentConfig& cfg, const RunContext& ctx) {
  const auto disc = make_discretization(require_domain(cfg), cfg.n);
  const PoincareResult pr = poincare_constant(disc->ops);
  std::vector<double> grid = cfg.eps_grid.empty() ? std::vector<double>{0.5, 0.1, 0.02} : cfg.eps_grid;
  for (double e : grid) resolve_params(cfg, pr.lambda, e, cfg.beta.value_or(default_shift(cfg.f, 1.0)));
  CloudOptions co;
  co.t_transient = cfg.t_transient;
  co.t_sample = cfg.t_sample;
  co.dt = cfg.dt;
  co.stride = cfg.stride;
  co.newton = newton(cfg);
  const SweepReport rep = semicontinuity_sweep(disc, cfg.f, grid, seed_options(cfg, ctx), co, ctx.jobs);

  const std::string dir = out_dir(cfg, ctx);
  const std::string path = join(dir, "limit.csv");
  std::ofstream out(path, std::ios::trunc);
  out << "eps,distance,n_points_A,n_points_B,T_sample\n";
  for (const auto& r : rep.rows)
    out << format_double(r.eps) << ',' << format_double(r.distance) << ',' << r.n_a << ',' << r.n_b << ','
        << format_double(r.t_sample) << '\n';
  CommandResult res;
  res.files = {path};
  std::ostringstream os;
  os << "limit:";
  for (const auto& r : rep.rows) os << " dist(" << format_double(r.eps) << ")=" << format_double(r.distance);
  os << " monotone=" << (rep.monotone ? "true" : "false")
     << " final_below_first=" << (rep.final_below_first ? "true" : "false");
  res.summary = os.str();
  return res;
}

std::map<std::string, EnergyLedger> load_ledgers(const std::vector<std::string>& paths) {
  static const char* known[] = {"steps", "hyperbolic", "parabolic", "split", "split_steps", "difference"};
  std::map<std::string, EnergyLedger> out;
  const auto add = [&](const fs::path& p) {
    const std::string name = p.stem().string();
    if (out.count(name)) throw std::runtime_error("ledger '" + name + "' given twice");
    out.emplace(name, read_csv(p.string()));
  };
  for (const auto& s : paths) {
    const fs::path p(s);
    if (fs::is_directory(p)) {
      for (const char* k : known) {
        const fs::path f = p / (std::string(k) + ".csv");
        if (fs::exists(f)) add(f);
      }
    } else if (fs::exists(p)) {
      add(p);
    } else {
      throw std::runtime_error("no such file or directory: " + s);
    }
  }
  return out;
}

CommandResult cmd_verify(const std::vector<std::string>& paths, const RunContext& ctx) {
  const auto ledgers = load_ledgers(paths);
  CertifyTargets tg;
  tg.jobs = ctx.jobs;
  const CertReport rep = certify_run(ledgers, tg);
  CommandResult res;
  const std::string dir = ctx.out.empty() ? std::string() : ctx.out;
  if (!dir.empty()) {
    fs::create_directories(dir);
    res.files = {join(dir, "report.txt"), join(dir, "report.csv")};
    std::ofstream(res.files[0], std::ios::trunc) << rep.to_text();
    std::ofstream(res.files[1], std::ios::trunc) << rep.to_csv();
  }
  std::ostringstream os;
  os << "verify: entries=" << rep.entries.size() << " verified=" << rep.count(CertStatus::verified)
     << " fitted=" << rep.count(CertStatus::verified_fitted)
     << " hypothesis_failed=" << rep.count(CertStatus::hypothesis_failed)
     << " violated=" << rep.count(CertStatus::violated);
  for (const auto& e : rep.entries) os << "\n  " << e.name << ": " << to_string(e.status) << " (" << e.detail << ")";
  res.summary = os.str();
  res.exit_code = rep.any_violated() ? 1 : 0;
  return res;
}

}  // namespace rlxa
