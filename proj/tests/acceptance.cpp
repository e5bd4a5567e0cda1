// Acceptance suite: one line per criterion, exit code 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "rlxa/attractor.hpp"
#include "rlxa/config.hpp"
#include "rlxa/decomposition.hpp"
#include "rlxa/experiments.hpp"
#include "rlxa/verify.hpp"

using namespace rlxa;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double rel_mat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
}

Vec gaussian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = g(rng);
  return x;
}

double slope_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// 1. Energy balance over a ten-unit double-well run.
Outcome energy_identity() {
  const auto disc = make_discretization(Interval{0.0, 1.0}, 64);
  const auto f = Nonlinearity::double_well(1.0);
  SeedOptions so;
  so.seed = 1;
  const HypState s = seed_state(*disc, f, 1.0, so, 2);
  TrajectoryOptions o{10.0, 1e-2, 10};
  o.newton.tol = 1e-10;
  const auto r = solve_hyperbolic(disc, f, s, o);
  const double step = r.max_step_defect(), cum = r.cumulative_defect();
  return {step <= 1e-8 && cum <= 1e-6, "max_step_defect=" + fmt(step) + " cumulative=" + fmt(cum)};
}

// 2. Matrices and functionals against dense quadrature on small meshes.
Outcome assembly_oracles() {
  const auto f = Nonlinearity::double_well(1.0);
  double worst_mat = 0.0, worst_fun = 0.0;
  std::mt19937_64 rng(2);
  for (const Domain& d : std::vector<Domain>{Interval{0.0, 1.0}, Interval{-1.0, 2.0}, Rectangle{0.0, 1.0, 0.0, 1.0},
                                             Rectangle{0.0, 2.0, -1.0, 0.0}}) {
    for (int n : {1, 2, 3, 5, 19}) {
      const auto disc = make_discretization(d, n);
      if (disc->size() > 20) continue;
      const oracle::DenseOps o = oracle::assemble(disc->mesh);
      worst_mat = std::max({worst_mat, rel_mat(Eigen::MatrixXd(disc->ops.mass), o.M),
                            rel_mat(Eigen::MatrixXd(disc->ops.stiffness), o.K),
                            rel_mat(Eigen::MatrixXd(disc->ops.boundary_mass), o.B)});
      const double lambda = poincare_constant(disc->ops).lambda;
      for (double eps : {1.0, 0.1}) {
        const double beta = default_shift(f, 2.0);
        const auto p = FunctionalParams::defaults(lambda, eps, beta);
        const int m = disc->size();
        for (int k = 0; k < 5; ++k) {
          const Vec u = gaussian(m, rng), w = gaussian(m, rng), v = gaussian(m, rng), vt = gaussian(m, rng);
          worst_fun = std::max({worst_fun, rel(E_eps(*disc, f, u, v, p), oracle::E(o, f, u, v, eps, p.alpha())),
                                rel(V_eps(*disc, f, u, w, v, vt, p), oracle::V(o, f, u, w, v, vt, eps, p.alpha(), beta)),
                                rel(Psi_eps(*disc, f, v, vt, w, p), oracle::Psi(o, f, v, vt, w, eps, p.alpha(), beta)),
                                rel(W_eps(*disc, f, w, vt, u, p), oracle::W(o, f, w, vt, u, eps, beta)),
                                rel(N_eps(*disc, u, vt, eps), oracle::N(o, u, vt, eps))});
        }
      }
    }
  }
  return {worst_mat <= 1e-12 && worst_fun <= 1e-12, "matrices=" + fmt(worst_mat) + " functionals=" + fmt(worst_fun)};
}

// 3. Poincaré constant and inequality.
Outcome poincare() {
  double worst = 0.0;
  for (const Domain& d : std::vector<Domain>{Interval{0.0, 1.0}, Rectangle{0.0, 1.0, 0.0, 1.0}}) {
    for (int n : {4, 13, 199}) {
      const Mesh mesh = build_mesh(d, n);
      if (mesh.num_nodes() > 200) continue;
      const auto pr = poincare_constant(assemble(mesh));
      const oracle::DenseOps o = oracle::assemble(mesh);
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(o.K + o.B, o.M, Eigen::EigenvaluesOnly);
      worst = std::max(worst, rel(pr.lambda, es.eigenvalues().minCoeff()));
    }
  }
  const auto disc = make_discretization(Rectangle{0.0, 1.0, 0.0, 1.0}, 10);
  const double lambda = poincare_constant(disc->ops).lambda;
  std::mt19937_64 rng(3);
  int bad = 0;
  for (int k = 0; k < 10000; ++k) {
    const Vec u = gaussian(disc->size(), rng);
    if (lambda * disc->norms.l2_sq(u) > disc->norms.h1_sq(u) * (1.0 + 1e-12)) ++bad;
  }
  return {worst <= 1e-8 && bad == 0, "max_rel=" + fmt(worst) + " inequality_failures=" + std::to_string(bad)};
}

// 4. Absorbing set across ε.
Outcome absorbing() {
  const auto disc = make_discretization(Interval{0.0, 1.0}, 32);
  const auto f = Nonlinearity::double_well(1.0);
  SeedOptions so;
  so.n_seeds = 20;
  so.levels = {1.0, 2.5, 5.0, 7.5, 10.0};
  so.seed = 4;
  double pmin = INFINITY, pmax = 0.0, wmin = INFINITY;
  bool pass = true;
  std::ostringstream os;
  for (double eps : {1.0, 0.1, 0.01}) {
    const auto rep = absorbing_radius(disc, f, eps, so, {15.0, 1e-2, 10});
    const auto fit = fit_envelope_family(rep.times, rep.curves);
    pass = pass && fit.pass && fit.omega > 0.0;
    pmin = std::min(pmin, fit.P);
    pmax = std::max(pmax, fit.P);
    wmin = std::min(wmin, fit.omega);
    os << "P(" << eps << ")=" << fmt(fit.P) << " w(" << eps << ")=" << fmt(fit.omega) << " ";
  }
  const bool band = pmin > 0.0 && pmax / pmin <= 3.0;
  os << "band=" << fmt(pmax / pmin);
  return {pass && band && wmin > 0.0, os.str()};
}

// 5. Z/K splitting across ε.
Outcome splitting() {
  const auto disc = make_discretization(Interval{0.0, 1.0}, 32);
  const auto f = Nonlinearity::double_well(1.0);
  const double lambda = poincare_constant(disc->ops).lambda;
  SeedOptions so;
  so.n_seeds = 3;
  so.levels = {5.0};
  so.seed = 5;
  double recon = 0.0, kmin = INFINITY, kmax = 0.0, zmin = INFINITY;
  std::ostringstream os;
  for (double eps : {1.0, 0.1, 0.01}) {
    double ksup = 0.0;
    for (int k = 0; k < so.n_seeds; ++k) {
      const HypState s0 = seed_state(*disc, f, eps, so, k);
      TrajectoryOptions probe{10.0, 1e-2, 1};
      const auto pr = solve_hyperbolic(disc, f, s0, probe);
      double smax = 1.0;
      for (const auto& u : pr.u) smax = std::max(smax, 1.25 * u.cwiseAbs().maxCoeff());
      const auto p = FunctionalParams::defaults(lambda, eps, default_shift(f, smax));
      const auto sp = solve_split(disc, f, s0, p, {10.0, 1e-2, 10});
      recon = std::max(recon, sp.max_reconstruction());
      zmin = std::min(zmin, -fit_z_decay(sp, 1.0).slope);
      const double sup = measure_K_regularity(*disc, sp).sup;
      if (!std::isfinite(sup)) ksup = INFINITY;
      ksup = std::max(ksup, sup);
    }
    kmin = std::min(kmin, ksup);
    kmax = std::max(kmax, ksup);
    os << "supK(" << eps << ")=" << fmt(ksup) << " ";
  }
  os << "reconstruction=" << fmt(recon) << " min_z_rate=" << fmt(zmin) << " K_band=" << fmt(kmax / kmin);
  const bool ok = recon <= 1e-8 && zmin > 0.0 && std::isfinite(kmax) && kmin > 0.0 && kmax / kmin <= 3.0;
  return {ok, os.str()};
}

// 6. Grönwall checker soundness.
Outcome gronwall() {
  GronwallInstance g;
  g.eta = 0.7;
  for (int i = 0; i <= 4000; ++i) {
    const double t = 20.0 * i / 4000;
    g.t.push_back(t);
    g.h.push_back(g.eta + 0.5 * std::cos(t));
    g.lambda.push_back(3.0 * std::exp(-g.eta * t + 0.5 * std::sin(t)));
  }
  const bool closed = check_gronwall(g).status == GronwallStatus::verified;

  const auto disc = make_discretization(Interval{0.0, 1.0}, 32);
  const auto f = Nonlinearity::double_well(1.0);
  const double lambda = poincare_constant(disc->ops).lambda;
  SeedOptions so;
  so.seed = 6;
  const HypState s0 = seed_state(*disc, f, 1.0, so, 1);
  const auto pr = solve_hyperbolic(disc, f, s0, {10.0, 1e-2, 1});
  double smax = 1.0;
  for (const auto& u : pr.u) smax = std::max(smax, 1.25 * u.cwiseAbs().maxCoeff());
  const auto p = FunctionalParams::defaults(lambda, 1.0, default_shift(f, smax));
  const auto sp = solve_split(disc, f, s0, p, {10.0, 1e-2, 10});
  const auto vi = instrument_v_inequality(sp.step_times, sp.step_V, sp.step_velocity_sq, 0.25 * p.rates(0.0).omega3);
  const bool real = vi.finite && vi.gronwall.status == GronwallStatus::verified;

  GronwallInstance adv;
  adv.eta = 0.5;
  for (int i = 0; i <= 500; ++i) {
    const double t = 5.0 * i / 500;
    adv.t.push_back(t);
    adv.h.push_back(0.0);
    adv.lambda.push_back(std::exp(t));
  }
  const bool rejected = check_gronwall(adv).status == GronwallStatus::violated;
  return {closed && real && rejected, std::string("closed_form=") + (closed ? "verified" : "not verified") +
                                          " V_run=" + to_string(vi.gronwall.status) + " Q=" + fmt(vi.Q) +
                                          " adversarial=" + (rejected ? "violated" : "accepted")};
}

// 7. Smoothing split for two states inside the absorbing ball.
Outcome smoothing() {
  const auto disc = make_discretization(Interval{0.0, 1.0}, 64);
  const auto f = Nonlinearity::double_well(1.0);
  const double eps = 0.5;
  SeedOptions so;
  so.seed = 7;
  so.levels = {5.0};
  HypState a = seed_state(*disc, f, eps, so, 0), b = seed_state(*disc, f, eps, so, 1);
  // Run both into the ball first.
  const auto ra = solve_hyperbolic(disc, f, a, {5.0, 1e-2, 100});
  const auto rb = solve_hyperbolic(disc, f, b, {5.0, 1e-2, 100});
  a = HypState{ra.u.back(), ra.v.back(), 0.0, eps};
  b = HypState{rb.u.back(), rb.v.back(), 0.0, eps};
  const auto d = difference_split(disc, f, a, b, {50.0, 1e-2, 0.5});
  const bool ok = d.found && d.t_star <= 50.0 && d.alpha_hat < 0.5 && std::isfinite(d.lambda_hat) &&
                  d.max_reconstruction() <= 1e-8;
  return {ok, "t_star=" + fmt(d.t_star) + " alpha=" + fmt(d.alpha_hat) + " Lambda=" + fmt(d.lambda_hat) +
                  " reconstruction=" + fmt(d.max_reconstruction())};
}

// 8. Singular limit.
Outcome singular_limit() {
  const auto disc = make_discretization(Interval{0.0, 1.0}, 32);
  const oracle::DenseOps o = oracle::assemble(disc->mesh);
  const double c = -1.0, T = 5.0;
  const auto f = Nonlinearity::polynomial({0.0, c});
  std::mt19937_64 rng(8);
  const Vec u0 = random_smooth_field(disc->mesh, rng);
  const auto par = oracle::LinearFlow(o, 0.0, c).at(T, u0).first;
  const auto par_num = solve_parabolic(disc, f, ParState{u0, 0.0}, {T, 1e-3, 1000000}).u.back();
  std::vector<double> eps_list{0.2, 0.1, 0.05, 0.025}, dist, dist_exact;
  double agree = 0.0;
  for (double eps : eps_list) {
    const Vec v0 = parabolic_velocity(*disc, f, u0);
    const auto hyp = oracle::LinearFlow(o, eps, c).at(T, u0, v0).first;
    const auto num = solve_hyperbolic(disc, f, HypState{u0, v0, 0.0, eps}, {T, 1e-3, 1000000}).u.back();
    dist.push_back(disc->norms.h1(num - par_num));
    dist_exact.push_back(disc->norms.h1(hyp - par));
    agree = std::max(agree, rel(dist.back(), dist_exact.back()));
  }
  const double order = slope_loglog(eps_list, dist);
  const double order_exact = slope_loglog(eps_list, dist_exact);

  const auto dw = Nonlinearity::double_well(1.0);
  SeedOptions so;
  so.n_seeds = 6;
  so.seed = 9;
  const auto sweep = semicontinuity_sweep(disc, dw, {0.5, 0.1, 0.02}, so, {5.0, 5.0, 1e-2, 10});
  std::ostringstream os;
  os << "order=" << fmt(order) << " oracle_order=" << fmt(order_exact) << " oracle_rel=" << fmt(agree);
  for (const auto& r : sweep.rows) os << " dist(" << r.eps << ")=" << fmt(r.distance);
  const bool ok = order >= 1.0 && agree <= 0.05 && sweep.rows.size() == 3 &&
                  sweep.rows.back().distance < sweep.rows.front().distance;
  return {ok, os.str()};
}

// 9. Temporal order of both steppers. Step sizes resolve the fastest mode of
// the n = 16 mesh, where the asymptotic regime starts.
Outcome scheme_order() {
  const auto disc = make_discretization(Interval{0.0, 1.0}, 16);
  const oracle::DenseOps o = oracle::assemble(disc->mesh);
  std::mt19937_64 rng(10);
  const Vec u0 = random_smooth_field(disc->mesh, rng), v0 = random_smooth_field(disc->mesh, rng);
  const double c = 0.5, T = 1.0;
  const auto lin = Nonlinearity::polynomial({0.0, c});
  const auto hyp = oracle::LinearFlow(o, 0.5, c).at(T, u0, v0);
  const auto par = oracle::LinearFlow(o, 0.0, c).at(T, u0).first;
  double eh[2], ep[2];
  int i = 0;
  for (double dt : {0.005, 0.0025}) {
    const auto rh = solve_hyperbolic(disc, lin, HypState{u0, v0, 0.0, 0.5}, {T, dt, 1000000});
    eh[i] = (rh.u.back() - hyp.first).cwiseAbs().maxCoeff() + (rh.v.back() - hyp.second).cwiseAbs().maxCoeff();
    ep[i] = (solve_parabolic(disc, lin, ParState{u0, 0.0}, {T, dt, 1000000}).u.back() - par).cwiseAbs().maxCoeff();
    ++i;
  }
  const double oh = std::log2(eh[0] / eh[1]), op = std::log2(ep[0] / ep[1]);

  // Nonlinear: dt-halving self-convergence.
  const auto dw = Nonlinearity::double_well(1.0);
  TrajectoryOptions opt{T, 0.005, 1000000};
  opt.newton.tol = 1e-13;
  std::vector<Vec> hu, pu;
  for (double dt : {0.005, 0.0025, 0.00125}) {
    opt.dt = dt;
    hu.push_back(solve_hyperbolic(disc, dw, HypState{2.0 * u0, v0, 0.0, 1.0}, opt).u.back());
    pu.push_back(solve_parabolic(disc, dw, ParState{2.0 * u0, 0.0}, opt).u.back());
  }
  const auto ord = [](const std::vector<Vec>& x) {
    return std::log2((x[0] - x[1]).cwiseAbs().maxCoeff() / (x[1] - x[2]).cwiseAbs().maxCoeff());
  };
  const double nh = ord(hu), np = ord(pu);
  const auto in = [](double q) { return q >= 1.9 && q <= 2.1; };
  return {in(oh) && in(op) && in(nh) && in(np), "hyperbolic_linear=" + fmt(oh) + " parabolic_linear=" + fmt(op) +
                                                    " hyperbolic_dw=" + fmt(nh) + " parabolic_dw=" + fmt(np)};
}

// 10. Same config and seed, same bytes.
Outcome determinism() {
  const std::string text =
      "domain = interval(0, 1)\nn = 32\neps = 0.5\nT = 2\ndt = 0.01\nstride = 5\nseed = 10\n";
  const auto cfg = parse_config(text, "determinism");
  const fs::path base = fs::temp_directory_path() / "rlxa_acceptance_det";
  std::string bytes[2][2];
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = base / std::to_string(run);
    fs::remove_all(dir);
    fs::create_directories(dir);
    cmd_solve(cfg, {dir.string()});
    cmd_split(cfg, {dir.string()});
    int k = 0;
    for (const char* name : {"trajectory.rlxa", "split.rlxa"}) {
      std::ifstream in(dir / name, std::ios::binary);
      std::ostringstream os;
      os << in.rdbuf();
      bytes[run][k++] = os.str();
    }
  }
  const bool ok = !bytes[0][0].empty() && bytes[0][0] == bytes[1][0] && bytes[0][1] == bytes[1][1];
  return {ok, "snapshot_bytes=" + std::to_string(bytes[0][0].size()) + "+" + std::to_string(bytes[0][1].size())};
}

}  // namespace

int main() {
  set_log_level(LogLevel::error);
  struct Criterion {
    int id;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, 10.0, energy_identity}, {2, 5.0, assembly_oracles}, {3, 10.0, poincare},  {4, 300.0, absorbing},
      {5, 300.0, splitting},      {6, 5.0, gronwall},         {7, 120.0, smoothing}, {8, 600.0, singular_limit},
      {9, 60.0, scheme_order},    {10, 60.0, determinism},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = out.ok && secs < c.limit_s;
    if (!pass) ++failed;
    std::printf("criterion %d: %s (%.2fs, limit %.0fs) %s\n", c.id, pass ? "PASS" : "FAIL", secs, c.limit_s,
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
