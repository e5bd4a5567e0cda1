#include "rlxa/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rlxa/parallel.hpp"

namespace rlxa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SpMat boundary_block(const Discretization& disc) {
  const auto& bn = disc.mesh.boundary_nodes;
  const int nb = static_cast<int>(bn.size());
  std::vector<int> pos(disc.size(), -1);
  for (int k = 0; k < nb; ++k) pos[bn[k]] = k;
  std::vector<Eigen::Triplet<double>> t;
  const SpMat& mg = disc.ops.boundary_mass;
  for (int c = 0; c < mg.outerSize(); ++c) {
    for (SpMat::InnerIterator it(mg, c); it; ++it) {
      if (pos[it.row()] >= 0 && pos[it.col()] >= 0 && it.value() != 0.0) {
        t.emplace_back(pos[it.row()], pos[it.col()], it.value());
      }
    }
  }
  SpMat b(nb, nb);
  b.setFromTriplets(t.begin(), t.end());
  return b;
}

Vec gather(const Vec& x, const std::vector<int>& idx) {
  Vec out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = x[idx[k]];
  return out;
}

// Squared distance; stops early once the partial sum exceeds `bound`. The
// summation order never changes, so full sums agree bit for bit.
double pair_sq(const Vec& a, const Vec& b, double bound) {
  const int n = static_cast<int>(a.size());
  const double* pa = a.data();
  const double* pb = b.data();
  double s = 0.0;
  int i = 0;
  while (i < n) {
    const int end = std::min(n, i + 16);
    for (; i < end; ++i) {
      const double d = pa[i] - pb[i];
      s += d * d;
    }
    if (s > bound) return s;
  }
  return s;
}

double semi_range(const std::vector<Vec>& a, const std::vector<Vec>& b, std::size_t lo, std::size_t hi) {
  double best = 0.0;
  std::size_t hint = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    double cur = kInf;
    std::size_t arg = hint;
    for (std::size_t k = 0; k < b.size(); ++k) {
      const std::size_t j = (hint + k) % b.size();
      const double d = pair_sq(a[i], b[j], cur);
      if (d < cur) {
        cur = d;
        arg = j;
      }
      if (cur <= best) break;
    }
    hint = arg;
    best = std::max(best, cur);
  }
  return best;
}

void check_clouds(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("semidistance: empty cloud");
  for (const auto* c : {&a, &b}) {
    for (const auto& x : *c) {
      if (x.size() != a.front().size()) throw std::invalid_argument("semidistance: clouds on different meshes");
    }
  }
}

}  // namespace

ExtState extend_hyperbolic(const Discretization& disc, const Vec& u, const Vec& u_t) {
  disc.norms.check_size(u);
  disc.norms.check_size(u_t);
  return ExtState{u, disc.boundary_part(u), u_t, disc.boundary_part(u_t)};
}

Vec boundary_flux(const Discretization& disc, const Vec& u, const Vec& laplacian_u) {
  const auto& bn = disc.mesh.boundary_nodes;
  const Vec r = disc.ops.stiffness * u + disc.ops.mass * laplacian_u;
  Eigen::SimplicialLDLT<SpMat> solver(boundary_block(disc));
  if (solver.info() != Eigen::Success) throw std::runtime_error("boundary_flux: boundary mass factorization failed");
  const Vec g = solver.solve(gather(r, bn));
  Vec out = Vec::Zero(u.size());
  for (std::size_t k = 0; k < bn.size(); ++k) out[bn[k]] = g[k];
  return out;
}

ExtState lift(const Discretization& disc, const Nonlinearity& f, const Vec& u) {
  const Vec a = parabolic_velocity(disc, f, u);
  Vec load(u.size());
  for (int i = 0; i < u.size(); ++i) load[i] = disc.ops.lumped_mass[i] * f.f(u[i]);
  // Δ_h u with the boundary law u_t = a closing the flux.
  const Vec lap = a + disc.norms.solve_mass(load);
  ExtState x;
  x.u = u;
  x.gamma = disc.boundary_part(u);
  x.v = a;
  x.delta = -boundary_flux(disc, u, lap) - x.gamma;
  return x;
}

double ext_norm_sq(const Discretization& disc, const ExtState& x, double eps) {
  return disc.norms.ext_sq(x.u, x.gamma, x.v, x.delta, eps);
}

ExtState ext_difference(const ExtState& a, const ExtState& b) {
  return ExtState{a.u - b.u, a.gamma - b.gamma, a.v - b.v, a.delta - b.delta};
}

CloudMetric::CloudMetric(const Discretization& disc) : boundary_nodes_(disc.mesh.boundary_nodes) {
  robin_.compute(disc.ops.robin());
  mass_.compute(disc.ops.mass);
  boundary_.compute(boundary_block(disc));
  if (robin_.info() != Eigen::Success || mass_.info() != Eigen::Success || boundary_.info() != Eigen::Success) {
    throw std::runtime_error("CloudMetric: Cholesky factorization failed");
  }
}

Vec CloudMetric::features(const ExtState& x) const {
  // P A Pᵀ = L Lᵀ, so xᵀ A x = ‖Lᵀ P x‖².
  const Vec fu = robin_.matrixU() * (robin_.permutationP() * x.u);
  const Vec fv = mass_.matrixU() * (mass_.permutationP() * x.v);
  const Vec fg = boundary_.matrixU() * (boundary_.permutationP() * gather(x.gamma, boundary_nodes_));
  const Vec fd = boundary_.matrixU() * (boundary_.permutationP() * gather(x.delta, boundary_nodes_));
  Vec out(fu.size() + fv.size() + fg.size() + fd.size());
  out << fu, fv, fg, fd;
  return out;
}

std::vector<Vec> CloudMetric::features(const Cloud& c) const {
  std::vector<Vec> out;
  out.reserve(c.points.size());
  for (const auto& p : c.points) out.push_back(features(p));
  return out;
}

double semidistance_features(const std::vector<Vec>& a, const std::vector<Vec>& b, int jobs) {
  check_clouds(a, b);
  const int slots = std::max(1, std::min<int>(jobs, static_cast<int>(a.size())));
  std::vector<double> best(slots, 0.0);
  const std::size_t chunk = (a.size() + slots - 1) / slots;
  parallel_for(slots, slots, [&](int s) {
    const std::size_t lo = s * chunk;
    const std::size_t hi = std::min(a.size(), lo + chunk);
    if (lo < hi) best[s] = semi_range(a, b, lo, hi);
  });
  return std::sqrt(*std::max_element(best.begin(), best.end()));
}

double semidistance_features_bruteforce(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  check_clouds(a, b);
  double best = 0.0;
  for (const auto& x : a) {
    double cur = kInf;
    for (const auto& y : b) cur = std::min(cur, pair_sq(x, y, kInf));
    best = std::max(best, cur);
  }
  return std::sqrt(best);
}

double semidistance(const Discretization& disc, const Cloud& a, const Cloud& b, int jobs) {
  if (a.points.empty() || b.points.empty()) throw std::invalid_argument("semidistance: empty cloud");
  const CloudMetric metric(disc);
  return semidistance_features(metric.features(a), metric.features(b), jobs);
}

double semidistance_bruteforce(const Discretization& disc, const Cloud& a, const Cloud& b) {
  if (a.points.empty() || b.points.empty()) throw std::invalid_argument("semidistance: empty cloud");
  const CloudMetric metric(disc);
  return semidistance_features_bruteforce(metric.features(a), metric.features(b));
}

double hausdorff(const Discretization& disc, const Cloud& a, const Cloud& b, int jobs) {
  if (a.points.empty() || b.points.empty()) throw std::invalid_argument("hausdorff: empty cloud");
  const CloudMetric metric(disc);
  const auto fa = metric.features(a);
  const auto fb = metric.features(b);
  return std::max(semidistance_features(fa, fb, jobs), semidistance_features(fb, fa, jobs));
}

HypState seed_state(const Discretization& disc, const Nonlinearity& f, double eps, const SeedOptions& s, int k) {
  if (s.levels.empty()) throw std::invalid_argument("seed_state: no norm levels");
  std::seed_seq seq{static_cast<std::uint64_t>(s.seed), static_cast<std::uint64_t>(k)};
  std::mt19937_64 rng(seq);
  const double level = s.levels[static_cast<std::size_t>(k) % s.levels.size()];
  const double e = eps > 0.0 ? eps : 1.0;
  if (s.velocity == Velocity::random) {
    HypState st = random_hyp_state(disc, rng, level, e);
    st.eps = eps;
    return st;
  }
  Vec u = random_smooth_field(disc.mesh, rng, s.modes);
  const double n1 = disc.norms.h1(u);
  if (n1 > 0.0) u *= level / n1;
  Vec v = s.velocity == Velocity::well_prepared ? parabolic_velocity(disc, f, u) : Vec::Zero(u.size());
  return HypState{std::move(u), std::move(v), 0.0, eps};
}

AbsorbingReport absorbing_radius(std::shared_ptr<const Discretization> disc, const Nonlinearity& f, double eps,
                                 const SeedOptions& seeds, const TrajectoryOptions& traj, int jobs) {
  if (!(eps > 0.0)) throw std::invalid_argument("absorbing_radius: eps must be positive");
  if (seeds.n_seeds < 1) throw std::invalid_argument("absorbing_radius: need at least one seed");
  std::vector<TrajectoryRecord> recs(seeds.n_seeds);
  parallel_for(seeds.n_seeds, jobs, [&](int k) {
    recs[k] = solve_hyperbolic(disc, f, seed_state(*disc, f, eps, seeds, k), traj);
  });
  AbsorbingReport rep;
  rep.eps = eps;
  rep.times = recs.front().times;
  bool finite = true;
  for (const auto& r : recs) {
    std::vector<double> c;
    for (std::size_t j = 0; j < r.times.size(); ++j) {
      c.push_back(disc->norms.hyp_sq(r.u[j], r.v[j], eps));
      if (!std::isfinite(c.back())) finite = false;
    }
    rep.initial_norms.push_back(std::sqrt(c.front()));
    const std::size_t tail = c.size() - std::max<std::size_t>(1, c.size() / 5);
    for (std::size_t j = tail; j < c.size(); ++j) rep.radius_sq = std::max(rep.radius_sq, c[j]);
    rep.curves.push_back(std::move(c));
  }
  const double ball = rep.radius_sq + 1.0;
  rep.absorbed = finite;
  std::vector<double> xs, ys;
  for (std::size_t s = 0; s < rep.curves.size(); ++s) {
    const auto& c = rep.curves[s];
    std::size_t j = c.size();
    while (j > 0 && c[j - 1] <= ball) --j;
    const double te = j < c.size() ? rep.times[j] : std::numeric_limits<double>::quiet_NaN();
    rep.entry_times.push_back(te);
    if (!(j < c.size()) || rep.times[j] > 0.8 * rep.times.back()) rep.absorbed = false;
    if (c.front() > ball && std::isfinite(te)) {
      xs.push_back(std::log(rep.initial_norms[s]));
      ys.push_back(te);
    }
  }
  if (xs.size() >= 2) {
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sxx += (xs[k] - mx) * (xs[k] - mx);
      sxy += (xs[k] - mx) * (ys[k] - my);
    }
    rep.entry_log_slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return rep;
}

Cloud omega_cloud(std::shared_ptr<const Discretization> disc, const Nonlinearity& f, double eps,
                  const SeedOptions& seeds, const CloudOptions& opts, int jobs) {
  if (!(eps >= 0.0)) throw std::invalid_argument("omega_cloud: eps must be >= 0");
  if (seeds.n_seeds < 1) throw std::invalid_argument("omega_cloud: need at least one seed");
  if (!(opts.t_transient >= 0.0) || !(opts.t_sample >= 0.0)) throw std::invalid_argument("omega_cloud: bad times");
  TrajectoryOptions traj;
  traj.T = opts.t_transient + opts.t_sample;
  traj.dt = opts.dt;
  traj.sample_stride = opts.stride;
  traj.newton = opts.newton;
  std::vector<TrajectoryRecord> recs(seeds.n_seeds);
  parallel_for(seeds.n_seeds, jobs, [&](int k) {
    const HypState s0 = seed_state(*disc, f, eps, seeds, k);
    if (eps > 0.0) {
      recs[k] = solve_hyperbolic(disc, f, s0, traj);
    } else {
      recs[k] = solve_parabolic(disc, f, ParState{s0.u, 0.0}, traj);
    }
  });
  Cloud c;
  c.eps = eps;
  c.seed = seeds.seed;
  const double t0 = opts.t_transient - 1e-9 * (1.0 + opts.t_transient);
  for (int k = 0; k < seeds.n_seeds; ++k) {
    const auto& r = recs[k];
    for (std::size_t j = 0; j < r.times.size(); ++j) {
      if (r.times[j] < t0) continue;
      c.points.push_back(eps > 0.0 ? extend_hyperbolic(*disc, r.u[j], r.v[j]) : lift(*disc, f, r.u[j]));
      c.times.push_back(r.times[j]);
      c.seed_index.push_back(k);
    }
  }
  if (c.points.empty()) throw std::logic_error("omega_cloud: no samples in the sampling window");
  return c;
}

SweepReport semicontinuity_sweep(std::shared_ptr<const Discretization> disc, const Nonlinearity& f,
                                 std::vector<double> eps_grid, SeedOptions seeds, const CloudOptions& opts, int jobs) {
  if (eps_grid.empty()) throw std::invalid_argument("semicontinuity_sweep: empty eps grid");
  for (double e : eps_grid) {
    if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("semicontinuity_sweep: eps must lie in (0, 1]");
  }
  std::sort(eps_grid.begin(), eps_grid.end(), std::greater<>());
  seeds.velocity = Velocity::well_prepared;
  const Cloud parabolic = omega_cloud(disc, f, 0.0, seeds, opts, jobs);
  const CloudMetric metric(*disc);
  const auto fb = metric.features(parabolic);
  SweepReport rep;
  for (double e : eps_grid) {
    const Cloud hyp = omega_cloud(disc, f, e, seeds, opts, jobs);
    SweepRow row;
    row.eps = e;
    row.distance = semidistance_features(metric.features(hyp), fb, jobs);
    row.n_a = hyp.size();
    row.n_b = parabolic.size();
    row.t_sample = opts.t_sample;
    rep.rows.push_back(row);
  }
  rep.monotone = true;
  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    if (rep.rows[k].distance > 1.2 * rep.rows[k - 1].distance) rep.monotone = false;
  }
  rep.final_below_first = rep.rows.back().distance < rep.rows.front().distance;
  return rep;
}

}  // namespace rlxa
