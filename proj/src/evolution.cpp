#include "rlxa/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace rlxa {

MidpointStepper::MidpointStepper(std::shared_ptr<const Discretization> disc, double eps, const Nonlinearity* g,
                                 NewtonOptions opts)
    : disc_(std::move(disc)), eps_(eps), g_(g), opts_(opts) {
  if (!disc_) throw std::invalid_argument("MidpointStepper: null discretization");
  if (!(eps_ >= 0.0)) throw std::invalid_argument("MidpointStepper: eps must be >= 0");
  if (!(opts_.tol > 0.0) || opts_.max_iter < 1) throw std::invalid_argument("MidpointStepper: bad Newton options");
  damping_ = disc_->ops.damping();
  robin_ = disc_->ops.robin();
}

double MidpointStepper::g_avg(double a, double b) const { return shifted_ ? g_->psi_avg(a, b) : g_->f_avg(a, b); }

double MidpointStepper::g_avg_db(double a, double b) const {
  return shifted_ ? g_->psi_avg_db(a, b) : g_->f_avg_db(a, b);
}

void MidpointStepper::prepare(double dt) {
  if (dt == cached_dt_) return;
  base_ = damping_ / dt + 0.5 * robin_;
  if (eps_ > 0.0) base_ += (2.0 * eps_ / (dt * dt)) * disc_->ops.mass;
  base_.makeCompressed();
  cached_dt_ = dt;
  linear_factored_ = false;
}

void MidpointStepper::factorize(const SpMat& j) {
  if (!pattern_ready_) {
    lu_.analyzePattern(j);
    pattern_ready_ = true;
  }
  lu_.factorize(j);
  if (lu_.info() != Eigen::Success) throw std::runtime_error("MidpointStepper: Jacobian factorization failed");
}

MidpointStepper::Result MidpointStepper::step(const Vec& x, const Vec& y, double dt, const Vec* source_mid,
                                              const Vec* potential_mid) {
  if (!(dt > 0.0)) throw std::invalid_argument("MidpointStepper: dt must be positive");
  const auto& norms = disc_->norms;
  norms.check_size(x);
  norms.check_size(y);
  if (source_mid) norms.check_size(*source_mid);
  if (potential_mid) norms.check_size(*potential_mid);
  prepare(dt);

  const Vec& m = disc_->ops.lumped_mass;
  const SpMat& mass = disc_->ops.mass;
  const int n = static_cast<int>(x.size());

  Result r;
  r.x = x + dt * y;
  if (g_) r.g_avg.resize(n);
  bool step_factored = false;
  for (int it = 0;; ++it) {
    const Vec z = r.x - x;
    const Vec xm = 0.5 * (x + r.x);
    const Vec t_damp = damping_ * z / dt;
    const Vec t_robin = robin_ * xm;
    Vec res = t_damp + t_robin;
    // z = xⁿ⁺¹ − xⁿ carries a rounding error of order |xⁿ|, amplified by 1/Δt and 1/Δt².
    const Vec xabs = x.cwiseAbs() + r.x.cwiseAbs();
    Vec size = t_damp.cwiseAbs() + t_robin.cwiseAbs() + (damping_ * xabs) / dt;
    if (eps_ > 0.0) {
      const Vec t_inertia = (2.0 * eps_ / (dt * dt)) * (mass * (z - dt * y));
      res += t_inertia;
      size += t_inertia.cwiseAbs() + (2.0 * eps_ / dt) * (mass * y).cwiseAbs() +
              (2.0 * eps_ / (dt * dt)) * (mass * xabs);
    }
    Vec nodal = Vec::Zero(n);
    if (g_) {
      for (int i = 0; i < n; ++i) r.g_avg[i] = g_avg(x[i], r.x[i]);
      nodal += r.g_avg;
    }
    if (potential_mid) nodal += potential_mid->cwiseProduct(xm);
    if (source_mid) nodal += *source_mid;
    res += m.cwiseProduct(nodal);
    size += m.cwiseProduct(nodal.cwiseAbs());
    r.residual = norms.dual_norm(res);
    r.iters = it;
    if (!std::isfinite(r.residual)) break;
    // Below the round-off floor of the residual evaluation no iterate can do better.
    const double floor = 32.0 * std::numeric_limits<double>::epsilon() * norms.dual_norm(size);
    if (r.residual <= std::max(opts_.tol, floor)) {
      r.converged = true;
      break;
    }
    if (it >= opts_.max_iter) break;

    if (g_) {
      Vec d(n);
      for (int i = 0; i < n; ++i) d[i] = g_avg_db(x[i], r.x[i]);
      if (potential_mid) d += 0.5 * *potential_mid;
      SpMat j = base_;
      j.diagonal() += m.cwiseProduct(d);
      factorize(j);
    } else if (potential_mid) {
      if (!step_factored) {
        SpMat j = base_;
        j.diagonal() += 0.5 * m.cwiseProduct(*potential_mid);
        factorize(j);
        step_factored = true;
        linear_factored_ = false;
      }
    } else if (!linear_factored_) {
      factorize(base_);
      linear_factored_ = true;
    }
    r.x -= lu_.solve(res);
  }
  r.y_mid = (r.x - x) / dt;
  r.y = (eps_ > 0.0) ? Vec(2.0 * r.y_mid - y) : r.y_mid;
  return r;
}

double potential_energy(const Discretization& disc, const Nonlinearity& f, const Vec& u) {
  const Vec& m = disc.ops.lumped_mass;
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i) s += m[i] * f.F(u[i]);
  return s;
}

double discrete_energy(const Discretization& disc, const Nonlinearity& f, const Vec& u, const Vec& v, double eps) {
  double e = disc.norms.h1_sq(u) + 2.0 * potential_energy(disc, f, u);
  if (eps > 0.0) e += eps * disc.norms.l2_sq(v);
  return e;
}

namespace {

double dissipation_increment(const Discretization& disc, const Vec& v_mid, double dt) {
  return 2.0 * dt * (disc.norms.l2_sq(v_mid) + disc.norms.boundary_sq(v_mid));
}

std::string failure_message(double t, double dt, const MidpointStepper::Result& r) {
  std::ostringstream os;
  os << "Newton failed at t = " << t << " with dt = " << dt << ": residual " << r.residual << " after " << r.iters
     << " iterations";
  return os.str();
}

StepReport make_report(const Discretization& disc, const Nonlinearity& f, double eps, double t, double dt,
                       const MidpointStepper::Result& r) {
  StepReport rep;
  rep.t = t;
  rep.energy = discrete_energy(disc, f, r.x, r.y, eps);
  rep.dissipation = dissipation_increment(disc, r.y_mid, dt);
  rep.residual = r.residual;
  rep.newton_iters = r.iters;
  return rep;
}

struct Marcher {
  const Discretization& disc;
  const Nonlinearity& f;
  MidpointStepper& stepper;
  double eps;
  TrajectoryRecord& rec;
  const StepObserver& observer;
  Vec x, y, y_mid;
  double t = 0.0;

  // Advances by dt, splitting into halves on Newton failure.
  void advance(double dt, int halvings_left) {
    auto r = stepper.step(x, y, dt);
    if (!r.converged) {
      if (halvings_left <= 0) throw StepFailure(failure_message(t, dt, r), t, dt, r.residual);
      advance(0.5 * dt, halvings_left - 1);
      advance(0.5 * dt, halvings_left - 1);
      return;
    }
    t += dt;
    const StepReport rep = make_report(disc, f, eps, t, dt, r);
    x = std::move(r.x);
    y = std::move(r.y);
    y_mid = std::move(r.y_mid);
    rec.steps.push_back(rep);
    if (observer) observer(StepView{t, x, y, y_mid, rec.steps.back()});
  }
};

TrajectoryRecord march(std::shared_ptr<const Discretization> disc, const Nonlinearity& f, double eps, const Vec& u0,
                       const Vec& v0, double t0, const TrajectoryOptions& opts, const StepObserver& observer) {
  if (!(opts.T >= 0.0)) throw std::invalid_argument("solve: T must be >= 0");
  if (!(opts.dt > 0.0)) throw std::invalid_argument("solve: dt must be positive");
  if (opts.sample_stride < 1) throw std::invalid_argument("solve: sample_stride must be >= 1");
  TrajectoryRecord rec;
  rec.hyperbolic = eps > 0.0;
  rec.eps = eps;
  rec.initial_energy = discrete_energy(*disc, f, u0, v0, eps);
  rec.times.push_back(t0);
  rec.u.push_back(u0);
  rec.v.push_back(v0);
  const long n_steps = opts.T > 0.0 ? static_cast<long>(std::ceil(opts.T / opts.dt - 1e-9)) : 0;
  rec.dt = n_steps > 0 ? opts.T / static_cast<double>(n_steps) : opts.dt;
  if (n_steps == 0) return rec;

  MidpointStepper stepper(disc, eps, &f, opts.newton);
  Marcher mr{*disc, f, stepper, eps, rec, observer, u0, v0, Vec::Zero(u0.size()), t0};
  for (long k = 1; k <= n_steps; ++k) {
    mr.advance(rec.dt, opts.max_halvings);
    mr.t = t0 + static_cast<double>(k) * rec.dt;  // drop round-off from substeps
    if (k % opts.sample_stride == 0 || k == n_steps) {
      rec.times.push_back(mr.t);
      rec.u.push_back(mr.x);
      rec.v.push_back(mr.y);
    }
  }
  return rec;
}

}  // namespace

std::pair<HypState, StepReport> step_hyperbolic(std::shared_ptr<const Discretization> disc, const HypState& state,
                                                double dt, const Nonlinearity& f, NewtonOptions opts) {
  if (!(state.eps > 0.0)) throw std::invalid_argument("step_hyperbolic: eps must be positive");
  MidpointStepper st(disc, state.eps, &f, opts);
  auto r = st.step(state.u, state.v, dt);
  if (!r.converged) throw StepFailure(failure_message(state.t, dt, r), state.t, dt, r.residual);
  StepReport rep = make_report(*disc, f, state.eps, state.t + dt, dt, r);
  return {HypState{std::move(r.x), std::move(r.y), state.t + dt, state.eps}, rep};
}

std::pair<ParState, StepReport> step_parabolic(std::shared_ptr<const Discretization> disc, const ParState& state,
                                               double dt, const Nonlinearity& f, NewtonOptions opts) {
  MidpointStepper st(disc, 0.0, &f, opts);
  auto r = st.step(state.u, Vec::Zero(state.u.size()), dt);
  if (!r.converged) throw StepFailure(failure_message(state.t, dt, r), state.t, dt, r.residual);
  StepReport rep = make_report(*disc, f, 0.0, state.t + dt, dt, r);
  return {ParState{std::move(r.x), state.t + dt}, rep};
}

Vec parabolic_velocity(const Discretization& disc, const Nonlinearity& f, const Vec& u) {
  disc.norms.check_size(u);
  const Vec& m = disc.ops.lumped_mass;
  Vec fu(u.size());
  for (int i = 0; i < u.size(); ++i) fu[i] = f.f(u[i]);
  const Vec rhs = -(disc.ops.robin() * u + m.cwiseProduct(fu));
  Eigen::SimplicialLDLT<SpMat> solver(disc.ops.damping());
  if (solver.info() != Eigen::Success) throw std::runtime_error("parabolic_velocity: factorization failed");
  return solver.solve(rhs);
}

ParState make_parabolic_state(const Discretization& disc, const Vec& u0, const Vec& gamma0) {
  disc.norms.check_size(u0);
  disc.norms.check_size(gamma0);
  ParState s{u0, 0.0};
  for (int i : disc.mesh.boundary_nodes) s.u[i] = gamma0[i];
  return s;
}

double TrajectoryRecord::cumulative_defect() const {
  if (steps.empty()) return 0.0;
  double diss = 0.0;
  for (const auto& s : steps) diss += s.dissipation;
  return steps.back().energy + diss - initial_energy;
}

double TrajectoryRecord::max_step_defect() const {
  double worst = 0.0;
  double prev = initial_energy;
  for (const auto& s : steps) {
    worst = std::max(worst, std::abs(s.balance_defect(prev)));
    prev = s.energy;
  }
  return worst;
}

TrajectoryRecord solve_hyperbolic(std::shared_ptr<const Discretization> disc, const Nonlinearity& f,
                                  const HypState& init, const TrajectoryOptions& opts, const StepObserver& observer) {
  if (!(init.eps > 0.0)) throw std::invalid_argument("solve_hyperbolic: eps must be positive");
  disc->norms.check_size(init.u);
  disc->norms.check_size(init.v);
  return march(std::move(disc), f, init.eps, init.u, init.v, init.t, opts, observer);
}

TrajectoryRecord solve_parabolic(std::shared_ptr<const Discretization> disc, const Nonlinearity& f,
                                 const ParState& init, const TrajectoryOptions& opts, const StepObserver& observer) {
  const Vec v0 = parabolic_velocity(*disc, f, init.u);
  return march(std::move(disc), f, 0.0, init.u, v0, init.t, opts, observer);
}

DependenceResult continuous_dependence_experiment(std::shared_ptr<const Discretization> disc, const Nonlinearity& f,
                                                  const HypState& a, const HypState& b,
                                                  const TrajectoryOptions& opts, double lambda) {
  if (a.eps != b.eps) throw std::invalid_argument("continuous_dependence_experiment: eps mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("continuous_dependence_experiment: lambda must be positive");
  TrajectoryOptions o = opts;
  o.sample_stride = 1;
  o.max_halvings = 0;  // both runs must share one time grid
  const auto ra = solve_hyperbolic(disc, f, a, o);
  const auto rb = solve_hyperbolic(disc, f, b, o);
  const auto& norms = disc->norms;
  const double eps = a.eps;

  DependenceResult out;
  double s_max = 0.0;
  double integral = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  double best_lhs = best;
  for (std::size_t k = 0; k < ra.times.size(); ++k) {
    s_max = std::max({s_max, ra.u[k].cwiseAbs().maxCoeff(), rb.u[k].cwiseAbs().maxCoeff()});
    const Vec du = ra.u[k] - rb.u[k];
    const Vec dv = ra.v[k] - rb.v[k];
    const double d = norms.hyp_sq(du, dv, eps);
    if (k > 0) {
      const Vec dmid = (du - (ra.u[k - 1] - rb.u[k - 1])) / ra.dt;
      integral += dissipation_increment(*disc, dmid, ra.dt);
    }
    out.times.push_back(ra.times[k]);
    out.diff_sq.push_back(d);
    out.dissipation_integral.push_back(integral);
  }
  const double d0 = out.diff_sq.front();
  out.defined = d0 > 0.0;
  if (out.defined) {
    for (std::size_t k = 1; k < out.times.size(); ++k) {
      const double t = out.times[k] - out.times.front();
      if (out.diff_sq[k] > 0.0) best = std::max(best, std::log(out.diff_sq[k] / d0) / t);
      best_lhs = std::max(best_lhs, std::log((out.diff_sq[k] + out.dissipation_integral[k]) / d0) / t);
    }
    out.rate = std::isfinite(best) ? best : 0.0;
    out.lhs_rate = std::isfinite(best_lhs) ? best_lhs : 0.0;
  }
  const double lf = f.lipschitz_on(s_max);
  const double cm = lumped_mass_ratio(*disc);
  out.lipschitz_bound = lf * lf * cm * cm / (2.0 * lambda);
  return out;
}

Vec random_smooth_field(const Mesh& mesh, std::mt19937_64& rng, int modes) {
  if (modes < 1) throw std::invalid_argument("random_smooth_field: modes must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  double lo[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  double hi[2] = {-lo[0], -lo[1]};
  for (const auto& p : mesh.nodes) {
    for (int d = 0; d < 2; ++d) {
      lo[d] = std::min(lo[d], p[d]);
      hi[d] = std::max(hi[d], p[d]);
    }
  }
  const auto unit = [&](double x, int d) { return hi[d] > lo[d] ? (x - lo[d]) / (hi[d] - lo[d]) : 0.0; };
  const int n = mesh.num_nodes();
  Vec u = Vec::Zero(n);
  const double pi = std::acos(-1.0);
  if (mesh.dim == 1) {
    for (int k = 0; k < modes; ++k) {
      const double a = normal(rng) / (1.0 + k), b = normal(rng) / (1.0 + k);
      for (int i = 0; i < n; ++i) {
        const double x = unit(mesh.nodes[i][0], 0);
        u[i] += a * std::cos(k * pi * x) + b * std::sin((k + 1) * pi * x);
      }
    }
  } else {
    for (int k = 0; k < modes; ++k) {
      for (int l = 0; l < modes; ++l) {
        const double a = normal(rng) / (1.0 + k + l), b = normal(rng) / (1.0 + k + l);
        for (int i = 0; i < n; ++i) {
          const double x = unit(mesh.nodes[i][0], 0), y = unit(mesh.nodes[i][1], 1);
          u[i] += a * std::cos(k * pi * x) * std::cos(l * pi * y) +
                  b * std::sin((k + 1) * pi * x) * std::sin((l + 1) * pi * y);
        }
      }
    }
  }
  return u;
}

HypState random_hyp_state(const Discretization& disc, std::mt19937_64& rng, double norm, double eps) {
  if (!(norm >= 0.0) || !(eps > 0.0)) throw std::invalid_argument("random_hyp_state: bad norm or eps");
  for (int attempt = 0; attempt < 16; ++attempt) {
    HypState s{random_smooth_field(disc.mesh, rng), random_smooth_field(disc.mesh, rng), 0.0, eps};
    const double q = disc.norms.hyp_sq(s.u, s.v, eps);
    if (q > 0.0) {
      const double scale = norm / std::sqrt(q);
      s.u *= scale;
      s.v *= scale;
      return s;
    }
  }
  throw std::runtime_error("random_hyp_state: could not draw a nonzero state");
}

double lumped_mass_ratio(const Discretization& disc) {
  const int n = disc.size();
  if (n > 400) return disc.mesh.dim + 2.0;
  // λ_max(M⁻¹L) = 1 / λ_min(L^{-1/2} M L^{-1/2}).
  const Vec s = disc.ops.lumped_mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd a = s.asDiagonal() * Eigen::MatrixXd(disc.ops.mass) * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return 1.0 / es.eigenvalues()[0];
}

}  // namespace rlxa
