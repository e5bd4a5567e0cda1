#include "rlxa/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rlxa {

namespace {

void require_converged(const MidpointStepper::Result& r, const char* what, double t, double dt) {
  if (r.converged) return;
  std::ostringstream os;
  os << what << ": Newton failed at t = " << t << " (residual " << r.residual << ")";
  throw StepFailure(os.str(), t, dt, r.residual);
}

long steps_for(double T, double dt) {
  if (!(T >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("need T >= 0 and dt > 0");
  return T > 0.0 ? static_cast<long>(std::ceil(T / dt - 1e-9)) : 0;
}

}  // namespace

double SplitTrajectory::max_reconstruction() const {
  return reconstruction.empty() ? 0.0 : *std::max_element(reconstruction.begin(), reconstruction.end());
}

SplitTrajectory solve_split(std::shared_ptr<const Discretization> disc, const Nonlinearity& f, const HypState& phi0,
                            const FunctionalParams& params, const SplitOptions& opts) {
  if (!(phi0.eps > 0.0)) throw std::invalid_argument("solve_split: eps must be positive");
  if (opts.sample_stride < 1) throw std::invalid_argument("solve_split: sample_stride must be >= 1");
  const auto& nm = disc->norms;
  nm.check_size(phi0.u);
  nm.check_size(phi0.v);
  const double eps = phi0.eps;
  const double b = params.beta();
  const Nonlinearity fs = f.with_beta(b);
  const FunctionalParams p = params.with_eps(eps);
  const int n = disc->size();
  const Vec& m = disc->ops.lumped_mass;

  MidpointStepper su(disc, eps, &fs, opts.newton);
  MidpointStepper sw(disc, eps, &fs, opts.newton);
  sw.use_shifted(true);
  MidpointStepper sv(disc, eps, nullptr, opts.newton);
  MidpointStepper sh(disc, eps, nullptr, opts.newton);

  const double f0 = f.f(0.0);
  Vec xu = phi0.u, yu = phi0.v;
  Vec xw = Vec::Zero(n), yw = b * phi0.u - Vec::Constant(n, f0);
  Vec xv = phi0.u, yv = phi0.v + Vec::Constant(n, f0) - b * phi0.u;
  Vec xh, yh;
  if (opts.integrate_h) {
    // w_tt(0) from the discrete w-equation with w(0) = 0.
    const Vec rhs = -(disc->ops.damping() * yw) - m.cwiseProduct(Vec::Constant(n, fs.psi(0.0)) - b * phi0.u);
    xh = yw;
    yh = nm.solve_mass(rhs) / eps;
  }

  SplitTrajectory out;
  out.eps = eps;
  out.beta = b;
  const long n_steps = steps_for(opts.T, opts.dt);
  out.dt = n_steps > 0 ? opts.T / static_cast<double>(n_steps) : opts.dt;
  const double dt = out.dt;

  const auto sample = [&](double t) {
    out.times.push_back(t);
    out.u.push_back(xu);
    out.u_t.push_back(yu);
    out.v.push_back(xv);
    out.v_t.push_back(yv);
    out.w.push_back(xw);
    out.w_t.push_back(yw);
    out.reconstruction.push_back(nm.h1(xu - xv - xw));
    out.z_norm.push_back(std::sqrt(std::max(0.0, nm.hyp_sq(xv, yv, eps))));
    out.k_regular.push_back(nm.regular_norm(xw, yw));
    out.W.push_back(W_eps(*disc, f, xw, yw, xu, p));
    out.V.push_back(V_eps(*disc, f, xu, xw, xv, yv, p));
    if (opts.integrate_h) {
      out.h.push_back(xh);
      out.h_t.push_back(yh);
      out.Psi.push_back(Psi_eps(*disc, f, xh, yh, xw, p));
    }
  };
  const auto record_step = [&](double t) {
    out.step_times.push_back(t);
    out.step_V.push_back(V_eps(*disc, f, xu, xw, xv, yv, p));
    out.step_velocity_sq.push_back(nm.l2_sq(yu) + nm.l2_sq(yw));
  };

  sample(phi0.t);
  record_step(phi0.t);
  for (long k = 1; k <= n_steps; ++k) {
    const double t_prev = phi0.t + static_cast<double>(k - 1) * dt;
    auto ru = su.step(xu, yu, dt);
    require_converged(ru, "solve_split (u)", t_prev, dt);
    const Vec umid = 0.5 * (xu + ru.x);
    const Vec src_w = -b * umid;
    auto rw = sw.step(xw, yw, dt, &src_w);
    require_converged(rw, "solve_split (w)", t_prev, dt);
    const Vec src_v = ru.g_avg + b * umid - rw.g_avg;
    auto rv = sv.step(xv, yv, dt, &src_v);
    require_converged(rv, "solve_split (v)", t_prev, dt);
    if (opts.integrate_h) {
      const Vec wmid = 0.5 * (xw + rw.x);
      Vec c(n);
      for (int i = 0; i < n; ++i) c[i] = fs.psiprime(wmid[i]);
      const Vec src_h = -b * ru.y_mid;
      auto rh = sh.step(xh, yh, dt, &src_h, &c);
      require_converged(rh, "solve_split (h)", t_prev, dt);
      xh = std::move(rh.x);
      yh = std::move(rh.y);
    }
    xu = std::move(ru.x);
    yu = std::move(ru.y);
    xw = std::move(rw.x);
    yw = std::move(rw.y);
    xv = std::move(rv.x);
    yv = std::move(rv.y);
    const double t = phi0.t + static_cast<double>(k) * dt;
    record_step(t);
    if (k % opts.sample_stride == 0 || k == n_steps) sample(t);
  }
  return out;
}

double SplitTrajectory::h_crosscheck(const Discretization& disc) const {
  if (h.empty()) throw std::logic_error("h_crosscheck: trajectory was solved without integrate_h");
  double worst = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) worst = std::max(worst, disc.norms.h1(h[k] - w_t[k]));
  return worst;
}

RegularityReport measure_K_regularity(const Discretization& disc, const SplitTrajectory& split) {
  RegularityReport r;
  for (std::size_t k = 0; k < split.times.size(); ++k) {
    const double val = disc.norms.regular_norm(split.w[k], split.w_t[k]);
    r.values.push_back(val);
    if (val > r.sup) {
      r.sup = val;
      r.sup_time = split.times[k];
    }
  }
  return r;
}

LogFit fit_log_linear(const std::vector<double>& t, const std::vector<double>& values, double t_from) {
  if (t.size() != values.size()) throw std::invalid_argument("fit_log_linear: size mismatch");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] >= t_from && values[k] > 0.0 && std::isfinite(values[k])) {
      xs.push_back(t[k]);
      ys.push_back(std::log(values[k]));
    }
  }
  LogFit fit;
  fit.points = static_cast<int>(xs.size());
  if (xs.size() < 2) return fit;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  if (sxx <= 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

LogFit fit_z_decay(const SplitTrajectory& split, double t_from) {
  std::vector<double> sq(split.z_norm.size());
  for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = split.z_norm[k] * split.z_norm[k];
  return fit_log_linear(split.times, sq, t_from);
}

double DifferenceSplit::max_reconstruction() const {
  return reconstruction.empty() ? 0.0 : *std::max_element(reconstruction.begin(), reconstruction.end());
}

double DifferenceSplit::max_N_increase() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < step_N.size(); ++k) worst = std::max(worst, step_N[k] - step_N[k - 1]);
  return std::isfinite(worst) ? worst : 0.0;
}

DifferenceSplit difference_split(std::shared_ptr<const Discretization> disc, const Nonlinearity& f,
                                 const HypState& phi0, const HypState& theta0, const DifferenceOptions& opts) {
  if (phi0.eps != theta0.eps) throw std::invalid_argument("difference_split: eps mismatch");
  if (!(phi0.eps > 0.0)) throw std::invalid_argument("difference_split: eps must be positive");
  if (!(opts.scan_step > 0.0) || !(opts.dt > 0.0) || !(opts.t_max >= 0.0)) {
    throw std::invalid_argument("difference_split: bad options");
  }
  const auto& nm = disc->norms;
  const double eps = phi0.eps;

  DifferenceSplit out;
  out.eps = eps;
  Vec xp = phi0.u, yp = phi0.v, xt = theta0.u, yt = theta0.v;
  Vec xu = xp - xt, yu = yp - yt;
  Vec xv = Vec::Zero(xu.size()), yv = Vec::Zero(xu.size());
  out.initial_norm = std::sqrt(std::max(0.0, nm.hyp_sq(xu, yu, eps)));

  const long per_scan = std::max(1L, steps_for(opts.scan_step, opts.dt));
  const double dt = opts.scan_step / static_cast<double>(per_scan);
  const long n_scan = static_cast<long>(std::floor(opts.t_max / opts.scan_step + 1e-9));

  const auto grid_point = [&](double t) {
    out.times.push_back(t);
    const double den = out.initial_norm;
    out.alpha_curve.push_back(den > 0.0 ? std::sqrt(std::max(0.0, nm.hyp_sq(xu, yu, eps))) / den : 0.0);
    out.lambda_curve.push_back(den > 0.0 ? nm.regular_norm(xv, yv) / den : 0.0);
    out.reconstruction.push_back(nm.h1(xu + xv - (xp - xt)));
  };

  grid_point(0.0);
  out.step_N.push_back(N_eps(*disc, xu, yu, eps));
  if (out.initial_norm > 0.0) {
    MidpointStepper sp(disc, eps, &f, opts.newton);
    MidpointStepper st(disc, eps, &f, opts.newton);
    MidpointStepper su(disc, eps, nullptr, opts.newton);
    MidpointStepper sv(disc, eps, nullptr, opts.newton);
    for (long s = 1; s <= n_scan; ++s) {
      for (long k = 0; k < per_scan; ++k) {
        const double t_prev = (static_cast<double>((s - 1) * per_scan + k)) * dt;
        auto rp = sp.step(xp, yp, dt);
        require_converged(rp, "difference_split (phi)", t_prev, dt);
        auto rt = st.step(xt, yt, dt);
        require_converged(rt, "difference_split (theta)", t_prev, dt);
        const Vec src = rp.g_avg - rt.g_avg;
        auto ru = su.step(xu, yu, dt);
        require_converged(ru, "difference_split (u_bar)", t_prev, dt);
        auto rv = sv.step(xv, yv, dt, &src);
        require_converged(rv, "difference_split (v_bar)", t_prev, dt);
        xp = std::move(rp.x);
        yp = std::move(rp.y);
        xt = std::move(rt.x);
        yt = std::move(rt.y);
        xu = std::move(ru.x);
        yu = std::move(ru.y);
        xv = std::move(rv.x);
        yv = std::move(rv.y);
        out.step_N.push_back(N_eps(*disc, xu, yu, eps));
      }
      const double t = static_cast<double>(s) * opts.scan_step;
      grid_point(t);
      if (!out.found && out.alpha_curve.back() < 0.5) {
        out.found = true;
        out.t_star = t;
        out.alpha_hat = out.alpha_curve.back();
        out.lambda_hat = out.lambda_curve.back();
        if (opts.stop_at_t_star) break;
      }
    }
  }
  out.u_bar = xu;
  out.u_bar_t = yu;
  out.v_bar = xv;
  out.v_bar_t = yv;
  return out;
}

}  // namespace rlxa
