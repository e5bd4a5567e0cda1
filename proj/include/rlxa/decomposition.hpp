#pragma once

#include <limits>
#include <memory>
#include <vector>

#include "rlxa/evolution.hpp"
#include "rlxa/functionals.hpp"

namespace rlxa {

struct SplitOptions {
  double T = 10.0;
  double dt = 1e-2;
  int sample_stride = 10;
  NewtonOptions newton;
  /// Also integrate h = w_t through the differentiated w-system.
  bool integrate_h = false;
};

/// Per-sample records of u, v = Z_ε(t)φ₀ and w = K_ε(t)φ₀.
struct SplitTrajectory {
  double eps = 0.0;
  double beta = 0.0;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Vec> u, u_t, v, v_t, w, w_t;
  std::vector<double> reconstruction;  // ‖u − (v + w)‖₁
  std::vector<double> z_norm;          // ‖(v, v_t)‖_{ℋ_ε}
  std::vector<double> k_regular;       // ‖(w, w_t)‖_{𝒟_ε}
  std::vector<double> W;               // W_ε(t)
  std::vector<double> V;               // V_ε(t)
  std::vector<double> Psi;             // Ψ_ε(t), only with integrate_h
  std::vector<Vec> h, h_t;             // only with integrate_h

  /// Every time step (not only samples): V_ε and ‖u_t‖² + ‖w_t‖².
  std::vector<double> step_times;
  std::vector<double> step_V;
  std::vector<double> step_velocity_sq;

  [[nodiscard]] double max_reconstruction() const;
  /// max over samples of ‖h − w_t‖₁ (requires integrate_h).
  [[nodiscard]] double h_crosscheck(const Discretization& disc) const;
};

/// Integrates u, then w with ψ = f + βs driven by βu, then v with source
/// ψ(u) − ψ(w), one time step at a time. β is params.beta() and must be ≥ ϑ.
SplitTrajectory solve_split(std::shared_ptr<const Discretization> disc, const Nonlinearity& f, const HypState& phi0,
                            const FunctionalParams& params, const SplitOptions& opts);

struct RegularityReport {
  double sup = 0.0;
  double sup_time = 0.0;
  std::vector<double> values;
};

/// sup over samples of ‖w‖₂,h + ‖w_t‖₁.
RegularityReport measure_K_regularity(const Discretization& disc, const SplitTrajectory& split);

struct LogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

/// Least squares for log(values) against t over samples with t ≥ t_from and values > 0.
LogFit fit_log_linear(const std::vector<double>& t, const std::vector<double>& values, double t_from = 0.0);

/// Fitted decay rate of ‖Z_ε(t)φ₀‖²_{ℋ_ε} over [t_from, T].
LogFit fit_z_decay(const SplitTrajectory& split, double t_from = 1.0);

struct DifferenceOptions {
  double t_max = 50.0;
  double dt = 1e-2;
  double scan_step = 0.5;
  bool stop_at_t_star = true;
  NewtonOptions newton;
};

struct DifferenceSplit {
  double eps = 0.0;
  double initial_norm = 0.0;        // ‖φ₀ − θ₀‖_{ℋ_ε}
  bool found = false;               // α̂ < 1/2 reached within t_max
  double t_star = std::numeric_limits<double>::quiet_NaN();
  double alpha_hat = std::numeric_limits<double>::quiet_NaN();
  double lambda_hat = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> times;        // scan grid
  std::vector<double> alpha_curve;  // ‖ū(t)‖_{ℋ_ε} / ‖φ₀ − θ₀‖
  std::vector<double> lambda_curve; // ‖v̄(t)‖_{𝒟_ε} / ‖φ₀ − θ₀‖
  std::vector<double> reconstruction;  // ‖ū + v̄ − (φ − θ)‖₁ on the grid
  std::vector<double> step_N;          // 𝒩_ε(ū) after every step, starting at t = 0
  Vec u_bar, u_bar_t, v_bar, v_bar_t;  // state at the last grid point

  [[nodiscard]] double max_reconstruction() const;
  /// max_n 𝒩(ū(tⁿ⁺¹)) − 𝒩(ū(tⁿ)), ≤ 0 up to round-off.
  [[nodiscard]] double max_N_increase() const;
};

/// ū: linear homogeneous system from φ₀ − θ₀; v̄: the same operator forced by
/// f(θ) − f(φ) from zero data. Both base trajectories are integrated alongside.
DifferenceSplit difference_split(std::shared_ptr<const Discretization> disc, const Nonlinearity& f,
                                 const HypState& phi0, const HypState& theta0, const DifferenceOptions& opts);

}  // namespace rlxa
