#pragma once

#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "rlxa/mesh.hpp"
#include "rlxa/nonlinearity.hpp"

namespace rlxa {

/// (u, u_t) for ε > 0.
struct HypState {
  Vec u;
  Vec v;
  double t = 0.0;
  double eps = 1.0;
};

/// Parabolic state. Boundary nodal values of `u` carry the trace γ; at t = 0
/// they may hold mismatched data γ₀ (see make_parabolic_state).
struct ParState {
  Vec u;
  double t = 0.0;
};

struct StepReport {
  double t = 0.0;
  double energy = 0.0;       // ‖u‖₁² + ε‖v‖² + 2∫F(u), lumped F
  double dissipation = 0.0;  // 2Δt(‖v_mid‖² + ‖v_mid‖²_{L²(Γ)})
  double residual = 0.0;
  int newton_iters = 0;

  /// E(tⁿ⁺¹) − E(tⁿ) + dissipation, given E(tⁿ).
  [[nodiscard]] double balance_defect(double previous_energy) const { return energy - previous_energy + dissipation; }
};

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 30;
};

class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, double t, double dt, double residual)
      : std::runtime_error(what), t_(t), dt_(dt), residual_(residual) {}
  [[nodiscard]] double time() const { return t_; }
  [[nodiscard]] double dt() const { return dt_; }
  [[nodiscard]] double residual() const { return residual_; }

 private:
  double t_;
  double dt_;
  double residual_;
};

/// Implicit-midpoint integrator for the damped family
///
///   ε M ẍ + (M + M_Γ) ẋ + (K + M_Γ) x + L[g(x) + c∘x + s] = 0,
///
/// where L is the lumped mass, g is a polynomial evaluated by its
/// average-vector-field quotient, c an optional nodal potential and s an
/// optional nodal source, both given at the midpoint. ε = 0 selects the
/// first-order (parabolic) system. Each instance caches factorizations, so
/// give every concurrently running trajectory its own stepper.
class MidpointStepper {
 public:
  /// g == nullptr gives a linear system, solved with a cached factorization.
  MidpointStepper(std::shared_ptr<const Discretization> disc, double eps, const Nonlinearity* g,
                  NewtonOptions opts = {});

  struct Result {
    Vec x;
    Vec y;       // velocity at tⁿ⁺¹ (ε > 0) or the midpoint velocity (ε = 0)
    Vec y_mid;   // (xⁿ⁺¹ − xⁿ)/Δt
    Vec g_avg;   // nodal AVF values of g (empty for linear systems)
    double residual = 0.0;
    int iters = 0;
    bool converged = false;
  };

  /// `shifted` selects ψ = f + βs instead of f for the nonlinear term.
  void use_shifted(bool shifted) { shifted_ = shifted; }

  Result step(const Vec& x, const Vec& y, double dt, const Vec* source_mid = nullptr,
              const Vec* potential_mid = nullptr);

  [[nodiscard]] double eps() const { return eps_; }
  [[nodiscard]] const Discretization& disc() const { return *disc_; }

 private:
  [[nodiscard]] double g_avg(double a, double b) const;
  [[nodiscard]] double g_avg_db(double a, double b) const;
  void prepare(double dt);
  void factorize(const SpMat& j);

  std::shared_ptr<const Discretization> disc_;
  double eps_;
  const Nonlinearity* g_;
  NewtonOptions opts_;
  bool shifted_ = false;
  SpMat damping_;
  SpMat robin_;
  double cached_dt_ = -1.0;
  SpMat base_;
  Eigen::SparseLU<SpMat> lu_;
  bool pattern_ready_ = false;
  bool linear_factored_ = false;
};

/// Lumped potential Σᵢ mᵢ F(uᵢ).
double potential_energy(const Discretization& disc, const Nonlinearity& f, const Vec& u);

/// ‖u‖₁² + ε‖v‖² + 2Σ mᵢF(uᵢ) (ε = 0 drops the velocity term).
double discrete_energy(const Discretization& disc, const Nonlinearity& f, const Vec& u, const Vec& v, double eps);

std::pair<HypState, StepReport> step_hyperbolic(std::shared_ptr<const Discretization> disc, const HypState& state,
                                                double dt, const Nonlinearity& f, NewtonOptions opts = {});
std::pair<ParState, StepReport> step_parabolic(std::shared_ptr<const Discretization> disc, const ParState& state,
                                               double dt, const Nonlinearity& f, NewtonOptions opts = {});

/// Parabolic velocity a(u) = −(M + M_Γ)⁻¹((K + M_Γ)u + L f(u)). It equals
/// Δ_h u − f(u) when the Laplacian flux is closed with the boundary law
/// ∂ₙu = −u − u_t, so it doubles as the well-prepared hyperbolic velocity.
Vec parabolic_velocity(const Discretization& disc, const Nonlinearity& f, const Vec& u);

/// Boundary nodes take γ₀, interior nodes take u₀.
ParState make_parabolic_state(const Discretization& disc, const Vec& u0, const Vec& gamma0);

struct TrajectoryOptions {
  double T = 1.0;
  double dt = 1e-2;
  int sample_stride = 1;
  int max_halvings = 5;
  NewtonOptions newton;
};

struct StepView {
  double t;
  const Vec& u;
  const Vec& v;
  const Vec& v_mid;
  const StepReport& report;
};

using StepObserver = std::function<void(const StepView&)>;

struct TrajectoryRecord {
  bool hyperbolic = true;
  double eps = 0.0;
  double dt = 0.0;
  double initial_energy = 0.0;
  std::vector<double> times;  // sample times
  std::vector<Vec> u;
  std::vector<Vec> v;  // velocity samples (parabolic: latest midpoint velocity, a(u₀) at t = 0)
  std::vector<StepReport> steps;

  [[nodiscard]] double cumulative_defect() const;
  [[nodiscard]] double max_step_defect() const;
};

TrajectoryRecord solve_hyperbolic(std::shared_ptr<const Discretization> disc, const Nonlinearity& f,
                                  const HypState& init, const TrajectoryOptions& opts,
                                  const StepObserver& observer = {});
TrajectoryRecord solve_parabolic(std::shared_ptr<const Discretization> disc, const Nonlinearity& f,
                                 const ParState& init, const TrajectoryOptions& opts,
                                 const StepObserver& observer = {});

struct DependenceResult {
  bool defined = false;          // false when the two initial states coincide
  double rate = 0.0;             // ν̂ = sup_t log(‖Δφ(t)‖²/‖Δφ(0)‖²)/t
  double lhs_rate = 0.0;         // same with the dissipation integral added
  double lipschitz_bound = 0.0;  // Q(R) from the pointwise Lipschitz bound of f
  std::vector<double> times;
  std::vector<double> diff_sq;
  std::vector<double> dissipation_integral;
};

/// `lambda` is the Poincaré constant of the mesh (see poincare_constant).
DependenceResult continuous_dependence_experiment(std::shared_ptr<const Discretization> disc, const Nonlinearity& f,
                                                  const HypState& a, const HypState& b,
                                                  const TrajectoryOptions& opts, double lambda);

/// Smooth random field: a few low cosine/sine modes with normal coefficients.
Vec random_smooth_field(const Mesh& mesh, std::mt19937_64& rng, int modes = 4);

/// Random (u₀, u₁) scaled to ‖·‖_{ℋ_ε} = norm.
HypState random_hyp_state(const Discretization& disc, std::mt19937_64& rng, double norm, double eps);

/// c_m with ‖u‖²_L ≤ c_m‖u‖²: the largest eigenvalue of M⁻¹L. Dense for
/// small meshes, otherwise the element bound dim + 2.
double lumped_mass_ratio(const Discretization& disc);

}  // namespace rlxa
