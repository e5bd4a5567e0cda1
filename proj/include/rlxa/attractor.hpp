#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "rlxa/evolution.hpp"

namespace rlxa {

/// (u, γ, v, δ) in 𝒳_ε. γ and δ are full-length nodal vectors that vanish
/// off the boundary.
struct ExtState {
  Vec u;
  Vec gamma;
  Vec v;
  Vec delta;
};

/// Hyperbolic state with its traces: (u, tr u, u_t, tr u_t).
ExtState extend_hyperbolic(const Discretization& disc, const Vec& u, const Vec& u_t);

/// Lift of a parabolic state: v is the discrete parabolic velocity a(u),
/// which equals Δ_h u − f(u) with the flux closed by the boundary law, and
/// δ = −∂ₙu − γ is its trace.
ExtState lift(const Discretization& disc, const Nonlinearity& f, const Vec& u);

/// Flux ∂ₙu read off the boundary residual of the discrete Laplacian,
/// divided by the lumped boundary mass. Zero at interior nodes.
Vec boundary_flux(const Discretization& disc, const Vec& u, const Vec& laplacian_u);

double ext_norm_sq(const Discretization& disc, const ExtState& x, double eps);
ExtState ext_difference(const ExtState& a, const ExtState& b);

struct Cloud {
  double eps = 1.0;       // 0 for the parabolic problem
  std::vector<ExtState> points;
  std::vector<double> times;
  std::vector<int> seed_index;
  std::uint64_t seed = 0;
  [[nodiscard]] std::size_t size() const { return points.size(); }
};

/// Whitened coordinates for ‖·‖_{𝒳₁}: ‖a − b‖_{𝒳₁} is the Euclidean distance
/// of feature vectors, built from sparse Cholesky factors of K + M_Γ, M and
/// the boundary block of M_Γ.
class CloudMetric {
 public:
  explicit CloudMetric(const Discretization& disc);
  [[nodiscard]] Vec features(const ExtState& x) const;
  [[nodiscard]] std::vector<Vec> features(const Cloud& c) const;

 private:
  Eigen::SimplicialLLT<SpMat> robin_;
  Eigen::SimplicialLLT<SpMat> mass_;
  Eigen::SimplicialLLT<SpMat> boundary_;
  std::vector<int> boundary_nodes_;
};

/// sup_{a∈A} inf_{b∈B} ‖a − b‖_{𝒳₁} with pruning; exact.
double semidistance(const Discretization& disc, const Cloud& a, const Cloud& b, int jobs = 1);
/// The plain double loop over the same pair distance.
double semidistance_bruteforce(const Discretization& disc, const Cloud& a, const Cloud& b);
double hausdorff(const Discretization& disc, const Cloud& a, const Cloud& b, int jobs = 1);

/// Pairwise versions over precomputed features.
double semidistance_features(const std::vector<Vec>& a, const std::vector<Vec>& b, int jobs = 1);
double semidistance_features_bruteforce(const std::vector<Vec>& a, const std::vector<Vec>& b);

enum class Velocity { well_prepared, zero, random };

struct SeedOptions {
  int n_seeds = 6;
  std::vector<double> levels{1.0, 5.0, 10.0};
  std::uint64_t seed = 1;
  Velocity velocity = Velocity::random;
  int modes = 4;
};

/// Deterministic initial state k: u₀ random smooth and scaled so that the
/// state norm equals levels[k % levels.size()].
HypState seed_state(const Discretization& disc, const Nonlinearity& f, double eps, const SeedOptions& s, int k);

struct AbsorbingReport {
  double eps = 0.0;
  double radius_sq = 0.0;          // P̂₀: sup over seeds of the tail of ‖φ(t)‖²_{ℋ_ε}
  bool absorbed = false;           // every curve ends inside radius P̂₀ + 1
  std::vector<double> entry_times; // first time after which ‖φ‖² ≤ P̂₀ + 1
  std::vector<double> initial_norms;
  std::vector<double> times;
  std::vector<std::vector<double>> curves;  // ‖φ(t)‖²_{ℋ_ε} per seed
  double entry_log_slope = 0.0;    // slope of entry time against log ‖φ₀‖
};

AbsorbingReport absorbing_radius(std::shared_ptr<const Discretization> disc, const Nonlinearity& f, double eps,
                                 const SeedOptions& seeds, const TrajectoryOptions& traj, int jobs = 1);

struct CloudOptions {
  double t_transient = 5.0;
  double t_sample = 5.0;
  double dt = 1e-2;
  int stride = 10;
  NewtonOptions newton;
};

/// eps = 0 runs the parabolic problem and lifts its states.
Cloud omega_cloud(std::shared_ptr<const Discretization> disc, const Nonlinearity& f, double eps,
                  const SeedOptions& seeds, const CloudOptions& opts, int jobs = 1);

struct SweepRow {
  double eps = 0.0;
  double distance = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double t_sample = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  /// Distance column non-increasing as ε decreases, within a 20% band.
  bool monotone = false;
  bool final_below_first = false;
};

/// dist_{𝒳₁}(𝔸_ε, 𝔸₀) for every ε in the grid (sorted descending), with
/// well-prepared hyperbolic data from the same seeds as the parabolic cloud.
SweepReport semicontinuity_sweep(std::shared_ptr<const Discretization> disc, const Nonlinearity& f,
                                 std::vector<double> eps_grid, SeedOptions seeds, const CloudOptions& opts,
                                 int jobs = 1);

}  // namespace rlxa
