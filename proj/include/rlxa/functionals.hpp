#pragma once

#include <limits>
#include <string>
#include <vector>

#include "rlxa/mesh.hpp"
#include "rlxa/nonlinearity.hpp"

namespace rlxa {

struct PoincareResult {
  double lambda = 0.0;          // smallest eigenvalue of (K + M_Γ)x = λ M x
  Vec eigenvector;              // M-normalized
  double lumped_lambda = 0.0;   // same with M replaced by the lumped mass
  int iterations = 0;
  bool used_dense = false;      // iteration stagnated and the dense solver was used
  bool certified = false;       // a dense solve was run alongside
  double dense_lambda = std::numeric_limits<double>::quiet_NaN();
};

/// Inverse power iteration with shift 0. Certified by a dense generalized
/// eigensolve when n ≤ 200.
PoincareResult poincare_constant(const Operators& ops);

/// Smallest generalized eigenvalue of the sparse SPD pencil (A, B) by dense
/// solve. For small systems and oracles.
double smallest_generalized_dense(const SpMat& a, const SpMat& b);

/// max_i sqrt((K + M_Γ)⁻¹)_ii: |u_i| ≤ C_∞ ‖u‖₁ for every nodal u.
double sup_embedding_constant(const Operators& ops);

struct Rates {
  double omega0 = 0.0;
  double omega1 = 0.0;
  double omega2 = 0.0;
  double omega3 = 0.0;
  double omega4 = 0.0;
  double omega5 = 0.0;
  double omega6 = 0.0;
  double omega7 = std::numeric_limits<double>::quiet_NaN();  // measured only
};

/// α, η, β, ε, λ, μ. The constructor rejects α outside the windows of both
/// E_ε (η > λ/(4μ), 0 < α < min{2, 2/η, 2μ}) and V_ε (0 < α < min{2, λ}).
class FunctionalParams {
 public:
  FunctionalParams(double alpha, double eta, double beta, double eps, double lambda, double mu);
  /// μ = λ/2, η = max(λ/(4μ), 1/4) + 0.01, α = 0.9 × the joint upper bound.
  static FunctionalParams defaults(double lambda, double eps, double beta);

  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] double eta() const { return eta_; }
  [[nodiscard]] double beta() const { return beta_; }
  [[nodiscard]] double eps() const { return eps_; }
  [[nodiscard]] double lambda() const { return lambda_; }
  [[nodiscard]] double mu() const { return mu_; }

  [[nodiscard]] double energy_alpha_bound() const;  // min{2, 2/η, 2μ}
  [[nodiscard]] double decay_alpha_bound() const;   // min{2, λ}
  /// min{2, (1/(2λ) + q)⁻¹}, the window in which ω₄(q) > 0.
  [[nodiscard]] double psi_alpha_bound(double q) const;

  [[nodiscard]] FunctionalParams with_eps(double eps) const;
  [[nodiscard]] FunctionalParams with_beta(double beta) const;

  /// Rates from their defining formulas; q enters ω₄ and ω₅.
  [[nodiscard]] Rates rates(double q) const;
  [[nodiscard]] std::string describe() const;

 private:
  double alpha_, eta_, beta_, eps_, lambda_, mu_;
};

/// Smallest β making the ψ-terms of V_ε pointwise nonnegative for states with
/// |u| ≤ s_max: β = 2ϑ + max(0, max_{|s|≤s_max} f'(s)).
double default_shift(const Nonlinearity& f, double s_max);

double E_eps(const Discretization& disc, const Nonlinearity& f, const Vec& u, const Vec& v,
             const FunctionalParams& p);

double V_eps(const Discretization& disc, const Nonlinearity& f, const Vec& u, const Vec& w, const Vec& v,
             const Vec& v_t, const FunctionalParams& p);

double Psi_eps(const Discretization& disc, const Nonlinearity& f, const Vec& h, const Vec& h_t, const Vec& w,
               const FunctionalParams& p);

double W_eps(const Discretization& disc, const Nonlinearity& f, const Vec& w, const Vec& w_t, const Vec& u,
             const FunctionalParams& p);

double N_eps(const Discretization& disc, const Vec& u, const Vec& u_t, double eps);

/// E_ε ≥ lower_coeff·‖φ‖² − offset and E_ε ≤ upper(‖φ‖).
struct EnergyBounds {
  double lower_coeff = 0.0;
  double offset = 0.0;
  double quad_coeff = 0.0;     // 1 + α/2 + α/(2λ)
  double sup_constant = 0.0;   // C_∞
  double domain_measure = 0.0;
  std::array<double, 4> abs_coeffs{};

  [[nodiscard]] double lower(double norm_sq) const { return lower_coeff * norm_sq - offset; }
  [[nodiscard]] double upper(double norm) const;
};

/// `c2` is the constant of the F-consequence from check_assumptions (taken
/// with the same μ), `lumped_lambda` the lumped Poincaré constant.
EnergyBounds energy_bounds(const Discretization& disc, const Nonlinearity& f, const FunctionalParams& p, double c2,
                           double lumped_lambda);

/// c_lo‖·‖²_{ℋ_ε} ≤ functional ≤ c_hi‖·‖²_{ℋ_ε}.
struct Equivalence {
  double lower = 0.0;
  double upper = 0.0;
  [[nodiscard]] bool holds(double value, double norm_sq, double rel_tol = 1e-10) const {
    const double slack = rel_tol * (1.0 + norm_sq);
    return value >= lower * norm_sq - slack && value <= upper * norm_sq + slack;
  }
};

/// V_ε against ‖(v, v_t)‖²_{ℋ_ε} for states with |u|, |w| ≤ s_max. Requires
/// β ≥ default_shift(f, s_max) for the lower constant.
Equivalence decay_equivalence(const Discretization& disc, const Nonlinearity& f, const FunctionalParams& p,
                              double s_max);

/// Q(R) = max_{|s|≤w_max}|ψ'(s)|·c_m/λ, which bounds ⟨ψ'(w)h,h⟩ ≤ Q‖h‖₁².
double psi_potential_constant(const Discretization& disc, const Nonlinearity& f, const FunctionalParams& p,
                              double w_max);

/// Ψ_ε against ‖(h, h_t)‖²_{ℋ_ε}; lower is ω₄(q), upper carries q with weight one.
Equivalence psi_equivalence(const FunctionalParams& p, double q);

/// 𝒩_ε against ‖·‖²_{ℋ_ε}: the exact extremes 1 ± √(ε/(4λ)).
Equivalence n_equivalence(double lambda, double eps);

/// C with C⁻¹ ≤ 𝒩_ε/‖·‖² ≤ C for every ε ∈ (0, 1]. Requires λ > 1/4.
double n_equivalence_constant(double lambda);

/// Named columns over a strictly increasing time grid.
class EnergyLedger {
 public:
  explicit EnergyLedger(std::vector<std::string> columns);

  /// Throws std::invalid_argument for non-increasing t, wrong arity or non-finite values.
  void add_row(double t, const std::vector<double>& values);

  [[nodiscard]] const std::vector<std::string>& columns() const { return names_; }
  [[nodiscard]] const std::vector<double>& times() const { return t_; }
  [[nodiscard]] const std::vector<double>& column(const std::string& name) const;
  [[nodiscard]] bool has_column(const std::string& name) const;
  [[nodiscard]] std::size_t rows() const { return t_.size(); }

 private:
  std::vector<std::string> names_;
  std::vector<double> t_;
  std::vector<std::vector<double>> cols_;
};

}  // namespace rlxa
