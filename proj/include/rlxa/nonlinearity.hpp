#pragma once

#include <array>
#include <string>
#include <vector>

namespace rlxa {

/// Polynomial nonlinearity f(s) = c₀ + c₁s + c₂s² + c₃s³ together with its
/// antiderivative F (F(0) = 0) and the shifted pair ψ(s) = f(s) + βs,
/// Ψ(s) = F(s) + βs²/2.
///
/// Degree above three is rejected: the growth bound |f''(s)| ≤ ℓ(1+|s|)
/// cannot hold for it.
class Nonlinearity {
 public:
  enum class Kind { polynomial, double_well };

  Nonlinearity() = default;
  static Nonlinearity polynomial(std::vector<double> coefficients, double beta = -1.0);
  /// f = F' for F(u) = u⁴/4 − k u².
  static Nonlinearity double_well(double k, double beta = -1.0);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] const std::array<double, 4>& coefficients() const { return c_; }
  [[nodiscard]] double well_depth() const { return k_; }
  [[nodiscard]] std::string describe() const;

  [[nodiscard]] double f(double s) const;
  [[nodiscard]] double F(double s) const;
  [[nodiscard]] double fprime(double s) const;
  [[nodiscard]] double fsecond(double s) const;
  [[nodiscard]] double psi(double s) const { return f(s) + beta_ * s; }
  [[nodiscard]] double Psi(double s) const { return F(s) + 0.5 * beta_ * s * s; }
  [[nodiscard]] double psiprime(double s) const { return fprime(s) + beta_; }

  /// Average-vector-field value ∫₀¹ f(a + τ(b−a)) dτ = (F(b) − F(a))/(b − a),
  /// evaluated through the symmetric closed form so no division occurs.
  [[nodiscard]] double f_avg(double a, double b) const;
  /// ∂/∂b of f_avg(a, b).
  [[nodiscard]] double f_avg_db(double a, double b) const;
  [[nodiscard]] double psi_avg(double a, double b) const { return f_avg(a, b) + 0.5 * beta_ * (a + b); }
  [[nodiscard]] double psi_avg_db(double a, double b) const { return f_avg_db(a, b) + 0.5 * beta_; }

  /// ℓ with |f''(s)| ≤ ℓ(1 + |s|) for all s.
  [[nodiscard]] double growth_constant() const;
  /// Smallest ϑ ≥ 0 with f'(s) ≥ −ϑ; +∞ when f' is unbounded below.
  [[nodiscard]] double monotonicity_defect() const;
  /// liminf_{|s|→∞} f(s)/s (±∞ allowed).
  [[nodiscard]] double asymptotic_slope() const;
  /// max over |s| ≤ r of |f'(s)|.
  [[nodiscard]] double lipschitz_on(double r) const;
  /// max over |s| ≤ r of f'(s).
  [[nodiscard]] double max_fprime_on(double r) const;

  [[nodiscard]] double beta() const { return beta_; }
  /// Throws std::invalid_argument when β < ϑ.
  void set_beta(double beta);
  [[nodiscard]] Nonlinearity with_beta(double beta) const;
  [[nodiscard]] bool is_linear() const { return c_[2] == 0.0 && c_[3] == 0.0; }

 private:
  Kind kind_ = Kind::polynomial;
  std::array<double, 4> c_{0.0, 0.0, 0.0, 0.0};
  double k_ = 0.0;
  double beta_ = 0.0;
};

struct AssumptionReport {
  double lambda = 0.0;
  double mu = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double sample_range = 0.0;
  int n_samples = 0;
  double growth_constant = 0.0;
  double theta = 0.0;
  double sign_threshold = 0.0;  // s₀: the sign margin holds for |s| ≥ s₀
  double sign_margin = 0.0;     // δ: f(s)/s > −λ + δ there
  bool growth_ok = false;
  bool sign_ok = false;
  bool monotone_ok = false;
  bool shift_ok = false;        // β ≥ ϑ
  bool consequences_ok = false; // c₁, c₂ maxima attained inside the sample range

  [[nodiscard]] bool all_pass() const { return growth_ok && sign_ok && monotone_ok && shift_ok && consequences_ok; }
};

/// Samples the structural assumptions on f over [−S, S]. Violations are flags,
/// never exceptions.
AssumptionReport check_assumptions(const Nonlinearity& f, double lambda, double sample_range, int n_samples,
                                   double domain_measure = 1.0, double mu = -1.0);

}  // namespace rlxa
