#pragma once

#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rlxa/functionals.hpp"

namespace rlxa {

/// Λ′ + 2ηΛ ≤ hΛ + k on a sampled grid, with ∫ₛᵗ h ≤ η(t − s) + m.
struct GronwallInstance {
  std::vector<double> t;
  std::vector<double> lambda;
  std::vector<double> h;
  double eta = 1.0;
  double k = 0.0;
  /// NaN: use the smallest m for which the integral condition holds on the grid.
  double m = std::numeric_limits<double>::quiet_NaN();
  /// Relative slack for the trapezoid form of the differential inequality.
  double quad_rtol = 1e-3;
};

enum class GronwallStatus { verified, hypothesis_failed, violated };

struct GronwallReport {
  GronwallStatus status = GronwallStatus::hypothesis_failed;
  bool integral_ok = false;
  bool differential_ok = false;
  bool conclusion_evaluated = false;
  double m = 0.0;         // value used in the bound
  double m_min = 0.0;     // smallest admissible m on the grid
  double max_ratio = std::numeric_limits<double>::quiet_NaN();  // max Λ(t)/bound(t)
  double worst_time = std::numeric_limits<double>::quiet_NaN();
  double max_differential_excess = 0.0;  // relative to the size of the step terms
  std::string message;
};

/// The conclusion Λ(t) ≤ Λ(0)eᵐe^{−ηt} + keᵐ/η is only evaluated when the
/// integral condition holds. A failing bound is reported as violated; a bound
/// that holds while the differential inequality fails is not certified.
GronwallReport check_gronwall(const GronwallInstance& inst);

/// minimal m with ∫ₛᵗ h ≤ η(t − s) + m for all sample pairs (trapezoid rule).
double minimal_integral_offset(const std::vector<double>& t, const std::vector<double>& h, double eta);

const char* to_string(GronwallStatus s);

enum class EnvelopeForm { decay_plus_floor, pure_decay };

/// curve(t) ≈ Q e^{−ω(t − t₀)} + P.
struct EnvelopeFit {
  double Q = 0.0;
  double omega = 0.0;
  double P = 0.0;
  double Q_ls = 0.0;         // least-squares amplitude before domination
  double residual = 0.0;     // RMS of the log residual over the fitted head
  int head_points = 0;
  bool pass = false;         // curve ≤ (1 + slack)·envelope at every sample
  double max_ratio = 0.0;    // max curve/envelope
  EnvelopeForm form = EnvelopeForm::decay_plus_floor;
  bool switched = false;     // pure_decay fell back to floor subtraction

  [[nodiscard]] double operator()(double dt_from_start) const;
};

EnvelopeFit fit_envelope(const std::vector<double>& t, const std::vector<double>& curve,
                         EnvelopeForm form = EnvelopeForm::decay_plus_floor, double slack = 0.05);

/// One envelope for a family of curves on a shared grid: fitted to the pointwise maximum.
EnvelopeFit fit_envelope_family(const std::vector<double>& t, const std::vector<std::vector<double>>& curves,
                                EnvelopeForm form = EnvelopeForm::decay_plus_floor, double slack = 0.05);

enum class CertStatus { verified, verified_fitted, hypothesis_failed, violated };
const char* to_string(CertStatus s);

struct CertEntry {
  std::string name;
  CertStatus status = CertStatus::hypothesis_failed;
  std::string detail;
  std::vector<std::pair<std::string, double>> values;
};

struct CertReport {
  std::vector<CertEntry> entries;
  [[nodiscard]] int count(CertStatus s) const;
  [[nodiscard]] bool any_violated() const { return count(CertStatus::violated) > 0; }
  [[nodiscard]] const CertEntry* find(const std::string& name) const;
  /// `key = value` lines, one block per entry.
  [[nodiscard]] std::string to_text() const;
  /// name,status,key,value rows.
  [[nodiscard]] std::string to_csv() const;
};

struct CertifyTargets {
  double step_defect = 1e-8;
  double cumulative_defect = 1e-6;
  double envelope_slack = 0.05;
  /// η in the dissipation-integral bound ∫(‖w_t‖² + ‖u_t‖²) ≤ (η/2)(t − s) + Q_η.
  double integral_eta = 0.5;
  /// Decay rate η of V′ + ηV ≤ Q_η(‖u_t‖² + ‖w_t‖²)V. NaN: read column "eta" of split_steps.
  double v_eta = std::numeric_limits<double>::quiet_NaN();
  int jobs = 1;
};

/// Recognised ledgers, by name:
///   steps        E, diss_increment            (one row per step, first row t = 0)
///   hyperbolic   norm_sq                      (‖φ‖²_{ℋ_ε} samples)
///   parabolic    norm_sq                      (‖ζ‖²_Y samples)
///   split        z_sq, velocity_sq            (samples)
///   split_steps  V, velocity_sq [, eta]       (one row per step)
///   difference   alpha, lambda                (scan grid)
/// Unknown ledgers are ignored.
CertReport certify_run(const std::map<std::string, EnergyLedger>& ledgers, const CertifyTargets& targets = {});

/// Per-step instrumentation of V′ + ηV ≤ Q(‖u_t‖² + ‖w_t‖²)V: the smallest Q
/// for which the trapezoid form holds on every step, and the Grönwall check
/// with h = Q(‖u_t‖² + ‖w_t‖²), 2η_G = η, k = 0.
struct VInequalityReport {
  double Q = 0.0;
  bool finite = true;
  GronwallReport gronwall;
};
VInequalityReport instrument_v_inequality(const std::vector<double>& t, const std::vector<double>& V,
                                          const std::vector<double>& velocity_sq, double eta);

}  // namespace rlxa
