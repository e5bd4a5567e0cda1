#include "rlxa/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rlxa {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Nonlinearity Nonlinearity::polynomial(std::vector<double> coefficients, double beta) {
  while (coefficients.size() > 4 && coefficients.back() == 0.0) coefficients.pop_back();
  if (coefficients.size() > 4) {
    throw std::invalid_argument("polynomial nonlinearity: degree > 3 violates the critical growth bound");
  }
  Nonlinearity n;
  n.kind_ = Kind::polynomial;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (!std::isfinite(coefficients[i])) throw std::invalid_argument("polynomial nonlinearity: non-finite coefficient");
    n.c_[i] = coefficients[i];
  }
  const double theta = n.monotonicity_defect();
  n.beta_ = beta >= 0.0 ? beta : (std::isfinite(theta) ? theta : 0.0);
  if (beta >= 0.0) n.set_beta(beta);
  return n;
}

Nonlinearity Nonlinearity::double_well(double k, double beta) {
  if (!(k > 0.0)) throw std::invalid_argument("double-well: k must be positive");
  Nonlinearity n = polynomial({0.0, -2.0 * k, 0.0, 1.0}, beta);
  n.kind_ = Kind::double_well;
  n.k_ = k;
  return n;
}

std::string Nonlinearity::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (kind_ == Kind::double_well) {
    os << "doublewell(k=" << k_ << ")";
  } else {
    os << "poly(" << c_[0] << ", " << c_[1] << ", " << c_[2] << ", " << c_[3] << ")";
  }
  return os.str();
}

double Nonlinearity::f(double s) const { return c_[0] + s * (c_[1] + s * (c_[2] + s * c_[3])); }

double Nonlinearity::F(double s) const {
  return s * (c_[0] + s * (c_[1] / 2.0 + s * (c_[2] / 3.0 + s * c_[3] / 4.0)));
}

double Nonlinearity::fprime(double s) const { return c_[1] + s * (2.0 * c_[2] + 3.0 * s * c_[3]); }

double Nonlinearity::fsecond(double s) const { return 2.0 * c_[2] + 6.0 * c_[3] * s; }

double Nonlinearity::f_avg(double a, double b) const {
  return c_[0] + c_[1] * (a + b) / 2.0 + c_[2] * (a * a + a * b + b * b) / 3.0 +
         c_[3] * (a * a * a + a * a * b + a * b * b + b * b * b) / 4.0;
}

double Nonlinearity::f_avg_db(double a, double b) const {
  return c_[1] / 2.0 + c_[2] * (a + 2.0 * b) / 3.0 + c_[3] * (a * a + 2.0 * a * b + 3.0 * b * b) / 4.0;
}

double Nonlinearity::growth_constant() const { return std::max(std::abs(2.0 * c_[2]), std::abs(6.0 * c_[3])); }

double Nonlinearity::monotonicity_defect() const {
  double min_fp = 0.0;
  if (c_[3] > 0.0) {
    min_fp = c_[1] - c_[2] * c_[2] / (3.0 * c_[3]);
  } else if (c_[3] == 0.0 && c_[2] == 0.0) {
    min_fp = c_[1];
  } else {
    return kInf;
  }
  return std::max(0.0, -min_fp);
}

double Nonlinearity::asymptotic_slope() const {
  if (c_[3] > 0.0) return kInf;
  if (c_[3] < 0.0) return -kInf;
  if (c_[2] != 0.0) return -kInf;  // f(s)/s ~ c₂ s changes sign
  return c_[1];
}

namespace {
template <class Fn>
double max_on_candidates(const std::array<double, 4>& c, double r, Fn&& value) {
  double best = std::max(value(-r), value(r));
  if (c[3] != 0.0) {
    const double s = -c[2] / (3.0 * c[3]);
    if (std::abs(s) <= r) best = std::max(best, value(s));
  }
  return best;
}
}  // namespace

double Nonlinearity::lipschitz_on(double r) const {
  return max_on_candidates(c_, r, [this](double s) { return std::abs(fprime(s)); });
}

double Nonlinearity::max_fprime_on(double r) const {
  return max_on_candidates(c_, r, [this](double s) { return fprime(s); });
}

void Nonlinearity::set_beta(double beta) {
  const double theta = monotonicity_defect();
  if (!(beta >= theta)) {
    std::ostringstream os;
    os << "shift beta = " << beta << " is below the monotonicity defect " << theta;
    throw std::invalid_argument(os.str());
  }
  beta_ = beta;
}

Nonlinearity Nonlinearity::with_beta(double beta) const {
  Nonlinearity n = *this;
  n.set_beta(beta);
  return n;
}

AssumptionReport check_assumptions(const Nonlinearity& f, double lambda, double sample_range, int n_samples,
                                   double domain_measure, double mu) {
  if (!(lambda > 0.0)) throw std::invalid_argument("check_assumptions: lambda must be positive");
  if (!(sample_range > 0.0) || n_samples < 3) throw std::invalid_argument("check_assumptions: bad sampling");
  AssumptionReport r;
  r.lambda = lambda;
  r.mu = (mu > 0.0) ? std::min(mu, lambda) : lambda / 2.0;
  r.sample_range = sample_range;
  r.n_samples = n_samples;
  r.growth_constant = f.growth_constant();
  r.theta = f.monotonicity_defect();

  std::vector<double> s(n_samples);
  for (int i = 0; i < n_samples; ++i) s[i] = -sample_range + 2.0 * sample_range * i / (n_samples - 1);

  r.growth_ok = true;
  r.monotone_ok = std::isfinite(r.theta);
  for (double x : s) {
    if (std::abs(f.fsecond(x)) > r.growth_constant * (1.0 + std::abs(x)) * (1.0 + 1e-12) + 1e-300) r.growth_ok = false;
    if (r.monotone_ok && f.fprime(x) < -r.theta - 1e-12 * (1.0 + r.theta)) r.monotone_ok = false;
  }
  r.shift_ok = std::isfinite(r.theta) && f.beta() >= r.theta;

  const double slope = f.asymptotic_slope();
  const bool slope_ok = slope > -lambda;
  r.sign_margin = std::isfinite(slope) ? std::max(0.0, std::min(lambda / 2.0, (slope + lambda) / 2.0)) : lambda / 2.0;
  // Scan inwards from |s| = S; s₀ is the innermost |s| with an unbroken run of sign margin outside it.
  std::vector<double> mags;
  for (double x : s) {
    if (x != 0.0) mags.push_back(std::abs(x));
  }
  std::sort(mags.begin(), mags.end());
  mags.erase(std::unique(mags.begin(), mags.end()), mags.end());
  double s0 = kInf;
  for (auto it = mags.rbegin(); it != mags.rend(); ++it) {
    const double m = *it;
    const bool holds = f.f(m) / m > -lambda + r.sign_margin && f.f(-m) / (-m) > -lambda + r.sign_margin;
    if (!holds) break;
    s0 = m;
  }
  r.sign_threshold = std::isfinite(s0) ? s0 : sample_range;
  r.sign_ok = slope_ok && std::isfinite(s0) && r.sign_margin > 0.0;

  double c1 = 0.0, c2 = 0.0;
  double c1_edge = -kInf, c2_edge = -kInf;
  for (double x : s) {
    const double g1 = (-f.f(x) * x - (lambda - r.mu) * x * x) * domain_measure;
    const double g2 = (-f.F(x) - 0.5 * (lambda - r.mu) * x * x) * domain_measure;
    c1 = std::max(c1, g1);
    c2 = std::max(c2, g2);
    if (std::abs(x) == sample_range) {
      c1_edge = std::max(c1_edge, g1);
      c2_edge = std::max(c2_edge, g2);
    }
  }
  r.c1 = c1;
  r.c2 = c2;
  // Maxima sitting on the sampling edge mean the range did not bracket them.
  r.consequences_ok = (c1 == 0.0 || c1_edge < c1) && (c2 == 0.0 || c2_edge < c2) && slope_ok;
  return r;
}

}  // namespace rlxa
