#include "rlxa/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "rlxa/evolution.hpp"

namespace rlxa {

namespace {

struct PowerResult {
  double value = 0.0;
  Vec vector;
  int iterations = 0;
  bool converged = false;
};

PowerResult inverse_iteration(const SpMat& a, const SpMat& b, int max_iter, double rel_tol) {
  Eigen::SimplicialLDLT<SpMat> solver(a);
  if (solver.info() != Eigen::Success) throw std::runtime_error("poincare_constant: K + M_Γ factorization failed");
  const int n = static_cast<int>(a.rows());
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = 1.0 + 0.25 * std::sin(1.0 + 2.7 * i);
  x /= std::sqrt(x.dot(b * x));
  PowerResult r;
  double rho = x.dot(a * x);
  for (int k = 1; k <= max_iter; ++k) {
    Vec y = solver.solve(b * x);
    const double by = y.dot(b * y);
    y /= std::sqrt(by);
    const double next = y.dot(a * y);
    x = std::move(y);
    r.iterations = k;
    const bool done = std::abs(next - rho) <= rel_tol * std::abs(next);
    rho = next;
    if (done && k >= 3) {
      r.converged = true;
      break;
    }
  }
  r.value = rho;
  r.vector = std::move(x);
  return r;
}

SpMat diagonal_matrix(const Vec& d) {
  SpMat m(d.size(), d.size());
  m.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (int i = 0; i < d.size(); ++i) m.insert(i, i) = d[i];
  m.makeCompressed();
  return m;
}

constexpr int kDenseCertifyLimit = 200;
constexpr int kDenseFallbackLimit = 3000;

double lumped_quad(const Vec& m, const Vec& c, const Vec& a, const Vec& b) {
  return (m.array() * c.array() * a.array() * b.array()).sum();
}

}  // namespace

double smallest_generalized_dense(const SpMat& a, const SpMat& b) {
  const Eigen::MatrixXd ad(a), bd(b);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ad, bd, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense generalized eigensolve failed");
  return es.eigenvalues()[0];
}

PoincareResult poincare_constant(const Operators& ops) {
  const SpMat a = ops.robin();
  const int n = ops.size();
  PoincareResult out;
  auto it = inverse_iteration(a, ops.mass, 2000, 1e-15);
  out.iterations = it.iterations;
  if (it.converged) {
    out.lambda = it.value;
    out.eigenvector = std::move(it.vector);
  } else {
    if (n > kDenseFallbackLimit) throw std::runtime_error("poincare_constant: inverse iteration stagnated");
    const Eigen::MatrixXd ad(a), md(ops.mass);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ad, md, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    out.lambda = es.eigenvalues()[0];
    out.eigenvector = es.eigenvectors().col(0);
    out.eigenvector /= std::sqrt(out.eigenvector.dot(ops.mass * out.eigenvector));
    out.used_dense = true;
    out.dense_lambda = out.lambda;
    out.certified = true;
  }
  if (!out.certified && n <= kDenseCertifyLimit) {
    out.dense_lambda = smallest_generalized_dense(a, ops.mass);
    out.certified = true;
  }
  const SpMat lumped = diagonal_matrix(ops.lumped_mass);
  auto lt = inverse_iteration(a, lumped, 2000, 1e-15);
  out.lumped_lambda = lt.converged || n > kDenseFallbackLimit ? lt.value : smallest_generalized_dense(a, lumped);
  if (!(out.lambda > 0.0)) throw std::logic_error("poincare_constant: non-positive eigenvalue");
  return out;
}

double sup_embedding_constant(const Operators& ops) {
  Eigen::SimplicialLDLT<SpMat> solver(ops.robin());
  if (solver.info() != Eigen::Success) throw std::runtime_error("sup_embedding_constant: factorization failed");
  const int n = ops.size();
  double best = 0.0;
  Vec e = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    e[i] = 1.0;
    best = std::max(best, solver.solve(e)[i]);
    e[i] = 0.0;
  }
  return std::sqrt(best);
}

FunctionalParams::FunctionalParams(double alpha, double eta, double beta, double eps, double lambda, double mu)
    : alpha_(alpha), eta_(eta), beta_(beta), eps_(eps), lambda_(lambda), mu_(mu) {
  if (!(lambda > 0.0)) throw std::invalid_argument("FunctionalParams: lambda must be positive");
  if (!(mu > 0.0 && mu <= lambda)) throw std::invalid_argument("FunctionalParams: need 0 < mu <= lambda");
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("FunctionalParams: eps must lie in [0, 1]");
  if (!(beta >= 0.0)) throw std::invalid_argument("FunctionalParams: beta must be >= 0");
  if (!(eta > lambda / (4.0 * mu))) throw std::invalid_argument("FunctionalParams: need eta > lambda/(4 mu)");
  if (!(alpha > 0.0 && alpha < energy_alpha_bound())) {
    throw std::invalid_argument("FunctionalParams: alpha outside (0, min{2, 2/eta, 2 mu})");
  }
  if (!(alpha < decay_alpha_bound())) throw std::invalid_argument("FunctionalParams: alpha outside (0, min{2, lambda})");
}

FunctionalParams FunctionalParams::defaults(double lambda, double eps, double beta) {
  const double mu = lambda / 2.0;
  const double eta = std::max(lambda / (4.0 * mu), 0.25) + 0.01;
  const double bound = std::min({2.0, 2.0 / eta, 2.0 * mu, lambda});
  return FunctionalParams(0.9 * bound, eta, beta, eps, lambda, mu);
}

double FunctionalParams::energy_alpha_bound() const { return std::min({2.0, 2.0 / eta_, 2.0 * mu_}); }
double FunctionalParams::decay_alpha_bound() const { return std::min(2.0, lambda_); }
double FunctionalParams::psi_alpha_bound(double q) const { return std::min(2.0, 1.0 / (0.5 / lambda_ + q)); }

FunctionalParams FunctionalParams::with_eps(double eps) const {
  return FunctionalParams(alpha_, eta_, beta_, eps, lambda_, mu_);
}

FunctionalParams FunctionalParams::with_beta(double beta) const {
  return FunctionalParams(alpha_, eta_, beta, eps_, lambda_, mu_);
}

Rates FunctionalParams::rates(double q) const {
  const double a = alpha_, l = lambda_;
  Rates r;
  r.omega0 = std::min(2.0 - a, a * (mu_ / l - 1.0 / (4.0 * eta_)));
  r.omega1 = std::min(1.0 - a / 2.0, 1.0 - a / (2.0 * l) - (l - mu_) / l);
  r.omega2 = std::min(1.0 - a / 2.0, 0.5 - a / (2.0 * l));
  r.omega3 = std::min({2.0 - a, 1.0, a / 2.0});
  r.omega4 = std::min(1.0 - a / 2.0, 1.0 - a / (2.0 * l) - a * q);
  r.omega5 = std::max(1.0 + a / 2.0, 1.0 + a / (2.0 * l) + a * q);
  r.omega6 = 1.0 - 1.0 / (4.0 * eta_);
  return r;
}

std::string FunctionalParams::describe() const {
  std::ostringstream os;
  os.precision(10);
  os << "alpha=" << alpha_ << " eta=" << eta_ << " beta=" << beta_ << " eps=" << eps_ << " lambda=" << lambda_
     << " mu=" << mu_;
  return os.str();
}

double default_shift(const Nonlinearity& f, double s_max) {
  const double theta = f.monotonicity_defect();
  if (!std::isfinite(theta)) throw std::invalid_argument("default_shift: f' is unbounded below");
  return 2.0 * theta + std::max(0.0, f.max_fprime_on(s_max));
}

double E_eps(const Discretization& disc, const Nonlinearity& f, const Vec& u, const Vec& v,
             const FunctionalParams& p) {
  const auto& nm = disc.norms;
  const Vec& m = disc.ops.lumped_mass;
  double pot = 0.0;
  for (int i = 0; i < u.size(); ++i) pot += m[i] * f.F(u[i]);
  return nm.hyp_sq(u, v, p.eps()) + p.alpha() * p.eps() * nm.l2_dot(v, u) + 2.0 * pot;
}

double V_eps(const Discretization& disc, const Nonlinearity& f, const Vec& u, const Vec& w, const Vec& v,
             const Vec& v_t, const FunctionalParams& p) {
  const auto& nm = disc.norms;
  nm.check_size(w);
  const Vec& m = disc.ops.lumped_mass;
  const double b = p.beta();
  double cross = 0.0, quad = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double dpsi = (f.f(u[i]) + b * u[i]) - (f.f(w[i]) + b * w[i]);
    cross += m[i] * dpsi * v[i];
    quad += m[i] * (f.fprime(u[i]) + b) * v[i] * v[i];
  }
  return p.eps() * nm.l2_sq(v_t) + p.alpha() * p.eps() * nm.l2_dot(v_t, v) + nm.h1_sq(v) + 2.0 * cross - quad;
}

double Psi_eps(const Discretization& disc, const Nonlinearity& f, const Vec& h, const Vec& h_t, const Vec& w,
               const FunctionalParams& p) {
  const auto& nm = disc.norms;
  nm.check_size(w);
  Vec c(w.size());
  for (int i = 0; i < w.size(); ++i) c[i] = f.fprime(w[i]) + p.beta();
  return p.eps() * nm.l2_sq(h_t) + p.alpha() * p.eps() * nm.l2_dot(h_t, h) + nm.h1_sq(h) +
         lumped_quad(disc.ops.lumped_mass, c, h, h);
}

double W_eps(const Discretization& disc, const Nonlinearity& f, const Vec& w, const Vec& w_t, const Vec& u,
             const FunctionalParams& p) {
  const auto& nm = disc.norms;
  const Vec& m = disc.ops.lumped_mass;
  const double b = p.beta();
  double pot = 0.0;
  for (int i = 0; i < w.size(); ++i) pot += m[i] * (f.F(w[i]) + 0.5 * b * w[i] * w[i]);
  return nm.hyp_sq(w, w_t, p.eps()) + 2.0 * pot - 2.0 * b * nm.l2_dot(u, w);
}

double N_eps(const Discretization& disc, const Vec& u, const Vec& u_t, double eps) {
  const auto& nm = disc.norms;
  return eps * nm.l2_sq(u_t) + eps * nm.l2_dot(u_t, u) + nm.h1_sq(u);
}

double EnergyBounds::upper(double norm) const {
  const double s = sup_constant * norm;
  double fhat = 0.0;
  double pw = s;
  for (int k = 0; k < 4; ++k) {
    fhat += abs_coeffs[k] * pw / (k + 1);
    pw *= s;
  }
  return quad_coeff * norm * norm + 2.0 * domain_measure * fhat;
}

EnergyBounds energy_bounds(const Discretization& disc, const Nonlinearity& f, const FunctionalParams& p, double c2,
                           double lumped_lambda) {
  if (!(lumped_lambda > 0.0)) throw std::invalid_argument("energy_bounds: lumped_lambda must be positive");
  const double a = p.alpha(), l = p.lambda();
  EnergyBounds b;
  b.lower_coeff = std::min(1.0 - a / 2.0, 1.0 - a / (2.0 * l) - (l - p.mu()) / lumped_lambda);
  b.offset = 2.0 * c2;
  b.quad_coeff = 1.0 + a / 2.0 + a / (2.0 * l);
  b.sup_constant = sup_embedding_constant(disc.ops);
  b.domain_measure = disc.ops.domain_measure();
  for (int k = 0; k < 4; ++k) b.abs_coeffs[k] = std::abs(f.coefficients()[k]);
  return b;
}

Equivalence decay_equivalence(const Discretization& disc, const Nonlinearity& f, const FunctionalParams& p,
                              double s_max) {
  const double a = p.alpha(), l = p.lambda();
  const double lpsi = f.lipschitz_on(s_max) + p.beta();
  const double cm = lumped_mass_ratio(disc);
  Equivalence e;
  e.lower = p.rates(0.0).omega2;
  e.upper = std::max(1.0 + a / 2.0, 1.0 + a / (2.0 * l) + 3.0 * lpsi * cm / l);
  return e;
}

double psi_potential_constant(const Discretization& disc, const Nonlinearity& f, const FunctionalParams& p,
                              double w_max) {
  const double lpsi = f.lipschitz_on(w_max) + p.beta();
  return lpsi * lumped_mass_ratio(disc) / p.lambda();
}

Equivalence psi_equivalence(const FunctionalParams& p, double q) {
  const double a = p.alpha(), l = p.lambda();
  Equivalence e;
  e.lower = p.rates(q).omega4;
  e.upper = std::max(1.0 + a / 2.0, 1.0 + a / (2.0 * l) + q);
  return e;
}

Equivalence n_equivalence(double lambda, double eps) {
  const double d = std::sqrt(eps / (4.0 * lambda));
  return Equivalence{1.0 - d, 1.0 + d};
}

double n_equivalence_constant(double lambda) {
  if (!(lambda > 0.25)) throw std::invalid_argument("n_equivalence_constant: requires lambda > 1/4");
  const double d = 1.0 / (2.0 * std::sqrt(lambda));
  return std::max(1.0 / (1.0 - d), 1.0 + d);
}

EnergyLedger::EnergyLedger(std::vector<std::string> columns) : names_(std::move(columns)), cols_(names_.size()) {}

void EnergyLedger::add_row(double t, const std::vector<double>& values) {
  if (values.size() != names_.size()) throw std::invalid_argument("EnergyLedger: wrong number of values");
  if (!std::isfinite(t) || (!t_.empty() && !(t > t_.back()))) {
    throw std::invalid_argument("EnergyLedger: time grid must be finite and strictly increasing");
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) throw std::invalid_argument("EnergyLedger: non-finite value in " + names_[k]);
  }
  t_.push_back(t);
  for (std::size_t k = 0; k < values.size(); ++k) cols_[k].push_back(values[k]);
}

bool EnergyLedger::has_column(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<double>& EnergyLedger::column(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::out_of_range("EnergyLedger: no column " + name);
  return cols_[static_cast<std::size_t>(it - names_.begin())];
}

}  // namespace rlxa
