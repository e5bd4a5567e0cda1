#include "rlxa/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "rlxa/parallel.hpp"

namespace rlxa {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void check_grid(const std::vector<double>& t) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw std::invalid_argument("time grid must be strictly increasing");
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

const char* to_string(GronwallStatus s) {
  switch (s) {
    case GronwallStatus::verified: return "verified";
    case GronwallStatus::hypothesis_failed: return "hypothesis-failed";
    case GronwallStatus::violated: return "violated";
  }
  return "?";
}

const char* to_string(CertStatus s) {
  switch (s) {
    case CertStatus::verified: return "verified";
    case CertStatus::verified_fitted: return "verified-with-fitted-constants";
    case CertStatus::hypothesis_failed: return "hypothesis-failed";
    case CertStatus::violated: return "violated";
  }
  return "?";
}

double minimal_integral_offset(const std::vector<double>& t, const std::vector<double>& h, double eta) {
  if (t.size() != h.size()) throw std::invalid_argument("minimal_integral_offset: size mismatch");
  check_grid(t);
  if (t.empty()) return 0.0;
  // G(t) = ∫₀ᵗ h − ηt; need G(t) − G(s) ≤ m for s ≤ t.
  double H = 0.0, run_min = 0.0, best = 0.0;
  for (std::size_t j = 1; j < t.size(); ++j) {
    H += 0.5 * (t[j] - t[j - 1]) * (h[j] + h[j - 1]);
    const double g = H - eta * (t[j] - t[0]);
    best = std::max(best, g - run_min);
    run_min = std::min(run_min, g);
  }
  return best;
}

GronwallReport check_gronwall(const GronwallInstance& inst) {
  const std::size_t n = inst.t.size();
  if (inst.lambda.size() != n || inst.h.size() != n) throw std::invalid_argument("check_gronwall: size mismatch");
  if (n == 0) throw std::invalid_argument("check_gronwall: empty grid");
  if (!(inst.eta > 0.0)) throw std::invalid_argument("check_gronwall: eta must be positive");
  if (!(inst.k >= 0.0)) throw std::invalid_argument("check_gronwall: k must be nonnegative");
  check_grid(inst.t);

  GronwallReport r;
  for (double x : inst.lambda) {
    if (!std::isfinite(x) || x < 0.0) {
      r.message = "Lambda must be finite and nonnegative";
      return r;
    }
  }
  for (double x : inst.h) {
    if (!std::isfinite(x)) {
      r.message = "h must be finite";
      return r;
    }
  }

  r.m_min = minimal_integral_offset(inst.t, inst.h, inst.eta);
  if (std::isnan(inst.m)) {
    r.m = r.m_min;
    r.integral_ok = true;
  } else {
    if (inst.m < 0.0) throw std::invalid_argument("check_gronwall: m must be nonnegative");
    r.m = inst.m;
    r.integral_ok = inst.m >= r.m_min - 1e-12 * (1.0 + r.m_min);
  }
  if (!r.integral_ok) {
    r.message = "hypothesis violated: integral condition needs m >= " + fmt17(r.m_min);
    return r;
  }

  double excess = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    const double dt = inst.t[j] - inst.t[j - 1];
    const double a0 = 2.0 * inst.eta - inst.h[j - 1];
    const double a1 = 2.0 * inst.eta - inst.h[j];
    const double l0 = inst.lambda[j - 1], l1 = inst.lambda[j];
    const double d = (l1 - l0) + 0.5 * dt * (a0 * l0 + a1 * l1) - inst.k * dt;
    const double scale = std::abs(l1 - l0) + 0.5 * dt * (std::abs(a0) * l0 + std::abs(a1) * l1) + inst.k * dt;
    if (d > 0.0) excess = std::max(excess, scale > 0.0 ? d / scale : INFINITY);
  }
  r.max_differential_excess = excess;
  r.differential_ok = excess <= inst.quad_rtol;

  r.conclusion_evaluated = true;
  const double em = std::exp(r.m);
  r.max_ratio = 0.0;
  r.worst_time = inst.t[0];
  for (std::size_t j = 0; j < n; ++j) {
    const double bound = inst.lambda[0] * em * std::exp(-inst.eta * (inst.t[j] - inst.t[0])) + inst.k * em / inst.eta;
    const double ratio = bound > 0.0 ? inst.lambda[j] / bound : (inst.lambda[j] > 0.0 ? INFINITY : 0.0);
    if (ratio > r.max_ratio) {
      r.max_ratio = ratio;
      r.worst_time = inst.t[j];
    }
  }
  const bool holds = r.max_ratio <= 1.0 + 1e-9;
  if (!holds) {
    r.status = GronwallStatus::violated;
    r.message = "bound exceeded by factor " + fmt17(r.max_ratio) + " at t = " + fmt17(r.worst_time);
    if (!r.differential_ok) r.message += " (differential inequality also fails)";
  } else if (!r.differential_ok) {
    r.status = GronwallStatus::hypothesis_failed;
    r.message = "differential inequality fails by " + fmt17(excess) + " (relative)";
  } else {
    r.status = GronwallStatus::verified;
    r.message = "bound holds";
  }
  return r;
}

double EnvelopeFit::operator()(double s) const { return Q * std::exp(-omega * s) + P; }

EnvelopeFit fit_envelope(const std::vector<double>& t, const std::vector<double>& curve, EnvelopeForm form,
                         double slack) {
  const std::size_t n = t.size();
  if (curve.size() != n) throw std::invalid_argument("fit_envelope: size mismatch");
  if (n < 10) throw std::invalid_argument("fit_envelope: need at least 10 samples");
  check_grid(t);
  for (double c : curve)
    if (!std::isfinite(c)) throw std::invalid_argument("fit_envelope: non-finite curve value");

  EnvelopeFit fit;
  fit.form = form;
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = t[j] - t[0];

  bool floor = form == EnvelopeForm::decay_plus_floor;
  if (!floor && std::any_of(curve.begin(), curve.end(), [](double c) { return !(c > 0.0); })) {
    floor = true;
    fit.switched = true;
  }
  double noise = 0.0;
  if (floor) {
    const std::size_t tail = std::max<std::size_t>(2, (n + 4) / 5);
    const std::vector<double> last(curve.end() - static_cast<long>(tail), curve.end());
    fit.P = median(last);
    // Robust spread of the tail; samples within a few of it carry no decay signal.
    std::vector<double> dev(last.size());
    for (std::size_t j = 0; j < last.size(); ++j) dev[j] = std::abs(last[j] - fit.P);
    noise = 1.4826 * median(dev);
  }

  std::vector<double> d(n);
  double dmax = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = curve[j] - fit.P;
    dmax = std::max(dmax, d[j]);
  }
  std::vector<std::size_t> head;
  if (dmax > 0.0) {
    const double thresh = floor ? std::max(1e-4 * dmax, 10.0 * noise) : 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (d[j] > thresh) head.push_back(j);
  }
  fit.head_points = static_cast<int>(head.size());

  if (head.size() >= 2) {
    // log(d) has variance ~ (noise/d)²; samples near the noise level are
    // downweighted, the rest count equally.
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto j : head) {
      const double r = noise > 0.0 ? d[j] / (30.0 * noise) : 1.0;
      const double w = std::min(1.0, r * r);
      const double y = std::log(d[j]);
      sw += w;
      sx += w * s[j];
      sy += w * y;
      sxx += w * s[j] * s[j];
      sxy += w * s[j] * y;
    }
    const double k = static_cast<double>(head.size());
    const double den = sw * sxx - sx * sx;
    const double slope = den > 0.0 ? (sw * sxy - sx * sy) / den : 0.0;
    const double icpt = (sy - slope * sx) / sw;
    fit.omega = -slope;
    fit.Q_ls = std::exp(icpt);
    double ss = 0.0;
    for (auto j : head) {
      const double e = std::log(d[j]) - (icpt + slope * s[j]);
      ss += e * e;
    }
    fit.residual = std::sqrt(ss / k);
  } else if (head.size() == 1) {
    fit.omega = 0.0;
    fit.Q_ls = d[head[0]];
  }
  fit.Q = fit.Q_ls;
  for (auto j : head) fit.Q = std::max(fit.Q, d[j] * std::exp(fit.omega * s[j]));

  double cmax = 0.0;
  for (double c : curve) cmax = std::max(cmax, std::abs(c));
  fit.max_ratio = 0.0;
  fit.pass = true;
  for (std::size_t j = 0; j < n; ++j) {
    const double env = fit(s[j]);
    if (env > 0.0) fit.max_ratio = std::max(fit.max_ratio, curve[j] / env);
    if (curve[j] > (1.0 + slack) * env + 1e-14 * cmax) fit.pass = false;
  }
  return fit;
}

EnvelopeFit fit_envelope_family(const std::vector<double>& t, const std::vector<std::vector<double>>& curves,
                                EnvelopeForm form, double slack) {
  if (curves.empty()) throw std::invalid_argument("fit_envelope_family: no curves");
  std::vector<double> upper(t.size(), -INFINITY);
  for (const auto& c : curves) {
    if (c.size() != t.size()) throw std::invalid_argument("fit_envelope_family: size mismatch");
    for (std::size_t j = 0; j < t.size(); ++j) upper[j] = std::max(upper[j], c[j]);
  }
  return fit_envelope(t, upper, form, slack);
}

VInequalityReport instrument_v_inequality(const std::vector<double>& t, const std::vector<double>& V,
                                          const std::vector<double>& velocity_sq, double eta) {
  if (V.size() != t.size() || velocity_sq.size() != t.size())
    throw std::invalid_argument("instrument_v_inequality: size mismatch");
  if (!(eta > 0.0)) throw std::invalid_argument("instrument_v_inequality: eta must be positive");
  VInequalityReport r;
  for (std::size_t j = 1; j < t.size(); ++j) {
    const double dt = t[j] - t[j - 1];
    const double num = V[j] - V[j - 1] + 0.5 * eta * dt * (V[j - 1] + V[j]);
    const double den = 0.5 * dt * (velocity_sq[j - 1] * V[j - 1] + velocity_sq[j] * V[j]);
    if (num <= 0.0) continue;
    if (den > 0.0) {
      r.Q = std::max(r.Q, num / den);
    } else {
      r.finite = false;
    }
  }
  if (!r.finite) {
    r.gronwall.message = "V grows on a step with zero forcing";
    return r;
  }
  // Round the constant up so the trapezoid inequality holds after rounding.
  r.Q *= 1.0 + 1e-12;
  GronwallInstance g;
  g.t = t;
  g.lambda = V;
  g.h.resize(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) g.h[j] = r.Q * velocity_sq[j];
  g.eta = 0.5 * eta;
  g.k = 0.0;
  r.gronwall = check_gronwall(g);
  return r;
}

int CertReport::count(CertStatus s) const {
  return static_cast<int>(std::count_if(entries.begin(), entries.end(), [s](const CertEntry& e) { return e.status == s; }));
}

const CertEntry* CertReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

std::string CertReport::to_text() const {
  std::ostringstream os;
  os << "entries = " << entries.size() << "\n";
  os << "violated = " << count(CertStatus::violated) << "\n";
  for (const auto& e : entries) {
    os << "\n[" << e.name << "]\n";
    os << "status = " << to_string(e.status) << "\n";
    os << "detail = " << e.detail << "\n";
    for (const auto& [k, v] : e.values) os << k << " = " << fmt17(v) << "\n";
  }
  return os.str();
}

std::string CertReport::to_csv() const {
  std::ostringstream os;
  os << "name,status,key,value\n";
  for (const auto& e : entries) {
    os << e.name << ',' << to_string(e.status) << ",,\n";
    for (const auto& [k, v] : e.values) os << e.name << ',' << to_string(e.status) << ',' << k << ',' << fmt17(v) << "\n";
  }
  return os.str();
}

namespace {

using Ledgers = std::map<std::string, EnergyLedger>;

const EnergyLedger* get(const Ledgers& l, const std::string& name, std::initializer_list<const char*> cols) {
  auto it = l.find(name);
  if (it == l.end()) return nullptr;
  for (const char* c : cols)
    if (!it->second.has_column(c)) return nullptr;
  return &it->second;
}

CertEntry energy_identity(const EnergyLedger& L, const CertifyTargets& tg) {
  CertEntry e{"energy_identity", CertStatus::verified, "", {}};
  const auto& E = L.column("E");
  const auto& D = L.column("diss_increment");
  double worst = 0.0, cum = 0.0;
  for (std::size_t j = 1; j < L.rows(); ++j) {
    const double d = E[j] - E[j - 1] + D[j];
    worst = std::max(worst, std::abs(d));
    cum += d;
  }
  e.values = {{"steps", static_cast<double>(L.rows() ? L.rows() - 1 : 0)},
              {"max_step_defect", worst},
              {"cumulative_defect", std::abs(cum)}};
  const bool ok = worst <= tg.step_defect && std::abs(cum) <= tg.cumulative_defect;
  e.status = ok ? CertStatus::verified : CertStatus::violated;
  e.detail = ok ? "energy balance closes on every step" : "energy balance defect above tolerance";
  return e;
}

CertEntry envelope_entry(const std::string& name, const EnergyLedger& L, const std::string& col, EnvelopeForm form,
                         const CertifyTargets& tg) {
  CertEntry e{name, CertStatus::hypothesis_failed, "", {}};
  const auto& c = L.column(col);
  if (all_zero(c)) {
    e.status = CertStatus::verified;
    e.detail = "identically zero";
    return e;
  }
  if (L.rows() < 10) {
    e.detail = "fewer than 10 samples";
    return e;
  }
  const EnvelopeFit fit = fit_envelope(L.times(), c, form, tg.envelope_slack);
  e.values = {{"Q", fit.Q},         {"omega", fit.omega},         {"P", fit.P},
              {"residual", fit.residual}, {"max_ratio", fit.max_ratio}, {"head_points", double(fit.head_points)}};
  if (fit.pass && fit.omega > 0.0) {
    e.status = CertStatus::verified_fitted;
    e.detail = "below fitted envelope Q exp(-omega t) + P";
    return e;
  }
  if (form == EnvelopeForm::decay_plus_floor) {
    // No decay phase: accept a curve that stays bounded by its early supremum.
    const std::size_t cut = c.size() - std::max<std::size_t>(2, (c.size() + 4) / 5);
    const double early = *std::max_element(c.begin(), c.begin() + static_cast<long>(cut));
    const double late = *std::max_element(c.begin() + static_cast<long>(cut), c.end());
    e.values.emplace_back("early_sup", early);
    e.values.emplace_back("late_sup", late);
    if (late <= (1.0 + tg.envelope_slack) * early) {
      e.status = CertStatus::verified_fitted;
      e.detail = "no decay phase; bounded by its early supremum";
      return e;
    }
  }
  e.status = CertStatus::violated;
  e.detail = fit.pass ? "fitted rate is not positive" : "curve exceeds fitted envelope";
  return e;
}

CertEntry dissipation_integral(const EnergyLedger& L, const CertifyTargets& tg) {
  CertEntry e{"dissipation_integral", CertStatus::verified, "", {}};
  const auto& vel = L.column("velocity_sq");
  if (all_zero(vel)) {
    e.detail = "identically zero";
    return e;
  }
  const double q = minimal_integral_offset(L.times(), vel, 0.5 * tg.integral_eta);
  e.values = {{"eta", tg.integral_eta}, {"Q_eta", q}};
  e.status = std::isfinite(q) ? CertStatus::verified_fitted : CertStatus::violated;
  e.detail = "integral bounded by (eta/2)(t - s) + Q_eta on all sample pairs";
  return e;
}

CertEntry v_gronwall(const EnergyLedger& L, const CertifyTargets& tg) {
  CertEntry e{"v_gronwall", CertStatus::hypothesis_failed, "", {}};
  const auto& V = L.column("V");
  if (all_zero(V)) {
    e.status = CertStatus::verified;
    e.detail = "identically zero";
    return e;
  }
  double eta = tg.v_eta;
  if (std::isnan(eta) && L.has_column("eta") && L.rows() > 0) eta = L.column("eta").front();
  if (!(eta > 0.0)) {
    e.detail = "no positive decay rate eta";
    return e;
  }
  const VInequalityReport r = instrument_v_inequality(L.times(), V, L.column("velocity_sq"), eta);
  e.values = {{"eta", eta}, {"Q_eta", r.Q}, {"m", r.gronwall.m}, {"max_ratio", r.gronwall.max_ratio}};
  e.detail = r.gronwall.message;
  switch (r.gronwall.status) {
    case GronwallStatus::verified: e.status = CertStatus::verified_fitted; break;
    case GronwallStatus::hypothesis_failed: e.status = CertStatus::hypothesis_failed; break;
    case GronwallStatus::violated: e.status = CertStatus::violated; break;
  }
  return e;
}

CertEntry smoothing_split(const EnergyLedger& L) {
  CertEntry e{"smoothing_split", CertStatus::violated, "", {}};
  const auto& a = L.column("alpha");
  const auto& lam = L.column("lambda");
  for (std::size_t j = 0; j < L.rows(); ++j) {
    if (L.times()[j] > 0.0 && a[j] < 0.5) {
      e.status = CertStatus::verified_fitted;
      e.values = {{"t_star", L.times()[j]}, {"alpha", a[j]}, {"lambda", lam[j]}};
      e.detail = "contraction below 1/2 reached";
      return e;
    }
  }
  e.detail = "no grid time with alpha < 1/2";
  return e;
}

}  // namespace

CertReport certify_run(const Ledgers& ledgers, const CertifyTargets& tg) {
  std::vector<std::function<CertEntry()>> jobs;
  if (const auto* L = get(ledgers, "steps", {"E", "diss_increment"})) jobs.emplace_back([=] { return energy_identity(*L, tg); });
  if (const auto* L = get(ledgers, "hyperbolic", {"norm_sq"}))
    jobs.emplace_back([=] { return envelope_entry("absorbing_decay", *L, "norm_sq", EnvelopeForm::decay_plus_floor, tg); });
  if (const auto* L = get(ledgers, "parabolic", {"norm_sq"}))
    jobs.emplace_back([=] { return envelope_entry("parabolic_dissipation", *L, "norm_sq", EnvelopeForm::decay_plus_floor, tg); });
  if (const auto* L = get(ledgers, "split", {"z_sq"}))
    jobs.emplace_back([=] { return envelope_entry("z_uniform_decay", *L, "z_sq", EnvelopeForm::pure_decay, tg); });
  if (const auto* L = get(ledgers, "split", {"velocity_sq"})) jobs.emplace_back([=] { return dissipation_integral(*L, tg); });
  if (const auto* L = get(ledgers, "split_steps", {"V", "velocity_sq"})) jobs.emplace_back([=] { return v_gronwall(*L, tg); });
  if (const auto* L = get(ledgers, "difference", {"alpha", "lambda"})) jobs.emplace_back([=] { return smoothing_split(*L); });

  CertReport report;
  report.entries.resize(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), tg.jobs, [&](int i) { report.entries[i] = jobs[i](); });
  return report;
}

}  // namespace rlxa
