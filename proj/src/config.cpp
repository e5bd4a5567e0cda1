#include "rlxa/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace rlxa {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

struct Ctx {
  const std::string& source;
  int line;
  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(source, line, what); }
};

double to_double(const std::string& s, const Ctx& c) {
  if (s.empty()) c.fail("expected a number");
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    c.fail("not a number: '" + s + "'");
  }
  if (pos != s.size()) c.fail("not a number: '" + s + "'");
  if (!std::isfinite(v)) c.fail("non-finite number: '" + s + "'");
  return v;
}

long to_int(const std::string& s, const Ctx& c) {
  const double v = to_double(s, c);
  if (v != std::floor(v) || std::abs(v) > 9e15) c.fail("expected an integer: '" + s + "'");
  return static_cast<long>(v);
}

std::uint64_t to_u64(const std::string& s, const Ctx& c) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isdigit(ch); }))
    c.fail("expected an unsigned integer: '" + s + "'");
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    c.fail("unsigned integer out of range: '" + s + "'");
  }
}

std::vector<double> to_list(const std::string& s, const Ctx& c) {
  std::vector<double> out;
  for (const auto& p : split(s, ',')) out.push_back(to_double(p, c));
  return out;
}

/// name(args) with positional or key=value arguments.
struct Call {
  std::string name;
  std::vector<std::string> positional;
  std::map<std::string, std::string> named;
};

Call parse_call(const std::string& s, const Ctx& c) {
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') c.fail("expected name(args), got '" + s + "'");
  Call call;
  call.name = trim(s.substr(0, open));
  std::transform(call.name.begin(), call.name.end(), call.name.begin(), [](unsigned char ch) { return std::tolower(ch); });
  const std::string inner = trim(s.substr(open + 1, s.size() - open - 2));
  if (inner.empty()) return call;
  for (const auto& arg : split(inner, ',')) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) {
      if (!call.named.empty()) c.fail("positional argument after named argument in '" + s + "'");
      call.positional.push_back(arg);
    } else {
      call.named[trim(arg.substr(0, eq))] = trim(arg.substr(eq + 1));
    }
  }
  return call;
}

/// Arguments by name with positional fallback in `order`.
std::vector<double> call_args(const Call& call, const std::vector<std::string>& order,
                              const std::vector<double>& defaults, const Ctx& c) {
  if (call.positional.size() > order.size()) c.fail(call.name + ": too many arguments");
  std::vector<double> out = defaults;
  for (std::size_t i = 0; i < call.positional.size(); ++i) out[i] = to_double(call.positional[i], c);
  for (const auto& [k, v] : call.named) {
    const auto it = std::find(order.begin(), order.end(), k);
    if (it == order.end()) c.fail(call.name + ": unknown argument '" + k + "'");
    out[static_cast<std::size_t>(it - order.begin())] = to_double(v, c);
  }
  return out;
}

Domain parse_domain(const std::string& s, const Ctx& c) {
  const Call call = parse_call(s, c);
  if (call.name == "interval") {
    const auto a = call_args(call, {"a", "b"}, {0.0, 1.0}, c);
    if (!(a[1] > a[0])) c.fail("interval: need a < b");
    return Interval{a[0], a[1]};
  }
  if (call.name == "rectangle") {
    const auto a = call_args(call, {"ax", "bx", "ay", "by"}, {0.0, 1.0, 0.0, 1.0}, c);
    if (!(a[1] > a[0]) || !(a[3] > a[2])) c.fail("rectangle: need ax < bx and ay < by");
    return Rectangle{a[0], a[1], a[2], a[3]};
  }
  c.fail("unknown domain '" + call.name + "' (interval, rectangle)");
}

Nonlinearity parse_nonlinearity(const std::string& s, const Ctx& c) {
  const Call call = parse_call(s, c);
  try {
    if (call.name == "doublewell") {
      const auto a = call_args(call, {"k"}, {1.0}, c);
      return Nonlinearity::double_well(a[0]);
    }
    if (call.name == "poly") {
      const auto a = call_args(call, {"c0", "c1", "c2", "c3"}, {0.0, 0.0, 0.0, 0.0}, c);
      return Nonlinearity::polynomial(a);
    }
    if (call.name == "linear") {
      const auto a = call_args(call, {"c"}, {0.0}, c);
      return Nonlinearity::polynomial({0.0, a[0]});
    }
  } catch (const std::invalid_argument& e) {
    c.fail(e.what());
  }
  c.fail("unknown nonlinearity '" + call.name + "' (doublewell, poly, linear)");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const Ctx c{source, line_no};
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) c.fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) c.fail("missing key");
    if (val.empty()) c.fail("missing value for '" + key + "'");
    if (std::find(cfg.keys.begin(), cfg.keys.end(), key) != cfg.keys.end()) c.fail("duplicate key '" + key + "'");

    if (key == "domain") {
      cfg.domain = parse_domain(val, c);
      cfg.domain_text = val;
    } else if (key == "n") {
      cfg.n = static_cast<int>(to_int(val, c));
      if (cfg.n < 1) c.fail("n must be >= 1");
    } else if (key == "eps") {
      cfg.eps = to_double(val, c);
      if (cfg.eps < 0.0 || cfg.eps > 1.0) c.fail("eps must lie in [0, 1]");
    } else if (key == "eps_grid") {
      cfg.eps_grid = to_list(val, c);
      for (double e : cfg.eps_grid)
        if (!(e > 0.0) || e > 1.0) c.fail("eps_grid entries must lie in (0, 1]");
    } else if (key == "f") {
      cfg.f = parse_nonlinearity(val, c);
      cfg.f_text = val;
    } else if (key == "T") {
      cfg.T = to_double(val, c);
      if (cfg.T < 0.0) c.fail("T must be >= 0");
    } else if (key == "dt") {
      cfg.dt = to_double(val, c);
      if (!(cfg.dt > 0.0)) c.fail("dt must be positive");
    } else if (key == "tol") {
      cfg.tol = to_double(val, c);
      if (!(cfg.tol > 0.0)) c.fail("tol must be positive");
    } else if (key == "stride") {
      cfg.stride = static_cast<int>(to_int(val, c));
      if (cfg.stride < 1) c.fail("stride must be >= 1");
    } else if (key == "seed") {
      cfg.seed = to_u64(val, c);
    } else if (key == "seeds") {
      cfg.n_seeds = static_cast<int>(to_int(val, c));
      if (cfg.n_seeds < 1) c.fail("seeds must be >= 1");
    } else if (key == "levels") {
      cfg.levels = to_list(val, c);
      for (double l : cfg.levels)
        if (!(l >= 0.0)) c.fail("levels must be >= 0");
    } else if (key == "velocity") {
      if (val != "random" && val != "zero" && val != "well_prepared")
        c.fail("velocity must be random, zero or well_prepared");
      cfg.velocity = val;
    } else if (key == "alpha") {
      cfg.alpha = to_double(val, c);
    } else if (key == "eta") {
      cfg.eta = to_double(val, c);
    } else if (key == "beta") {
      cfg.beta = to_double(val, c);
    } else if (key == "mu") {
      cfg.mu = to_double(val, c);
    } else if (key == "t_transient") {
      cfg.t_transient = to_double(val, c);
      if (cfg.t_transient < 0.0) c.fail("t_transient must be >= 0");
    } else if (key == "t_sample") {
      cfg.t_sample = to_double(val, c);
      if (cfg.t_sample < 0.0) c.fail("t_sample must be >= 0");
    } else if (key == "t_max") {
      cfg.t_max = to_double(val, c);
      if (!(cfg.t_max > 0.0)) c.fail("t_max must be positive");
    } else if (key == "scan_step") {
      cfg.scan_step = to_double(val, c);
      if (!(cfg.scan_step > 0.0)) c.fail("scan_step must be positive");
    } else if (key == "difference") {
      if (val != "true" && val != "false") c.fail("difference must be true or false");
      cfg.difference = val == "true";
    } else if (key == "out") {
      cfg.out = val;
    } else {
      c.fail("unknown key '" + key + "'");
    }
    cfg.keys.push_back(key);
  }
  if (cfg.keys.empty()) throw ConfigError(source, 0, "empty configuration");
  if (cfg.beta && !(*cfg.beta >= cfg.f.monotonicity_defect()))
    throw ConfigError(source, 0, "beta must be >= the monotonicity defect of f");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

FunctionalParams resolve_params(const ExperimentConfig& cfg, double lambda, double eps, double beta) {
  const double mu = cfg.mu.value_or(0.5 * lambda);
  const double eta = cfg.eta.value_or(std::max(lambda / (4.0 * mu), 0.25) + 0.01);
  const double alpha = cfg.alpha.value_or(0.9 * std::min({2.0, 2.0 / eta, 2.0 * mu, lambda}));
  try {
    return FunctionalParams(alpha, eta, cfg.beta.value_or(beta), eps, lambda, mu);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("params", 0, e.what());
  }
}

}  // namespace rlxa
