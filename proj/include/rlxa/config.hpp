#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlxa/functionals.hpp"
#include "rlxa/mesh.hpp"
#include "rlxa/nonlinearity.hpp"

namespace rlxa {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what)
      : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

/// Flat `key = value` settings. `#` starts a comment. Domains and
/// nonlinearities use a call form, e.g. `domain = rectangle(0, 1, 0, 2)` or
/// `f = doublewell(k = 1)`.
struct ExperimentConfig {
  std::optional<Domain> domain;
  std::string domain_text;
  int n = 32;
  double eps = 1.0;                // 0 selects the parabolic problem
  std::vector<double> eps_grid;    // limit sweeps
  Nonlinearity f = Nonlinearity::double_well(1.0);
  std::string f_text = "doublewell(k=1)";
  double T = 10.0;
  double dt = 1e-2;
  double tol = 1e-10;
  int stride = 10;
  std::uint64_t seed = 1;
  int n_seeds = 6;
  std::vector<double> levels{1.0, 5.0, 10.0};
  std::string velocity = "random";  // random | zero | well_prepared
  std::optional<double> alpha, eta, beta, mu;
  double t_transient = 5.0;
  double t_sample = 5.0;
  double t_max = 50.0;
  double scan_step = 0.5;
  bool difference = false;          // split: also run the two-seed difference split
  std::string out = "out";
  std::vector<std::string> keys;    // keys present, in file order
};

/// Throws ConfigError with the offending line number. Empty input is an error.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Functional parameters for one ε: defaults from λ and β, then the
/// overrides. Throws ConfigError naming the violated window.
FunctionalParams resolve_params(const ExperimentConfig& cfg, double lambda, double eps, double beta);

}  // namespace rlxa
