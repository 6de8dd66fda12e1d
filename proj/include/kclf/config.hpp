#ifndef KCLF_CONFIG_HPP
#define KCLF_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kclf/certificate.hpp"
#include "kclf/vectorfield.hpp"

namespace kclf {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SubsystemConfig {
  std::vector<Coefficient> coefficients;  // component 0-based in memory
  std::optional<std::vector<std::optional<double>>> tail_l1;
};

struct SchemeConfig {
  SchemeKind kind = SchemeKind::polynomial;
  std::optional<double> xi;
  std::optional<double> kappa;
};

struct SimulationConfig {
  double dt = 1e-3;
  double horizon = 20.0;
  int trials = 100;
  std::uint64_t seed = 1;
  double min_dwell = 0.1;
  double max_dwell = 1.0;
  int initial_points = 50;
};

struct SystemConfig {
  int n = 0;
  int truncation_degree = 12;
  std::vector<SubsystemConfig> subsystems;
  SchemeConfig scheme;
  std::optional<double> rho_request;
  SimulationConfig simulation;
};

/// Parses and validates JSON text; components are 1-based in the text.
SystemConfig parse_config(const std::string& text);
SystemConfig load_config(const std::string& path);
/// Deterministic pretty JSON.
std::string config_to_json(const SystemConfig& cfg);

/// Builds the family; field invariants are checked by PolyVectorField.
SwitchedFamily build_family(const SystemConfig& cfg);
CertifyOptions certify_options(const SystemConfig& cfg);

/// Config carrying every stored coefficient of the family and its tails.
SystemConfig config_from_family(const SwitchedFamily& family, int truncation_degree,
                                SchemeKind scheme);

/// Multiset equality of coefficients per subsystem plus every scalar field.
bool equivalent(const SystemConfig& a, const SystemConfig& b);

}  // namespace kclf

#endif  // KCLF_CONFIG_HPP
