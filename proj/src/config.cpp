#include "kclf/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace kclf {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(where + ": unknown key \"" + key + "\"");
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + ": not finite");
  return v;
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<int>();
}

Complex complex_value(const json& j, const std::string& where) {
  check_keys(j, where, {"re", "im"});
  if (!j.contains("re")) throw ConfigError(where + ": missing \"re\"");
  const double re = number(j.at("re"), where + ".re");
  const double im = j.contains("im") ? number(j.at("im"), where + ".im") : 0.0;
  return {re, im};
}

SchemeKind scheme_kind(const std::string& s) {
  if (s == "poly") return SchemeKind::polynomial;
  if (s == "dd") return SchemeKind::diagonal_dominance;
  throw ConfigError("scheme.kind: expected \"poly\" or \"dd\", got \"" + s + "\"");
}

SubsystemConfig parse_subsystem(const json& j, int n, const std::string& where) {
  check_keys(j, where, {"coefficients", "tail_l1"});
  if (!j.contains("coefficients") || !j.at("coefficients").is_array())
    throw ConfigError(where + ": \"coefficients\" must be an array");
  SubsystemConfig sub;
  std::set<std::pair<int, std::vector<int>>> seen;
  std::size_t i = 0;
  for (const auto& c : j.at("coefficients")) {
    const std::string at = where + ".coefficients[" + std::to_string(i++) + "]";
    check_keys(c, at, {"component", "exponents", "value"});
    if (!c.contains("component") || !c.contains("exponents") || !c.contains("value"))
      throw ConfigError(at + ": needs component, exponents and value");
    const int l = integer(c.at("component"), at + ".component");
    if (l < 1 || l > n) throw ConfigError(at + ": component out of range 1.." + std::to_string(n));
    const json& ex = c.at("exponents");
    if (!ex.is_array() || static_cast<int>(ex.size()) != n)
      throw ConfigError(at + ": exponents must be an array of length " + std::to_string(n));
    std::vector<int> alpha;
    for (const auto& e : ex) {
      const int a = integer(e, at + ".exponents");
      if (a < 0) throw ConfigError(at + ": negative exponent");
      alpha.push_back(a);
    }
    if (std::all_of(alpha.begin(), alpha.end(), [](int a) { return a == 0; }))
      throw ConfigError(at + ": constant term (|alpha| = 0) is not allowed; the origin must be "
                             "an equilibrium");
    if (!seen.insert({l, alpha}).second)
      throw ConfigError(at + ": duplicate coefficient");
    sub.coefficients.push_back({l - 1, MultiIndex(alpha), complex_value(c.at("value"), at + ".value")});
  }
  if (j.contains("tail_l1")) {
    const json& t = j.at("tail_l1");
    if (!t.is_array() || static_cast<int>(t.size()) != n)
      throw ConfigError(where + ".tail_l1: expected an array of length " + std::to_string(n));
    std::vector<std::optional<double>> tails;
    for (const auto& v : t) {
      if (v.is_null()) {
        tails.emplace_back();
      } else {
        const double x = number(v, where + ".tail_l1");
        if (x < 0) throw ConfigError(where + ".tail_l1: negative norm");
        tails.emplace_back(x);
      }
    }
    sub.tail_l1 = std::move(tails);
  }
  return sub;
}

json complex_json(Complex c) { return json{{"re", c.real()}, {"im", c.imag()}}; }

}  // namespace

SystemConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"n", "truncation_degree", "subsystems", "scheme", "rho_request", "simulation"});
  SystemConfig cfg;
  if (!j.contains("n")) throw ConfigError("config: missing \"n\"");
  cfg.n = integer(j.at("n"), "n");
  if (cfg.n < 1 || cfg.n > 16) throw ConfigError("n: must be in 1..16");
  if (j.contains("truncation_degree")) {
    cfg.truncation_degree = integer(j.at("truncation_degree"), "truncation_degree");
    if (cfg.truncation_degree < 1) throw ConfigError("truncation_degree: must be >= 1");
  }
  if (!j.contains("subsystems") || !j.at("subsystems").is_array() || j.at("subsystems").empty())
    throw ConfigError("subsystems: expected a non-empty array");
  for (std::size_t i = 0; i < j.at("subsystems").size(); ++i)
    cfg.subsystems.push_back(
        parse_subsystem(j.at("subsystems")[i], cfg.n, "subsystems[" + std::to_string(i) + "]"));

  if (j.contains("scheme")) {
    const json& s = j.at("scheme");
    check_keys(s, "scheme", {"kind", "xi", "kappa"});
    if (s.contains("kind")) {
      if (!s.at("kind").is_string()) throw ConfigError("scheme.kind: expected a string");
      cfg.scheme.kind = scheme_kind(s.at("kind").get<std::string>());
    }
    if (s.contains("xi") && !s.at("xi").is_null()) cfg.scheme.xi = number(s.at("xi"), "scheme.xi");
    if (s.contains("kappa") && !s.at("kappa").is_null())
      cfg.scheme.kappa = number(s.at("kappa"), "scheme.kappa");
  }
  if (j.contains("rho_request") && !j.at("rho_request").is_null()) {
    cfg.rho_request = number(j.at("rho_request"), "rho_request");
    if (!(*cfg.rho_request > 0.0 && *cfg.rho_request <= 1.0))
      throw ConfigError("rho_request: must be in (0, 1]");
  }
  if (j.contains("simulation")) {
    const json& s = j.at("simulation");
    check_keys(s, "simulation",
               {"dt", "horizon", "trials", "seed", "min_dwell", "max_dwell", "initial_points"});
    SimulationConfig& sim = cfg.simulation;
    if (s.contains("dt")) sim.dt = number(s.at("dt"), "simulation.dt");
    if (s.contains("horizon")) sim.horizon = number(s.at("horizon"), "simulation.horizon");
    if (s.contains("trials")) sim.trials = integer(s.at("trials"), "simulation.trials");
    if (s.contains("seed")) {
      if (!s.at("seed").is_number_unsigned() && !s.at("seed").is_number_integer())
        throw ConfigError("simulation.seed: expected a non-negative integer");
      if (s.at("seed").is_number_integer() && s.at("seed").get<long long>() < 0)
        throw ConfigError("simulation.seed: expected a non-negative integer");
      sim.seed = s.at("seed").get<std::uint64_t>();
    }
    if (s.contains("min_dwell")) sim.min_dwell = number(s.at("min_dwell"), "simulation.min_dwell");
    if (s.contains("max_dwell")) sim.max_dwell = number(s.at("max_dwell"), "simulation.max_dwell");
    if (s.contains("initial_points"))
      sim.initial_points = integer(s.at("initial_points"), "simulation.initial_points");
    if (!(sim.dt > 0)) throw ConfigError("simulation.dt: must be positive");
    if (!(sim.horizon >= 0)) throw ConfigError("simulation.horizon: must be non-negative");
    if (sim.trials < 1) throw ConfigError("simulation.trials: must be >= 1");
    if (sim.initial_points < 1) throw ConfigError("simulation.initial_points: must be >= 1");
    if (!(sim.min_dwell > 0 && sim.max_dwell >= sim.min_dwell))
      throw ConfigError("simulation: need 0 < min_dwell <= max_dwell");
  }
  // Field invariants (finite coefficients, tails >= stored sums).
  try {
    build_family(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const SystemConfig& cfg) {
  json j;
  j["n"] = cfg.n;
  j["truncation_degree"] = cfg.truncation_degree;
  json subs = json::array();
  for (const auto& s : cfg.subsystems) {
    json cs = json::array();
    for (const auto& c : s.coefficients)
      cs.push_back(json{{"component", c.component + 1},
                        {"exponents", c.exponents.exponents()},
                        {"value", complex_json(c.value)}});
    json sj{{"coefficients", cs}};
    if (s.tail_l1) {
      json t = json::array();
      for (const auto& v : *s.tail_l1) t.push_back(v ? json(*v) : json(nullptr));
      sj["tail_l1"] = t;
    }
    subs.push_back(sj);
  }
  j["subsystems"] = subs;
  json sch{{"kind", to_string(cfg.scheme.kind)}};
  if (cfg.scheme.xi) sch["xi"] = *cfg.scheme.xi;
  if (cfg.scheme.kappa) sch["kappa"] = *cfg.scheme.kappa;
  j["scheme"] = sch;
  if (cfg.rho_request) j["rho_request"] = *cfg.rho_request;
  const SimulationConfig& sim = cfg.simulation;
  j["simulation"] = json{{"dt", sim.dt},
                         {"horizon", sim.horizon},
                         {"trials", sim.trials},
                         {"seed", sim.seed},
                         {"min_dwell", sim.min_dwell},
                         {"max_dwell", sim.max_dwell},
                         {"initial_points", sim.initial_points}};
  return j.dump(2) + "\n";
}

SwitchedFamily build_family(const SystemConfig& cfg) {
  std::vector<PolyVectorField> fields;
  for (const auto& s : cfg.subsystems)
    fields.push_back(make_field(cfg.n, s.coefficients,
                                s.tail_l1 ? *s.tail_l1 : std::vector<std::optional<double>>{}));
  return SwitchedFamily(std::move(fields));
}

CertifyOptions certify_options(const SystemConfig& cfg) {
  CertifyOptions o;
  o.truncation_degree = cfg.truncation_degree;
  o.scheme = cfg.scheme.kind;
  o.xi = cfg.scheme.xi;
  o.kappa = cfg.scheme.kappa;
  o.rho_request = cfg.rho_request;
  return o;
}

SystemConfig config_from_family(const SwitchedFamily& family, int truncation_degree,
                                SchemeKind scheme) {
  SystemConfig cfg;
  cfg.n = family.dimension();
  cfg.truncation_degree = truncation_degree;
  cfg.scheme.kind = scheme;
  for (const auto& F : family.subsystems) {
    SubsystemConfig s;
    for (int l = 0; l < F.dimension(); ++l)
      for (const auto& [alpha, c] : F.component(l).terms()) s.coefficients.push_back({l, alpha, c});
    if (F.has_any_tail()) {
      std::vector<std::optional<double>> t;
      for (int l = 0; l < F.dimension(); ++l) t.push_back(F.tail_l1(l));
      s.tail_l1 = std::move(t);
    }
    cfg.subsystems.push_back(std::move(s));
  }
  return cfg;
}

bool equivalent(const SystemConfig& a, const SystemConfig& b) {
  auto key = [](const SystemConfig& c) {
    return std::tie(c.n, c.truncation_degree, c.scheme.kind, c.scheme.xi, c.scheme.kappa,
                    c.rho_request, c.simulation.dt, c.simulation.horizon, c.simulation.trials,
                    c.simulation.seed, c.simulation.min_dwell, c.simulation.max_dwell,
                    c.simulation.initial_points);
  };
  if (key(a) != key(b) || a.subsystems.size() != b.subsystems.size()) return false;
  using Entry = std::tuple<int, std::vector<int>, double, double>;
  auto multiset = [](const SubsystemConfig& s) {
    std::multiset<Entry> m;
    for (const auto& c : s.coefficients)
      m.insert({c.component, c.exponents.exponents(), c.value.real(), c.value.imag()});
    return m;
  };
  for (std::size_t i = 0; i < a.subsystems.size(); ++i) {
    if (multiset(a.subsystems[i]) != multiset(b.subsystems[i])) return false;
    if (a.subsystems[i].tail_l1 != b.subsystems[i].tail_l1) return false;
  }
  return true;
}

}  // namespace kclf
