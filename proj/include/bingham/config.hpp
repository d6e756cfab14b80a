#pragma once

#include "bingham/fixed_point.hpp"
#include "bingham/problems.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bingham {

/// Bad configuration value; `key()` names the offending setting.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::invalid_argument(key + ": " + message), key_(std::move(key)) {}
  [[nodiscard]] const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Everything one experiment needs. Sweep lists are empty unless swept.
struct SolverConfig {
  std::string problem = "channel";
  int n = 8;
  double mu = 1.0;
  double tau_s = 0.3;
  double epsilon = 1e-2;
  int m = 0;
  double beta = 1.0;
  NormKind norm = NormKind::dof;       // Anderson least-squares norm
  NormKind stop_norm = NormKind::l2;   // relative-residual stopping norm
  double tol = 1e-8;
  int max_iter = 500;
  double cs = 0.0;
  CornerPolicy corner_policy = CornerPolicy::lid_wins;
  StrainMeasure strain_measure = StrainMeasure::frobenius;
  int quad_degree = 5;
  double rigid_threshold = 1e-2;
  bool timing = false;
  std::string out = "out";

  std::vector<int> sweep_n;
  std::vector<double> sweep_epsilon;
  std::vector<int> sweep_m;
  std::vector<double> sweep_tau_s;

  [[nodiscard]] bool is_sweep() const {
    return !sweep_n.empty() || !sweep_epsilon.empty() || !sweep_m.empty() || !sweep_tau_s.empty();
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

/// "tau-s", "TAU_S" and "tau_s" all name the same key.
inline std::string canonical_key(std::string_view key) {
  std::string k = trim(key);
  for (char& c : k) c = c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return k;
}

inline double parse_double(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size())
    throw ConfigError(key, "expected a number, got '" + s + "'");
  return v;
}

inline int parse_int(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  int v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size())
    throw ConfigError(key, "expected an integer, got '" + s + "'");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  const std::string s = canonical_key(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key, "expected true or false, got '" + trim(text) + "'");
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& key, const std::string& text, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) throw ConfigError(key, "empty entry in list '" + trim(text) + "'");
    out.push_back(parse(key, item));
  }
  if (out.empty()) throw ConfigError(key, "list must not be empty");
  return out;
}

}  // namespace detail

/// Sets one key from its textual value. Used for both config files and
/// command-line flags so that the two accept exactly the same syntax.
inline void apply_setting(SolverConfig& cfg, std::string_view raw_key, const std::string& value) {
  using namespace detail;
  const std::string key = canonical_key(raw_key);
  try {
    if (key == "problem") {
      cfg.problem = canonical_key(value);
    } else if (key == "n") {
      cfg.n = parse_int(key, value);
    } else if (key == "mu") {
      cfg.mu = parse_double(key, value);
    } else if (key == "tau_s") {
      cfg.tau_s = parse_double(key, value);
    } else if (key == "epsilon") {
      cfg.epsilon = parse_double(key, value);
    } else if (key == "m") {
      cfg.m = parse_int(key, value);
    } else if (key == "beta") {
      cfg.beta = parse_double(key, value);
    } else if (key == "norm") {
      cfg.norm = parse_norm_kind(trim(value));
    } else if (key == "stop_norm") {
      cfg.stop_norm = parse_norm_kind(trim(value));
    } else if (key == "tol") {
      cfg.tol = parse_double(key, value);
    } else if (key == "max_iter") {
      cfg.max_iter = parse_int(key, value);
    } else if (key == "cs") {
      cfg.cs = parse_double(key, value);
    } else if (key == "corner_policy") {
      const std::string v = canonical_key(value);
      if (v == "lid_wins") cfg.corner_policy = CornerPolicy::lid_wins;
      else if (v == "watertight") cfg.corner_policy = CornerPolicy::watertight;
      else throw ConfigError(key, "expected lid_wins or watertight, got '" + trim(value) + "'");
    } else if (key == "strain_measure") {
      const std::string v = canonical_key(value);
      if (v == "frobenius") cfg.strain_measure = StrainMeasure::frobenius;
      else if (v == "invariant") cfg.strain_measure = StrainMeasure::invariant;
      else throw ConfigError(key, "expected frobenius or invariant, got '" + trim(value) + "'");
    } else if (key == "quad_degree") {
      cfg.quad_degree = parse_int(key, value);
    } else if (key == "rigid_threshold") {
      cfg.rigid_threshold = parse_double(key, value);
    } else if (key == "timing") {
      cfg.timing = parse_bool(key, value);
    } else if (key == "out") {
      cfg.out = trim(value);
    } else if (key == "sweep_n") {
      cfg.sweep_n = parse_list<int>(key, value, parse_int);
    } else if (key == "sweep_epsilon") {
      cfg.sweep_epsilon = parse_list<double>(key, value, parse_double);
    } else if (key == "sweep_m") {
      cfg.sweep_m = parse_list<int>(key, value, parse_int);
    } else if (key == "sweep_tau_s") {
      cfg.sweep_tau_s = parse_list<double>(key, value, parse_double);
    } else {
      throw ConfigError(key, "unknown key");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

/// Applies `key = value` lines; '#' starts a comment.
inline void apply_config_text(SolverConfig& cfg, const std::string& text, const std::string& source = "config") {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(detail::trim(line), source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

inline void apply_config_file(SolverConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  apply_config_text(cfg, buffer.str(), path);
}

/// Range checks, run after every source has been applied.
inline void validate(const SolverConfig& cfg) {
  if (cfg.problem != "channel" && cfg.problem != "cavity")
    throw ConfigError("problem", "expected channel or cavity, got '" + cfg.problem + "'");
  const auto check_n = [](int n) {
    if (n < 2) throw ConfigError("n", "must be >= 2");
  };
  const auto check_epsilon = [](double e) {
    if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("epsilon", "must be > 0");
  };
  const auto check_m = [](int m) {
    if (m < 0) throw ConfigError("m", "must be >= 0");
  };
  const auto check_tau = [&cfg](double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("tau_s", "must be >= 0");
    if (cfg.problem == "channel" && !(t < 0.5)) throw ConfigError("tau_s", "channel problem needs tau_s < 1/2");
  };
  check_n(cfg.n);
  check_epsilon(cfg.epsilon);
  check_m(cfg.m);
  check_tau(cfg.tau_s);
  std::for_each(cfg.sweep_n.begin(), cfg.sweep_n.end(), check_n);
  std::for_each(cfg.sweep_epsilon.begin(), cfg.sweep_epsilon.end(), check_epsilon);
  std::for_each(cfg.sweep_m.begin(), cfg.sweep_m.end(), check_m);
  std::for_each(cfg.sweep_tau_s.begin(), cfg.sweep_tau_s.end(), check_tau);
  if (!(cfg.mu > 0.0) || !std::isfinite(cfg.mu)) throw ConfigError("mu", "must be > 0");
  if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) throw ConfigError("beta", "must lie in (0, 1]");
  if (!(cfg.tol > 0.0)) throw ConfigError("tol", "must be > 0");
  if (cfg.max_iter < 1) throw ConfigError("max_iter", "must be >= 1");
  if (!(cfg.cs >= 0.0 && cfg.cs < 1.0)) throw ConfigError("cs", "must lie in [0, 1)");
  if (cfg.quad_degree < 1) throw ConfigError("quad_degree", "must be >= 1");
  if (!(cfg.rigid_threshold > 0.0)) throw ConfigError("rigid_threshold", "must be > 0");
  if (cfg.out.empty()) throw ConfigError("out", "must not be empty");
}

}  // namespace bingham
