#pragma once

// Run configuration: a flat key = value document ('#' comments, one key
// per line). Unknown and duplicate keys are hard errors; invariant
// violations name the field and the bound.

#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "physvac/grid.hpp"

namespace physvac {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  double gamma = 2.0;
  double mass = 1.0;
  int n_cells = 200;
  Grading grading = Grading::boundary_graded;
  double epsilon = 1e-3;
  std::vector<double> shape = {1.0, -1.0};  // polynomial in s = (B/A) r^2
  double velocity_amplitude = 0.0;
  std::vector<double> shape_t;
  double horizon = 1000.0;
  double ode_tol = 1e-10;
  double cfl = 0.5;
  int sample_count = 120;
  std::string output_dir = "out";
  long seed = 12345;
  std::vector<double> sweep_gammas;    // sweep subcommand only
  std::vector<double> sweep_epsilons;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw config_error("config: key '" + key + "' needs a number, got '" + v +
                       "'");
  }
  if (pos != v.size())
    throw config_error("config: trailing characters in value of '" + key +
                       "'");
  return x;
}

inline std::vector<double> parse_list(const std::string& key,
                                      const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  if (out.empty())
    throw config_error("config: key '" + key + "' needs a non-empty list");
  return out;
}

}  // namespace detail

inline void validate(const RunConfig& c) {
  if (!(c.gamma > 1.0)) throw config_error("config: gamma must be > 1");
  if (!(c.mass > 0.0)) throw config_error("config: mass must be > 0");
  if (c.n_cells < 32) throw config_error("config: n_cells must be >= 32");
  if (!(c.cfl > 0.0 && c.cfl <= 0.9))
    throw config_error("config: cfl must be in (0, 0.9]");
  if (!(c.horizon >= 1.0)) throw config_error("config: horizon must be >= 1");
  if (!(c.ode_tol >= 1e-14 && c.ode_tol <= 1e-6))
    throw config_error("config: ode_tol must be in [1e-14, 1e-6]");
  if (c.sample_count < 2)
    throw config_error("config: sample_count must be >= 2");
  for (double gsw : c.sweep_gammas)
    if (!(gsw > 1.0)) throw config_error("config: sweep_gammas must be > 1");
}

inline RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config: line " + std::to_string(lineno) +
                         " is not 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (!seen.insert(key).second)
      throw config_error("config: duplicate key '" + key + "'");

    if (key == "gamma") c.gamma = detail::parse_double(key, val);
    else if (key == "mass") c.mass = detail::parse_double(key, val);
    else if (key == "n_cells")
      c.n_cells = static_cast<int>(detail::parse_double(key, val));
    else if (key == "grading") {
      if (val == "uniform") c.grading = Grading::uniform;
      else if (val == "boundary_graded") c.grading = Grading::boundary_graded;
      else
        throw config_error(
            "config: grading must be 'uniform' or 'boundary_graded'");
    } else if (key == "epsilon") c.epsilon = detail::parse_double(key, val);
    else if (key == "shape") c.shape = detail::parse_list(key, val);
    else if (key == "velocity_amplitude")
      c.velocity_amplitude = detail::parse_double(key, val);
    else if (key == "shape_t") c.shape_t = detail::parse_list(key, val);
    else if (key == "horizon") c.horizon = detail::parse_double(key, val);
    else if (key == "ode_tol") c.ode_tol = detail::parse_double(key, val);
    else if (key == "cfl") c.cfl = detail::parse_double(key, val);
    else if (key == "sample_count")
      c.sample_count = static_cast<int>(detail::parse_double(key, val));
    else if (key == "output_dir") c.output_dir = val;
    else if (key == "seed")
      c.seed = static_cast<long>(detail::parse_double(key, val));
    else if (key == "sweep_gammas") c.sweep_gammas = detail::parse_list(key, val);
    else if (key == "sweep_epsilons")
      c.sweep_epsilons = detail::parse_list(key, val);
    else
      throw config_error("config: unknown key '" + key + "'");
  }
  validate(c);
  return c;
}

inline std::string config_echo(const RunConfig& c) {
  std::ostringstream out;
  out.precision(17);
  auto list = [](const std::vector<double>& v) {
    std::ostringstream s;
    s.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
    return s.str();
  };
  out << "gamma = " << c.gamma << "\n"
      << "mass = " << c.mass << "\n"
      << "n_cells = " << c.n_cells << "\n"
      << "grading = "
      << (c.grading == Grading::uniform ? "uniform" : "boundary_graded")
      << "\n"
      << "epsilon = " << c.epsilon << "\n"
      << "shape = " << list(c.shape) << "\n"
      << "velocity_amplitude = " << c.velocity_amplitude << "\n";
  if (!c.shape_t.empty()) out << "shape_t = " << list(c.shape_t) << "\n";
  out << "horizon = " << c.horizon << "\n"
      << "ode_tol = " << c.ode_tol << "\n"
      << "cfl = " << c.cfl << "\n"
      << "sample_count = " << c.sample_count << "\n"
      << "output_dir = " << c.output_dir << "\n"
      << "seed = " << c.seed << "\n";
  if (!c.sweep_gammas.empty())
    out << "sweep_gammas = " << list(c.sweep_gammas) << "\n";
  if (!c.sweep_epsilons.empty())
    out << "sweep_epsilons = " << list(c.sweep_epsilons) << "\n";
  return out.str();
}

}  // namespace physvac
