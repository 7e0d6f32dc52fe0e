#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ridgeopt/eval.hpp"

namespace ridgeopt {

/// Full run description: the evaluation settings plus sweep axes and the
/// landscape grid. Loaded from a flat `key = value` document.
struct RunConfig {
  EvalConfig eval;
  std::vector<double> n_list;
  std::vector<double> aspect_list;
  std::vector<double> epsilon_list;
  std::vector<Vector> thetas;    // explicit landscape parameters
  bool thetas_principal = false; // theta = principal: one curve per basis vector
  int grid_points = 200;
  double grid_lo = 1e-2;
  double grid_hi = 1e3;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(trim(part));
  return parts;
}

class KeyValueFile {
 public:
  explicit KeyValueFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ": line " + std::to_string(line_no) +
                          ": expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty())
        throw ConfigError(path + ": line " + std::to_string(line_no) + ": empty key");
      if (entries_.count(key))
        throw ConfigError(path + ": duplicate key '" + key + "'");
      entries_[key] = trim(line.substr(eq + 1));
    }
  }

  std::optional<std::string> raw(const std::string& key) {
    seen_.insert(key);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  double number(const std::string& key, double fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    return parse_number(key, *v);
  }

  long integer(const std::string& key, long fallback) {
    const double v = number(key, static_cast<double>(fallback));
    const long r = static_cast<long>(v);
    if (static_cast<double>(r) != v)
      throw ConfigError(key + ": expected an integer, got '" + *raw(key) + "'");
    return r;
  }

  std::vector<double> number_list(const std::string& key) {
    auto v = raw(key);
    std::vector<double> out;
    if (!v) return out;
    for (const std::string& part : split(*v, ','))
      out.push_back(parse_number(key, part));
    return out;
  }

  void reject_unknown(const std::string& path) const {
    for (const auto& [key, value] : entries_)
      if (!seen_.count(key))
        throw ConfigError(path + ": unknown key '" + key + "'");
  }

 private:
  static double parse_number(const std::string& key, const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
      throw ConfigError(key + ": expected a number, got '" + text + "'");
    return v;
  }

  std::map<std::string, std::string> entries_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline RunConfig load_run_config(const std::string& path) {
  detail::KeyValueFile file(path);
  RunConfig config;
  EvalConfig& eval = config.eval;

  if (auto v = file.raw("setting")) {
    if (*v == "fixed_x") eval.setting = Setting::FixedX;
    else if (*v == "random_x") eval.setting = Setting::RandomX;
    else throw ConfigError("setting: expected fixed_x or random_x, got '" + *v + "'");
  } else {
    throw ConfigError("setting: required (fixed_x or random_x)");
  }

  eval.n = file.integer("n", 100);
  eval.d = file.integer("d", 90);
  if (auto v = file.raw("profile")) {
    if (*v == "bulk") eval.profile = ProfileKind::Bulk;
    else if (*v == "spiked") eval.profile = ProfileKind::Spiked;
    else if (*v == "explicit") eval.profile = ProfileKind::Explicit;
    else throw ConfigError("profile: expected bulk, spiked or explicit, got '" + *v + "'");
  }
  {
    const auto eigs = file.number_list("eigenvalues");
    if (!eigs.empty()) {
      eval.explicit_eigenvalues.resize(static_cast<Index>(eigs.size()));
      for (std::size_t i = 0; i < eigs.size(); ++i)
        eval.explicit_eigenvalues(static_cast<Index>(i)) = eigs[i];
    } else if (eval.profile == ProfileKind::Explicit) {
      throw ConfigError("eigenvalues: required for the explicit profile");
    }
  }
  eval.epsilon = file.number("epsilon", 1.0);
  eval.m_theta = static_cast<std::size_t>(file.integer("m_theta", 20));
  eval.m_x = static_cast<std::size_t>(file.integer("m_x", 10));
  eval.m_y = static_cast<std::size_t>(file.integer("m_y", 10));
  eval.m_xy = static_cast<std::size_t>(file.integer("m_xy", 20));
  eval.n_test = file.integer("n_test", 1000);
  if (auto v = file.raw("methods")) {
    for (const std::string& name : detail::split(*v, ',')) {
      const auto m = parse_method(name);
      if (!m) throw ConfigError("methods: unknown method '" + name + "'");
      eval.methods.push_back(*m);
    }
  }
  eval.seed = static_cast<std::uint64_t>(file.integer("seed", 42));
  eval.bootstrap_resamples = static_cast<std::size_t>(file.integer("bootstrap_resamples", 2000));
  eval.lambda0 = file.number("lambda0", 1.0);
  eval.p = file.number("p", 0.25);
  eval.delta = file.number("delta", 1e-4);
  eval.folds = static_cast<int>(file.integer("folds", 2));
  eval.threads = static_cast<unsigned>(file.integer("threads", 0));

  config.n_list = file.number_list("n_list");
  config.aspect_list = file.number_list("aspect_list");
  config.epsilon_list = file.number_list("epsilon_list");

  if (auto v = file.raw("theta")) {
    if (*v == "principal") {
      config.thetas_principal = true;
    } else {
      for (const std::string& group : detail::split(*v, ';')) {
        const auto entries = detail::split(group, ',');
        Vector theta(static_cast<Index>(entries.size()));
        for (std::size_t i = 0; i < entries.size(); ++i) {
          char* end = nullptr;
          theta(static_cast<Index>(i)) = std::strtod(entries[i].c_str(), &end);
          if (end == entries[i].c_str() || *end != '\0')
            throw ConfigError("theta: expected a number, got '" + entries[i] + "'");
        }
        if (theta.size() != eval.d)
          throw ConfigError("theta: expected " + std::to_string(eval.d) +
                            " entries, got " + std::to_string(theta.size()));
        config.thetas.push_back(std::move(theta));
      }
    }
  }
  config.grid_points = static_cast<int>(file.integer("grid_points", 200));
  config.grid_lo = file.number("grid_lo", 1e-2);
  config.grid_hi = file.number("grid_hi", 1e3);
  if (config.grid_points < 2) throw ConfigError("grid_points: must be >= 2");
  if (!(config.grid_lo > 0.0) || !(config.grid_hi > config.grid_lo))
    throw ConfigError("grid_lo/grid_hi: need 0 < grid_lo < grid_hi");

  file.reject_unknown(path);
  detail::validate(eval);
  return config;
}

}  // namespace ridgeopt
