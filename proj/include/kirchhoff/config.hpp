#pragma once

// RunConfig: one JSON document describing the problem and the numerics.
// Missing keys take defaults, unknown keys are rejected, and to_json emits the
// fully resolved document.

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kirchhoff/error.hpp"
#include "kirchhoff/fd_newton.hpp"
#include "kirchhoff/groundstate.hpp"
#include "kirchhoff/kirchhoff_coeff.hpp"
#include "kirchhoff/nonlinearity.hpp"
#include "kirchhoff/semiclassical.hpp"

namespace kirchhoff {

using Json = nlohmann::ordered_json;

struct NonlinearityConfig {
  int N = 3;
  std::string family = "critical_sobolev";  // critical_sobolev | critical_exponential | power
  double lambda = 1.0;
  double p = 5.0;
  double mu = 1.0;
  double q = 1.0;  // power: f(t) = t^q
  std::optional<double> truncation;
};

struct CoeffConfig {
  std::string family = "affine";  // affine | constant | power
  double a = 1.0;
  double b = 0.5;
  double gamma = 1.0;  // power: M(t) = a + b t^gamma
};

struct PotentialConfig {
  std::string family = "default_well";
  double O_radius = 1.0;
};

struct MoserConfig {
  long n_max = 1L << 20;
  std::optional<double> beta0;  // absent: +inf
};

struct SemiclassicalConfig {
  std::vector<double> eps{0.5, 0.2, 0.1, 0.05};
  double damping = 0.5;
  int max_outer = 200;
  double tol = 1e-10;
  double kappa_factor = 1.1;
  double k_factor = 1.01;
};

struct RunConfig {
  NonlinearityConfig nonlinearity;
  double m = 1.0;
  CoeffConfig coeff;
  std::optional<PotentialConfig> potential;

  GridOptions grid;
  double atol = 1e-12;
  double rtol = 1e-10;
  double newton_tol = 1e-10;
  std::optional<double> s_max;
  double R_max = 60.0;
  std::size_t fd_nodes = 60001;
  double fd_stretch = 5.5;

  MoserConfig moser;
  SemiclassicalConfig semiclassical;
};

namespace detail {

inline void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw Error(ErrorKind::Parse, "unknown key '" + it.key() + "' in " + where);
}

inline double get_number(const Json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number()) throw Error(ErrorKind::Parse, where + "." + key + " must be a number");
  return v.get<double>();
}

inline std::optional<double> get_optional(const Json& j, const char* key, std::optional<double> fallback,
                                          const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (j.at(key).is_null()) return std::nullopt;
  return get_number(j, key, 0.0, where);
}

inline long get_integer(const Json& j, const char* key, long fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer()) throw Error(ErrorKind::Parse, where + "." + key + " must be an integer");
  return v.get<long>();
}

inline std::string get_string(const Json& j, const char* key, const std::string& fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_string()) throw Error(ErrorKind::Parse, where + "." + key + " must be a string");
  return v.get<std::string>();
}

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace detail

inline void check_eps_list(const std::vector<double>& eps) {
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] >= 0.0 && std::isfinite(eps[i]))) throw Error(ErrorKind::Parse, "eps entries must be >= 0");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw Error(ErrorKind::Parse, "eps list must be strictly descending");
  }
}

/// Parses and resolves a config; the family objects are built once here so a
/// bad parameter fails as a parse error.
inline RunConfig parse_config(const Json& root);

inline NonlinearitySpec make_nonlinearity(const RunConfig& cfg) {
  const auto& n = cfg.nonlinearity;
  NonlinearitySpec s;
  if (n.family == "critical_sobolev") {
    s = NonlinearitySpec::critical_sobolev(n.N, n.lambda, n.p);
  } else if (n.family == "critical_exponential") {
    require(n.N == 2, "critical_exponential needs N = 2");
    s = NonlinearitySpec::critical_exponential(n.mu);
  } else if (n.family == "power") {
    require(n.q > 0.0, "power nonlinearity needs q > 0");
    const double q = n.q;
    CustomNonlinearity c;
    c.f = [q](double t) { return t > 0.0 ? std::pow(t, q) : 0.0; };
    c.F = [q](double t) { return t > 0.0 ? std::pow(t, q + 1.0) / (q + 1.0) : 0.0; };
    c.df = [q](double t) { return t > 0.0 ? q * std::pow(t, q - 1.0) : 0.0; };
    c.name = "power";
    s = NonlinearitySpec::custom(n.N, std::move(c));
  } else {
    throw Error(ErrorKind::Parse, "unknown nonlinearity family '" + n.family + "'");
  }
  if (n.truncation) s = truncate(s, *n.truncation);
  return s;
}

inline KirchhoffCoeff make_coeff(const RunConfig& cfg) {
  const auto& c = cfg.coeff;
  if (c.family == "affine") return KirchhoffCoeff::affine(c.a, c.b);
  if (c.family == "constant") return KirchhoffCoeff::constant(c.a);
  if (c.family == "power") {
    require(c.a > 0.0 && c.b >= 0.0 && c.gamma > 0.0, "power coefficient needs a > 0, b >= 0, gamma > 0");
    const double a = c.a, b = c.b, g = c.gamma;
    return KirchhoffCoeff::custom([=](double t) { return a + b * std::pow(t, g); },
                                  [=](double t) { return a * t + b * std::pow(t, g + 1.0) / (g + 1.0); }, "power");
  }
  throw Error(ErrorKind::Parse, "unknown coefficient family '" + c.family + "'");
}

inline PotentialSpec make_potential(const RunConfig& cfg) {
  if (!cfg.potential) throw Error(ErrorKind::Parse, "problem.potential is required");
  if (cfg.potential->family != "default_well")
    throw Error(ErrorKind::Parse, "unknown potential family '" + cfg.potential->family + "'");
  return PotentialSpec::default_well(cfg.m, cfg.potential->O_radius);
}

inline LocalProblem make_problem(const RunConfig& cfg) {
  LocalProblem p{make_nonlinearity(cfg), cfg.m};
  p.validate();
  return p;
}

inline ShootingOptions shooting_options(const RunConfig& cfg) {
  ShootingOptions o;
  o.grid = cfg.grid;
  o.grid.R_max = cfg.R_max;
  o.tol = {cfg.atol, cfg.rtol};
  o.s_max = cfg.s_max;
  return o;
}

inline FdNewtonOptions newton_options(const RunConfig& cfg) {
  FdNewtonOptions o;
  o.nodes = cfg.fd_nodes;
  o.R_max = cfg.R_max;
  o.stretch = cfg.fd_stretch;
  o.tol = cfg.newton_tol;
  return o;
}

inline SemiclassicalOptions semiclassical_options(const RunConfig& cfg) {
  SemiclassicalOptions o;
  o.newton = newton_options(cfg);
  o.shooting = shooting_options(cfg);
  o.damping = cfg.semiclassical.damping;
  o.max_outer = cfg.semiclassical.max_outer;
  o.tol = cfg.semiclassical.tol;
  o.kappa_factor = cfg.semiclassical.kappa_factor;
  o.k_factor = cfg.semiclassical.k_factor;
  return o;
}

inline RunConfig parse_config(const Json& root) {
  using detail::check_keys;
  using detail::get_number;
  RunConfig cfg;
  check_keys(root, {"problem", "numerics", "moser", "semiclassical"}, "config");

  const Json empty = Json::object();
  const Json& prob = root.contains("problem") ? root.at("problem") : empty;
  check_keys(prob, {"nonlinearity", "m", "coeff", "potential"}, "problem");
  cfg.m = get_number(prob, "m", cfg.m, "problem");

  if (prob.contains("nonlinearity")) {
    const Json& j = prob.at("nonlinearity");
    const std::string w = "problem.nonlinearity";
    check_keys(j, {"N", "family", "lambda", "p", "mu", "q", "truncation"}, w);
    auto& n = cfg.nonlinearity;
    n.N = static_cast<int>(detail::get_integer(j, "N", n.N, w));
    n.family = detail::get_string(j, "family", n.N == 2 ? "critical_exponential" : n.family, w);
    n.lambda = get_number(j, "lambda", n.lambda, w);
    n.p = get_number(j, "p", n.p, w);
    n.mu = get_number(j, "mu", n.mu, w);
    n.q = get_number(j, "q", n.q, w);
    n.truncation = detail::get_optional(j, "truncation", n.truncation, w);
  }
  if (prob.contains("coeff")) {
    const Json& j = prob.at("coeff");
    const std::string w = "problem.coeff";
    check_keys(j, {"family", "a", "b", "gamma"}, w);
    auto& c = cfg.coeff;
    c.family = detail::get_string(j, "family", c.family, w);
    c.a = get_number(j, "a", c.a, w);
    c.b = get_number(j, "b", c.family == "constant" ? 0.0 : c.b, w);
    c.gamma = get_number(j, "gamma", c.gamma, w);
  }
  if (prob.contains("potential") && !prob.at("potential").is_null()) {
    const Json& j = prob.at("potential");
    const std::string w = "problem.potential";
    check_keys(j, {"family", "O_radius"}, w);
    PotentialConfig p;
    p.family = detail::get_string(j, "family", p.family, w);
    p.O_radius = get_number(j, "O_radius", p.O_radius, w);
    cfg.potential = p;
  }

  if (root.contains("numerics")) {
    const Json& j = root.at("numerics");
    check_keys(j, {"grid", "tolerances", "s_max", "R_max", "fd"}, "numerics");
    if (j.contains("grid")) {
      const Json& g = j.at("grid");
      const std::string w = "numerics.grid";
      check_keys(g, {"h_core", "R_core", "h", "R1", "growth"}, w);
      cfg.grid.h_core = get_number(g, "h_core", cfg.grid.h_core, w);
      cfg.grid.R_core = get_number(g, "R_core", cfg.grid.R_core, w);
      cfg.grid.h = get_number(g, "h", cfg.grid.h, w);
      cfg.grid.R1 = get_number(g, "R1", cfg.grid.R1, w);
      cfg.grid.growth = get_number(g, "growth", cfg.grid.growth, w);
    }
    if (j.contains("tolerances")) {
      const Json& t = j.at("tolerances");
      const std::string w = "numerics.tolerances";
      check_keys(t, {"atol", "rtol", "newton"}, w);
      cfg.atol = get_number(t, "atol", cfg.atol, w);
      cfg.rtol = get_number(t, "rtol", cfg.rtol, w);
      cfg.newton_tol = get_number(t, "newton", cfg.newton_tol, w);
    }
    cfg.s_max = detail::get_optional(j, "s_max", cfg.s_max, "numerics");
    cfg.R_max = get_number(j, "R_max", cfg.R_max, "numerics");
    if (j.contains("fd")) {
      const Json& f = j.at("fd");
      check_keys(f, {"nodes", "stretch"}, "numerics.fd");
      const long nodes = detail::get_integer(f, "nodes", static_cast<long>(cfg.fd_nodes), "numerics.fd");
      if (nodes < 5) throw Error(ErrorKind::Parse, "numerics.fd.nodes must be >= 5");
      cfg.fd_nodes = static_cast<std::size_t>(nodes);
      cfg.fd_stretch = get_number(f, "stretch", cfg.fd_stretch, "numerics.fd");
    }
  }

  if (root.contains("moser")) {
    const Json& j = root.at("moser");
    check_keys(j, {"n_max", "beta0"}, "moser");
    cfg.moser.n_max = detail::get_integer(j, "n_max", cfg.moser.n_max, "moser");
    cfg.moser.beta0 = detail::get_optional(j, "beta0", cfg.moser.beta0, "moser");
  }

  if (root.contains("semiclassical")) {
    const Json& j = root.at("semiclassical");
    const std::string w = "semiclassical";
    check_keys(j, {"eps", "damping", "max_outer", "tol", "kappa_factor", "k_factor"}, w);
    auto& s = cfg.semiclassical;
    if (j.contains("eps")) {
      if (!j.at("eps").is_array()) throw Error(ErrorKind::Parse, "semiclassical.eps must be an array");
      s.eps.clear();
      for (const auto& e : j.at("eps")) {
        if (!e.is_number()) throw Error(ErrorKind::Parse, "semiclassical.eps entries must be numbers");
        s.eps.push_back(e.get<double>());
      }
    }
    s.damping = get_number(j, "damping", s.damping, w);
    s.max_outer = static_cast<int>(detail::get_integer(j, "max_outer", s.max_outer, w));
    s.tol = get_number(j, "tol", s.tol, w);
    s.kappa_factor = get_number(j, "kappa_factor", s.kappa_factor, w);
    s.k_factor = get_number(j, "k_factor", s.k_factor, w);
  }

  // Build every family once so bad parameters surface as parse errors.
  try {
    (void)make_problem(cfg);
    (void)make_coeff(cfg);
    if (cfg.potential) make_potential(cfg).validate();
    require(cfg.R_max > cfg.grid.R1, "numerics.R_max must exceed grid.R1");
    require(cfg.moser.n_max >= 2, "moser.n_max must be >= 2");
    require(cfg.semiclassical.damping > 0.0 && cfg.semiclassical.damping <= 1.0, "damping must lie in (0, 1]");
    check_eps_list(cfg.semiclassical.eps);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) throw;
    throw Error(ErrorKind::Parse, e.what());
  }
  return cfg;
}

inline RunConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  return parse_config(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

inline Json to_json(const RunConfig& cfg) {
  const auto& n = cfg.nonlinearity;
  Json nl = {{"N", n.N}, {"family", n.family}};
  if (n.family == "critical_sobolev") {
    nl["lambda"] = n.lambda;
    nl["p"] = n.p;
  } else if (n.family == "critical_exponential") {
    nl["mu"] = n.mu;
  } else {
    nl["q"] = n.q;
  }
  nl["truncation"] = detail::optional_json(n.truncation);

  Json coeff = {{"family", cfg.coeff.family}, {"a", cfg.coeff.a}};
  if (cfg.coeff.family != "constant") coeff["b"] = cfg.coeff.b;
  if (cfg.coeff.family == "power") coeff["gamma"] = cfg.coeff.gamma;

  Json problem = {{"nonlinearity", nl}, {"m", cfg.m}, {"coeff", coeff}};
  problem["potential"] = cfg.potential
                             ? Json{{"family", cfg.potential->family}, {"O_radius", cfg.potential->O_radius}}
                             : Json(nullptr);

  const auto& g = cfg.grid;
  Json numerics = {
      {"grid", {{"h_core", g.h_core}, {"R_core", g.R_core}, {"h", g.h}, {"R1", g.R1}, {"growth", g.growth}}},
      {"tolerances", {{"atol", cfg.atol}, {"rtol", cfg.rtol}, {"newton", cfg.newton_tol}}},
      {"s_max", detail::optional_json(cfg.s_max)},
      {"R_max", cfg.R_max},
      {"fd", {{"nodes", cfg.fd_nodes}, {"stretch", cfg.fd_stretch}}}};

  const auto& s = cfg.semiclassical;
  return {{"problem", problem},
          {"numerics", numerics},
          {"moser", {{"n_max", cfg.moser.n_max}, {"beta0", detail::optional_json(cfg.moser.beta0)}}},
          {"semiclassical",
           {{"eps", s.eps},
            {"damping", s.damping},
            {"max_outer", s.max_outer},
            {"tol", s.tol},
            {"kappa_factor", s.kappa_factor},
            {"k_factor", s.k_factor}}}};
}

}  // namespace kirchhoff
