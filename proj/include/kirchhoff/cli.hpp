#pragma once

// Front end for the kgs tool. Each command reads a RunConfig, writes its
// artifacts under the output directory and returns the process exit code:
// 0 success, 1 domain or solver failure, 2 usage or parse failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kirchhoff/config.hpp"
#include "kirchhoff/functionals.hpp"
#include "kirchhoff/groundstate.hpp"
#include "kirchhoff/moser2d.hpp"
#include "kirchhoff/rescaling.hpp"
#include "kirchhoff/semiclassical.hpp"

namespace kirchhoff::cli {

namespace fs = std::filesystem;

inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;

inline void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  os << text;
}

inline void write_profile(const fs::path& path, const RadialProfile& p) {
  std::ostringstream os;
  write_profile_csv(os, p);
  write_file(path, os.str());
}

inline void write_json(const fs::path& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

inline Json to_json(const NormBundle& n) {
  return {{"grad_sq", n.grad_sq}, {"mass_sq", n.mass_sq}, {"sup_norm", n.sup_norm}};
}

inline Json to_json(const EnergyReport& r) {
  return {{"local_energy", r.local_energy},
          {"kirchhoff_energy", r.kirchhoff_energy},
          {"A_level", r.A_level},
          {"b_level", r.b_level},
          {"sobolev_S", r.sobolev_S ? Json(*r.sobolev_S) : Json(nullptr)},
          {"existence_margin", r.existence_margin}};
}

inline Json to_json(const GroundState& gs) {
  return {{"shoot_height", gs.shoot_height},
          {"solver", to_string(gs.solver)},
          {"energy", gs.energy},
          {"norms", to_json(gs.norms)},
          {"pohozaev_residual", gs.pohozaev_residual},
          {"match_radius", gs.match_radius},
          {"brackets", gs.brackets.size()},
          {"bisections", gs.bisection_history.size()},
          {"decay", {{"C", gs.decay.C}, {"c", gs.decay.c}}}};
}

inline Json to_json(const LiftResult& L) {
  return {{"t_u", L.t_u},
          {"h_v", L.h_v},
          {"kirchhoff_residual", L.kirchhoff_residual},
          {"kirchhoff_energy", L.kirchhoff_energy},
          {"energy_identity_residual", L.energy_identity_residual},
          {"least_energy_residual", L.least_energy_residual}};
}

// Common shape of the local and the Kirchhoff sections of a summary.
inline Json state_section(const RadialProfile& p, double energy, double residual, const std::string& file) {
  const NormBundle n = h1_norms(p);
  return {{"profile", file}, {"energy", energy}, {"norms", to_json(n)}, {"residual", residual}};
}

/// Runs the growth and coefficient validators; the report lists every failed
/// hypothesis under "failed".
inline Json validation_report(const RunConfig& cfg) {
  const LocalProblem prob = make_problem(cfg);
  const KirchhoffCoeff c = make_coeff(cfg);
  const int N = prob.dimension();
  const GrowthReport g = validate_growth(prob.spec.untruncated(), prob.m);
  const CoeffReport m = validate_M(c, N);
  Json failed = Json::array();
  Json growth = {{"F1", g.passes_F1}, {"F2", g.passes_F2}, {"F3", g.passes_F3},
                 {"large_lambda_regime", g.large_lambda_regime}};
  if (!g.passes_F1) failed.push_back("F1");
  if (!g.passes_F2) failed.push_back("F2");
  if (!g.passes_F3) failed.push_back("F3");
  Json coeff = Json::object();
  for (const auto& [k, v] : m.passes) coeff[k] = v;
  for (const auto& k : m.failed()) failed.push_back(k);
  return {{"N", N}, {"growth", growth}, {"coeff", coeff}, {"failed", failed}, {"passes", failed.empty()}};
}

inline int cmd_validate(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  Json rep = validation_report(cfg);
  Json doc = {{"config", to_json(cfg)}, {"validation", rep}};
  write_json(out / "validate.json", doc);
  log << rep.dump(2) << "\n";
  return rep["passes"].get<bool>() ? kOk : kFailure;
}

inline bool require_valid(const RunConfig& cfg, std::ostream& log) {
  const Json rep = validation_report(cfg);
  if (rep["passes"].get<bool>()) return true;
  log << "hypotheses failed: " << rep["failed"].dump() << "\n";
  return false;
}

inline Json moser_check(const RunConfig& cfg, const LocalProblem& prob, Json& warnings) {
  Json j = {{"n_max", cfg.moser.n_max}};
  try {
    const CriticalityScan scan =
        criticality_scan(prob.spec, prob.m, cfg.moser.n_max,
                         cfg.moser.beta0.value_or(std::numeric_limits<double>::infinity()));
    j["r"] = scan.r;
    j["rows"] = scan.rows.size();
    j["n"] = scan.n ? Json(*scan.n) : Json(nullptr);
    if (!scan.n) warnings.push_back("moser check: no n <= " + std::to_string(cfg.moser.n_max) + " with max < 1/2");
  } catch (const Error& e) {
    j["n"] = nullptr;
    j["error"] = e.what();
    warnings.push_back(std::string("moser check: ") + e.what());
  }
  return j;
}

inline int cmd_groundstate(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  if (!require_valid(cfg, log)) return kFailure;
  const LocalProblem prob = make_problem(cfg);
  const KirchhoffCoeff c = make_coeff(cfg);
  const GroundState gs = find_ground_state(prob, shooting_options(cfg));
  const LiftResult L = lift(gs, prob, c);

  write_profile(out / "profile.csv", gs.profile);
  write_profile(out / "kirchhoff_profile.csv", L.v);

  Json warnings = Json::array();
  Json doc = {{"config", to_json(cfg)}};
  doc["local"] = state_section(gs.profile, gs.energy, local_residual(gs.profile, prob), "profile.csv");
  doc["kirchhoff"] = state_section(L.v, L.kirchhoff_energy, L.kirchhoff_residual, "kirchhoff_profile.csv");
  doc["ground_state"] = to_json(gs);
  doc["pohozaev_residual"] = gs.pohozaev_residual;
  doc["lift"] = to_json(L);
  const EnergyReport er = make_energy_report(gs, L.kirchhoff_energy);
  doc["energy_report"] = to_json(er);
  doc["existence_margin"] = er.existence_margin;
  if (prob.dimension() == 2) doc["moser_check"] = moser_check(cfg, prob, warnings);
  doc["warnings"] = warnings;
  write_json(out / "summary.json", doc);
  log << "ground state: u(0) = " << format_double(gs.shoot_height)
      << ", pohozaev residual = " << format_double(gs.pohozaev_residual)
      << ", existence margin = " << format_double(er.existence_margin) << "\n";
  for (const auto& w : warnings) log << "warning: " << w.get<std::string>() << "\n";
  return kOk;
}

inline int cmd_lift(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  if (!require_valid(cfg, log)) return kFailure;
  const LocalProblem prob = make_problem(cfg);
  const KirchhoffCoeff c = make_coeff(cfg);
  const GroundState gs = find_ground_state(prob, shooting_options(cfg));
  const LiftResult L = lift(gs, prob, c);
  const RadialProfile back = project(L.v, prob, c);
  double round_trip = 0.0;
  for (std::size_t i = 0; i < back.size(); ++i) round_trip = std::max(round_trip, std::abs(back.u[i] - gs.profile.u[i]));

  write_profile(out / "kirchhoff_profile.csv", L.v);
  Json doc = {{"config", to_json(cfg)}, {"lift", to_json(L)}, {"round_trip_error", round_trip},
              {"profile", "kirchhoff_profile.csv"}};
  write_json(out / "lift.json", doc);
  log << "lift: t_u = " << format_double(L.t_u) << ", kirchhoff residual = " << format_double(L.kirchhoff_residual)
      << ", round trip = " << format_double(round_trip) << "\n";
  return kOk;
}

inline int cmd_moser(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const LocalProblem prob = make_problem(cfg);
  if (prob.dimension() != 2) {
    log << "moser needs N = 2 (configured N = " << prob.dimension() << ")\n";
    return kFailure;
  }
  const CriticalityScan scan = criticality_scan(prob.spec, prob.m, cfg.moser.n_max,
                                                cfg.moser.beta0.value_or(std::numeric_limits<double>::infinity()));
  std::ostringstream csv;
  csv << "n,t_star,max_value,mass_log_n\n";
  for (const auto& r : scan.rows)
    csv << r.n << ',' << format_double(r.t_star) << ',' << format_double(r.max_value) << ','
        << format_double(r.mass_log_n) << '\n';
  write_file(out / "moser_scan.csv", csv.str());
  Json doc = {{"config", to_json(cfg)}, {"r", scan.r}, {"rows", scan.rows.size()}};
  doc["n"] = scan.n ? Json(*scan.n) : Json(nullptr);
  if (!scan.n) doc["note"] = "not found";
  write_json(out / "moser_summary.json", doc);
  if (scan.n)
    log << "moser: max below 1/2 at n = " << *scan.n << "\n";
  else
    log << "moser: not found for n <= " << cfg.moser.n_max << "\n";
  return kOk;
}

inline std::string eps_label(double eps) {
  std::ostringstream os;
  os << eps;
  return os.str();
}

inline int cmd_semiclassical(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  if (!cfg.potential) {
    log << "semiclassical needs problem.potential\n";
    return kUsage;
  }
  if (!require_valid(cfg, log)) return kFailure;
  const SemiclassicalOptions opt = semiclassical_options(cfg);
  const SemiclassicalSetup setup =
      make_semiclassical_setup(make_potential(cfg), make_nonlinearity(cfg).untruncated(), make_coeff(cfg), opt);
  const SweepResult sweep = continuation_sweep(setup, cfg.semiclassical.eps, opt);

  std::ostringstream csv;
  csv << "eps,x_eps_dist,sup_dist,h1_dist,spike,coeff,decay_C,decay_c\n";
  Json rows = Json::array();
  Json trends = nullptr;
  if (!sweep.results.empty()) {
    const ConcentrationTable t = concentration_diagnostics(sweep.results, setup);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto& r = t.rows[i];
      const auto& res = sweep.results[i];
      csv << format_double(r.eps) << ',' << format_double(r.x_eps_dist) << ',' << format_double(r.sup_dist) << ','
          << format_double(r.h1_dist) << ',' << format_double(r.spike) << ',' << format_double(r.coeff) << ','
          << format_double(r.decay_C) << ',' << format_double(r.decay_c) << '\n';
      const std::string file = "profiles/eps_" + eps_label(r.eps) + ".csv";
      write_profile(out / file, res.profile);
      rows.push_back({{"eps", r.eps},
                      {"x_eps_dist", r.x_eps_dist},
                      {"sup_dist", r.sup_dist},
                      {"h1_dist", r.h1_dist},
                      {"spike", r.spike},
                      {"coeff", r.coeff},
                      {"theta", res.theta},
                      {"decay_C", r.decay_C},
                      {"decay_c", r.decay_c},
                      {"reference_rate", r.reference_rate},
                      {"outer_iterations", res.outer_iterations},
                      {"contraction", res.contraction ? Json(*res.contraction) : Json(nullptr)},
                      {"residual", semiclassical_residual(setup, res)},
                      {"profile", file}});
    }
    trends = {{"h1_decreasing", t.h1_decreasing},
              {"sup_decreasing", t.sup_decreasing},
              {"spike_below_kappa", t.spike_below_kappa},
              {"flagged_eps", t.flagged_eps}};
  }
  write_file(out / "sweep.csv", csv.str());

  Json doc = {{"config", to_json(cfg)},
              {"setup",
               {{"kappa", setup.kappa},
                {"k", setup.k},
                {"theta_limit", setup.theta_limit},
                {"t_u", setup.limit.t_u},
                {"m0", coeff_infimum(setup.coeff)}}},
              {"rows", rows},
              {"trends", trends}};
  doc["failure"] = sweep.failure ? Json{{"eps", sweep.failure->eps}, {"message", sweep.failure->message}} : Json(nullptr);
  write_json(out / "semiclassical_summary.json", doc);
  log << "semiclassical: " << sweep.results.size() << " of " << cfg.semiclassical.eps.size() << " eps solved\n";
  if (sweep.failure) {
    log << "failed at eps = " << format_double(sweep.failure->eps) << ": " << sweep.failure->message << "\n";
    return kFailure;
  }
  return kOk;
}

/// Parses argv, runs one command and maps failures to exit codes.
inline int run(int argc, const char* const* argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Radial ground states of Kirchhoff equations"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out_dir = ".";
  std::vector<double> eps;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "output directory");
  const std::vector<std::pair<std::string, std::string>> commands{
      {"validate", "check the growth and coefficient hypotheses"},
      {"groundstate", "solve, lift and report the ground state"},
      {"lift", "lift the local ground state and check the round trip"},
      {"moser", "scan the Moser sequence (N = 2)"},
      {"semiclassical", "continuation sweep in eps"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();
  app.get_subcommand("semiclassical")->add_option("--eps", eps, "comma separated eps list")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, log, err);
  } catch (const CLI::Error& e) {
    app.exit(e, log, err);
    return kUsage;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = config_path.empty() ? parse_config(Json::object()) : load_config(config_path);
    if (!eps.empty()) {
      check_eps_list(eps);
      cfg.semiclassical.eps = eps;
    }
    const fs::path out(out_dir);
    fs::create_directories(out);
    if (cmd == "validate") return cmd_validate(cfg, out, log);
    if (cmd == "groundstate") return cmd_groundstate(cfg, out, log);
    if (cmd == "lift") return cmd_lift(cfg, out, log);
    if (cmd == "moser") return cmd_moser(cfg, out, log);
    return cmd_semiclassical(cfg, out, log);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.kind() == ErrorKind::Parse ? kUsage : kFailure;
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace kirchhoff::cli
