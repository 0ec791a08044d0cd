#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kirchhoff/cli.hpp"

using namespace kirchhoff;
namespace fs = std::filesystem;

namespace {

const fs::path config_dir{KGS_CONFIG_DIR};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "kgs_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct Outcome {
  int code;
  std::string log;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "kgs");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream log, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), log, err);
  return {code, log.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Json read_json(const fs::path& p) { return Json::parse(slurp(p)); }

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

std::string cfg(const std::string& name) { return (config_dir / name).string(); }

}  // namespace

TEST_CASE("validate passes for the default configuration") {
  const auto out = scratch("validate_default");
  const auto r = run({"validate", "--config", cfg("default_3d.json"), "--out", out.string()});
  CHECK(r.code == 0);
  const Json doc = read_json(out / "validate.json");
  CHECK(doc["validation"]["passes"].get<bool>());
  CHECK(doc["validation"]["failed"].empty());
  CHECK(doc["config"] == to_json(load_config(cfg("default_3d.json"))));
}

TEST_CASE("validate reports M3 for a quadratic Kirchhoff term") {
  const auto out = scratch("validate_square");
  const auto r = run({"validate", "--config", cfg("kirchhoff_square_3d.json"), "--out", out.string()});
  CHECK(r.code == 1);
  const Json failed = read_json(out / "validate.json")["validation"]["failed"];
  CHECK(std::find(failed.begin(), failed.end(), Json("M3")) != failed.end());
}

TEST_CASE("validate reports F1 for a linear nonlinearity") {
  const auto out = scratch("validate_linear");
  const auto path = write_config(out, R"({"problem": {"nonlinearity": {"N": 3, "family": "power", "q": 1.0}}})");
  const auto r = run({"validate", "--config", path.string(), "--out", out.string()});
  CHECK(r.code == 1);
  const Json failed = read_json(out / "validate.json")["validation"]["failed"];
  CHECK(std::find(failed.begin(), failed.end(), Json("F1")) != failed.end());
}

TEST_CASE("usage and parse failures exit with 2") {
  const auto out = scratch("usage");
  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"validate", "--no-such-flag"}).code == 2);
  CHECK(run({"validate", "--config", (out / "missing.json").string(), "--out", out.string()}).code == 2);

  const auto malformed = write_config(out, R"({"problem": {)");
  CHECK(run({"validate", "--config", malformed.string(), "--out", out.string()}).code == 2);

  const auto unknown = write_config(out, R"({"problem": {"m": 1.0, "colour": "blue"}})");
  const auto r = run({"validate", "--config", unknown.string(), "--out", out.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("colour") != std::string::npos);

  const auto bad_value = write_config(out, R"({"problem": {"m": -1.0}})");
  CHECK(run({"validate", "--config", bad_value.string(), "--out", out.string()}).code == 2);

  CHECK(run({"semiclassical", "--config", cfg("default_3d.json"), "--out", out.string(), "--eps", "0.1,0.2"}).code ==
        2);
  CHECK(run({"semiclassical", "--config", cfg("default_3d.json"), "--out", out.string(), "--eps", "-0.1"}).code == 2);
}

TEST_CASE("groundstate writes profiles and a summary embedding the config") {
  const auto out = scratch("gs3");
  const auto r = run({"groundstate", "--config", cfg("default_3d.json"), "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(out / "profile.csv"));
  CHECK(fs::exists(out / "kirchhoff_profile.csv"));
  const Json doc = read_json(out / "summary.json");
  CHECK(doc["config"] == to_json(load_config(cfg("default_3d.json"))));
  CHECK(doc["pohozaev_residual"].get<double>() <= 1e-6);
  CHECK(doc["kirchhoff"]["residual"].get<double>() <= 1e-6);
  CHECK(doc["existence_margin"].get<double>() < 0.0);
  CHECK_FALSE(doc.contains("moser_check"));

  std::ifstream is(out / "profile.csv");
  const auto p = read_profile_csv(is, 3);
  CHECK(p.u.front() == doc["ground_state"]["shoot_height"].get<double>());
}

TEST_CASE("outputs are deterministic") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  REQUIRE(run({"groundstate", "--config", cfg("default_3d.json"), "--out", a.string()}).code == 0);
  REQUIRE(run({"groundstate", "--config", cfg("default_3d.json"), "--out", b.string()}).code == 0);
  for (const char* f : {"profile.csv", "kirchhoff_profile.csv", "summary.json"}) {
    INFO(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

TEST_CASE("a constant unit coefficient leaves the ground state unchanged") {
  const auto out = scratch("constant");
  const auto path = write_config(out, R"({"problem": {"coeff": {"family": "constant", "a": 1.0}}})");
  REQUIRE(run({"groundstate", "--config", path.string(), "--out", out.string()}).code == 0);
  const Json doc = read_json(out / "summary.json");
  CHECK(doc["lift"]["t_u"].get<double>() == 1.0);
  CHECK(doc["kirchhoff"]["norms"] == doc["local"]["norms"]);
  CHECK(doc["kirchhoff"]["energy"].get<double>() == Catch::Approx(doc["local"]["energy"].get<double>()).epsilon(1e-14));
  CHECK(slurp(out / "profile.csv") == slurp(out / "kirchhoff_profile.csv"));
}

TEST_CASE("groundstate in 2D includes the Moser check") {
  const auto out = scratch("gs2");
  REQUIRE(run({"groundstate", "--config", cfg("default_2d.json"), "--out", out.string()}).code == 0);
  const Json doc = read_json(out / "summary.json");
  REQUIRE(doc.contains("moser_check"));
  CHECK_FALSE(doc["moser_check"]["n"].is_null());
  CHECK(doc["existence_margin"].get<double>() < 0.0);
}

TEST_CASE("lift round trip") {
  const auto out = scratch("lift");
  REQUIRE(run({"lift", "--config", cfg("default_3d.json"), "--out", out.string()}).code == 0);
  const Json doc = read_json(out / "lift.json");
  CHECK(doc["round_trip_error"].get<double>() <= 1e-8);
  CHECK(doc["lift"]["kirchhoff_residual"].get<double>() <= 1e-6);
  CHECK(fs::exists(out / "kirchhoff_profile.csv"));
}

TEST_CASE("moser command") {
  const auto out = scratch("moser");
  REQUIRE(run({"moser", "--config", cfg("default_2d.json"), "--out", out.string()}).code == 0);
  const Json doc = read_json(out / "moser_summary.json");
  CHECK_FALSE(doc["n"].is_null());
  const std::string csv = slurp(out / "moser_scan.csv");
  CHECK(csv.rfind("n,t_star,max_value,mass_log_n\n", 0) == 0);

  const auto small = scratch("moser_small");
  const auto path = write_config(
      small, R"({"problem": {"nonlinearity": {"N": 2, "family": "critical_exponential", "mu": 1.0}}, "moser": {"n_max": 4}})");
  const auto r = run({"moser", "--config", path.string(), "--out", small.string()});
  CHECK(r.code == 0);
  const Json s = read_json(small / "moser_summary.json");
  CHECK(s["n"].is_null());
  CHECK(s["note"] == "not found");

  CHECK(run({"moser", "--config", cfg("default_3d.json"), "--out", out.string()}).code == 1);
}

TEST_CASE("semiclassical command") {
  const auto out = scratch("semi");
  CHECK(run({"semiclassical", "--config", cfg("default_2d.json"), "--out", out.string()}).code == 2);
  const auto r = run({"semiclassical", "--config", cfg("default_3d.json"), "--out", out.string(), "--eps", "0"});
  REQUIRE(r.code == 0);
  const Json doc = read_json(out / "semiclassical_summary.json");
  REQUIRE(doc["rows"].size() == 1);
  CHECK(doc["rows"][0]["h1_dist"].get<double>() <= 1e-8);
  CHECK(doc["config"]["semiclassical"]["eps"] == Json::array({0.0}));
  CHECK(fs::exists(out / "profiles" / "eps_0.csv"));
  const std::string csv = slurp(out / "sweep.csv");
  CHECK(csv.rfind("eps,x_eps_dist,sup_dist,h1_dist,spike,coeff,decay_C,decay_c\n", 0) == 0);
}

TEST_CASE("config round trip through JSON") {
  for (const char* name : {"default_3d.json", "default_2d.json", "kirchhoff_square_3d.json"}) {
    const RunConfig c = load_config(cfg(name));
    const Json j = to_json(c);
    CHECK(to_json(parse_config(j)) == j);
  }
}
