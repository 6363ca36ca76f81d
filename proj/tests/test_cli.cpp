#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "diffinv/cli.hpp"
#include "diffinv/io.hpp"
#include "diffinv/positivity.hpp"
#include "diffinv/report.hpp"

using namespace diffinv;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("diffinv_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Run run_config(const fs::path& dir, const std::string& command, const json& cfg,
               std::vector<std::string> extra = {}) {
  const fs::path cfg_path = dir / "config.json";
  io::write_text_file(cfg_path, cfg.dump(2));
  std::vector<std::string> args{"diffinv", command, "--config", cfg_path.string(), "--out",
                                (dir / "out").string()};
  args.insert(args.end(), extra.begin(), extra.end());
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) { return json::parse(io::read_text_file(p)); }

std::size_t line_count(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

json torsion(int dim, int n) {
  return {{"mesh", {{"dim", dim}, {"n", n}}},
          {"coefficient", {{"kind", "constant"}, {"value", 1.0}, {"lambda", 0.5}, {"Lambda", 2.0}}},
          {"rhs", {{"kind", "constant"}, {"value", 1.0}}}};
}

json lowerbound_scan() {
  return {{"mesh", {{"dim", 1}, {"n", 4096}}},
          {"experiment", {{"family", "step-1d-lowerbound"}, {"seeds", 16}}}};
}

}  // namespace

TEST_CASE("solve: 2D torsion writes every interior node") {
  const auto dir = scratch("solve2d");
  const auto r = run_config(dir, "solve", torsion(2, 64));
  REQUIRE(r.code == 0);
  const std::string u = io::read_text_file(dir / "out" / "u.csv");
  CHECK(line_count(u) == 63u * 63u + 1u);
  const auto rep = read_json(dir / "out" / "report.json");
  CHECK(rep.at("solver") == "fd2d");
  CHECK(rep.at("residual").get<double>() <= 1e-10);
  CHECK(rep.contains("iterations"));
  CHECK(rep.at("version") == kVersion);
  CHECK(rep.at("config_hash").get<std::string>().size() == 16);
}

TEST_CASE("solve: 1D point mass reproduces the hat") {
  const auto dir = scratch("solvehat");
  json cfg = torsion(1, 1024);
  cfg["rhs"] = {{"kind", "point_masses"}, {"masses", {{{"location", 0.5}, {"weight", 2.0}}}}};
  REQUIRE(run_config(dir, "solve", cfg).code == 0);
  Mesh m(1, 1024);
  const auto u = io::read_node_field_file(dir / "out" / "u.csv", m);
  double err = 0.0;
  for (std::size_t k = 0; k < u.values().size(); ++k) {
    const double x = m.node_position(k)[0];
    err = std::max(err, std::abs(u[k] - (x <= 0.5 ? x : 1 - x)));
  }
  CHECK(err <= 1e-12);
  CHECK(read_json(dir / "out" / "report.json").at("gamma").get<double>() == doctest::Approx(0.5));
}

TEST_CASE("unknown keys are rejected by name") {
  const auto dir = scratch("badkey");
  json cfg = torsion(1, 32);
  cfg["solver"] = {{"tol", 1e-10}, {"tolerance", 1e-9}};
  auto r = run_config(dir, "solve", cfg);
  CHECK(r.code == 2);
  CHECK(r.err.find("solver.tolerance") != std::string::npos);

  cfg = torsion(1, 32);
  cfg["mesh"]["cells"] = 4;
  r = run_config(dir, "solve", cfg);
  CHECK(r.code == 2);
  CHECK(r.err.find("mesh.cells") != std::string::npos);

  cfg = torsion(1, 32);
  cfg["post"] = true;
  r = run_config(dir, "solve", cfg);
  CHECK(r.code == 2);
  CHECK(r.err.find("'post'") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / "u.csv"));
}

TEST_CASE("configuration errors exit 2") {
  const auto dir = scratch("cfgerr");
  json cfg = torsion(3, 32);
  CHECK(run_config(dir, "solve", cfg).code == 2);
  cfg = torsion(1, 32);
  cfg["coefficient"]["value"] = 5.0;  // outside [lambda, Lambda]
  CHECK(run_config(dir, "solve", cfg).code == 2);
  cfg = torsion(1, 32);
  cfg["mesh"]["n"] = "many";
  CHECK(run_config(dir, "solve", cfg).code == 2);
  io::write_text_file(dir / "broken.json", "{ not json");
  std::ostringstream out, err;
  CHECK(cli::run({"diffinv", "solve", "--config", (dir / "broken.json").string()}, out, err) == 2);
  CHECK(cli::run({"diffinv", "solve", "--config", (dir / "absent.json").string()}, out, err) == 2);
  CHECK(cli::run({"diffinv", "frobnicate"}, out, err) == 2);
}

TEST_CASE("solver failure exits 3") {
  const auto dir = scratch("solverfail");
  json cfg = torsion(2, 64);
  cfg["solver"] = {{"max_iter", 2}};
  const auto r = run_config(dir, "solve", cfg);
  CHECK(r.code == 3);
  CHECK(r.err.find("residual") != std::string::npos);
}

TEST_CASE("recover: checkerboard round trip") {
  const auto dir = scratch("recpwc");
  json cfg = {{"mesh", {{"dim", 2}, {"n", 128}}},
              {"coefficient",
               {{"kind", "checkerboard"}, {"n", 4}, {"low", 1.0}, {"high", 2.0}, {"lambda", 0.5}, {"Lambda", 2.5}}},
              {"recovery", {{"mode", "pwc"}, {"partition_n", 4}}}};
  REQUIRE(run_config(dir, "recover", cfg).code == 0);
  std::istringstream csv(io::read_text_file(dir / "out" / "a_rec.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "q_index,value,flag");
  int rows = 0;
  while (std::getline(csv, line)) {
    const auto c1 = line.find(','), c2 = line.rfind(',');
    const int q = std::stoi(line.substr(0, c1));
    const double v = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    const int qi = q / 4, qj = q % 4;
    const double ref = (qi + qj) % 2 == 0 ? 1.0 : 2.0;
    CHECK(std::abs(v - ref) / ref <= 0.05);
    CHECK(line.substr(c2 + 1) == "ok");
    ++rows;
  }
  CHECK(rows == 16);
  const auto j = read_json(dir / "out" / "recovery.json");
  CHECK(j.at("ok") == 16);
  CHECK(j.at("relative_linf_error").get<double>() <= 0.05);
}

TEST_CASE("recover: 1D pivot from a solved field on disk") {
  const auto dir = scratch("rec1d");
  json cfg = {{"mesh", {{"dim", 1}, {"n", 2048}}},
              {"coefficient", {{"kind", "affine"}, {"c0", 1.0}, {"c1", 1.0}, {"lambda", 1.0}, {"Lambda", 2.0}}}};
  REQUIRE(run_config(dir, "solve", cfg).code == 0);
  fs::copy_file(dir / "out" / "u.csv", dir / "u_in.csv");
  cfg["recovery"] = {{"mode", "1d"}, {"u_path", "u_in.csv"}, {"w_excl", 0.02}};
  REQUIRE(run_config(dir, "recover", cfg).code == 0);
  const auto j = read_json(dir / "out" / "recovery.json");
  CHECK(j.at("gamma_hat").get<double>() == doctest::Approx(0.4427).epsilon(1e-4));
  CHECK(j.at("w_excl").get<double>() == 0.02);
  CHECK(j.at("relative_l2_error").get<double>() <= 0.01);
  const auto a = io::read_cell_field_file(dir / "out" / "a_rec.csv", Mesh(1, 2048));
  CHECK(a.size() == 2048);

  cfg["recovery"]["u_path"] = "missing.csv";
  CHECK(run_config(dir, "recover", cfg).code == 2);
}

TEST_CASE("recover: ambiguous pivot exits 3") {
  const auto dir = scratch("recambig");
  Mesh m(1, 64);
  std::vector<double> v(m.num_interior_nodes());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double x = m.node_position(k)[0];
    v[k] = std::sin(3.14159265358979 * x) + 0.5 * std::sin(3 * 3.14159265358979 * x);
  }
  std::ostringstream os;
  io::write_node_field(os, ScalarField(m, v));
  io::write_text_file(dir / "u.csv", os.str());
  json cfg = {{"mesh", {{"dim", 1}, {"n", 64}}},
              {"coefficient", {{"kind", "constant"}, {"lambda", 0.5}, {"Lambda", 2.0}}},
              {"recovery", {{"mode", "1d"}, {"u_path", "u.csv"}}}};
  const auto r = run_config(dir, "recover", cfg);
  CHECK(r.code == 3);
  CHECK(r.err.find("ambiguous") != std::string::npos);
}

TEST_CASE("scan: lower-bound family, determinism and empty seeds") {
  const auto dir = scratch("scan");
  REQUIRE(run_config(dir, "scan", lowerbound_scan()).code == 0);
  const auto fit = read_json(dir / "out" / "fit.json");
  CHECK(fit.at("alpha_hat").get<double>() >= 0.28);
  CHECK(fit.at("alpha_hat").get<double>() <= 0.39);
  for (const char* k : {"alpha_hat", "c_hat", "r2", "n_used", "n_excluded", "config_hash", "version"}) {
    CHECK(fit.contains(k));
  }
  const std::string first = io::read_text_file(dir / "out" / "samples.csv");
  const std::string first_fit = io::read_text_file(dir / "out" / "fit.json");
  CHECK(first.rfind("seed,delta_l2,e_h10,excluded\n", 0) == 0);
  REQUIRE(run_config(dir, "scan", lowerbound_scan(), {"--threads", "4"}).code == 0);
  CHECK(io::read_text_file(dir / "out" / "samples.csv") == first);
  CHECK(io::read_text_file(dir / "out" / "fit.json") == first_fit);

  json empty = lowerbound_scan();
  empty["experiment"]["seeds"] = json::array();
  CHECK(run_config(dir, "scan", empty).code == 2);
}

TEST_CASE("scan: seed override changes the pairs and the hash") {
  const auto dir = scratch("scanseed");
  json cfg = {{"mesh", {{"dim", 1}, {"n", 256}}},
              {"experiment", {{"family", "smooth-fourier"}, {"seeds", {0, 1, 2, 3, 4, 5, 6, 7}}}}};
  REQUIRE(run_config(dir, "scan", cfg).code == 0);
  const std::string a = io::read_text_file(dir / "out" / "samples.csv");
  const auto ha = read_json(dir / "out" / "fit.json").at("config_hash");
  REQUIRE(run_config(dir, "scan", cfg, {"--seed", "99"}).code == 0);
  CHECK(io::read_text_file(dir / "out" / "samples.csv") != a);
  CHECK(read_json(dir / "out" / "fit.json").at("config_hash") != ha);
}

TEST_CASE("pcfit: torsion in one and two dimensions") {
  const auto dir = scratch("pcfit");
  REQUIRE(run_config(dir, "pcfit", torsion(1, 1024)).code == 0);
  auto j = read_json(dir / "out" / "pcfit.json");
  // The 1D weight lies in [1/8, 1/4]: PC(0) with a mildly negative envelope slope.
  CHECK(j.at("beta_clipped").get<double>() == 0.0);
  CHECK(j.at("beta_hat").get<double>() == doctest::Approx(-0.169).epsilon(0.02));
  CHECK(io::read_text_file(dir / "out" / "envelope.csv").rfind("log_dist,log_wmin\n", 0) == 0);

  REQUIRE(run_config(dir, "pcfit", torsion(2, 64)).code == 0);
  j = read_json(dir / "out" / "pcfit.json");
  Mesh m(2, 64);
  const auto a = CoefficientField::constant(m, 1.0, 0.5, 2.0);
  const auto f = RightHandSide::constant(m, 1.0);
  const auto fit = fit_pc_beta(compute_weight(a, solve(a, f).u, f), 16);
  CHECK(j.at("beta_hat").get<double>() == fit.beta_hat);
  CHECK(j.at("c_hat").get<double>() == fit.c_hat);

  json zero = torsion(2, 32);
  zero["rhs"]["value"] = 0.0;
  const auto r = run_config(dir, "pcfit", zero);
  CHECK(r.code == 3);
  CHECK(r.err.find("degenerate-fit") != std::string::npos);
}

TEST_CASE("mollcheck: step slope") {
  const auto dir = scratch("moll");
  json cfg = {{"mesh", {{"dim", 1}, {"n", 4096}}},
              {"coefficient",
               {{"kind", "step"}, {"location", 0.5}, {"left", 1.0}, {"right", 2.0}, {"lambda", 1.0}, {"Lambda", 2.0}}},
              {"mollify", {{"kernel", "box"}, {"t_max", 0.1}, {"count", 8}}}};
  REQUIRE(run_config(dir, "mollcheck", cfg).code == 0);
  const auto j = read_json(dir / "out" / "mollcheck.json");
  CHECK(j.at("slope").get<double>() >= 0.4);
  CHECK(j.at("slope").get<double>() <= 0.6);
  CHECK(j.at("t_min").get<double>() == doctest::Approx(4.0 / 4096));
  CHECK(line_count(io::read_text_file(dir / "out" / "mollcheck.csv")) == 9);

  cfg["mollify"]["t_min"] = 1.0 / 4096;
  CHECK(run_config(dir, "mollcheck", cfg).code == 2);
}

TEST_CASE("output directory defaults to the config key") {
  const auto dir = scratch("outkey");
  json cfg = torsion(1, 16);
  cfg["output"] = (dir / "elsewhere").string();
  io::write_text_file(dir / "c.json", cfg.dump());
  std::ostringstream out, err;
  REQUIRE(cli::run({"diffinv", "solve", "--config", (dir / "c.json").string()}, out, err) == 0);
  CHECK(fs::exists(dir / "elsewhere" / "u.csv"));
  CHECK(cli::run({"diffinv", "--version"}, out, err) == 0);
  CHECK(out.str().find(kVersion) != std::string::npos);
}
