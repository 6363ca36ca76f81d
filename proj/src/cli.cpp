#include "diffinv/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "diffinv/errors.hpp"
#include "diffinv/io.hpp"
#include "diffinv/positivity.hpp"
#include "diffinv/recovery.hpp"
#include "diffinv/report.hpp"

namespace diffinv::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& section, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("'" + section + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + (section.empty() ? key : section + "." + key) + "'");
    }
  }
}

std::string qualified(const std::string& section, const char* key) {
  return section.empty() ? std::string(key) : section + "." + key;
}

double number(const json& obj, const std::string& section, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("'" + qualified(section, key) + "' must be a number");
  return v.get<double>();
}

long long integer(const json& obj, const std::string& section, const char* key, long long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError("'" + qualified(section, key) + "' must be an integer");
  return v.get<long long>();
}

std::uint64_t unsigned_integer(const json& obj, const std::string& section, const char* key,
                               std::uint64_t fallback) {
  const long long v = integer(obj, section, key, static_cast<long long>(fallback));
  if (v < 0) throw ConfigError("'" + qualified(section, key) + "' must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

std::string text(const json& obj, const std::string& section, const char* key,
                 const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError("'" + qualified(section, key) + "' must be a string");
  return v.get<std::string>();
}

bool boolean(const json& obj, const std::string& section, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError("'" + qualified(section, key) + "' must be a boolean");
  return v.get<bool>();
}

std::vector<double> number_list(const json& obj, const std::string& section, const char* key) {
  if (!obj.contains(key)) return {};
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError("'" + qualified(section, key) + "' must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError("'" + qualified(section, key) + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

MeshSpec parse_mesh(const json& obj) {
  check_keys(obj, "mesh", {"dim", "n"});
  MeshSpec m;
  m.dim = static_cast<int>(integer(obj, "mesh", "dim", 1));
  m.n = static_cast<int>(integer(obj, "mesh", "n", 64));
  if (m.dim != 1 && m.dim != 2) throw ConfigError("'mesh.dim' must be 1 or 2");
  if (m.n < 2) throw ConfigError("'mesh.n' must be at least 2");
  return m;
}

CoefficientSpec parse_coefficient(const json& obj, const fs::path& base) {
  const std::string s = "coefficient";
  if (!obj.is_object()) throw ConfigError("'coefficient' must be an object");
  CoefficientSpec c;
  c.kind = text(obj, s, "kind", "constant");
  std::set<std::string> allowed{"kind", "lambda", "Lambda"};
  if (c.kind == "constant") {
    allowed.insert("value");
  } else if (c.kind == "pwc") {
    allowed.insert({"n", "values"});
  } else if (c.kind == "checkerboard") {
    allowed.insert({"n", "low", "high"});
  } else if (c.kind == "fourier") {
    allowed.insert({"seed", "modes"});
  } else if (c.kind == "step") {
    allowed.insert({"location", "left", "right"});
  } else if (c.kind == "affine") {
    allowed.insert({"c0", "c1"});
  } else if (c.kind == "file") {
    allowed.insert("path");
  } else {
    throw ConfigError("unknown coefficient kind '" + c.kind + "'");
  }
  check_keys(obj, s, allowed);
  c.lambda = number(obj, s, "lambda", c.lambda);
  c.Lambda = number(obj, s, "Lambda", c.Lambda);
  if (!(c.lambda > 0.0) || !(c.Lambda >= c.lambda)) {
    throw ConfigError("'coefficient' needs 0 < lambda <= Lambda");
  }
  c.value = number(obj, s, "value", c.value);
  c.n = static_cast<int>(integer(obj, s, "n", c.n));
  c.values = number_list(obj, s, "values");
  c.low = number(obj, s, "low", c.low);
  c.high = number(obj, s, "high", c.high);
  c.seed = unsigned_integer(obj, s, "seed", c.seed);
  c.modes = static_cast<int>(integer(obj, s, "modes", c.modes));
  c.location = number(obj, s, "location", c.location);
  c.left = number(obj, s, "left", c.left);
  c.right = number(obj, s, "right", c.right);
  c.c0 = number(obj, s, "c0", c.c0);
  c.c1 = number(obj, s, "c1", c.c1);
  if (c.kind == "file") {
    if (!obj.contains("path")) throw ConfigError("'coefficient.path' is required");
    c.path = resolve(base, text(obj, s, "path", ""));
    if (!fs::exists(c.path)) throw ConfigError("coefficient file not found: " + c.path.string());
  }
  if ((c.kind == "pwc" || c.kind == "checkerboard") && c.n < 1) {
    throw ConfigError("'coefficient.n' must be positive");
  }
  if (c.kind == "fourier" && c.modes < 1) throw ConfigError("'coefficient.modes' must be positive");
  return c;
}

RhsSpec parse_rhs(const json& obj) {
  const std::string s = "rhs";
  if (!obj.is_object()) throw ConfigError("'rhs' must be an object");
  RhsSpec r;
  r.kind = text(obj, s, "kind", "constant");
  if (r.kind == "constant") {
    check_keys(obj, s, {"kind", "value"});
  } else if (r.kind == "point_masses") {
    check_keys(obj, s, {"kind", "value", "masses"});
    if (!obj.contains("masses") || !obj.at("masses").is_array()) {
      throw ConfigError("'rhs.masses' must be an array");
    }
    for (const auto& m : obj.at("masses")) {
      check_keys(m, "rhs.masses", {"location", "weight"});
      if (!m.contains("location") || !m.contains("weight")) {
        throw ConfigError("'rhs.masses' entries need location and weight");
      }
      r.masses.push_back({number(m, "rhs.masses", "location", 0.0),
                          number(m, "rhs.masses", "weight", 0.0)});
    }
  } else {
    throw ConfigError("unknown rhs kind '" + r.kind + "'");
  }
  r.value = number(obj, s, "value", r.kind == "constant" ? 1.0 : 0.0);
  return r;
}

SolverOptions parse_solver(const json& obj) {
  const std::string s = "solver";
  check_keys(obj, s, {"tol", "max_iter", "averaging", "preconditioner"});
  SolverOptions o;
  o.tol = number(obj, s, "tol", o.tol);
  o.max_iter = static_cast<int>(integer(obj, s, "max_iter", o.max_iter));
  if (!(o.tol > 0.0)) throw ConfigError("'solver.tol' must be positive");
  if (o.max_iter < 1) throw ConfigError("'solver.max_iter' must be positive");
  const std::string avg = text(obj, s, "averaging", "harmonic");
  if (avg == "harmonic") {
    o.averaging = FaceAveraging::harmonic;
  } else if (avg == "arithmetic") {
    o.averaging = FaceAveraging::arithmetic;
  } else {
    throw ConfigError("unknown solver.averaging '" + avg + "'");
  }
  const std::string pre = text(obj, s, "preconditioner", "ic0");
  if (pre == "ic0") {
    o.preconditioner = Preconditioner::ic0;
  } else if (pre == "jacobi") {
    o.preconditioner = Preconditioner::jacobi;
  } else {
    throw ConfigError("unknown solver.preconditioner '" + pre + "'");
  }
  return o;
}

ExperimentSpec parse_experiment(const json& obj) {
  const std::string s = "experiment";
  check_keys(obj, s,
             {"family", "seeds", "floor", "seed", "lambda", "Lambda", "modes", "partition_n",
              "tau_min", "tau_max", "offset_min", "offset_max", "ladder", "upper_envelope"});
  ExperimentSpec e;
  if (!obj.contains("family")) throw ConfigError("'experiment.family' is required");
  try {
    e.family.tag = parse_family(text(obj, s, "family", ""));
  } catch (const ArgumentError& ex) {
    throw ConfigError(std::string("experiment.family: ") + ex.what());
  }
  if (e.family.tag == FamilyTag::step_1d_lowerbound) {
    const FamilyConfig d = lowerbound_family_defaults();
    e.family.lambda = d.lambda;
    e.family.Lambda = d.Lambda;
  }
  FamilyConfig& f = e.family;
  f.lambda = number(obj, s, "lambda", f.lambda);
  f.Lambda = number(obj, s, "Lambda", f.Lambda);
  f.modes = static_cast<int>(integer(obj, s, "modes", f.modes));
  f.partition_n = static_cast<int>(integer(obj, s, "partition_n", f.partition_n));
  f.tau_min = number(obj, s, "tau_min", f.tau_min);
  f.tau_max = number(obj, s, "tau_max", f.tau_max);
  f.offset_min = number(obj, s, "offset_min", f.offset_min);
  f.offset_max = number(obj, s, "offset_max", f.offset_max);
  f.ladder = static_cast<int>(integer(obj, s, "ladder", f.ladder));
  f.base_seed = unsigned_integer(obj, s, "seed", f.base_seed);
  e.floor = number(obj, s, "floor", e.floor);
  e.upper_envelope = boolean(obj, s, "upper_envelope", false);
  if (!(f.lambda > 0.0) || !(f.Lambda >= f.lambda)) {
    throw ConfigError("'experiment' needs 0 < lambda <= Lambda");
  }
  if (f.ladder < 1) throw ConfigError("'experiment.ladder' must be positive");
  if (!obj.contains("seeds")) throw ConfigError("'experiment.seeds' is required");
  const json& seeds = obj.at("seeds");
  if (seeds.is_number_integer()) {
    const long long count = seeds.get<long long>();
    for (long long k = 0; k < count; ++k) e.seeds.push_back(static_cast<std::uint64_t>(k));
  } else if (seeds.is_array()) {
    for (const auto& v : seeds) {
      if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ConfigError("'experiment.seeds' must hold nonnegative integers");
      }
      e.seeds.push_back(v.get<std::uint64_t>());
    }
  } else {
    throw ConfigError("'experiment.seeds' must be an array or a count");
  }
  if (e.seeds.empty()) throw ConfigError("'experiment.seeds' is empty");
  return e;
}

RecoverySpec parse_recovery(const json& obj, const fs::path& base) {
  const std::string s = "recovery";
  check_keys(obj, s, {"mode", "u_path", "partition_n", "w_excl", "eps_den"});
  RecoverySpec r;
  r.mode = text(obj, s, "mode", r.mode);
  if (r.mode != "pwc" && r.mode != "1d") throw ConfigError("unknown recovery.mode '" + r.mode + "'");
  if (obj.contains("u_path")) {
    r.u_path = resolve(base, text(obj, s, "u_path", ""));
    if (!fs::exists(*r.u_path)) throw ConfigError("input u not found: " + r.u_path->string());
  }
  r.partition_n = static_cast<int>(integer(obj, s, "partition_n", r.partition_n));
  r.w_excl = number(obj, s, "w_excl", r.w_excl);
  r.eps_den = number(obj, s, "eps_den", r.eps_den);
  if (r.partition_n < 1) throw ConfigError("'recovery.partition_n' must be positive");
  return r;
}

PositivitySpec parse_positivity(const json& obj) {
  check_keys(obj, "positivity", {"n_bins", "min_cells"});
  PositivitySpec p;
  p.n_bins = static_cast<int>(integer(obj, "positivity", "n_bins", p.n_bins));
  p.min_cells = static_cast<int>(integer(obj, "positivity", "min_cells", p.min_cells));
  if (p.n_bins < 4) throw ConfigError("'positivity.n_bins' must be at least 4");
  if (p.min_cells < 1) throw ConfigError("'positivity.min_cells' must be positive");
  return p;
}

MollifySpec parse_mollify(const json& obj) {
  const std::string s = "mollify";
  check_keys(obj, s, {"kernel", "t_min", "t_max", "count"});
  MollifySpec m;
  try {
    m.kernel = parse_kernel(text(obj, s, "kernel", "box"));
  } catch (const ArgumentError& ex) {
    throw ConfigError(std::string("mollify.kernel: ") + ex.what());
  }
  m.t_min = number(obj, s, "t_min", m.t_min);
  m.t_max = number(obj, s, "t_max", m.t_max);
  m.count = static_cast<int>(integer(obj, s, "count", m.count));
  if (m.count < 2) throw ConfigError("'mollify.count' must be at least 2");
  return m;
}

const MeshSpec& need(const std::optional<MeshSpec>& m) {
  if (!m) throw ConfigError("missing 'mesh' section");
  return *m;
}
const CoefficientSpec& need(const std::optional<CoefficientSpec>& c) {
  if (!c) throw ConfigError("missing 'coefficient' section");
  return *c;
}

RightHandSide rhs_or_default(const RunConfig& cfg, const Mesh& mesh) {
  return cfg.rhs ? build_rhs(*cfg.rhs, mesh) : RightHandSide::constant(mesh, 1.0);
}

json stamp(json j, const RunConfig& cfg) {
  j["config_hash"] = config_hash(cfg.effective);
  j["version"] = kVersion;
  return j;
}

void write_json(const fs::path& path, const json& j) { io::write_text_file(path, j.dump(2) + "\n"); }

std::string node_csv(const ScalarField& u) {
  std::ostringstream os;
  io::write_node_field(os, u);
  return os.str();
}

std::string cell_csv(const Mesh& mesh, std::span<const double> v) {
  std::ostringstream os;
  io::write_cell_field(os, mesh, v);
  return os.str();
}

int cmd_solve(const RunConfig& cfg, const fs::path& out) {
  const Mesh mesh(need(cfg.mesh).dim, need(cfg.mesh).n);
  const CoefficientField a = build_coefficient(need(cfg.coefficient), mesh);
  const RightHandSide f = rhs_or_default(cfg, mesh);
  json report;
  std::string u_text;
  if (mesh.dim() == 1) {
    const Solve1DResult r = solve_1d(a, f);
    report = to_json(r.report);
    report["gamma"] = r.gamma;
    report["flux_constant"] = r.flux_constant;
    u_text = node_csv(r.u);
  } else {
    const SolveResult r = solve_fd_2d(a, f, cfg.solver);
    report = to_json(r.report);
    u_text = node_csv(r.u);
  }
  report["n"] = mesh.cells_per_side();
  report["dim"] = mesh.dim();
  io::write_text_file(out / "u.csv", u_text);
  write_json(out / "report.json", stamp(report, cfg));
  return kExitOk;
}

int cmd_recover(const RunConfig& cfg, const fs::path& out) {
  if (!cfg.recovery) throw ConfigError("missing 'recovery' section");
  const RecoverySpec& rs = *cfg.recovery;
  const Mesh mesh(need(cfg.mesh).dim, need(cfg.mesh).n);
  const RightHandSide f = rhs_or_default(cfg, mesh);

  std::optional<CoefficientField> truth;
  double lambda = 0.0, Lambda = 0.0;
  if (cfg.coefficient) {
    lambda = cfg.coefficient->lambda;
    Lambda = cfg.coefficient->Lambda;
  }
  ScalarField u = ScalarField::zeros(mesh);
  if (rs.u_path) {
    u = io::read_node_field_file(*rs.u_path, mesh);
    if (cfg.coefficient) truth.emplace(build_coefficient(*cfg.coefficient, mesh));
  } else {
    truth.emplace(build_coefficient(need(cfg.coefficient), mesh));
    u = solve(*truth, f, cfg.solver).u;
  }
  if (!(lambda > 0.0)) throw ConfigError("recovery needs coefficient.lambda and coefficient.Lambda");

  json summary;
  if (rs.mode == "pwc") {
    if (mesh.cells_per_side() % rs.partition_n != 0) {
      throw ConfigError("'recovery.partition_n' must divide mesh.n");
    }
    const Partition partition(mesh, rs.partition_n);
    PwcOptions opt;
    opt.lambda = lambda;
    opt.Lambda = Lambda;
    opt.eps_den = rs.eps_den;
    const PwcRecovery rec = recover_pwc(u, f, partition, opt);
    summary = to_json(rec);
    if (truth) {
      double err = 0.0;
      for (std::size_t q = 0; q < rec.values.size(); ++q) {
        if (rec.flags[q] != PwcFlag::ok) continue;
        const double ref = (*truth)[partition.cells_in(q).front()];
        err = std::max(err, std::abs(rec.values[q] - ref) / ref);
      }
      summary["relative_linf_error"] = err;
    }
    io::write_text_file(out / "a_rec.csv", pwc_recovery_csv(rec));
  } else {
    Recovery1DOptions opt;
    opt.lambda = lambda;
    opt.Lambda = Lambda;
    opt.w_excl = rs.w_excl;
    const Recovery1D rec = recover_1d(u, f, opt);
    summary = to_json(rec);
    if (truth) {
      std::vector<double> diff(rec.values.size());
      for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = rec.values[k] - (*truth)[k];
      summary["relative_l2_error"] = norm_l2(mesh, diff) / norm_l2(*truth);
    }
    io::write_text_file(out / "a_rec.csv", cell_csv(mesh, rec.values));
  }
  write_json(out / "recovery.json", stamp(summary, cfg));
  return kExitOk;
}

int cmd_scan(const RunConfig& cfg, const fs::path& out, int threads) {
  if (!cfg.experiment) throw ConfigError("missing 'experiment' section");
  const Mesh mesh(need(cfg.mesh).dim, need(cfg.mesh).n);
  const ExperimentSpec& e = *cfg.experiment;
  ScanOptions opt;
  opt.floor = e.floor;
  opt.solver = cfg.solver;
  opt.threads = threads;
  opt.upper_envelope = e.upper_envelope;
  const ScanResult r = stability_scan(e.family, mesh, e.seeds, opt);
  json fit = to_json(r.fit);
  fit["family"] = to_string(e.family.tag);
  fit["samples"] = r.samples.size();
  io::write_text_file(out / "samples.csv", samples_csv(r.samples));
  write_json(out / "fit.json", stamp(fit, cfg));
  return kExitOk;
}

int cmd_pcfit(const RunConfig& cfg, const fs::path& out) {
  const Mesh mesh(need(cfg.mesh).dim, need(cfg.mesh).n);
  const CoefficientField a = build_coefficient(need(cfg.coefficient), mesh);
  const RightHandSide f = rhs_or_default(cfg, mesh);
  const ScalarField u = solve(a, f, cfg.solver).u;
  const WeightField w = compute_weight(a, u, f);
  const PositivityFit fit =
      fit_pc_beta(w, cfg.positivity.n_bins, static_cast<std::size_t>(cfg.positivity.min_cells));
  json j = to_json(fit);
  j["beta_clipped"] = fit.beta_clipped();
  io::write_text_file(out / "envelope.csv", envelope_csv(fit));
  write_json(out / "pcfit.json", stamp(j, cfg));
  return kExitOk;
}

int cmd_mollcheck(const RunConfig& cfg, const fs::path& out) {
  const Mesh mesh(need(cfg.mesh).dim, need(cfg.mesh).n);
  const CoefficientField a = build_coefficient(need(cfg.coefficient), mesh);
  const MollifySpec& m = cfg.mollify;
  const double t_min = m.t_min > 0.0 ? m.t_min : 4.0 * mesh.width();
  const ScalingStudy study = mollification_scaling(a, log_spaced(t_min, m.t_max, m.count), m.kernel);
  json j = to_json(study);
  j["kernel"] = to_string(m.kernel);
  j["t_min"] = t_min;
  j["t_max"] = m.t_max;
  io::write_text_file(out / "mollcheck.csv", scaling_csv(study));
  write_json(out / "mollcheck.json", stamp(j, cfg));
  return kExitOk;
}

}  // namespace

RunConfig parse_run_config(json config, const fs::path& base_dir,
                           std::optional<std::uint64_t> seed_override) {
  check_keys(config, "",
             {"mesh", "coefficient", "rhs", "solver", "experiment", "recovery", "positivity",
              "mollify", "output"});
  if (seed_override) {
    if (config.contains("experiment") && config["experiment"].is_object()) {
      config["experiment"]["seed"] = *seed_override;
    }
    if (config.contains("coefficient") && config["coefficient"].is_object() &&
        config["coefficient"].value("kind", "") == "fourier") {
      config["coefficient"]["seed"] = *seed_override;
    }
  }
  RunConfig cfg;
  if (config.contains("mesh")) cfg.mesh = parse_mesh(config["mesh"]);
  if (config.contains("coefficient")) cfg.coefficient = parse_coefficient(config["coefficient"], base_dir);
  if (config.contains("rhs")) cfg.rhs = parse_rhs(config["rhs"]);
  if (config.contains("solver")) cfg.solver = parse_solver(config["solver"]);
  if (config.contains("experiment")) cfg.experiment = parse_experiment(config["experiment"]);
  if (config.contains("recovery")) cfg.recovery = parse_recovery(config["recovery"], base_dir);
  if (config.contains("positivity")) cfg.positivity = parse_positivity(config["positivity"]);
  if (config.contains("mollify")) cfg.mollify = parse_mollify(config["mollify"]);
  cfg.output = text(config, "", "output", cfg.output);
  // Where the artifacts land does not change them.
  config.erase("output");
  cfg.effective = std::move(config);
  return cfg;
}

CoefficientField build_coefficient(const CoefficientSpec& c, const Mesh& mesh) {
  const double lo = c.lambda, hi = c.Lambda;
  if (c.kind == "constant") return CoefficientField::constant(mesh, c.value, lo, hi);
  if (c.kind == "pwc" || c.kind == "checkerboard") {
    if (mesh.cells_per_side() % c.n != 0) throw ConfigError("'coefficient.n' must divide mesh.n");
    const Partition part(mesh, c.n);
    if (c.kind == "pwc" && c.values.size() != part.num_subcubes()) {
      throw ConfigError("'coefficient.values' needs n^dim entries");
    }
    std::vector<double> v(mesh.num_cells());
    for (std::size_t cell = 0; cell < v.size(); ++cell) {
      const std::size_t q = part.subcube_of(cell);
      if (c.kind == "pwc") {
        v[cell] = c.values[q];
      } else {
        const auto qc = part.subcube_coords(q);
        v[cell] = (qc[0] + (mesh.dim() == 2 ? qc[1] : 0)) % 2 == 0 ? c.low : c.high;
      }
    }
    return CoefficientField(mesh, std::move(v), lo, hi);
  }
  if (c.kind == "fourier") {
    FamilyConfig fam;
    fam.tag = FamilyTag::smooth_fourier;
    fam.lambda = lo;
    fam.Lambda = hi;
    fam.modes = c.modes;
    fam.base_seed = c.seed;
    return fourier_field(fam, mesh, 0);
  }
  if (c.kind == "step") {
    return CoefficientField::from_function(
        mesh, [&](Point p) { return p[0] < c.location ? c.left : c.right; }, lo, hi);
  }
  if (c.kind == "affine") {
    return CoefficientField::from_function(mesh, [&](Point p) { return c.c0 + c.c1 * p[0]; }, lo, hi);
  }
  if (c.kind == "file") return CoefficientField(mesh, io::read_cell_field_file(c.path, mesh), lo, hi);
  throw ConfigError("unknown coefficient kind '" + c.kind + "'");
}

RightHandSide build_rhs(const RhsSpec& r, const Mesh& mesh) {
  if (r.kind == "constant") return RightHandSide::constant(mesh, r.value);
  std::vector<double> smooth(mesh.num_cells(), r.value);
  return RightHandSide(mesh, std::move(smooth), r.masses);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Forward solves and coefficient inversion for -div(a grad u) = f", "diffinv"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::string out_dir;
  int threads = 1;
  std::uint64_t seed_value = 0;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  CLI::Option* seed_opt =
      app.add_option("--seed", seed_value, "override experiment.seed and a fourier coefficient seed");
  app.add_flag_callback("--version", [&] { throw CLI::CallForVersion(kVersion, 0); },
                        "print the version");
  for (const char* name : {"solve", "recover", "scan", "pcfit", "mollcheck"}) {
    app.add_subcommand(name);
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(rev);
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  std::optional<std::uint64_t> seed;
  if (seed_opt->count() > 0) seed = seed_value;

  try {
    const fs::path cfg_path(config_path);
    json raw;
    try {
      raw = json::parse(io::read_text_file(cfg_path));
    } catch (const json::parse_error& e) {
      throw ConfigError("cannot parse " + config_path + ": " + e.what());
    }
    const RunConfig cfg = parse_run_config(std::move(raw), cfg_path.parent_path(), seed);
    const fs::path out_path = out_dir.empty() ? fs::path(cfg.output) : fs::path(out_dir);
    std::error_code ec;
    fs::create_directories(out_path, ec);
    if (ec) throw ConfigError("cannot create output directory " + out_path.string());

    int code = kExitOk;
    if (command == "solve") code = cmd_solve(cfg, out_path);
    if (command == "recover") code = cmd_recover(cfg, out_path);
    if (command == "scan") code = cmd_scan(cfg, out_path, threads);
    if (command == "pcfit") code = cmd_pcfit(cfg, out_path);
    if (command == "mollcheck") code = cmd_mollcheck(cfg, out_path);
    out << command << ": wrote " << out_path.string() << '\n';
    return code;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << " (iterations " << e.iterations() << ", residual "
        << e.residual() << ")\n";
    return kExitNumerical;
  } catch (const DegenerateFit& e) {
    err << "degenerate-fit: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const RecoveryFailure& e) {
    err << "recovery failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const AmbiguousPivot& e) {
    err << "ambiguous pivot: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const MalformedInput& e) {
    err << "malformed input: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace diffinv::cli
