#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "diffinv/experiments.hpp"
#include "diffinv/forward.hpp"
#include "diffinv/mollify.hpp"

namespace diffinv::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct MeshSpec {
  int dim = 1;
  int n = 64;
};

struct CoefficientSpec {
  std::string kind = "constant";
  double lambda = 0.1;
  double Lambda = 10.0;
  double value = 1.0;                 // constant
  int n = 1;                          // pwc, checkerboard
  std::vector<double> values;         // pwc
  double low = 1.0, high = 2.0;       // checkerboard
  std::uint64_t seed = 0;             // fourier
  int modes = 6;                      // fourier
  double location = 0.5;              // step
  double left = 1.0, right = 2.0;     // step
  double c0 = 1.0, c1 = 1.0;          // affine: c0 + c1 x
  std::filesystem::path path;         // file
};

struct RhsSpec {
  std::string kind = "constant";
  double value = 1.0;
  std::vector<PointMass> masses;
};

struct ExperimentSpec {
  FamilyConfig family;
  std::vector<std::uint64_t> seeds;
  double floor = 1e-8;
  bool upper_envelope = false;
};

struct RecoverySpec {
  std::string mode = "pwc";  // pwc | 1d
  std::optional<std::filesystem::path> u_path;
  int partition_n = 4;
  double w_excl = 0.0;
  double eps_den = 1e-8;
};

struct PositivitySpec {
  int n_bins = 16;
  int min_cells = 5;
};

struct MollifySpec {
  Kernel kernel = Kernel::box;
  double t_min = 0.0;  // 0 selects 4h
  double t_max = 0.1;
  int count = 8;
};

/// Fully validated run configuration. Unknown keys anywhere are rejected.
struct RunConfig {
  std::optional<MeshSpec> mesh;
  std::optional<CoefficientSpec> coefficient;
  std::optional<RhsSpec> rhs;
  SolverOptions solver;
  std::optional<ExperimentSpec> experiment;
  std::optional<RecoverySpec> recovery;
  PositivitySpec positivity;
  MollifySpec mollify;
  std::string output = "out";
  /// Configuration after command-line overrides; hashed into every JSON output.
  nlohmann::json effective;
};

/// Throws ConfigError naming the offending key. Relative paths resolve against base_dir.
RunConfig parse_run_config(nlohmann::json config, const std::filesystem::path& base_dir,
                           std::optional<std::uint64_t> seed_override = std::nullopt);

CoefficientField build_coefficient(const CoefficientSpec& spec, const Mesh& mesh);
RightHandSide build_rhs(const RhsSpec& spec, const Mesh& mesh);

/// Entry point shared by the executable and the tests. argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace diffinv::cli
