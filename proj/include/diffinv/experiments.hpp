#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "diffinv/field.hpp"
#include "diffinv/forward.hpp"

namespace diffinv {

enum class FamilyTag { smooth_fourier, pwc_random, step_1d_lowerbound };

FamilyTag parse_family(const std::string& tag);
std::string to_string(FamilyTag tag);

/// Pivot location g(t) = (1 - t^2/2) / (2 - t) of the step coefficient 1/a = 1 on (0, t], 2 after.
double step_pivot(double t);
/// Critical point of step_pivot in (0, 1): 2 - sqrt(2), where g(alpha0) = alpha0.
inline constexpr double kAlpha0 = 0.58578643762690495119831127579;

struct FamilyConfig {
  FamilyTag tag = FamilyTag::smooth_fourier;
  double lambda = 0.5;
  double Lambda = 2.0;
  /// smooth-fourier: modes per axis.
  int modes = 6;
  /// pwc-random: subcubes per side.
  int partition_n = 2;
  /// Pair amplitudes: b = (1 - tau) a + tau c with tau on a log ladder (fourier, pwc).
  double tau_min = 1e-3;
  double tau_max = 1.0;
  /// step-1d-lowerbound: |beta - alpha0| ladder, snapped to whole cells.
  double offset_min = 1e-3;
  double offset_max = 1e-1;
  /// Length of the amplitude/offset ladder; sample seed s uses rung s mod ladder.
  int ladder = 16;
  std::uint64_t base_seed = 0;
};

/// Bounds the lower-bound family is defined against (a in {1, 1/2}).
FamilyConfig lowerbound_family_defaults();

struct CoefficientPair {
  CoefficientField a;
  CoefficientField b;
  std::uint64_t seed;
  /// tau for fourier/pwc families, the snapped offset beta - alpha for the step family.
  double amplitude;
};

/// Deterministic pair for sample `seed`; every field is validated in [lambda, Lambda].
CoefficientPair coefficient_pair(const FamilyConfig& family, const Mesh& mesh, std::uint64_t seed);

/// Single smooth-fourier field for draw `stream` (used by the monitor and tests).
CoefficientField fourier_field(const FamilyConfig& family, const Mesh& mesh, std::uint64_t stream);

struct PairSample {
  std::uint64_t seed = 0;
  double delta_l2 = 0.0;
  double e_h10 = 0.0;
  bool excluded = false;
  double amplitude = 0.0;
  std::string family;
  int mesh_n = 0;
};

enum class FitStatus { ok, insufficient_range };
std::string to_string(FitStatus status);

struct ExponentFit {
  double alpha_hat = 0.0;
  double c_hat = 0.0;
  double r2 = 0.0;
  int n_used = 0;
  int n_excluded = 0;
  FitStatus status = FitStatus::insufficient_range;
};

/// Least-squares fit log delta_l2 = alpha log e_h10 + log c over non-excluded samples.
/// Needs >= 8 samples spanning >= 2 decades of e_h10. With `upper_envelope` the slope is
/// kept and c_hat raised until every sample lies on or below the curve.
ExponentFit fit_exponent(const std::vector<PairSample>& samples, bool upper_envelope = false);

using ForwardSolver = std::function<ScalarField(const CoefficientField&, const RightHandSide&)>;

/// solve() with the given options.
ForwardSolver default_forward_solver(const SolverOptions& options = {});

struct ScanOptions {
  double floor = 1e-8;
  SolverOptions solver;
  int threads = 1;
  bool upper_envelope = false;
};

struct ScanResult {
  std::vector<PairSample> samples;
  ExponentFit fit;
};

/// Solves both members of every pair with f = 1, records the two norms and fits the exponent.
/// The sample list follows `seeds` order for any thread count.
ScanResult stability_scan(const FamilyConfig& family, const Mesh& mesh,
                          const std::vector<std::uint64_t>& seeds, const ScanOptions& options);
ScanResult stability_scan(const FamilyConfig& family, const Mesh& mesh,
                          const std::vector<std::uint64_t>& seeds, const ScanOptions& options,
                          const ForwardSolver& solver);

/// max delta_l2 / e_h10^exponent over non-excluded samples (0 when none).
double holder_constant(const std::vector<PairSample>& samples, double exponent);
/// Non-excluded samples with delta_l2 > c * e_h10^exponent.
int count_violations(const std::vector<PairSample>& samples, double exponent, double c);

struct StepPairNorms {
  double delta_A_l2 = 0.0;
  double gamma_a = 0.0;
  double gamma_b = 0.0;
  double e_prime_l2 = 0.0;
};

/// Exact norms for the step pair 1/a = 1|2 at alpha, 1/b = 1|2 at beta, f = 1.
StepPairNorms step_pair_norms(double alpha, double beta);

struct LowerBoundNorms {
  double delta_A_l2 = 0.0;  // |alpha0 - beta|^{1/2}
  double eta = 0.0;         // g(alpha0) - g(beta) >= 0
  double e_prime_l2_upper = 0.0;  // sqrt((2/3)|beta - alpha0|^3 + 8 eta^2)
  double e_prime_l2_exact = 0.0;
};

/// Closed-form quantities of the lower-bound construction with alpha fixed at alpha0.
LowerBoundNorms lower_bound_closed_form(double beta);

struct MonitorResult {
  double lhs = 0.0;
  double rhs_norm = 0.0;
  double ratio = 0.0;
  double e_h10 = 0.0;
};

/// lhs = int (delta/a)^2 (a |grad u_a|^2 + f u_a), rhs_norm = ||E||_{H10} ||f||_inf
/// (1 + max(||grad a||, ||grad b||)); ratio = lhs / rhs_norm (0 when rhs_norm = 0).
MonitorResult weighted_estimate_monitor(const CoefficientField& a, const CoefficientField& b,
                                        const RightHandSide& f, const ForwardSolver& solver);

struct NonIdentifiability {
  double gap_to_reference = 0.0;  // max |u_q - u_1| over nodes
  double gap_to_hat = 0.0;        // max |u_q - hat| over nodes
};

/// a_q = q on [0, 1/2], 2 - q after, f = 2 delta_{1/2}, solved exactly on N cells.
NonIdentifiability nonidentifiability_demo(double q, int cells);

}  // namespace diffinv
