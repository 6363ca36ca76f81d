#pragma once

#include <string>
#include <vector>

#include "diffinv/field.hpp"
#include "diffinv/forward.hpp"

namespace diffinv {

enum class PwcFlag { ok, unstable_denominator, out_of_range };
std::string to_string(PwcFlag flag);

struct PwcOptions {
  double lambda = 0.0;
  double Lambda = 0.0;
  double eps_den = 1e-8;
  /// ok values must lie in [lambda / sanity, Lambda * sanity].
  double sanity = 10.0;
};

/// Recovered a_Q per subcube. Flagged entries keep their raw quotient (NaN when unusable).
struct PwcRecovery {
  Partition partition;
  std::vector<double> values;
  std::vector<PwcFlag> flags;
  /// Per-subcube ||grad u||_{L2(Q)} and ||grad phi_Q||_{L2(Q)}, kept for stability diagnostics.
  std::vector<double> grad_u_norm;
  std::vector<double> grad_phi_norm;
};

/// Interior test function of subcube q at interior nodes: a tensor-product bump centred in
/// Q whose support stops one mesh cell short of the subcube boundary, scaled to unit
/// discrete integral.
ScalarField subcube_bump(const Partition& partition, std::size_t q);

/// a_Q = <f, phi_Q> / sum grad u . grad phi_Q h^d for each Q of the partition.
/// Requires f >= c_f > 0 without point masses and at least 4 cells per subcube side.
PwcRecovery recover_pwc(const ScalarField& u, const RightHandSide& f, const Partition& partition,
                        const PwcOptions& options);

struct Recovery1DOptions {
  double lambda = 0.0;
  double Lambda = 0.0;
  /// Half-width of the window around the pivot; <= 0 selects 4h.
  double w_excl = 0.0;
};

struct Recovery1D {
  Mesh mesh;
  double gamma_hat = 0.0;
  double w_excl = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::vector<double> values;
  /// True for cells inside the exclusion window (filled by interpolation).
  std::vector<bool> filled;
};

/// Inverts a u' = F(gamma) - F: locates the single sign change of the discrete u', divides
/// outside |x - gamma| < w_excl, interpolates across the window and clamps to [lambda, Lambda].
/// The general-f variant (f other than 1, point masses) is experimental.
Recovery1D recover_1d(const ScalarField& u, const RightHandSide& f,
                      const Recovery1DOptions& options);

}  // namespace diffinv
