#pragma once

#include <cstddef>
#include <vector>

#include "diffinv/field.hpp"
#include "diffinv/forward.hpp"

namespace diffinv {

/// Cellwise weight w = a |grad u|^2 + f u.
struct WeightField {
  Mesh mesh;
  std::vector<double> values;
};

/// Gradient at cell centers is the per-axis mean of the two bounding edge differences,
/// u at the center the mean of the corner nodes. Throws InvariantViolation if some cell
/// is below -1e-12 * max w while f >= 0.
WeightField compute_weight(const CoefficientField& a, const ScalarField& u,
                           const RightHandSide& f);

struct EnvelopePoint {
  double log_dist;
  double log_wmin;
  std::size_t cells;
};

/// Fitted lower envelope w >= c_hat * dist^beta_hat.
struct PositivityFit {
  double c_hat = 0.0;
  double beta_hat = 0.0;
  int n_bins = 0;
  double r2 = 0.0;
  std::vector<EnvelopePoint> envelope;

  double beta_clipped() const { return beta_hat < 0.0 ? 0.0 : beta_hat; }
};

/// Bins cells with dist >= h into n_bins log-spaced bins over [h, max dist], keeps the
/// per-bin minimum of w for bins holding at least `min_cells` cells and fits
/// log wmin = log c + beta log dist by least squares. The abscissa of a bin is the
/// distance of its minimizing cell.
PositivityFit fit_pc_beta(const WeightField& w, int n_bins, std::size_t min_cells = 5);

struct PcCheck {
  bool holds = false;
  std::size_t worst_cell = 0;
  /// min over cells of w / dist^beta.
  double worst_ratio = 0.0;
};

/// Exhaustive scan of w >= c dist^beta over every cell.
PcCheck check_pc(const WeightField& w, double c, double beta);

}  // namespace diffinv
