#include "diffinv/positivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "diffinv/errors.hpp"

namespace diffinv {

WeightField compute_weight(const CoefficientField& a, const ScalarField& u,
                           const RightHandSide& f) {
  const Mesh& mesh = a.mesh();
  if (!(mesh == u.mesh()) || !(mesh == f.mesh())) {
    throw ArgumentError("compute_weight: coefficient, solution and right side meshes differ");
  }
  if (f.has_point_masses()) throw ArgumentError("compute_weight: point masses unsupported");
  const GradientField g = gradient(u);
  const int n = mesh.cells_per_side();
  const auto fs = f.smooth();
  WeightField w{mesh, std::vector<double>(mesh.num_cells())};
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto [i, j] = mesh.cell_coords(c);
    double grad2 = 0.0;
    double uc = 0.0;
    if (mesh.dim() == 1) {
      grad2 = g.dx[i] * g.dx[i];
      uc = 0.5 * (u.at(i) + u.at(i + 1));
    } else {
      const std::size_t stride_x = static_cast<std::size_t>(n) + 1;
      const double gx = 0.5 * (g.dx[i * stride_x + j] + g.dx[i * stride_x + j + 1]);
      const double gy = 0.5 * (g.dy[static_cast<std::size_t>(i) * n + j] +
                               g.dy[static_cast<std::size_t>(i + 1) * n + j]);
      grad2 = gx * gx + gy * gy;
      uc = 0.25 * (u.at(i, j) + u.at(i + 1, j) + u.at(i, j + 1) + u.at(i + 1, j + 1));
    }
    w.values[c] = a[c] * grad2 + fs[c] * uc;
  }
  if (f.is_nonnegative()) {
    const double wmax = *std::max_element(w.values.begin(), w.values.end());
    const double eps = 1e-12 * std::max(wmax, 0.0);
    for (std::size_t c = 0; c < w.values.size(); ++c) {
      if (w.values[c] < -eps) {
        std::ostringstream os;
        os << "weight " << w.values[c] << " at cell " << c << " is negative with f >= 0";
        throw InvariantViolation(os.str());
      }
    }
  }
  return w;
}

PositivityFit fit_pc_beta(const WeightField& w, int n_bins, std::size_t min_cells) {
  if (n_bins < 4) throw ArgumentError("fit_pc_beta: need at least 4 bins");
  const Mesh& mesh = w.mesh;
  if (w.values.size() != mesh.num_cells()) throw ArgumentError("fit_pc_beta: size mismatch");
  if (std::all_of(w.values.begin(), w.values.end(), [](double v) { return v == 0.0; })) {
    throw DegenerateFit("fit_pc_beta: weight is identically zero");
  }
  const double h = mesh.width();
  double dmax = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) dmax = std::max(dmax, boundary_distance(mesh, c));
  if (!(dmax > h)) throw DegenerateFit("fit_pc_beta: mesh too coarse for distance bins");

  const double log_lo = std::log(h);
  const double width = (std::log(dmax) - log_lo) / n_bins;
  struct Bin {
    std::size_t cells = 0;
    double wmin = std::numeric_limits<double>::infinity();
    double dist = 0.0;
  };
  std::vector<Bin> bins(n_bins);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const double d = boundary_distance(mesh, c);
    if (d < h) continue;
    const int b = std::clamp(static_cast<int>((std::log(d) - log_lo) / width), 0, n_bins - 1);
    Bin& bin = bins[b];
    ++bin.cells;
    // Ties resolve to the smaller distance so the result is independent of cell order.
    if (w.values[c] < bin.wmin || (w.values[c] == bin.wmin && d < bin.dist)) {
      bin.wmin = w.values[c];
      bin.dist = d;
    }
  }

  PositivityFit fit;
  fit.n_bins = n_bins;
  for (const Bin& bin : bins) {
    if (bin.cells < min_cells || !(bin.wmin > 0.0)) continue;
    fit.envelope.push_back({std::log(bin.dist), std::log(bin.wmin), bin.cells});
  }
  if (fit.envelope.size() < 2) {
    throw DegenerateFit("fit_pc_beta: fewer than two usable bins");
  }

  const double count = static_cast<double>(fit.envelope.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : fit.envelope) {
    mx += p.log_dist;
    my += p.log_wmin;
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : fit.envelope) {
    sxx += (p.log_dist - mx) * (p.log_dist - mx);
    sxy += (p.log_dist - mx) * (p.log_wmin - my);
    syy += (p.log_wmin - my) * (p.log_wmin - my);
  }
  if (!(sxx > 0.0)) throw DegenerateFit("fit_pc_beta: all envelope points share one distance");
  fit.beta_hat = sxy / sxx;
  const double intercept = my - fit.beta_hat * mx;
  fit.c_hat = std::exp(intercept);
  double ss_res = 0.0;
  for (const auto& p : fit.envelope) {
    const double r = p.log_wmin - (intercept + fit.beta_hat * p.log_dist);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

PcCheck check_pc(const WeightField& w, double c, double beta) {
  if (!(c > 0.0)) throw ArgumentError("check_pc: c must be positive");
  if (beta < 0.0) throw ArgumentError("check_pc: beta must be nonnegative");
  PcCheck out;
  out.worst_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < w.values.size(); ++k) {
    const double ratio = w.values[k] / std::pow(boundary_distance(w.mesh, k), beta);
    if (ratio < out.worst_ratio) {
      out.worst_ratio = ratio;
      out.worst_cell = k;
    }
  }
  out.holds = out.worst_ratio >= c;
  return out;
}

}  // namespace diffinv
