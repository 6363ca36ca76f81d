#include "diffinv/mollify.hpp"

#include <algorithm>
#include <cmath>

#include "diffinv/errors.hpp"

namespace diffinv {

Kernel parse_kernel(const std::string& name) {
  if (name == "box") return Kernel::box;
  if (name == "bump") return Kernel::bump;
  throw ArgumentError("unknown kernel '" + name + "' (expected box or bump)");
}

std::string to_string(Kernel kernel) { return kernel == Kernel::box ? "box" : "bump"; }

double bump_profile(double r) {
  return std::abs(r) < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0;
}

std::vector<double> kernel_weights(double h, double t, Kernel kernel) {
  const int m = static_cast<int>(std::ceil(t / h - 1e-12));
  std::vector<double> w(2 * m + 1, 0.0);
  for (int k = -m; k <= m; ++k) {
    double v = 0.0;
    if (kernel == Kernel::box) {
      const double lo = std::max((k - 0.5) * h, -t);
      const double hi = std::min((k + 0.5) * h, t);
      v = std::max(hi - lo, 0.0) / (2.0 * t);
    } else {
      v = bump_profile(k * h / t);
    }
    w[k + m] = v;
  }
  double sum = 0.0;
  for (double v : w) sum += v;
  for (double& v : w) v /= sum;
  return w;
}

namespace {

int reflect(int j, int n) {
  while (j < 0 || j >= n) j = j < 0 ? -1 - j : 2 * n - 1 - j;
  return j;
}

}  // namespace

CoefficientField mollify(const CoefficientField& a, const MollifierSpec& spec) {
  const Mesh& mesh = a.mesh();
  const double h = mesh.width();
  if (!(spec.t > 0.0 && spec.t < 1.0)) throw ArgumentError("mollify: t must lie in (0, 1)");
  if (spec.t < 2.0 * h) {
    throw ResolutionError("mollify: radius t = " + std::to_string(spec.t) +
                          " is below two cell widths (2h = " + std::to_string(2.0 * h) + ")");
  }
  const std::vector<double> w = kernel_weights(h, spec.t, spec.kernel);
  const int m = static_cast<int>(w.size() / 2);
  const int n = mesh.cells_per_side();

  std::vector<double> cur(a.values().begin(), a.values().end());
  std::vector<double> next(cur.size());
  const int axes = mesh.dim();
  for (int axis = 0; axis < axes; ++axis) {
    for (std::size_t c = 0; c < cur.size(); ++c) {
      const auto [i, j] = mesh.cell_coords(c);
      double s = 0.0;
      for (int k = -m; k <= m; ++k) {
        const std::size_t src = axis == 0 ? mesh.cell_index(reflect(i + k, n), j)
                                          : mesh.cell_index(i, reflect(j + k, n));
        s += w[k + m] * cur[src];
      }
      next[c] = s;
    }
    cur.swap(next);
  }
  // Convex averaging: only rounding can leave the input range.
  const auto [lo, hi] = std::minmax_element(a.values().begin(), a.values().end());
  for (double& v : cur) v = std::clamp(v, *lo, *hi);
  return {mesh, std::move(cur), a.lower(), a.upper()};
}

double approximation_functional(const CoefficientField& a, const CoefficientField& a_t, double t) {
  if (!(a.mesh() == a_t.mesh())) throw ArgumentError("approximation_functional: mesh mismatch");
  std::vector<double> diff(a.values().size());
  for (std::size_t c = 0; c < diff.size(); ++c) diff[c] = a[c] - a_t[c];
  return norm_l2(a.mesh(), diff) + t * cell_gradient_norm(a_t);
}

std::vector<double> log_spaced(double t_min, double t_max, int count) {
  if (count < 2 || !(t_min > 0.0) || !(t_max > t_min)) {
    throw ArgumentError("log_spaced: need count >= 2 and 0 < t_min < t_max");
  }
  std::vector<double> out(count);
  const double l0 = std::log(t_min);
  const double l1 = std::log(t_max);
  for (int k = 0; k < count; ++k) out[k] = std::exp(l0 + (l1 - l0) * k / (count - 1));
  out.front() = t_min;
  out.back() = t_max;
  return out;
}

ScalingStudy mollification_scaling(const CoefficientField& a, const std::vector<double>& radii,
                                   Kernel kernel) {
  if (radii.size() < 2) throw ArgumentError("mollification_scaling: need at least two radii");
  ScalingStudy study;
  for (double t : radii) {
    const CoefficientField at = mollify(a, {t, kernel, BoundaryMode::reflect});
    study.points.push_back({t, approximation_functional(a, at, t)});
  }
  double mx = 0.0, my = 0.0;
  for (const auto& p : study.points) {
    mx += std::log(p.t);
    my += std::log(p.functional);
  }
  mx /= static_cast<double>(study.points.size());
  my /= static_cast<double>(study.points.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : study.points) {
    sxx += (std::log(p.t) - mx) * (std::log(p.t) - mx);
    sxy += (std::log(p.t) - mx) * (std::log(p.functional) - my);
  }
  study.slope = sxy / sxx;
  return study;
}

}  // namespace diffinv
