#include "diffinv/field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "diffinv/errors.hpp"

namespace diffinv {

CoefficientField::CoefficientField(Mesh mesh, std::vector<double> values, double lambda,
                                   double Lambda)
    : mesh_(mesh), values_(std::move(values)), lambda_(lambda), Lambda_(Lambda) {
  if (!(lambda > 0.0) || !(lambda < Lambda)) {
    throw ArgumentError("coefficient bounds must satisfy 0 < lambda < Lambda");
  }
  if (values_.size() != mesh_.num_cells()) {
    throw ArgumentError("coefficient field has " + std::to_string(values_.size()) +
                        " values, mesh has " + std::to_string(mesh_.num_cells()) + " cells");
  }
  for (std::size_t c = 0; c < values_.size(); ++c) {
    const double v = values_[c];
    if (!(v >= lambda_ && v <= Lambda_)) {
      std::ostringstream os;
      os << "coefficient value " << v << " at cell " << c << " outside [" << lambda_ << ", "
         << Lambda_ << "]";
      throw InvariantViolation(os.str());
    }
  }
}

CoefficientField CoefficientField::constant(const Mesh& mesh, double value, double lambda,
                                            double Lambda) {
  return {mesh, std::vector<double>(mesh.num_cells(), value), lambda, Lambda};
}

CoefficientField CoefficientField::from_function(const Mesh& mesh,
                                                 const std::function<double(Point)>& fn,
                                                 double lambda, double Lambda) {
  std::vector<double> v(mesh.num_cells());
  for (std::size_t c = 0; c < v.size(); ++c) v[c] = fn(mesh.cell_center(c));
  return {mesh, std::move(v), lambda, Lambda};
}

ScalarField::ScalarField(Mesh mesh, std::vector<double> values)
    : mesh_(mesh), values_(std::move(values)) {
  if (values_.size() != mesh_.num_interior_nodes()) {
    throw ArgumentError("scalar field has " + std::to_string(values_.size()) +
                        " values, mesh has " + std::to_string(mesh_.num_interior_nodes()) +
                        " interior nodes");
  }
}

ScalarField ScalarField::zeros(const Mesh& mesh) {
  return {mesh, std::vector<double>(mesh.num_interior_nodes(), 0.0)};
}

double ScalarField::at(int i, int j) const {
  const int n = mesh_.cells_per_side();
  if (i <= 0 || i >= n) return 0.0;
  if (mesh_.dim() == 1) return values_[mesh_.node_index(i)];
  if (j <= 0 || j >= n) return 0.0;
  return values_[mesh_.node_index(i, j)];
}

GradientField gradient(const ScalarField& u) {
  const Mesh& m = u.mesh();
  const int n = m.cells_per_side();
  const double inv_h = static_cast<double>(n);
  GradientField g{m, {}, {}};
  if (m.dim() == 1) {
    g.dx.resize(n);
    for (int i = 0; i < n; ++i) g.dx[i] = (u.at(i + 1) - u.at(i)) * inv_h;
    return g;
  }
  g.dx.resize(static_cast<std::size_t>(n) * (n + 1));
  g.dy.resize(static_cast<std::size_t>(n + 1) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= n; ++j) {
      g.dx[static_cast<std::size_t>(i) * (n + 1) + j] = (u.at(i + 1, j) - u.at(i, j)) * inv_h;
    }
  }
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j < n; ++j) {
      g.dy[static_cast<std::size_t>(i) * n + j] = (u.at(i, j + 1) - u.at(i, j)) * inv_h;
    }
  }
  return g;
}

double norm_l2(const Mesh& mesh, std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(mesh.cell_volume() * sum);
}

double norm_l2(const CoefficientField& a) { return norm_l2(a.mesh(), a.values()); }
double norm_l2(const ScalarField& u) { return norm_l2(u.mesh(), u.values()); }

double norm_linf(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double norm_h10(const ScalarField& u) {
  const GradientField g = gradient(u);
  double sum = 0.0;
  for (double v : g.dx) sum += v * v;
  for (double v : g.dy) sum += v * v;
  return std::sqrt(u.mesh().cell_volume() * sum);
}

double cell_gradient_norm(const Mesh& mesh, std::span<const double> a) {
  if (a.size() != mesh.num_cells()) throw ArgumentError("cell_gradient_norm: size mismatch");
  const int n = mesh.cells_per_side();
  const double inv_h = static_cast<double>(n);
  double sum = 0.0;
  if (mesh.dim() == 1) {
    for (int i = 0; i + 1 < n; ++i) {
      const double d = (a[i + 1] - a[i]) * inv_h;
      sum += d * d;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double v = a[mesh.cell_index(i, j)];
        if (i + 1 < n) {
          const double d = (a[mesh.cell_index(i + 1, j)] - v) * inv_h;
          sum += d * d;
        }
        if (j + 1 < n) {
          const double d = (a[mesh.cell_index(i, j + 1)] - v) * inv_h;
          sum += d * d;
        }
      }
    }
  }
  return std::sqrt(mesh.cell_volume() * sum);
}

double seminorm_hs(const Mesh& mesh, std::span<const double> a, double s) {
  if (!(s > 0.0 && s < 1.0)) throw ArgumentError("seminorm_hs: s must lie in (0, 1)");
  if (a.size() != mesh.num_cells()) throw ArgumentError("seminorm_hs: size mismatch");
  const int n = mesh.cells_per_side();
  const double h = mesh.width();
  const int d = mesh.dim();
  const double power = d + 2.0 * s;
  double sum = 0.0;
  if (d == 1) {
    std::vector<double> kernel(n);
    for (int k = 1; k < n; ++k) kernel[k] = std::pow(k * h, -power);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double diff = a[i] - a[j];
        sum += diff * diff * kernel[j - i];
      }
    }
    sum *= 2.0 * h * h;
  } else {
    if (n > 128) throw ArgumentError("seminorm_hs: 2D evaluation limited to N <= 128");
    // kernel[di * n + dj] = |(di, dj) h|^{-(d+2s)}
    std::vector<double> kernel(static_cast<std::size_t>(n) * n, 0.0);
    for (int di = 0; di < n; ++di) {
      for (int dj = 0; dj < n; ++dj) {
        if (di == 0 && dj == 0) continue;
        const double r2 = (double(di) * di + double(dj) * dj) * h * h;
        kernel[static_cast<std::size_t>(di) * n + dj] = std::pow(r2, -0.5 * power);
      }
    }
    const std::size_t nc = mesh.num_cells();
    for (std::size_t p = 0; p < nc; ++p) {
      const auto [pi, pj] = mesh.cell_coords(p);
      for (std::size_t q = p + 1; q < nc; ++q) {
        const auto [qi, qj] = mesh.cell_coords(q);
        const double diff = a[p] - a[q];
        if (diff == 0.0) continue;
        sum += diff * diff *
               kernel[static_cast<std::size_t>(std::abs(pi - qi)) * n + std::abs(pj - qj)];
      }
    }
    const double h2 = h * h;
    sum *= 2.0 * h2 * h2;
  }
  return std::sqrt(sum);
}

double weighted_l2_sq(const Mesh& mesh, std::span<const double> q, std::span<const double> w) {
  if (q.size() != w.size() || q.size() != mesh.num_cells()) {
    throw ArgumentError("weighted_l2_sq: size mismatch");
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < q.size(); ++c) {
    if (w[c] < 0.0) {
      throw InvariantViolation("weighted_l2_sq: negative weight at cell " + std::to_string(c));
    }
    sum += q[c] * w[c];
  }
  return mesh.cell_volume() * sum;
}

}  // namespace diffinv
