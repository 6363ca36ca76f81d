#pragma once

#include <functional>
#include <span>
#include <vector>

#include "diffinv/mesh.hpp"

namespace diffinv {

/// Cell-centered diffusion coefficient constrained to lambda <= a <= Lambda.
class CoefficientField {
 public:
  /// Rejects (never clamps) values outside [lambda, Lambda].
  CoefficientField(Mesh mesh, std::vector<double> values, double lambda, double Lambda);

  static CoefficientField constant(const Mesh& mesh, double value, double lambda, double Lambda);
  static CoefficientField from_function(const Mesh& mesh, const std::function<double(Point)>& fn,
                                        double lambda, double Lambda);

  const Mesh& mesh() const { return mesh_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t cell) const { return values_[cell]; }
  double lower() const { return lambda_; }
  double upper() const { return Lambda_; }

 private:
  Mesh mesh_;
  std::vector<double> values_;
  double lambda_;
  double Lambda_;
};

/// Node-centered solution; stores interior nodes only, boundary values are zero.
class ScalarField {
 public:
  ScalarField(Mesh mesh, std::vector<double> values);
  static ScalarField zeros(const Mesh& mesh);

  const Mesh& mesh() const { return mesh_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  double operator[](std::size_t node) const { return values_[node]; }

  /// Value at lattice node (i, j), 0 <= i, j <= N; zero on the boundary.
  double at(int i, int j = 0) const;

 private:
  Mesh mesh_;
  std::vector<double> values_;
};

/// Divided differences of a ScalarField on mesh edges.
///
/// 1D: dx[i] = (u_{i+1} - u_i) / h for cell i.
/// 2D: dx[i * (N+1) + j] on the edge (i,j)-(i+1,j), dy[i * N + j] on the edge (i,j)-(i,j+1).
struct GradientField {
  Mesh mesh;
  std::vector<double> dx;
  std::vector<double> dy;
};

GradientField gradient(const ScalarField& u);

/// sqrt(h^d * sum v^2) over cells of a cell field.
double norm_l2(const CoefficientField& a);
/// sqrt(h^d * sum v^2) over interior nodes.
double norm_l2(const ScalarField& u);
/// Raw cell or node samples with the mesh weight h^d.
double norm_l2(const Mesh& mesh, std::span<const double> values);

double norm_linf(std::span<const double> values);

/// ||grad u||_{L2}: edge differences weighted by h^d.
double norm_h10(const ScalarField& u);

/// ||grad a||_{L2} of a cell field from differences across interior cell faces.
double cell_gradient_norm(const Mesh& mesh, std::span<const double> cell_values);
inline double cell_gradient_norm(const CoefficientField& a) {
  return cell_gradient_norm(a.mesh(), a.values());
}

/// Discrete Gagliardo H^s seminorm with cell centers as quadrature points, diagonal excluded.
/// Only meaningful for scaling comparisons; d = 2 requires N <= 128.
double seminorm_hs(const Mesh& mesh, std::span<const double> cell_values, double s);
inline double seminorm_hs(const CoefficientField& a, double s) {
  return seminorm_hs(a.mesh(), a.values(), s);
}

/// h^d * sum q * w over cells; w must be nonnegative.
double weighted_l2_sq(const Mesh& mesh, std::span<const double> delta_over_a_sq,
                      std::span<const double> w);

}  // namespace diffinv
