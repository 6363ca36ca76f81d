#pragma once

#include <string>
#include <vector>

#include "diffinv/field.hpp"

namespace diffinv {

struct PointMass {
  double location;  // in (0, 1)
  double weight;
};

/// Right side f: cellwise L-infinity part plus (1D only) weighted Dirac masses.
class RightHandSide {
 public:
  RightHandSide(Mesh mesh, std::vector<double> smooth, std::vector<PointMass> point_masses = {});

  static RightHandSide constant(const Mesh& mesh, double value);
  /// Samples `fn` at cell centers.
  static RightHandSide from_function(const Mesh& mesh, const std::function<double(Point)>& fn);
  static RightHandSide point_masses(const Mesh& mesh, std::vector<PointMass> masses);

  const Mesh& mesh() const { return mesh_; }
  std::span<const double> smooth() const { return smooth_; }
  const std::vector<PointMass>& masses() const { return masses_; }
  bool has_point_masses() const { return !masses_.empty(); }

  /// min of the smooth part; c_f when strictly positive.
  double lower_bound() const;
  double linf() const;
  /// f >= c_f > 0 cellwise and no point masses.
  bool is_strictly_positive() const { return !has_point_masses() && lower_bound() > 0.0; }
  bool is_nonnegative() const;

  /// Smooth part at interior nodes: mean of the 2^d adjacent cells.
  std::vector<double> nodal_values() const;
  /// Smooth part at cell centers scaled by s.
  RightHandSide scaled(double s) const;

 private:
  Mesh mesh_;
  std::vector<double> smooth_;
  std::vector<PointMass> masses_;
};

enum class SolverKind { exact1d, fd2d, series };
std::string to_string(SolverKind kind);

struct SolveReport {
  int iterations = 0;
  double final_relative_residual = 0.0;
  SolverKind solver = SolverKind::exact1d;
};

enum class FaceAveraging { harmonic, arithmetic };
enum class Preconditioner { jacobi, ic0 };

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 100000;
  FaceAveraging averaging = FaceAveraging::harmonic;
  Preconditioner preconditioner = Preconditioner::ic0;
};

struct Solve1DResult {
  ScalarField u;
  /// Pivot: the point where a u' = c - F vanishes; equals gamma_a when f = 1.
  double gamma;
  /// The flux constant c with a u' = c - F, F the antiderivative of f.
  double flux_constant;
  SolveReport report;
};

struct SolveResult {
  ScalarField u;
  SolveReport report;
};

/// Exact 1D solve of -(a u')' = f, u(0) = u(1) = 0, from a u' = c - F.
/// Nodal values are exact for cellwise-constant a and cellwise-constant f.
Solve1DResult solve_1d(const CoefficientField& a, const RightHandSide& f);

/// 5-point flux scheme on the unit square, face coefficient from the two cells
/// sharing the edge, solved by preconditioned CG to relative residual <= tol.
SolveResult solve_fd_2d(const CoefficientField& a, const RightHandSide& f,
                        const SolverOptions& options = {});

/// Dispatches to solve_1d or solve_fd_2d by mesh dimension.
SolveResult solve(const CoefficientField& a, const RightHandSide& f,
                  const SolverOptions& options = {});

/// Face coefficients of the discrete operator. 1D: one per cell. 2D: x-edges then y-edges,
/// in the GradientField layout.
std::vector<double> face_coefficients(const CoefficientField& a, FaceAveraging averaging);

/// sum_e a_e grad u . grad v h^d over all edges.
double bilinear_form(const CoefficientField& a, const ScalarField& u, const ScalarField& v,
                     FaceAveraging averaging = FaceAveraging::harmonic);

/// Discrete load <f, v>: sum_k b_k v_k with b_k = h^d f_k + point-mass hat contributions.
std::vector<double> load_vector(const RightHandSide& f);
double load_functional(const RightHandSide& f, const ScalarField& v);

/// Antiderivative F(x) = int_0^x f in 1D; a mass located exactly at x counts half.
double antiderivative(const RightHandSide& f, double x);

/// Torsion eigenfunction series on (0,1)^d: odd multi-indices with every n_i <= n_max.
double series_cube(const Point& point, int n_max, int dim);

/// True iff min u >= -eps_rel * max u. Requires f >= 0.
bool maximum_principle_check(const ScalarField& u, const RightHandSide& f, double eps_rel = 1e-12);

}  // namespace diffinv
