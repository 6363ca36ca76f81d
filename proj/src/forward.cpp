#include "diffinv/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "diffinv/errors.hpp"

namespace diffinv {

RightHandSide::RightHandSide(Mesh mesh, std::vector<double> smooth,
                             std::vector<PointMass> point_masses)
    : mesh_(mesh), smooth_(std::move(smooth)), masses_(std::move(point_masses)) {
  if (smooth_.size() != mesh_.num_cells()) {
    throw ArgumentError("right-hand side has " + std::to_string(smooth_.size()) +
                        " cell values, mesh has " + std::to_string(mesh_.num_cells()));
  }
  if (!masses_.empty() && mesh_.dim() != 1) {
    throw ArgumentError("point masses are only supported in 1D");
  }
  for (const auto& m : masses_) {
    if (!(m.location > 0.0 && m.location < 1.0)) {
      throw ArgumentError("point mass location must lie in (0, 1)");
    }
  }
  std::sort(masses_.begin(), masses_.end(),
            [](const PointMass& l, const PointMass& r) { return l.location < r.location; });
}

RightHandSide RightHandSide::constant(const Mesh& mesh, double value) {
  return {mesh, std::vector<double>(mesh.num_cells(), value)};
}

RightHandSide RightHandSide::from_function(const Mesh& mesh,
                                           const std::function<double(Point)>& fn) {
  std::vector<double> v(mesh.num_cells());
  for (std::size_t c = 0; c < v.size(); ++c) v[c] = fn(mesh.cell_center(c));
  return {mesh, std::move(v)};
}

RightHandSide RightHandSide::point_masses(const Mesh& mesh, std::vector<PointMass> masses) {
  return {mesh, std::vector<double>(mesh.num_cells(), 0.0), std::move(masses)};
}

double RightHandSide::lower_bound() const {
  return *std::min_element(smooth_.begin(), smooth_.end());
}

double RightHandSide::linf() const { return norm_linf(smooth_); }

bool RightHandSide::is_nonnegative() const {
  if (lower_bound() < 0.0) return false;
  return std::all_of(masses_.begin(), masses_.end(),
                     [](const PointMass& m) { return m.weight >= 0.0; });
}

std::vector<double> RightHandSide::nodal_values() const {
  const int n = mesh_.cells_per_side();
  std::vector<double> out(mesh_.num_interior_nodes());
  if (mesh_.dim() == 1) {
    for (int i = 1; i < n; ++i) out[mesh_.node_index(i)] = 0.5 * (smooth_[i - 1] + smooth_[i]);
    return out;
  }
  for (int i = 1; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      out[mesh_.node_index(i, j)] =
          0.25 * (smooth_[mesh_.cell_index(i - 1, j - 1)] + smooth_[mesh_.cell_index(i - 1, j)] +
                  smooth_[mesh_.cell_index(i, j - 1)] + smooth_[mesh_.cell_index(i, j)]);
    }
  }
  return out;
}

RightHandSide RightHandSide::scaled(double s) const {
  std::vector<double> v(smooth_);
  for (double& x : v) x *= s;
  std::vector<PointMass> m(masses_);
  for (auto& pm : m) pm.weight *= s;
  return {mesh_, std::move(v), std::move(m)};
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::exact1d: return "exact1d";
    case SolverKind::fd2d: return "fd2d";
    case SolverKind::series: return "series";
  }
  return "unknown";
}

namespace {

void require_same_mesh(const Mesh& a, const Mesh& b, const char* what) {
  if (!(a == b)) throw ArgumentError(std::string(what) + ": fields live on different meshes");
}

double face_mean(double l, double r, FaceAveraging averaging) {
  if (averaging == FaceAveraging::arithmetic) return 0.5 * (l + r);
  return 2.0 * l * r / (l + r);
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// Symmetric 5-point operator on interior nodes of the unit square, stored by the weights to
// the four neighbours. Node k = (i-1) * m + (j-1); the j-neighbours are k -+ 1, the
// i-neighbours k -+ m.
struct Stencil2D {
  int m = 0;                // interior nodes per side
  std::vector<double> diag;
  std::vector<double> west;   // weight to (i-1, j)
  std::vector<double> east;   // weight to (i+1, j)
  std::vector<double> south;  // weight to (i, j-1)
  std::vector<double> north;  // weight to (i, j+1)

  void apply(std::span<const double> x, std::span<double> y) const {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * m + j;
        double v = diag[k] * x[k];
        if (i > 0) v -= west[k] * x[k - m];
        if (i + 1 < m) v -= east[k] * x[k + m];
        if (j > 0) v -= south[k] * x[k - 1];
        if (j + 1 < m) v -= north[k] * x[k + 1];
        y[k] = v;
      }
    }
  }
};

Stencil2D build_stencil(const CoefficientField& a, FaceAveraging averaging) {
  const Mesh& mesh = a.mesh();
  const int n = mesh.cells_per_side();
  const int m = n - 1;
  // Weight of the x-edge (i,j)-(i+1,j): cells (i, j-1) and (i, j) share it.
  auto wx = [&](int i, int j) {
    return face_mean(a[mesh.cell_index(i, j - 1)], a[mesh.cell_index(i, j)], averaging);
  };
  // Weight of the y-edge (i,j)-(i,j+1): cells (i-1, j) and (i, j).
  auto wy = [&](int i, int j) {
    return face_mean(a[mesh.cell_index(i - 1, j)], a[mesh.cell_index(i, j)], averaging);
  };
  Stencil2D s;
  s.m = m;
  const std::size_t count = static_cast<std::size_t>(m) * m;
  s.diag.assign(count, 0.0);
  s.west.assign(count, 0.0);
  s.east.assign(count, 0.0);
  s.south.assign(count, 0.0);
  s.north.assign(count, 0.0);
  for (int i = 1; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      const std::size_t k = mesh.node_index(i, j);
      s.west[k] = wx(i - 1, j);
      s.east[k] = wx(i, j);
      s.south[k] = wy(i, j - 1);
      s.north[k] = wy(i, j);
      s.diag[k] = s.west[k] + s.east[k] + s.south[k] + s.north[k];
    }
  }
  return s;
}

// Incomplete Cholesky with zero fill, M = (D + L) D^{-1} (D + L^T).
class IncompleteCholesky {
 public:
  explicit IncompleteCholesky(const Stencil2D& s) : s_(s), d_(s.diag.size()) {
    const int m = s.m;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * m + j;
        double d = s.diag[k];
        if (j > 0) d -= s.south[k] * s.south[k] / d_[k - 1];
        if (i > 0) d -= s.west[k] * s.west[k] / d_[k - m];
        d_[k] = d;
      }
    }
  }

  void apply(std::span<const double> r, std::span<double> z) const {
    const int m = s_.m;
    const std::size_t count = d_.size();
    for (std::size_t k = 0; k < count; ++k) {
      const int i = static_cast<int>(k / m);
      const int j = static_cast<int>(k % m);
      double v = r[k];
      if (j > 0) v += s_.south[k] * z[k - 1];
      if (i > 0) v += s_.west[k] * z[k - m];
      z[k] = v / d_[k];
    }
    for (std::size_t kk = count; kk-- > 0;) {
      const int i = static_cast<int>(kk / m);
      const int j = static_cast<int>(kk % m);
      double v = 0.0;
      if (j + 1 < m) v += s_.north[kk] * z[kk + 1];
      if (i + 1 < m) v += s_.east[kk] * z[kk + m];
      z[kk] += v / d_[kk];
    }
  }

 private:
  const Stencil2D& s_;
  std::vector<double> d_;
};

}  // namespace

double antiderivative(const RightHandSide& f, double x) {
  const Mesh& mesh = f.mesh();
  if (mesh.dim() != 1) throw ArgumentError("antiderivative: 1D only");
  const double h = mesh.width();
  const int n = mesh.cells_per_side();
  x = std::clamp(x, 0.0, 1.0);
  double F = 0.0;
  const auto sm = f.smooth();
  for (int i = 0; i < n; ++i) {
    const double lo = i * h;
    if (lo >= x) break;
    const double hi = std::min((i + 1) * h, x);
    F += sm[i] * (hi - lo);
  }
  for (const auto& pm : f.masses()) {
    if (pm.location < x) {
      F += pm.weight;
    } else if (pm.location == x) {
      F += 0.5 * pm.weight;
    }
  }
  return F;
}

Solve1DResult solve_1d(const CoefficientField& a, const RightHandSide& f) {
  const Mesh& mesh = a.mesh();
  if (mesh.dim() != 1) throw ArgumentError("solve_1d requires a 1D mesh");
  require_same_mesh(mesh, f.mesh(), "solve_1d");
  const int n = mesh.cells_per_side();
  const double h = mesh.width();
  const auto sm = f.smooth();
  const auto& masses = f.masses();

  // cell_int[i] = integral of F over cell i, exact for cellwise-constant f plus masses.
  std::vector<double> cell_int(n);
  double F = 0.0;
  std::size_t next = 0;
  for (int i = 0; i < n; ++i) {
    const double lo = i * h;
    const double hi = (i + 1) * h;
    while (next < masses.size() && masses[next].location <= lo) F += masses[next++].weight;
    double integral = h * F + 0.5 * sm[i] * h * h;
    double jump = 0.0;
    while (next < masses.size() && masses[next].location < hi) {
      integral += masses[next].weight * (hi - masses[next].location);
      jump += masses[next++].weight;
    }
    cell_int[i] = integral;
    F += sm[i] * h + jump;
  }

  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < n; ++i) {
    const double A = 1.0 / a[i];
    num += A * cell_int[i];
    den += A * h;
  }
  const double c = num / den;

  std::vector<double> nodes(n + 1, 0.0);
  for (int i = 0; i < n; ++i) nodes[i + 1] = nodes[i] + (h * c - cell_int[i]) / a[i];

  // Pivot: F(gamma) = c. F is nondecreasing for nonnegative data; a jump of F across c
  // puts the pivot on the mass itself.
  double gamma = std::numeric_limits<double>::quiet_NaN();
  if (f.is_nonnegative() && antiderivative(f, 0.0) <= c && c <= antiderivative(f, 1.0)) {
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (antiderivative(f, mid) < c ? lo : hi) = mid;
    }
    gamma = 0.5 * (lo + hi);
  }

  // Residual of the discrete (P1 Galerkin) equations K u = b.
  std::vector<double> load(n - 1);
  for (int k = 1; k < n; ++k) load[k - 1] = (cell_int[k] - cell_int[k - 1]) / h;
  double rnorm = 0.0;
  double bnorm = 0.0;
  for (int k = 1; k < n; ++k) {
    const double flux_r = a[k] * (nodes[k + 1] - nodes[k]) / h;
    const double flux_l = a[k - 1] * (nodes[k] - nodes[k - 1]) / h;
    const double r = load[k - 1] + flux_r - flux_l;
    rnorm += r * r;
    bnorm += load[k - 1] * load[k - 1];
  }
  SolveReport report;
  report.iterations = 0;
  report.final_relative_residual = bnorm > 0.0 ? std::sqrt(rnorm / bnorm) : 0.0;
  report.solver = SolverKind::exact1d;

  std::vector<double> interior(nodes.begin() + 1, nodes.end() - 1);
  return {ScalarField(mesh, std::move(interior)), gamma, c, report};
}

SolveResult solve_fd_2d(const CoefficientField& a, const RightHandSide& f,
                        const SolverOptions& options) {
  const Mesh& mesh = a.mesh();
  if (mesh.dim() != 2) throw ArgumentError("solve_fd_2d requires a 2D mesh");
  require_same_mesh(mesh, f.mesh(), "solve_fd_2d");
  if (f.has_point_masses()) throw ArgumentError("solve_fd_2d: point masses unsupported");
  if (!(options.tol > 0.0)) throw ArgumentError("solve_fd_2d: tolerance must be positive");

  const Stencil2D stencil = build_stencil(a, options.averaging);
  const std::vector<double> b = load_vector(f);
  const std::size_t count = b.size();
  std::vector<double> x(count, 0.0);
  SolveReport report;
  report.solver = SolverKind::fd2d;

  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) return {ScalarField(mesh, std::move(x)), report};

  std::vector<double> r(b);
  std::vector<double> z(count);
  std::vector<double> p(count);
  std::vector<double> q(count);

  std::vector<double> inv_diag;
  std::optional<IncompleteCholesky> ic;
  if (options.preconditioner == Preconditioner::ic0) {
    ic.emplace(stencil);
  } else {
    inv_diag.resize(count);
    for (std::size_t k = 0; k < count; ++k) inv_diag[k] = 1.0 / stencil.diag[k];
  }
  auto precondition = [&](std::span<const double> in, std::span<double> out) {
    if (ic) {
      ic->apply(in, out);
    } else {
      for (std::size_t k = 0; k < count; ++k) out[k] = inv_diag[k] * in[k];
    }
  };

  precondition(r, z);
  p = z;
  double rz = dot(r, z);
  double rel = 1.0;
  int it = 0;
  while (it < options.max_iter) {
    stencil.apply(p, q);
    const double alpha = rz / dot(p, q);
    for (std::size_t k = 0; k < count; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * q[k];
    }
    ++it;
    rel = std::sqrt(dot(r, r)) / bnorm;
    if (rel <= options.tol) break;
    precondition(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t k = 0; k < count; ++k) p[k] = z[k] + beta * p[k];
  }

  // Report the true residual, not the recursively updated one.
  stencil.apply(x, q);
  double rr = 0.0;
  for (std::size_t k = 0; k < count; ++k) rr += (b[k] - q[k]) * (b[k] - q[k]);
  report.iterations = it;
  report.final_relative_residual = std::sqrt(rr) / bnorm;
  if (rel > options.tol) {
    std::ostringstream os;
    os << "CG did not converge in " << it << " iterations (relative residual " << rel << ")";
    throw SolverError(os.str(), it, rel);
  }
  return {ScalarField(mesh, std::move(x)), report};
}

SolveResult solve(const CoefficientField& a, const RightHandSide& f, const SolverOptions& options) {
  if (a.mesh().dim() == 1) {
    auto r = solve_1d(a, f);
    return {std::move(r.u), r.report};
  }
  return solve_fd_2d(a, f, options);
}

std::vector<double> face_coefficients(const CoefficientField& a, FaceAveraging averaging) {
  const Mesh& mesh = a.mesh();
  if (mesh.dim() == 1) return {a.values().begin(), a.values().end()};
  const int n = mesh.cells_per_side();
  std::vector<double> out;
  out.reserve(2 * static_cast<std::size_t>(n) * (n + 1));
  // x-edges (i,j)-(i+1,j), boundary rows j = 0 and j = N see a single cell.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= n; ++j) {
      if (j == 0) {
        out.push_back(a[mesh.cell_index(i, 0)]);
      } else if (j == n) {
        out.push_back(a[mesh.cell_index(i, n - 1)]);
      } else {
        out.push_back(face_mean(a[mesh.cell_index(i, j - 1)], a[mesh.cell_index(i, j)], averaging));
      }
    }
  }
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == 0) {
        out.push_back(a[mesh.cell_index(0, j)]);
      } else if (i == n) {
        out.push_back(a[mesh.cell_index(n - 1, j)]);
      } else {
        out.push_back(face_mean(a[mesh.cell_index(i - 1, j)], a[mesh.cell_index(i, j)], averaging));
      }
    }
  }
  return out;
}

double bilinear_form(const CoefficientField& a, const ScalarField& u, const ScalarField& v,
                     FaceAveraging averaging) {
  require_same_mesh(a.mesh(), u.mesh(), "bilinear_form");
  require_same_mesh(a.mesh(), v.mesh(), "bilinear_form");
  const GradientField gu = gradient(u);
  const GradientField gv = gradient(v);
  const std::vector<double> w = face_coefficients(a, averaging);
  double sum = 0.0;
  std::size_t e = 0;
  for (std::size_t k = 0; k < gu.dx.size(); ++k, ++e) sum += w[e] * gu.dx[k] * gv.dx[k];
  for (std::size_t k = 0; k < gu.dy.size(); ++k, ++e) sum += w[e] * gu.dy[k] * gv.dy[k];
  return sum * a.mesh().cell_volume();
}

std::vector<double> load_vector(const RightHandSide& f) {
  const Mesh& mesh = f.mesh();
  std::vector<double> b = f.nodal_values();
  const double vol = mesh.cell_volume();
  for (double& v : b) v *= vol;
  if (mesh.dim() == 1) {
    const double h = mesh.width();
    const int n = mesh.cells_per_side();
    for (const auto& pm : f.masses()) {
      // Hat functions on either side of the mass.
      const int left = std::clamp(static_cast<int>(std::floor(pm.location / h)), 0, n - 1);
      const double t = pm.location / h - left;
      if (left >= 1) b[mesh.node_index(left)] += pm.weight * (1.0 - t);
      if (left + 1 <= n - 1) b[mesh.node_index(left + 1)] += pm.weight * t;
    }
  }
  return b;
}

double load_functional(const RightHandSide& f, const ScalarField& v) {
  require_same_mesh(f.mesh(), v.mesh(), "load_functional");
  const std::vector<double> b = load_vector(f);
  return dot(b, v.values());
}

double series_cube(const Point& point, int n_max, int dim) {
  if (dim != 1 && dim != 2) throw ArgumentError("series_cube: dimension must be 1 or 2");
  if (n_max < 1 || n_max % 2 == 0) throw ArgumentError("series_cube: n_max must be odd and >= 1");
  constexpr double pi = std::numbers::pi;
  const int terms = (n_max + 1) / 2;
  std::vector<double> sx(terms), sy(terms);
  for (int t = 0; t < terms; ++t) {
    const int k = 2 * t + 1;
    sx[t] = std::sin(pi * k * point[0]);
    sy[t] = dim == 2 ? std::sin(pi * k * point[1]) : 1.0;
  }
  double sum = 0.0;
  if (dim == 1) {
    const double scale = 4.0 / (pi * pi * pi);
    for (int t = 0; t < terms; ++t) {
      const double k = 2.0 * t + 1.0;
      sum += scale * sx[t] / (k * k * k);
    }
    return sum;
  }
  const double scale = 16.0 / (pi * pi * pi * pi);
  for (int t1 = 0; t1 < terms; ++t1) {
    const double n1 = 2.0 * t1 + 1.0;
    for (int t2 = 0; t2 < terms; ++t2) {
      const double n2 = 2.0 * t2 + 1.0;
      sum += scale * sx[t1] * sy[t2] / ((n1 * n1 + n2 * n2) * n1 * n2);
    }
  }
  return sum;
}

bool maximum_principle_check(const ScalarField& u, const RightHandSide& f, double eps_rel) {
  if (!f.is_nonnegative()) throw ArgumentError("maximum_principle_check requires f >= 0");
  const auto v = u.values();
  if (v.empty()) return true;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double eps = eps_rel * std::max(*hi, 0.0);
  return *lo >= -eps;
}

}  // namespace diffinv
