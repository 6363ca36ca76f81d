#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace diffinv {

using Point = std::array<double, 2>;

/// Uniform grid of the unit interval (dim 1) or unit square (dim 2) with N cells per side.
///
/// Cells are indexed x-major in 2D: cell (i, j) has linear index i * N + j with i along x.
/// Nodes live on the lattice {0, h, ..., 1}^d; only the (N-1)^d interior nodes carry
/// unknowns, indexed the same way with lattice indices 1..N-1 shifted to 0..N-2.
class Mesh {
 public:
  Mesh(int dim, int cells_per_side);

  int dim() const { return dim_; }
  int cells_per_side() const { return n_; }
  double width() const { return h_; }
  /// h^d, the measure of one cell.
  double cell_volume() const { return dim_ == 1 ? h_ : h_ * h_; }

  std::size_t num_cells() const;
  std::size_t num_interior_nodes() const;

  /// Cell index from per-axis indices (j ignored in 1D).
  std::size_t cell_index(int i, int j = 0) const;
  std::array<int, 2> cell_coords(std::size_t cell) const;
  Point cell_center(std::size_t cell) const;

  /// Interior node index from lattice indices 1..N-1 (j ignored in 1D).
  std::size_t node_index(int i, int j = 1) const;
  std::array<int, 2> node_coords(std::size_t node) const;
  Point node_position(std::size_t node) const;

  friend bool operator==(const Mesh& a, const Mesh& b) {
    return a.dim_ == b.dim_ && a.n_ == b.n_;
  }

 private:
  int dim_;
  int n_;
  double h_;
};

/// dist(x, dD) at the center of `cell`; throws ArgumentError for an invalid index.
double boundary_distance(const Mesh& mesh, std::size_t cell);

/// Cells split by boundary distance: far = {dist >= rho}, near = {dist < rho}.
struct RegionSplit {
  std::vector<std::size_t> far;
  std::vector<std::size_t> near;
};

RegionSplit region_split(const Mesh& mesh, double rho);

/// Partition of the unit cube into n^d congruent subcubes, each a block of mesh cells.
class Partition {
 public:
  Partition(const Mesh& mesh, int n);

  const Mesh& mesh() const { return mesh_; }
  int subcubes_per_side() const { return n_; }
  std::size_t num_subcubes() const { return members_.size(); }
  int cells_per_subcube_side() const { return mesh_.cells_per_side() / n_; }

  std::size_t subcube_of(std::size_t cell) const { return cell_of_[cell]; }
  const std::vector<std::size_t>& cells_in(std::size_t q) const { return members_[q]; }

  /// Per-axis subcube indices of q (same x-major convention as cells).
  std::array<int, 2> subcube_coords(std::size_t q) const;
  /// Lower-left corner and side length 1/n of subcube q.
  Point subcube_origin(std::size_t q) const;
  double subcube_side() const { return 1.0 / n_; }

 private:
  Mesh mesh_;
  int n_;
  std::vector<std::size_t> cell_of_;
  std::vector<std::vector<std::size_t>> members_;
};

}  // namespace diffinv
