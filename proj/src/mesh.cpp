#include "diffinv/mesh.hpp"

#include <algorithm>
#include <string>

#include "diffinv/errors.hpp"

namespace diffinv {

Mesh::Mesh(int dim, int cells_per_side) : dim_(dim), n_(cells_per_side) {
  if (dim != 1 && dim != 2) {
    throw ArgumentError("mesh dimension must be 1 or 2, got " + std::to_string(dim));
  }
  if (cells_per_side < 2) {
    throw ArgumentError("mesh needs at least 2 cells per side, got " +
                        std::to_string(cells_per_side));
  }
  h_ = 1.0 / static_cast<double>(n_);
}

std::size_t Mesh::num_cells() const {
  const auto n = static_cast<std::size_t>(n_);
  return dim_ == 1 ? n : n * n;
}

std::size_t Mesh::num_interior_nodes() const {
  const auto m = static_cast<std::size_t>(n_ - 1);
  return dim_ == 1 ? m : m * m;
}

std::size_t Mesh::cell_index(int i, int j) const {
  if (dim_ == 1) return static_cast<std::size_t>(i);
  return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
}

std::array<int, 2> Mesh::cell_coords(std::size_t cell) const {
  if (dim_ == 1) return {static_cast<int>(cell), 0};
  return {static_cast<int>(cell / n_), static_cast<int>(cell % n_)};
}

Point Mesh::cell_center(std::size_t cell) const {
  const auto [i, j] = cell_coords(cell);
  const double x = (i + 0.5) * h_;
  const double y = dim_ == 1 ? 0.0 : (j + 0.5) * h_;
  return {x, y};
}

std::size_t Mesh::node_index(int i, int j) const {
  const auto m = static_cast<std::size_t>(n_ - 1);
  if (dim_ == 1) return static_cast<std::size_t>(i - 1);
  return static_cast<std::size_t>(i - 1) * m + static_cast<std::size_t>(j - 1);
}

std::array<int, 2> Mesh::node_coords(std::size_t node) const {
  const auto m = static_cast<std::size_t>(n_ - 1);
  if (dim_ == 1) return {static_cast<int>(node) + 1, 0};
  return {static_cast<int>(node / m) + 1, static_cast<int>(node % m) + 1};
}

Point Mesh::node_position(std::size_t node) const {
  const auto [i, j] = node_coords(node);
  return {i * h_, dim_ == 1 ? 0.0 : j * h_};
}

double boundary_distance(const Mesh& mesh, std::size_t cell) {
  if (cell >= mesh.num_cells()) {
    throw ArgumentError("cell index " + std::to_string(cell) + " out of range [0, " +
                        std::to_string(mesh.num_cells()) + ")");
  }
  const Point c = mesh.cell_center(cell);
  double d = std::min(c[0], 1.0 - c[0]);
  if (mesh.dim() == 2) d = std::min({d, c[1], 1.0 - c[1]});
  return d;
}

RegionSplit region_split(const Mesh& mesh, double rho) {
  if (rho < 0.0) throw ArgumentError("region_split: rho must be nonnegative");
  RegionSplit split;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    (boundary_distance(mesh, c) >= rho ? split.far : split.near).push_back(c);
  }
  return split;
}

Partition::Partition(const Mesh& mesh, int n) : mesh_(mesh), n_(n) {
  if (n < 1) throw ArgumentError("partition needs at least one subcube per side");
  if (mesh.cells_per_side() % n != 0) {
    throw ArgumentError("partition size " + std::to_string(n) + " does not divide N = " +
                        std::to_string(mesh.cells_per_side()));
  }
  const int block = mesh.cells_per_side() / n;
  const std::size_t nq = mesh.dim() == 1 ? static_cast<std::size_t>(n)
                                         : static_cast<std::size_t>(n) * n;
  members_.resize(nq);
  cell_of_.resize(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto [i, j] = mesh.cell_coords(c);
    const std::size_t q = mesh.dim() == 1
                              ? static_cast<std::size_t>(i / block)
                              : static_cast<std::size_t>(i / block) * n + (j / block);
    cell_of_[c] = q;
    members_[q].push_back(c);
  }
}

std::array<int, 2> Partition::subcube_coords(std::size_t q) const {
  if (mesh_.dim() == 1) return {static_cast<int>(q), 0};
  return {static_cast<int>(q / n_), static_cast<int>(q % n_)};
}

Point Partition::subcube_origin(std::size_t q) const {
  const auto [qi, qj] = subcube_coords(q);
  return {qi * subcube_side(), mesh_.dim() == 1 ? 0.0 : qj * subcube_side()};
}

}  // namespace diffinv
