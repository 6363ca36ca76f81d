#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "diffinv/field.hpp"

namespace diffinv::io {

/// Shortest round-trip decimal representation; identical bytes for identical doubles.
std::string format_double(double v);

/// Field CSV: `index,value` (1D) or `i,j,value` (2D), row-major, i slowest.
/// Cell fields use cell indices 0..N-1; node fields use lattice indices 1..N-1.
void write_cell_field(std::ostream& os, const Mesh& mesh, std::span<const double> values);
void write_node_field(std::ostream& os, const ScalarField& u);

/// Readers reject a header or index set that does not match the declared mesh.
std::vector<double> read_cell_field(std::istream& is, const Mesh& mesh);
ScalarField read_node_field(std::istream& is, const Mesh& mesh);

std::vector<double> read_cell_field_file(const std::filesystem::path& path, const Mesh& mesh);
ScalarField read_node_field_file(const std::filesystem::path& path, const Mesh& mesh);

/// Writes `contents` to `path`, throwing ConfigError when the file cannot be opened.
void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace diffinv::io
