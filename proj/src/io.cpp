#include "diffinv/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "diffinv/errors.hpp"

namespace diffinv::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string expected_header(const Mesh& mesh) {
  return mesh.dim() == 1 ? "index,value" : "i,j,value";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

long parse_index(const std::string& s, int line_no) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("field csv line " + std::to_string(line_no) + ": bad index '" + s + "'");
  }
  return v;
}

double parse_value(const std::string& s, int line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("field csv line " + std::to_string(line_no) + ": bad value '" + s + "'");
  }
  return v;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

// Reads a field whose per-axis indices run over [lo, hi].
std::vector<double> read_field(std::istream& is, const Mesh& mesh, int lo, int hi) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("field csv is empty");
  line = strip_cr(line);
  if (line != expected_header(mesh)) {
    throw ConfigError("field csv header '" + line + "' does not match a " +
                      std::to_string(mesh.dim()) + "D mesh (expected '" +
                      expected_header(mesh) + "')");
  }
  const long side = hi - lo + 1;
  const std::size_t count =
      mesh.dim() == 1 ? static_cast<std::size_t>(side) : static_cast<std::size_t>(side * side);
  std::vector<double> values(count, 0.0);
  std::vector<bool> seen(count, false);
  const std::size_t columns = mesh.dim() == 1 ? 2 : 3;
  int line_no = 1;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != columns) {
      throw ConfigError("field csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(columns) + " columns");
    }
    const long i = parse_index(cols[0], line_no);
    const long j = mesh.dim() == 2 ? parse_index(cols[1], line_no) : lo;
    if (i < lo || i > hi || j < lo || j > hi) {
      throw ConfigError("field csv line " + std::to_string(line_no) +
                        ": index outside the declared mesh");
    }
    const std::size_t k = mesh.dim() == 1 ? static_cast<std::size_t>(i - lo)
                                          : static_cast<std::size_t>((i - lo) * side + (j - lo));
    if (seen[k]) throw ConfigError("field csv line " + std::to_string(line_no) + ": duplicate index");
    seen[k] = true;
    values[k] = parse_value(cols.back(), line_no);
    ++rows;
  }
  if (rows != count) {
    throw ConfigError("field csv has " + std::to_string(rows) + " rows, mesh expects " +
                      std::to_string(count));
  }
  return values;
}

void write_field(std::ostream& os, const Mesh& mesh, std::span<const double> values, int lo,
                 int hi) {
  os << expected_header(mesh) << '\n';
  const int side = hi - lo + 1;
  if (mesh.dim() == 1) {
    for (int i = lo; i <= hi; ++i) os << i << ',' << format_double(values[i - lo]) << '\n';
    return;
  }
  for (int i = lo; i <= hi; ++i) {
    for (int j = lo; j <= hi; ++j) {
      os << i << ',' << j << ',' << format_double(values[(i - lo) * side + (j - lo)]) << '\n';
    }
  }
}

}  // namespace

void write_cell_field(std::ostream& os, const Mesh& mesh, std::span<const double> values) {
  if (values.size() != mesh.num_cells()) throw ArgumentError("write_cell_field: size mismatch");
  write_field(os, mesh, values, 0, mesh.cells_per_side() - 1);
}

void write_node_field(std::ostream& os, const ScalarField& u) {
  write_field(os, u.mesh(), u.values(), 1, u.mesh().cells_per_side() - 1);
}

std::vector<double> read_cell_field(std::istream& is, const Mesh& mesh) {
  return read_field(is, mesh, 0, mesh.cells_per_side() - 1);
}

ScalarField read_node_field(std::istream& is, const Mesh& mesh) {
  return {mesh, read_field(is, mesh, 1, mesh.cells_per_side() - 1)};
}

std::vector<double> read_cell_field_file(const std::filesystem::path& path, const Mesh& mesh) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field file " + path.string());
  return read_cell_field(in, mesh);
}

ScalarField read_node_field_file(const std::filesystem::path& path, const Mesh& mesh) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field file " + path.string());
  return read_node_field(in, mesh);
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << contents;
  if (!out) throw ConfigError("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace diffinv::io
