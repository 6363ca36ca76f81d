#include "diffinv/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "diffinv/errors.hpp"
#include "diffinv/mollify.hpp"

namespace diffinv {

std::string to_string(PwcFlag flag) {
  switch (flag) {
    case PwcFlag::ok: return "ok";
    case PwcFlag::unstable_denominator: return "unstable-denominator";
    case PwcFlag::out_of_range: return "out-of-range";
  }
  return "unknown";
}

namespace {

// Bump of subcube q sampled on its (b+1)^d lattice patch, local index li * (b+1) + lj.
struct BumpPatch {
  int i0 = 0;
  int j0 = 0;
  int b = 0;
  std::vector<double> values;

  double at(int li, int lj) const {
    return values[static_cast<std::size_t>(li) * (b + 1) + lj];
  }
};

BumpPatch make_patch(const Partition& partition, std::size_t q) {
  const Mesh& mesh = partition.mesh();
  const int b = partition.cells_per_subcube_side();
  if (b < 4) {
    throw ArgumentError("recover_pwc: need at least 4 mesh cells per subcube side, got " +
                        std::to_string(b));
  }
  const double h = mesh.width();
  const auto [qi, qj] = partition.subcube_coords(q);
  BumpPatch p;
  p.b = b;
  p.i0 = qi * b;
  p.j0 = mesh.dim() == 2 ? qj * b : 0;
  const double radius = 0.5 * partition.subcube_side() - h;
  const double cx = (p.i0 + 0.5 * b) * h;
  const double cy = (p.j0 + 0.5 * b) * h;
  const int side_j = mesh.dim() == 2 ? b + 1 : 1;
  p.values.assign(static_cast<std::size_t>(b + 1) * (b + 1), 0.0);
  double mass = 0.0;
  for (int li = 0; li <= b; ++li) {
    for (int lj = 0; lj < side_j; ++lj) {
      double v = bump_profile(((p.i0 + li) * h - cx) / radius);
      if (mesh.dim() == 2) v *= bump_profile(((p.j0 + lj) * h - cy) / radius);
      p.values[static_cast<std::size_t>(li) * (b + 1) + lj] = v;
      mass += v;
    }
  }
  const double scale = 1.0 / (mass * mesh.cell_volume());
  for (double& v : p.values) v *= scale;
  return p;
}

}  // namespace

ScalarField subcube_bump(const Partition& partition, std::size_t q) {
  const Mesh& mesh = partition.mesh();
  const BumpPatch p = make_patch(partition, q);
  ScalarField phi = ScalarField::zeros(mesh);
  auto& v = phi.mutable_values();
  const int n = mesh.cells_per_side();
  for (int li = 0; li <= p.b; ++li) {
    const int i = p.i0 + li;
    if (i <= 0 || i >= n) continue;
    if (mesh.dim() == 1) {
      v[mesh.node_index(i)] = p.at(li, 0);
      continue;
    }
    for (int lj = 0; lj <= p.b; ++lj) {
      const int j = p.j0 + lj;
      if (j <= 0 || j >= n) continue;
      v[mesh.node_index(i, j)] = p.at(li, lj);
    }
  }
  return phi;
}

PwcRecovery recover_pwc(const ScalarField& u, const RightHandSide& f, const Partition& partition,
                        const PwcOptions& options) {
  const Mesh& mesh = partition.mesh();
  if (!(u.mesh() == mesh) || !(f.mesh() == mesh)) {
    throw ArgumentError("recover_pwc: solution, right side and partition meshes differ");
  }
  if (!f.is_strictly_positive()) {
    throw ArgumentError("recover_pwc: requires f >= c_f > 0 without point masses");
  }
  if (!(options.lambda > 0.0 && options.lambda < options.Lambda)) {
    throw ArgumentError("recover_pwc: bounds must satisfy 0 < lambda < Lambda");
  }
  const int d = mesh.dim();
  const double h = mesh.width();
  const double inv_h = 1.0 / h;
  const double vol = mesh.cell_volume();
  const int n = partition.subcubes_per_side();
  const double phi_scale = std::pow(static_cast<double>(n), 0.5 * (d + 2));
  const std::vector<double> f_nodes = f.nodal_values();
  const int N = mesh.cells_per_side();
  auto f_at = [&](int i, int j) {
    if (i <= 0 || i >= N || (d == 2 && (j <= 0 || j >= N))) return 0.0;
    return f_nodes[d == 1 ? mesh.node_index(i) : mesh.node_index(i, j)];
  };

  const std::size_t nq = partition.num_subcubes();
  PwcRecovery out{partition, std::vector<double>(nq), std::vector<PwcFlag>(nq, PwcFlag::ok),
                  std::vector<double>(nq), std::vector<double>(nq)};
  for (std::size_t q = 0; q < nq; ++q) {
    const BumpPatch p = make_patch(partition, q);
    const int b = p.b;
    double num = 0.0;
    double den = 0.0;
    double gu2 = 0.0;
    double gphi2 = 0.0;
    auto edge = [&](double du, double dphi) {
      den += du * dphi;
      gu2 += du * du;
      gphi2 += dphi * dphi;
    };
    if (d == 1) {
      for (int li = 0; li <= b; ++li) num += f_at(p.i0 + li, 0) * p.at(li, 0);
      for (int li = 0; li < b; ++li) {
        const int i = p.i0 + li;
        edge((u.at(i + 1) - u.at(i)) * inv_h, (p.at(li + 1, 0) - p.at(li, 0)) * inv_h);
      }
    } else {
      for (int li = 0; li <= b; ++li) {
        for (int lj = 0; lj <= b; ++lj) num += f_at(p.i0 + li, p.j0 + lj) * p.at(li, lj);
      }
      for (int li = 0; li <= b; ++li) {
        for (int lj = 0; lj <= b; ++lj) {
          const int i = p.i0 + li;
          const int j = p.j0 + lj;
          if (li < b) {
            edge((u.at(i + 1, j) - u.at(i, j)) * inv_h, (p.at(li + 1, lj) - p.at(li, lj)) * inv_h);
          }
          if (lj < b) {
            edge((u.at(i, j + 1) - u.at(i, j)) * inv_h, (p.at(li, lj + 1) - p.at(li, lj)) * inv_h);
          }
        }
      }
    }
    num *= vol;
    den *= vol;
    const double grad_u = std::sqrt(gu2 * vol);
    out.grad_u_norm[q] = grad_u;
    out.grad_phi_norm[q] = std::sqrt(gphi2 * vol);
    if (!(std::abs(den) >= options.eps_den * phi_scale * grad_u) || den == 0.0) {
      out.flags[q] = PwcFlag::unstable_denominator;
      out.values[q] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double aq = num / den;
    out.values[q] = aq;
    if (!(aq >= options.lambda / options.sanity && aq <= options.Lambda * options.sanity)) {
      out.flags[q] = PwcFlag::out_of_range;
    }
  }
  if (std::none_of(out.flags.begin(), out.flags.end(),
                   [](PwcFlag fl) { return fl == PwcFlag::ok; })) {
    throw RecoveryFailure("recover_pwc: every subcube was flagged");
  }
  return out;
}

Recovery1D recover_1d(const ScalarField& u, const RightHandSide& f,
                      const Recovery1DOptions& options) {
  const Mesh& mesh = u.mesh();
  if (mesh.dim() != 1) throw ArgumentError("recover_1d requires a 1D mesh");
  if (!(f.mesh() == mesh)) throw ArgumentError("recover_1d: mesh mismatch");
  if (!(options.lambda > 0.0 && options.lambda < options.Lambda)) {
    throw ArgumentError("recover_1d: bounds must satisfy 0 < lambda < Lambda");
  }
  const int n = mesh.cells_per_side();
  const double h = mesh.width();
  for (double v : u.values()) {
    if (!(v > 0.0)) throw MalformedInput("recover_1d: u must be strictly positive inside");
  }

  std::vector<double> du(n);
  for (int i = 0; i < n; ++i) du[i] = (u.at(i + 1) - u.at(i)) / h;
  auto center = [&](int i) { return (i + 0.5) * h; };

  // Sign changes between consecutive nonzero derivative values; zero runs are bridged.
  std::vector<double> crossings;
  int prev = -1;
  for (int i = 0; i < n; ++i) {
    if (du[i] == 0.0) continue;
    if (prev >= 0 && (du[prev] > 0.0) != (du[i] > 0.0)) {
      const double x = i == prev + 1
                           ? center(prev) + h * du[prev] / (du[prev] - du[i])
                           : 0.5 * (center(prev + 1) + center(i - 1));
      crossings.push_back(x);
    }
    prev = i;
  }
  if (crossings.empty()) throw MalformedInput("recover_1d: derivative of u never changes sign");
  if (crossings.size() > 1) {
    throw AmbiguousPivot("recover_1d: derivative of u changes sign at " +
                             format_crossings(crossings),
                         crossings);
  }

  Recovery1D rec{mesh, 0.0, 0.0, 0.0, 0.0, {}, {}};
  rec.gamma_hat = crossings.front();
  rec.w_excl = options.w_excl > 0.0 ? options.w_excl : 4.0 * h;
  rec.window_lo = rec.gamma_hat - rec.w_excl;
  rec.window_hi = rec.gamma_hat + rec.w_excl;
  rec.values.assign(n, 0.0);
  rec.filled.assign(n, false);

  // F at cell centres by one sweep; a mass exactly at a centre counts half.
  std::vector<double> F_center(n);
  {
    const auto sm = f.smooth();
    const auto& masses = f.masses();
    double F = 0.0;
    std::size_t k = 0;
    for (int i = 0; i < n; ++i) {
      const double c = center(i);
      double Fc = F + 0.5 * h * sm[i];
      while (k < masses.size() && masses[k].location < (i + 1) * h) {
        if (masses[k].location < c) {
          Fc += masses[k].weight;
        } else if (masses[k].location == c) {
          Fc += 0.5 * masses[k].weight;
        }
        F += masses[k].weight;
        ++k;
      }
      F_center[i] = Fc;
      F += h * sm[i];
    }
  }
  const double F_gamma = antiderivative(f, rec.gamma_hat);

  int first_left = -1;   // last valid cell left of the window
  int first_right = -1;  // first valid cell right of the window
  for (int i = 0; i < n; ++i) {
    const double x = center(i);
    if (std::abs(x - rec.gamma_hat) < rec.w_excl) {
      rec.filled[i] = true;
      continue;
    }
    rec.values[i] = (F_gamma - F_center[i]) / du[i];
    if (x < rec.gamma_hat) first_left = i;
    if (x > rec.gamma_hat && first_right < 0) first_right = i;
  }
  if (first_left < 0 && first_right < 0) {
    throw RecoveryFailure("recover_1d: exclusion window covers the whole domain");
  }
  for (int i = 0; i < n; ++i) {
    if (!rec.filled[i]) continue;
    if (first_left < 0) {
      rec.values[i] = rec.values[first_right];
    } else if (first_right < 0) {
      rec.values[i] = rec.values[first_left];
    } else {
      const double xl = center(first_left);
      const double xr = center(first_right);
      const double t = (center(i) - xl) / (xr - xl);
      rec.values[i] = (1.0 - t) * rec.values[first_left] + t * rec.values[first_right];
    }
  }
  for (double& v : rec.values) {
    if (std::isnan(v)) v = options.lambda;
    v = std::clamp(v, options.lambda, options.Lambda);
  }
  return rec;
}

}  // namespace diffinv
