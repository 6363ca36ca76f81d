#include "diffinv/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "diffinv/errors.hpp"
#include "diffinv/mollify.hpp"
#include "diffinv/positivity.hpp"

namespace diffinv {

FamilyTag parse_family(const std::string& tag) {
  if (tag == "smooth-fourier") return FamilyTag::smooth_fourier;
  if (tag == "pwc-random") return FamilyTag::pwc_random;
  if (tag == "step-1d-lowerbound") return FamilyTag::step_1d_lowerbound;
  throw ArgumentError("unknown family tag '" + tag + "'");
}

std::string to_string(FamilyTag tag) {
  switch (tag) {
    case FamilyTag::smooth_fourier: return "smooth-fourier";
    case FamilyTag::pwc_random: return "pwc-random";
    case FamilyTag::step_1d_lowerbound: return "step-1d-lowerbound";
  }
  return "unknown";
}

std::string to_string(FitStatus status) {
  return status == FitStatus::ok ? "ok" : "insufficient-range";
}

double step_pivot(double t) { return (1.0 - 0.5 * t * t) / (2.0 - t); }

FamilyConfig lowerbound_family_defaults() {
  FamilyConfig c;
  c.tag = FamilyTag::step_1d_lowerbound;
  c.lambda = 0.4;
  c.Lambda = 1.1;
  return c;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform doubles in [0, 1) from the top 53 bits; identical on every platform.
class Rng {
 public:
  Rng(std::uint64_t base, std::uint64_t seed, std::uint64_t stream)
      : gen_(splitmix64(splitmix64(base) ^ splitmix64(seed * 0x100000001B3ULL + stream))) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double symmetric() { return 2.0 * uniform() - 1.0; }

 private:
  std::mt19937_64 gen_;
};

double ladder_value(double lo, double hi, int ladder, std::uint64_t seed) {
  if (ladder < 2) return hi;
  const int k = static_cast<int>(seed % static_cast<std::uint64_t>(ladder));
  return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (ladder - 1));
}

CoefficientField convex_combination(const CoefficientField& a, const CoefficientField& c,
                                    double tau) {
  std::vector<double> v(a.values().size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] = std::clamp((1.0 - tau) * a[k] + tau * c[k], std::min(a[k], c[k]), std::max(a[k], c[k]));
  }
  return {a.mesh(), std::move(v), a.lower(), a.upper()};
}

CoefficientField pwc_field(const FamilyConfig& family, const Mesh& mesh, std::uint64_t seed,
                           std::uint64_t stream) {
  const Partition partition(mesh, family.partition_n);
  Rng rng(family.base_seed, seed, stream);
  std::vector<double> q(partition.num_subcubes());
  for (double& v : q) v = family.lambda + (family.Lambda - family.lambda) * rng.uniform();
  std::vector<double> cells(mesh.num_cells());
  for (std::size_t c = 0; c < cells.size(); ++c) cells[c] = q[partition.subcube_of(c)];
  return {mesh, std::move(cells), family.lambda, family.Lambda};
}

CoefficientField fourier_draw(const FamilyConfig& family, const Mesh& mesh, std::uint64_t seed,
                              std::uint64_t stream) {
  Rng rng(family.base_seed, seed, stream);
  const int K = std::max(1, family.modes);
  const double mid = 0.5 * (family.lambda + family.Lambda);
  const double half = 0.5 * (family.Lambda - family.lambda);
  if (mesh.dim() == 1) {
    std::vector<double> xi(K);
    double weight_sum = 0.0;
    for (int k = 1; k <= K; ++k) {
      xi[k - 1] = rng.symmetric();
      weight_sum += 1.0 / (double(k) * k);
    }
    // |sum xi_k k^-2 sin| <= sum k^-2, so the range stays inside [lambda, Lambda].
    const double amp = 0.9 * half / weight_sum;
    return CoefficientField::from_function(
        mesh,
        [&](Point p) {
          double s = 0.0;
          for (int k = 1; k <= K; ++k) s += xi[k - 1] / (double(k) * k) * std::sin(k * kPi * p[0]);
          return mid + amp * s;
        },
        family.lambda, family.Lambda);
  }
  std::vector<double> xi(static_cast<std::size_t>(K) * K);
  double weight_sum = 0.0;
  for (int k = 1; k <= K; ++k) {
    for (int l = 1; l <= K; ++l) {
      xi[(k - 1) * K + (l - 1)] = rng.symmetric();
      weight_sum += 1.0 / (double(k) * k + double(l) * l);
    }
  }
  const double amp = 0.9 * half / weight_sum;
  std::vector<double> sx(K), sy(K);
  return CoefficientField::from_function(
      mesh,
      [&](Point p) {
        for (int k = 1; k <= K; ++k) {
          sx[k - 1] = std::sin(k * kPi * p[0]);
          sy[k - 1] = std::sin(k * kPi * p[1]);
        }
        double s = 0.0;
        for (int k = 1; k <= K; ++k) {
          for (int l = 1; l <= K; ++l) {
            s += xi[(k - 1) * K + (l - 1)] / (double(k) * k + double(l) * l) * sx[k - 1] * sy[l - 1];
          }
        }
        return mid + amp * s;
      },
      family.lambda, family.Lambda);
}

CoefficientField step_field(const Mesh& mesh, int jump_node, double lambda, double Lambda) {
  std::vector<double> v(mesh.num_cells());
  for (int i = 0; i < mesh.cells_per_side(); ++i) v[i] = i < jump_node ? 1.0 : 0.5;
  return {mesh, std::move(v), lambda, Lambda};
}

}  // namespace

CoefficientField fourier_field(const FamilyConfig& family, const Mesh& mesh, std::uint64_t stream) {
  return fourier_draw(family, mesh, 0, stream);
}

CoefficientPair coefficient_pair(const FamilyConfig& family, const Mesh& mesh, std::uint64_t seed) {
  switch (family.tag) {
    case FamilyTag::smooth_fourier: {
      const double tau = ladder_value(family.tau_min, family.tau_max, family.ladder, seed);
      CoefficientField a = fourier_draw(family, mesh, seed, 0);
      CoefficientField c = fourier_draw(family, mesh, seed, 1);
      CoefficientField b = convex_combination(a, c, tau);
      return {std::move(a), std::move(b), seed, tau};
    }
    case FamilyTag::pwc_random: {
      const double tau = ladder_value(family.tau_min, family.tau_max, family.ladder, seed);
      CoefficientField a = pwc_field(family, mesh, seed, 0);
      CoefficientField c = pwc_field(family, mesh, seed, 1);
      CoefficientField b = convex_combination(a, c, tau);
      return {std::move(a), std::move(b), seed, tau};
    }
    case FamilyTag::step_1d_lowerbound: {
      if (mesh.dim() != 1) throw ArgumentError("step-1d-lowerbound family is 1D only");
      if (!(family.lambda <= 0.5 && family.Lambda >= 1.0)) {
        throw ArgumentError("step-1d-lowerbound needs lambda <= 1/2 and Lambda >= 1");
      }
      const int n = mesh.cells_per_side();
      const double h = mesh.width();
      const int alpha_node = static_cast<int>(std::lround(kAlpha0 / h));
      const double offset = ladder_value(family.offset_min, family.offset_max, family.ladder, seed);
      // Rounded up so that no offset is resolved by fewer cells than requested.
      const int k = std::max(1, static_cast<int>(std::ceil(offset / h - 1e-9)));
      const int beta_node = alpha_node + k;
      if (beta_node >= n) throw ArgumentError("step-1d-lowerbound: offset leaves the domain");
      return {step_field(mesh, alpha_node, family.lambda, family.Lambda),
              step_field(mesh, beta_node, family.lambda, family.Lambda), seed, k * h};
    }
  }
  throw ArgumentError("unknown family");
}

ExponentFit fit_exponent(const std::vector<PairSample>& samples, bool upper_envelope) {
  ExponentFit fit;
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : samples) {
    if (s.excluded || !(s.delta_l2 > 0.0) || !(s.e_h10 > 0.0)) {
      ++fit.n_excluded;
      continue;
    }
    pts.emplace_back(std::log(s.e_h10), std::log(s.delta_l2));
  }
  fit.n_used = static_cast<int>(pts.size());
  if (pts.size() < 8) return fit;
  // Order-independent reductions: sort so that the summation order is fixed.
  std::sort(pts.begin(), pts.end());
  const double span = (pts.back().first - pts.front().first) / std::log(10.0);
  if (span < 2.0) return fit;

  const double count = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  fit.alpha_hat = sxy / sxx;
  double intercept = my - fit.alpha_hat * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : pts) {
    const double r = y - (intercept + fit.alpha_hat * x);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  if (upper_envelope) {
    double shift = -std::numeric_limits<double>::infinity();
    for (const auto& [x, y] : pts) shift = std::max(shift, y - (intercept + fit.alpha_hat * x));
    intercept += shift;
  }
  fit.c_hat = std::exp(intercept);
  fit.status = FitStatus::ok;
  return fit;
}

ForwardSolver default_forward_solver(const SolverOptions& options) {
  return [options](const CoefficientField& a, const RightHandSide& f) {
    return solve(a, f, options).u;
  };
}

ScanResult stability_scan(const FamilyConfig& family, const Mesh& mesh,
                          const std::vector<std::uint64_t>& seeds, const ScanOptions& options) {
  return stability_scan(family, mesh, seeds, options, default_forward_solver(options.solver));
}

ScanResult stability_scan(const FamilyConfig& family, const Mesh& mesh,
                          const std::vector<std::uint64_t>& seeds, const ScanOptions& options,
                          const ForwardSolver& solver) {
  if (options.floor < 10.0 * options.solver.tol) {
    throw ArgumentError("stability_scan: floor must be at least 10x the solver tolerance");
  }
  const RightHandSide f = RightHandSide::constant(mesh, 1.0);
  ScanResult result;
  result.samples.resize(seeds.size());

  auto run_one = [&](std::size_t k) {
    const CoefficientPair pair = coefficient_pair(family, mesh, seeds[k]);
    const ScalarField ua = solver(pair.a, f);
    const ScalarField ub = solver(pair.b, f);
    std::vector<double> dv(pair.a.values().size());
    for (std::size_t c = 0; c < dv.size(); ++c) dv[c] = pair.a[c] - pair.b[c];
    std::vector<double> ev(ua.values().size());
    for (std::size_t c = 0; c < ev.size(); ++c) ev[c] = ua[c] - ub[c];
    PairSample s;
    s.seed = seeds[k];
    s.delta_l2 = norm_l2(mesh, dv);
    s.e_h10 = norm_h10(ScalarField(mesh, std::move(ev)));
    s.excluded = s.e_h10 < options.floor;
    s.amplitude = pair.amplitude;
    s.family = to_string(family.tag);
    s.mesh_n = mesh.cells_per_side();
    result.samples[k] = s;
  };

  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(seeds.size())));
  if (threads == 1) {
    for (std::size_t k = 0; k < seeds.size(); ++k) run_one(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < seeds.size(); k = next++) {
          try {
            run_one(k);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  result.fit = fit_exponent(result.samples, options.upper_envelope);
  return result;
}

double holder_constant(const std::vector<PairSample>& samples, double exponent) {
  double c = 0.0;
  for (const auto& s : samples) {
    if (s.excluded || !(s.e_h10 > 0.0)) continue;
    c = std::max(c, s.delta_l2 / std::pow(s.e_h10, exponent));
  }
  return c;
}

int count_violations(const std::vector<PairSample>& samples, double exponent, double c) {
  int v = 0;
  for (const auto& s : samples) {
    if (s.excluded || !(s.e_h10 > 0.0)) continue;
    if (s.delta_l2 > c * std::pow(s.e_h10, exponent)) ++v;
  }
  return v;
}

StepPairNorms step_pair_norms(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0)) {
    throw ArgumentError("step_pair_norms: alpha and beta must lie in (0, 1)");
  }
  StepPairNorms out;
  out.gamma_a = step_pivot(alpha);
  out.gamma_b = step_pivot(beta);
  out.delta_A_l2 = std::sqrt(std::abs(alpha - beta));
  // E' = u_a' - u_b' = -A (x - gamma_a) + B (x - gamma_b) is linear between the breakpoints.
  const double b1 = std::min(alpha, beta);
  const double b2 = std::max(alpha, beta);
  const double pieces[4] = {0.0, b1, b2, 1.0};
  double sum = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double x0 = pieces[k];
    const double x1 = pieces[k + 1];
    if (x1 <= x0) continue;
    const double mid = 0.5 * (x0 + x1);
    const double A = mid <= alpha ? 1.0 : 2.0;
    const double B = mid <= beta ? 1.0 : 2.0;
    const double p = B - A;
    const double q = A * out.gamma_a - B * out.gamma_b;
    sum += p * p * (x1 * x1 * x1 - x0 * x0 * x0) / 3.0 + p * q * (x1 * x1 - x0 * x0) +
           q * q * (x1 - x0);
  }
  out.e_prime_l2 = std::sqrt(std::max(sum, 0.0));
  return out;
}

LowerBoundNorms lower_bound_closed_form(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ArgumentError("lower_bound_closed_form: beta outside (0, 1)");
  LowerBoundNorms out;
  const double offset = std::abs(beta - kAlpha0);
  out.delta_A_l2 = std::sqrt(offset);
  out.eta = (kAlpha0 - beta) * (kAlpha0 - beta) / (2.0 * (2.0 - beta));
  out.e_prime_l2_upper = std::sqrt(2.0 / 3.0 * offset * offset * offset + 8.0 * out.eta * out.eta);
  out.e_prime_l2_exact = offset == 0.0 ? 0.0 : step_pair_norms(kAlpha0, beta).e_prime_l2;
  return out;
}

MonitorResult weighted_estimate_monitor(const CoefficientField& a, const CoefficientField& b,
                                        const RightHandSide& f, const ForwardSolver& solver) {
  const Mesh& mesh = a.mesh();
  if (!(mesh == b.mesh()) || !(mesh == f.mesh())) {
    throw ArgumentError("weighted_estimate_monitor: mesh mismatch");
  }
  const ScalarField ua = solver(a, f);
  const ScalarField ub = solver(b, f);
  WeightField w = compute_weight(a, ua, f);
  for (double& v : w.values) v = std::max(v, 0.0);
  std::vector<double> q(mesh.num_cells());
  for (std::size_t c = 0; c < q.size(); ++c) {
    const double r = (a[c] - b[c]) / a[c];
    q[c] = r * r;
  }
  MonitorResult out;
  out.lhs = weighted_l2_sq(mesh, q, w.values);
  std::vector<double> e(ua.values().size());
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = ua[k] - ub[k];
  out.e_h10 = norm_h10(ScalarField(mesh, std::move(e)));
  const double grad = std::max(cell_gradient_norm(a), cell_gradient_norm(b));
  out.rhs_norm = out.e_h10 * f.linf() * (1.0 + grad);
  out.ratio = out.rhs_norm > 0.0 ? out.lhs / out.rhs_norm : 0.0;
  return out;
}

NonIdentifiability nonidentifiability_demo(double q, int cells) {
  if (!(q > 0.0 && q < 2.0)) throw ArgumentError("nonidentifiability_demo: q must lie in (0, 2)");
  const Mesh mesh(1, cells);
  const RightHandSide f = RightHandSide::point_masses(mesh, {{0.5, 2.0}});
  auto coefficient = [&](double qq) {
    const double lo = std::min(qq, 2.0 - qq);
    const double hi = std::max(qq, 2.0 - qq);
    return CoefficientField::from_function(
        mesh, [&](Point p) { return p[0] <= 0.5 ? qq : 2.0 - qq; }, 0.5 * lo, 2.0 * hi);
  };
  const ScalarField uq = solve_1d(coefficient(q), f).u;
  const ScalarField u1 = solve_1d(coefficient(1.0), f).u;
  NonIdentifiability out;
  for (std::size_t k = 0; k < uq.values().size(); ++k) {
    const double x = mesh.node_position(k)[0];
    const double hat = x <= 0.5 ? x : 1.0 - x;
    out.gap_to_reference = std::max(out.gap_to_reference, std::abs(uq[k] - u1[k]));
    out.gap_to_hat = std::max(out.gap_to_hat, std::abs(uq[k] - hat));
  }
  return out;
}

}  // namespace diffinv
