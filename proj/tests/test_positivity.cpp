#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "diffinv/errors.hpp"
#include "diffinv/positivity.hpp"

using namespace diffinv;

namespace {

WeightField torsion_weight(int dim, int n) {
  Mesh m(dim, n);
  const auto a = CoefficientField::constant(m, 1.0, 0.5, 2.0);
  const auto f = RightHandSide::constant(m, 1.0);
  return compute_weight(a, solve(a, f).u, f);
}

WeightField synthetic(const Mesh& m, double c, double beta) {
  WeightField w{m, std::vector<double>(m.num_cells())};
  for (std::size_t k = 0; k < w.values.size(); ++k) {
    w.values[k] = c * std::pow(boundary_distance(m, k), beta);
  }
  return w;
}

// Least-squares slope of the per-bin minimum, written directly from the binning rule.
double reference_slope(const std::vector<double>& dist, const std::vector<double>& w, double h,
                       int n_bins) {
  const double dmax = *std::max_element(dist.begin(), dist.end());
  const double l0 = std::log(h), l1 = std::log(dmax);
  std::vector<double> best(n_bins, INFINITY), at(n_bins, 0.0);
  std::vector<int> count(n_bins, 0);
  for (std::size_t k = 0; k < dist.size(); ++k) {
    if (dist[k] < h) continue;
    int b = static_cast<int>((std::log(dist[k]) - l0) / (l1 - l0) * n_bins);
    b = std::min(b, n_bins - 1);
    ++count[b];
    if (w[k] < best[b]) {
      best[b] = w[k];
      at[b] = dist[k];
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
  for (int b = 0; b < n_bins; ++b) {
    if (count[b] < 5) continue;
    const double x = std::log(at[b]), y = std::log(best[b]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    cnt += 1;
  }
  return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

}  // namespace

TEST_CASE("1D torsion weight follows the closed form") {
  // w = (1/2 - x)^2 + x(1 - x)/2 = 1/4 - x/2 + x^2/2.
  const auto w = torsion_weight(1, 512);
  const double h = w.mesh.width();
  for (std::size_t k = 0; k < w.values.size(); ++k) {
    const double x = w.mesh.cell_center(k)[0];
    CHECK(std::abs(w.values[k] - (0.25 - x / 2 + x * x / 2)) <= h * h);
  }
  CHECK(*std::min_element(w.values.begin(), w.values.end()) >= 0.125 - h * h);
}

TEST_CASE("zero data gives zero weight and a degenerate fit") {
  Mesh m(2, 16);
  const auto a = CoefficientField::constant(m, 1.0, 0.5, 2.0);
  const auto f = RightHandSide::constant(m, 0.0);
  const auto w = compute_weight(a, ScalarField::zeros(m), f);
  for (double v : w.values) CHECK(v == 0.0);
  CHECK_THROWS_AS(fit_pc_beta(w, 8), DegenerateFit);
}

TEST_CASE("compute_weight preconditions") {
  Mesh m(1, 16), m2(1, 32);
  const auto a = CoefficientField::constant(m, 1.0, 0.5, 2.0);
  CHECK_THROWS_AS(compute_weight(a, ScalarField::zeros(m2), RightHandSide::constant(m, 1.0)),
                  ArgumentError);
  CHECK_THROWS_AS(
      compute_weight(a, ScalarField::zeros(m), RightHandSide::point_masses(m, {{0.5, 1.0}})),
      ArgumentError);
  // u = -x(1-x) with f = 1 makes f u strongly negative.
  std::vector<double> v(m.num_interior_nodes());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double x = m.node_position(k)[0];
    v[k] = -50 * x * (1 - x);
  }
  CHECK_THROWS_AS(compute_weight(a, ScalarField(m, v), RightHandSide::constant(m, 1.0)),
                  InvariantViolation);
}

TEST_CASE("2D corner weight decays slightly slower than dist^2") {
  // Near a right-angle corner u ~ r^2 ln(1/r) / pi, so w ~ r^2 ln^2(1/r) and doubling N
  // shrinks the corner cell by 4 (ln(1/r) / ln(2/r))^2 < 4, approaching 4 slowly.
  double prev = 0.0, prev_factor = 0.0;
  for (int n : {64, 128, 256}) {
    const double corner = torsion_weight(2, n).values[0];
    if (prev > 0.0) {
      const double factor = prev / corner;
      CHECK(factor > 2.5);
      CHECK(factor < 4.0);
      CHECK(factor > prev_factor);
      prev_factor = factor;
    }
    prev = corner;
  }
}

TEST_CASE("fit recovers a synthetic power law") {
  for (int dim : {1, 2}) {
    Mesh m(dim, dim == 1 ? 1024 : 128);
    const auto fit = fit_pc_beta(synthetic(m, 1.0, 2.0), 12);
    CHECK(fit.beta_hat == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(fit.c_hat == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("fit is equivariant under scaling of w") {
  const auto w = torsion_weight(2, 64);
  const auto base = fit_pc_beta(w, 10);
  for (double s : {0.01, 3.0, 250.0}) {
    WeightField ws = w;
    for (auto& v : ws.values) v *= s;
    const auto fit = fit_pc_beta(ws, 10);
    CHECK(fit.beta_hat == doctest::Approx(base.beta_hat).epsilon(1e-10));
    CHECK(fit.c_hat == doctest::Approx(s * base.c_hat).epsilon(1e-10));
  }
}

TEST_CASE("1D torsion fit matches the closed-form envelope slope") {
  const auto w = torsion_weight(1, 1024);
  const auto& m = w.mesh;
  std::vector<double> dist(m.num_cells()), exact(m.num_cells());
  for (std::size_t k = 0; k < dist.size(); ++k) {
    const double x = m.cell_center(k)[0];
    dist[k] = boundary_distance(m, k);
    exact[k] = 0.25 - x / 2 + x * x / 2;
  }
  const auto fit = fit_pc_beta(w, 16);
  CHECK(fit.beta_hat == doctest::Approx(reference_slope(dist, exact, m.width(), 16)).epsilon(1e-3));
  // w is bounded below by 1/8: the PC(0) condition holds, the slope is mildly negative.
  CHECK(fit.beta_hat < 0.0);
  CHECK(fit.beta_clipped() == 0.0);
  CHECK(check_pc(w, 0.12, 0.0).holds);
}

TEST_CASE("2D torsion fit") {
  const auto w = torsion_weight(2, 128);
  std::vector<double> dist(w.mesh.num_cells());
  for (std::size_t k = 0; k < dist.size(); ++k) dist[k] = boundary_distance(w.mesh, k);
  const auto fit = fit_pc_beta(w, 16);
  CHECK(fit.beta_hat == doctest::Approx(reference_slope(dist, w.values, w.mesh.width(), 16)));
  CHECK(fit.beta_hat > 1.0);
  CHECK(fit.beta_hat < 2.0);
  CHECK(fit.n_bins == 16);
  CHECK(fit.envelope.size() >= 8);
  CHECK(fit.envelope.size() <= 16);
}

TEST_CASE("check_pc examples") {
  Mesh m(2, 32);
  const auto w = synthetic(m, 2.0, 2.0);
  CHECK(check_pc(w, 1.0, 2.0).holds);
  const auto bad = check_pc(w, 3.0, 2.0);
  CHECK_FALSE(bad.holds);
  CHECK(bad.worst_ratio == doctest::Approx(2.0));
}

TEST_CASE("PC(2) holds for strictly positive f with a constant bounded below") {
  double prev = 0.0;
  for (int n : {32, 64, 128}) {
    Mesh m(2, n);
    std::vector<double> av(m.num_cells());
    for (std::size_t k = 0; k < av.size(); ++k) {
      const auto c = m.cell_center(k);
      av[k] = 1.25 + 0.5 * std::sin(3 * c[0]) * std::cos(2 * c[1]);
    }
    const CoefficientField a(m, av, 0.5, 2.0);
    const auto f = RightHandSide::from_function(m, [](Point p) { return 1.0 + p[0] * p[1]; });
    const auto w = compute_weight(a, solve(a, f).u, f);
    const double c = check_pc(w, 1.0, 2.0).worst_ratio;
    CHECK(c > 0.0);
    CHECK(check_pc(w, c * (1 - 1e-12), 2.0).holds);
    if (prev > 0.0) CHECK(c >= 0.9 * prev);
    prev = c;
  }
}

TEST_CASE("weight is quadratic under joint (u, f) scaling") {
  Mesh m(2, 32);
  const auto a = CoefficientField::constant(m, 1.0, 0.5, 2.0);
  const auto f = RightHandSide::constant(m, 1.0);
  const auto u = solve(a, f).u;
  const auto w = compute_weight(a, u, f);
  for (double s : {2.0, 10.0}) {
    std::vector<double> su(u.values().begin(), u.values().end());
    for (auto& v : su) v *= s;
    const auto ws = compute_weight(a, ScalarField(m, su), f.scaled(s));
    for (std::size_t k = 0; k < w.values.size(); ++k) {
      CHECK(ws.values[k] == doctest::Approx(s * s * w.values[k]).epsilon(1e-12));
    }
  }
}
