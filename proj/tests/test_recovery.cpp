#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "diffinv/errors.hpp"
#include "diffinv/recovery.hpp"

using namespace diffinv;

namespace {

CoefficientField checkerboard(const Mesh& m, int n, double lo = 1.0, double hi = 2.0) {
  Partition p(m, n);
  std::vector<double> v(m.num_cells());
  for (std::size_t c = 0; c < v.size(); ++c) {
    const auto q = p.subcube_coords(p.subcube_of(c));
    v[c] = (q[0] + (m.dim() == 2 ? q[1] : 0)) % 2 == 0 ? lo : hi;
  }
  return CoefficientField(m, v, 0.5, 2.5);
}

CoefficientField random_pwc(const Mesh& m, int n, std::uint64_t seed) {
  Partition p(m, n);
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> d(0.5, 2.0);
  std::vector<double> vq(p.num_subcubes());
  for (auto& x : vq) x = d(g);
  std::vector<double> v(m.num_cells());
  for (std::size_t c = 0; c < v.size(); ++c) v[c] = vq[p.subcube_of(c)];
  return CoefficientField(m, v, 0.5, 2.0);
}

double max_rel_error(const PwcRecovery& rec, const CoefficientField& a) {
  double e = 0.0;
  for (std::size_t q = 0; q < rec.values.size(); ++q) {
    const double ref = a[rec.partition.cells_in(q).front()];
    e = std::max(e, std::abs(rec.values[q] - ref) / ref);
  }
  return e;
}

ScalarField torsion_1d(const Mesh& m) {
  std::vector<double> v(m.num_interior_nodes());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double x = m.node_position(k)[0];
    v[k] = x * (1 - x) / 2;
  }
  return ScalarField(m, v);
}

const PwcOptions kOpt{0.5, 2.5, 1e-8, 10.0};

}  // namespace

TEST_CASE("subcube bump: support inside Q, unit integral, gradient scaling") {
  for (int dim : {1, 2}) {
    Mesh m(dim, 64);
    double prev = 0.0;
    for (int n : {2, 4, 8}) {
      Partition p(m, n);
      for (std::size_t q = 0; q < p.num_subcubes(); ++q) {
        const auto phi = subcube_bump(p, q);
        double mass = 0.0;
        for (std::size_t k = 0; k < phi.values().size(); ++k) {
          if (phi[k] == 0.0) continue;
          CHECK(phi[k] > 0.0);
          const auto x = m.node_position(k);
          const auto o = p.subcube_origin(q);
          for (int ax = 0; ax < dim; ++ax) {
            CHECK(x[ax] > o[ax] + m.width() * 0.5);
            CHECK(x[ax] < o[ax] + p.subcube_side() - m.width() * 0.5);
          }
          mass += phi[k];
        }
        CHECK(mass * m.cell_volume() == doctest::Approx(1.0).epsilon(1e-12));
      }
      const double g = norm_h10(subcube_bump(p, 0));
      if (prev > 0.0) {
        // ||grad phi_Q|| ~ n^{(d+2)/2}.
        const double ratio = g / prev;
        CHECK(ratio == doctest::Approx(std::pow(2.0, 0.5 * (dim + 2))).epsilon(0.2));
      }
      prev = g;
    }
    CHECK_THROWS_AS(subcube_bump(Partition(m, 32), 0), ArgumentError);
  }
}

TEST_CASE("1D constant coefficient from the exact torsion") {
  Mesh m(1, 256);
  const auto u = torsion_1d(m);
  const auto f = RightHandSide::constant(m, 1.0);
  for (int n : {2, 4, 8}) {
    const auto rec = recover_pwc(u, f, Partition(m, n), kOpt);
    for (std::size_t q = 0; q < rec.values.size(); ++q) {
      CHECK(rec.flags[q] == PwcFlag::ok);
      CHECK(std::abs(rec.values[q] - 1.0) <= 1e-3);
    }
  }
}

TEST_CASE("2D checkerboard round trip") {
  Mesh m(2, 256);
  const auto a = checkerboard(m, 4);
  const auto f = RightHandSide::constant(m, 1.0);
  const auto u = solve(a, f).u;
  const auto rec = recover_pwc(u, f, Partition(m, 4), kOpt);
  CHECK(max_rel_error(rec, a) <= 0.05);
  for (auto fl : rec.flags) CHECK(fl == PwcFlag::ok);
}

TEST_CASE("round trip error stays at solver level under refinement") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    for (int n : {64, 128}) {
      Mesh m(2, n);
      const auto a = random_pwc(m, 4, seed);
      const auto f = RightHandSide::constant(m, 1.0);
      const auto rec = recover_pwc(solve(a, f).u, f, Partition(m, 4), kOpt);
      CHECK(max_rel_error(rec, a) <= 1e-8);
    }
  }
  Mesh m(1, 256);
  const auto a = random_pwc(m, 8, 4);
  const auto f = RightHandSide::from_function(m, [](Point p) { return 1 + p[0]; });
  CHECK(max_rel_error(recover_pwc(solve(a, f).u, f, Partition(m, 8), kOpt), a) <= 1e-10);
}

TEST_CASE("worst-case noise inflation when n doubles") {
  Mesh m(2, 128);
  const auto f = RightHandSide::constant(m, 1.0);
  const double eps = 1e-5;
  double err[2];
  int k = 0;
  for (int n : {2, 4}) {
    const auto a = checkerboard(m, n);
    const auto u = solve(a, f).u;
    const Partition p(m, n);
    const auto base = recover_pwc(u, f, p, kOpt);
    double worst = 0.0;
    for (std::size_t q = 0; q < p.num_subcubes(); ++q) {
      const auto phi = subcube_bump(p, q);
      const double s = eps / norm_h10(phi);
      std::vector<double> up(u.values().begin(), u.values().end());
      for (std::size_t i = 0; i < up.size(); ++i) up[i] += s * phi[i];
      const auto rec = recover_pwc(ScalarField(m, up), f, p, kOpt);
      worst = std::max(worst, std::abs(rec.values[q] - base.values[q]));
    }
    err[k++] = worst;
  }
  CHECK(err[1] / err[0] <= std::pow(2.0, 2.0) * 1.5);
  CHECK(err[1] / err[0] >= 2.0);
}

TEST_CASE("invariance under constant shift and joint scaling") {
  Mesh m(2, 64);
  const auto a = checkerboard(m, 4);
  const auto f = RightHandSide::constant(m, 1.0);
  const auto u = solve(a, f).u;
  const Partition p(m, 4);
  const auto base = recover_pwc(u, f, p, kOpt);
  std::vector<double> shifted(u.values().begin(), u.values().end());
  for (auto& v : shifted) v += 0.3;
  const auto rs = recover_pwc(ScalarField(m, shifted), f, p, kOpt);
  for (double s : {0.5, 7.0}) {
    std::vector<double> su(u.values().begin(), u.values().end());
    for (auto& v : su) v *= s;
    const auto rsc = recover_pwc(ScalarField(m, su), f.scaled(s), p, kOpt);
    for (std::size_t q = 0; q < base.values.size(); ++q) {
      CHECK(rsc.values[q] == doctest::Approx(base.values[q]).epsilon(1e-12));
    }
  }
  for (std::size_t q = 0; q < base.values.size(); ++q) {
    CHECK(rs.values[q] == doctest::Approx(base.values[q]).epsilon(1e-12));
  }
}

TEST_CASE("flags and failures") {
  Mesh m(2, 32);
  const auto f = RightHandSide::constant(m, 1.0);
  const Partition p(m, 4);
  CHECK_THROWS_AS(recover_pwc(ScalarField::zeros(m), f, p, kOpt), RecoveryFailure);
  CHECK_THROWS_AS(recover_pwc(ScalarField::zeros(m), RightHandSide::constant(m, 0.0), p, kOpt),
                  ArgumentError);

  const auto a = checkerboard(m, 4);
  auto u = solve(a, f).u;
  // Flatten u over the closure of subcube 0 so its quotient has a vanishing denominator.
  for (std::size_t k = 0; k < u.values().size(); ++k) {
    const auto x = m.node_position(k);
    if (x[0] <= 0.25 + 1e-12 && x[1] <= 0.25 + 1e-12) u.mutable_values()[k] = 0.0;
  }
  const auto rec = recover_pwc(u, f, p, kOpt);
  CHECK(rec.flags[0] == PwcFlag::unstable_denominator);
  CHECK(std::isnan(rec.values[0]));
  CHECK(rec.flags[5] == PwcFlag::ok);

  // Scaling u down by 1e4 with f fixed inflates every quotient far beyond Lambda * 10.
  auto small = solve(a, f).u;
  for (auto& v : small.mutable_values()) v *= 1e-4;
  CHECK_THROWS_AS(recover_pwc(small, f, p, kOpt), RecoveryFailure);
  auto moderate = solve(a, f).u;
  for (auto& v : moderate.mutable_values()) v *= 0.06;
  const auto r2 = recover_pwc(moderate, f, p, kOpt);
  int out_of_range = 0;
  for (auto fl : r2.flags) out_of_range += fl == PwcFlag::out_of_range;
  CHECK(out_of_range > 0);
  CHECK(out_of_range < 16);
  CHECK(to_string(PwcFlag::unstable_denominator) == "unstable-denominator");
}

TEST_CASE("1D pivot recovery from the exact torsion") {
  Mesh m(1, 512);
  const auto rec = recover_1d(torsion_1d(m), RightHandSide::constant(m, 1.0), {0.5, 2.0, 0.0});
  CHECK(rec.gamma_hat == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rec.w_excl == doctest::Approx(4 * m.width()));
  CHECK(rec.window_hi - rec.window_lo == doctest::Approx(2 * rec.w_excl));
  for (std::size_t k = 0; k < rec.values.size(); ++k) {
    if (!rec.filled[k]) CHECK(std::abs(rec.values[k] - 1.0) <= 1e-3);
  }
}

TEST_CASE("1D round trip for a = 1 + x") {
  Mesh m(1, 2048);
  const auto a = CoefficientField::from_function(m, [](Point p) { return 1 + p[0]; }, 1.0, 2.0);
  const auto f = RightHandSide::constant(m, 1.0);
  const auto rec = recover_1d(solve(a, f).u, f, {1.0, 2.0, 0.02});
  std::vector<double> d(m.num_cells());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = rec.values[k] - a[k];
  CHECK(norm_l2(m, d) / norm_l2(a) <= 0.01);
  CHECK(rec.gamma_hat == doctest::Approx((1 - std::log(2.0)) / std::log(2.0)).epsilon(1e-4));
  for (double v : rec.values) {
    CHECK(v >= 1.0);
    CHECK(v <= 2.0);
  }
}

TEST_CASE("1D recovery of the hat is consistent but not identifying") {
  Mesh m(1, 1024);
  const auto f = RightHandSide::point_masses(m, {{0.5, 2.0}});
  const auto aq = CoefficientField::from_function(
      m, [](Point p) { return p[0] < 0.5 ? 0.5 : 1.5; }, 0.4, 2.0);
  const auto u = solve_1d(aq, f).u;
  const auto rec = recover_1d(u, f, {0.4, 2.0, 0.0});
  const CoefficientField ar(m, rec.values, 0.4, 2.0);
  const auto u2 = solve_1d(ar, f).u;
  double gap = 0.0;
  for (std::size_t k = 0; k < u.values().size(); ++k) gap = std::max(gap, std::abs(u[k] - u2[k]));
  CHECK(gap <= 1e-10);
  CHECK(rec.gamma_hat == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("1D recovery errors") {
  Mesh m(1, 64);
  const auto f = RightHandSide::constant(m, 1.0);
  std::vector<double> neg(m.num_interior_nodes());
  for (std::size_t k = 0; k < neg.size(); ++k) {
    const double x = m.node_position(k)[0];
    neg[k] = -x * (1 - x);
  }
  CHECK_THROWS_AS(recover_1d(ScalarField(m, neg), f, {0.5, 2.0, 0.0}), MalformedInput);
  CHECK_THROWS_AS(recover_1d(ScalarField::zeros(m), f, {0.5, 2.0, 0.0}), MalformedInput);

  std::vector<double> twice(m.num_interior_nodes());
  for (std::size_t k = 0; k < twice.size(); ++k) {
    const double x = m.node_position(k)[0];
    twice[k] = 1.0 + std::sin(3.14159265358979 * x) + 0.5 * std::sin(3 * 3.14159265358979 * x);
  }
  try {
    recover_1d(ScalarField(m, twice), f, {0.5, 2.0, 0.0});
    FAIL("expected AmbiguousPivot");
  } catch (const AmbiguousPivot& e) {
    CHECK(e.crossings().size() == 3);
    CHECK(std::string(e.what()).find(',') != std::string::npos);
  }
}
