#include <doctest.h>

#include <random>

#include "leosat/feasible_sets.hpp"
#include "oracles.hpp"

using namespace leosat;

TEST_CASE("disc projection") {
  CHECK(project_hull_cps(Complex(0.5, 0.0)) == Complex(0.5, 0.0));
  const Complex p = project_hull_cps(Complex(3.0, 4.0));
  CHECK(std::abs(p - Complex(0.6, 0.8)) < 1e-15);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    CHECK(std::abs(project_hull_cps(Complex(g(rng), g(rng)))) <= 1.0 + 1e-15);
  }
}

TEST_CASE("polygon projection examples") {
  const int levels = 4;
  SUBCASE("edge midpoint") {
    const Complex p = project_hull_dps(Complex(1.0, 0.0), levels);
    CHECK(std::abs(p - Complex(std::sqrt(0.5), 0.0)) < 1e-5);
  }
  SUBCASE("vertex is a fixed point") {
    const Complex v = constellation_point(0, levels);
    CHECK(std::abs(project_hull_dps(v, levels) - v) < 1e-15);
  }
  SUBCASE("interior point is a fixed point") {
    const Complex v = 0.3 * constellation_point(0, levels);
    CHECK(std::abs(project_hull_dps(v, levels) - v) < 1e-15);
  }
}

TEST_CASE("polygon projection matches the exact segment oracle") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> radius(0.0, 3.0);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  for (int levels : {2, 4, 8, 16}) {
    for (int i = 0; i < 1000; ++i) {
      const Complex v = std::polar(radius(rng), angle(rng));
      const Complex mine = project_hull_dps(v, levels);
      const Complex ref = oracle::polygon_projection_exact(v, levels);
      CHECK(std::abs(mine - ref) < 1e-9);
    }
  }
}

TEST_CASE("hull projections are nonexpansive") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.5);
  for (int i = 0; i < 10000; ++i) {
    const Complex x(g(rng), g(rng)), y(g(rng), g(rng));
    CHECK(std::abs(project_hull_cps(x) - project_hull_cps(y)) <= std::abs(x - y) + 1e-14);
    CHECK(std::abs(project_hull_dps(x, 8) - project_hull_dps(y, 8)) <= std::abs(x - y) + 1e-14);
  }
}

TEST_CASE("matrix hull projection") {
  std::mt19937_64 rng(12);
  SUBCASE("feasible points are unchanged and projection is idempotent") {
    PhaseShifterSpec spec{Architecture::FullyConnected, 3};
    const CMat raw = oracle::random_complex_matrix(rng, 6, 3);
    const CMat once = project_hull_matrix(raw, spec);
    const CMat twice = project_hull_matrix(once, spec);
    CHECK((once - twice).cwiseAbs().maxCoeff() < 1e-12);
    const AnalogPrecoder feas = round_to_feasible(raw, spec);
    CHECK((project_hull_matrix(feas.v, spec) - feas.v).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("partially connected support masks off-block entries") {
    PhaseShifterSpec spec{Architecture::PartiallyConnected, 0};
    const CMat raw = oracle::random_complex_matrix(rng, 6, 2);
    const CMat proj = project_hull_matrix(raw, spec);
    for (int c = 0; c < 2; ++c) {
      for (int r = 0; r < 6; ++r) {
        if (r / 3 != c) CHECK(proj(r, c) == Complex(0.0, 0.0));
      }
    }
  }
}

TEST_CASE("rounding to the feasible set") {
  SUBCASE("equidistant tie breaks toward the smaller index") {
    PhaseShifterSpec spec{Architecture::FullyConnected, 2};  // L = 4
    const Complex rounded = round_scalar_to_feasible(Complex(1.0, 0.0), spec);
    CHECK(std::abs(rounded - constellation_point(0, 4)) < 1e-15);  // e^{j pi/4}, not e^{-j pi/4}
  }
  SUBCASE("constellation points are fixed") {
    PhaseShifterSpec spec{Architecture::FullyConnected, 4};
    for (int m = 0; m < 16; ++m) {
      const Complex p = constellation_point(m, 16);
      CHECK(round_scalar_to_feasible(p, spec) == p);
    }
  }
  SUBCASE("zero maps to phase zero under continuous rounding") {
    PhaseShifterSpec spec{Architecture::FullyConnected, 0};
    CHECK(round_scalar_to_feasible(Complex(0.0, 0.0), spec) == Complex(1.0, 0.0));
  }
  SUBCASE("matches brute force and satisfies feasibility invariants") {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> g(0.0, 1.0);
    PhaseShifterSpec spec{Architecture::FullyConnected, 3};
    for (int i = 0; i < 2000; ++i) {
      const Complex v(g(rng), g(rng));
      CHECK(round_scalar_to_feasible(v, spec) == oracle::nearest_point_bruteforce(v, 8));
    }
    const CMat raw = oracle::random_complex_matrix(rng, 8, 4);
    CHECK(analog_is_feasible(round_to_feasible(raw, spec)));
    PhaseShifterSpec pc{Architecture::PartiallyConnected, 2};
    CHECK(analog_is_feasible(round_to_feasible(oracle::random_complex_matrix(rng, 8, 4), pc)));
  }
}

TEST_CASE("partially connected analog matrices have orthogonal columns") {
  std::mt19937_64 rng(15);
  PhaseShifterSpec spec{Architecture::PartiallyConnected, 0};
  const AnalogPrecoder a = round_to_feasible(oracle::random_complex_matrix(rng, 12, 3), spec);
  const CMat gram = a.v.adjoint() * a.v;
  CHECK((gram - 4.0 * CMat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("nearest point projection analog update") {
  std::mt19937_64 rng(8);
  SUBCASE("already feasible least squares solution is returned unchanged") {
    PhaseShifterSpec spec{Architecture::FullyConnected, 0};
    const AnalogPrecoder v0 = round_to_feasible(oracle::random_complex_matrix(rng, 6, 3), spec);
    const CMat w = oracle::random_complex_matrix(rng, 3, 3);
    const CMat b = v0.v * w;  // LS recovers v0 exactly
    const AnalogPrecoder out = npp_analog_update(b, w, spec);
    CHECK((out.v - v0.v).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("scalar case reduces to rounding") {
    PhaseShifterSpec spec{Architecture::FullyConnected, 2};
    const CMat b = CMat::Constant(4, 1, Complex(0.3, -1.1));
    const CMat w = CMat::Ones(1, 1);
    const AnalogPrecoder out = npp_analog_update(b, w, spec);
    const AnalogPrecoder ref = round_to_feasible(b, spec);
    CHECK((out.v - ref.v).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("partially connected output respects the support") {
    PhaseShifterSpec spec{Architecture::PartiallyConnected, 2};
    const CMat b = oracle::random_complex_matrix(rng, 8, 2);
    const CMat w = oracle::random_complex_matrix(rng, 2, 2);
    const AnalogPrecoder out = npp_analog_update(b, w, spec);
    CHECK(analog_is_feasible(out));
  }
}
