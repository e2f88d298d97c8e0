#include <doctest.h>

#include <random>

#include "leosat/hybrid.hpp"
#include "oracles.hpp"

using namespace leosat;

TEST_CASE("extrapolation weight recursion") {
  const auto zetas = apg_extrapolation_weights(4);
  REQUIRE(zetas.size() == 4);
  // alpha_{-1} = 0, alpha_0 = 1: the first extrapolated point equals the
  // start (weight -1 against an identical previous iterate).
  CHECK(zetas[0] == doctest::Approx(-1.0));
  CHECK(zetas[1] == doctest::Approx(0.0));
  CHECK(zetas[2] == doctest::Approx(0.2817).epsilon(1e-3));
  CHECK(std::abs(zetas[2] - 0.2817) < 1e-4);
}

TEST_CASE("least squares digital stage") {
  std::mt19937_64 rng(31);
  SUBCASE("exact factorization is recovered") {
    PhaseShifterSpec spec{Architecture::PartiallyConnected, 0};
    // Block-diagonal analog matrices have orthogonal columns.
    const AnalogPrecoder v = round_to_feasible(oracle::random_complex_matrix(rng, 12, 3), spec);
    const CMat w0 = oracle::random_complex_matrix(rng, 3, 2);
    const CMat w = ls_digital_step(v.v * w0, v.v);
    CHECK((w - w0).norm() < 1e-9 * w0.norm());
  }
  SUBCASE("residual is orthogonal to the analog column space") {
    const CMat b = oracle::random_complex_matrix(rng, 16, 4);
    const CMat v = oracle::random_complex_matrix(rng, 16, 6);
    const CMat w = ls_digital_step(b, v);
    CHECK((v.adjoint() * (b - v * w)).norm() <= 1e-8 * b.norm());
  }
  SUBCASE("no perturbation improves the residual") {
    const CMat b = oracle::random_complex_matrix(rng, 10, 3);
    const CMat v = oracle::random_complex_matrix(rng, 10, 4);
    const CMat w = ls_digital_step(b, v);
    const double base = (b - v * w).norm();
    for (int i = 0; i < 100; ++i) {
      const CMat dw = 1e-3 * oracle::random_complex_matrix(rng, 4, 3);
      CHECK((b - v * (w + dw)).norm() >= base - 1e-12);
    }
  }
}

TEST_CASE("analog stage for the fully connected network") {
  std::mt19937_64 rng(17);
  SUBCASE("zero-residual instance is solved to numerical zero") {
    PhaseShifterSpec spec{Architecture::FullyConnected, 3};
    const AnalogPrecoder b = round_to_feasible(oracle::random_complex_matrix(rng, 8, 4), spec);
    const CMat w = CMat::Identity(4, 4);
    const AnalogPrecoder v = mm_analog_fully(b.v, w, spec, MmSchedule{});
    CHECK(fro2(b.v - v.v * w) <= 1e-10);
  }
  SUBCASE("never loses to the projection baseline on seeded instances") {
    PhaseShifterSpec spec{Architecture::FullyConnected, 2};
    for (int seed = 0; seed < 20; ++seed) {
      std::mt19937_64 inst(100 + seed);
      const CMat b = oracle::random_complex_matrix(inst, 16, 4);
      const CMat w = oracle::random_complex_matrix(inst, 4, 4);
      const AnalogPrecoder mine = mm_analog_fully(b, w, spec, MmSchedule{});
      const AnalogPrecoder base = npp_analog_update(b, w, spec);
      CHECK(fro2(b - mine.v * w) <= fro2(b - base.v * w) + 1e-6);
    }
  }
  SUBCASE("step sizes stay below the Lipschitz cap and iterates stay in the hull") {
    PhaseShifterSpec spec{Architecture::FullyConnected, 2};
    const CMat b = oracle::random_complex_matrix(rng, 12, 4);
    const CMat w = oracle::random_complex_matrix(rng, 4, 4);
    MmSchedule sched;
    MmRunStats stats;
    (void)mm_analog_fully(b, w, spec, sched, std::nullopt, &stats);
    Eigen::SelfAdjointEigenSolver<CMat> eig(CMat(w * w.adjoint()), Eigen::EigenvaluesOnly);
    const double wwh_norm = eig.eigenvalues().maxCoeff();
    CHECK(stats.beta_max <= 4.0 * (wwh_norm + sched.eta_upper) + 1e-9);
    CHECK(stats.hull_violation_max <= 1e-12);
    CHECK(stats.iterations > 0);
  }
}

TEST_CASE("alternating factorization for the fully connected network") {
  SUBCASE("residual trace is monotone and the power equality holds") {
    for (int seed = 0; seed < 10; ++seed) {
      std::mt19937_64 rng(500 + seed);
      const int bits = seed % 2 == 0 ? 2 : 0;
      PhaseShifterSpec spec{Architecture::FullyConnected, bits};
      const CMat b = oracle::random_precoder(rng, 16, 4, 5.0);
      const FactorizeResult res = aim_adp(b, 8, spec);
      for (std::size_t i = 1; i < res.residual_trace.size(); ++i) {
        CHECK(res.residual_trace[i] <= res.residual_trace[i - 1] + 1e-10);
      }
      CHECK(std::abs(res.hp.effective().norm() - b.norm()) <= 1e-8 * b.norm());
      CHECK(analog_is_feasible(res.hp.analog));
    }
  }
  SUBCASE("square analog matrix factorizes exactly under continuous phases") {
    std::mt19937_64 rng(91);
    PhaseShifterSpec spec{Architecture::FullyConnected, 0};
    const CMat b = oracle::random_complex_matrix(rng, 8, 3);
    const FactorizeResult res = aim_adp(b, 8, spec);
    CHECK(res.residual <= 1e-6 * b.norm());
  }
}

TEST_CASE("variable projection digital stage") {
  std::mt19937_64 rng(7);
  PhaseShifterSpec spec{Architecture::PartiallyConnected, 0};
  const AnalogPrecoder v = round_to_feasible(oracle::random_complex_matrix(rng, 12, 4), spec);
  const CMat b = oracle::random_complex_matrix(rng, 12, 3);
  const CMat w = vp_digital_partial(b, v);
  const double beta = fro2(b) * 4.0 / 12.0;

  CHECK(fro2(w) == doctest::Approx(beta).epsilon(1e-12));
  CHECK(fro2(v.v * w) == doctest::Approx(fro2(b)).epsilon(1e-9));

  SUBCASE("no equal-norm digital matrix does better") {
    const double base = (b - v.v * w).norm();
    for (int i = 0; i < 100; ++i) {
      CMat alt = oracle::random_complex_matrix(rng, 4, 3);
      alt *= std::sqrt(beta / fro2(alt));
      CHECK((b - v.v * alt).norm() >= base - 1e-9);
    }
  }
  SUBCASE("degenerate target is rejected") {
    CHECK_THROWS_AS(vp_digital_partial(CMat::Zero(12, 3), v), std::invalid_argument);
  }
}

TEST_CASE("block quadratic construction") {
  SUBCASE("standard basis example") {
    CMat b = CMat::Zero(4, 1);
    b(0, 0) = 1.0;
    const BlockDiagQuadratic a = build_blockdiag_quadratic(b, 2);
    REQUIRE(a.blocks.size() == 2);
    REQUIRE(a.block_size == 2);
    CHECK(std::abs(a.blocks[0](0, 0) - Complex(1.0, 0.0)) == 0.0);
    CHECK(a.blocks[0].cwiseAbs().sum() == doctest::Approx(1.0));
    CHECK(a.blocks[1].cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("trace preservation and positive semidefiniteness") {
    std::mt19937_64 rng(3);
    const CMat b = oracle::random_complex_matrix(rng, 12, 5);
    const BlockDiagQuadratic a = build_blockdiag_quadratic(b, 3);
    const CMat full = a.assemble();
    CHECK(full.trace().real() == doctest::Approx(fro2(b)).epsilon(1e-12));
    Eigen::SelfAdjointEigenSolver<CMat> eig(full, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * eig.eigenvalues().maxCoeff());
  }
  SUBCASE("indivisible RF chain count is rejected") {
    CHECK_THROWS_AS(build_blockdiag_quadratic(CMat::Zero(10, 2), 3), std::invalid_argument);
  }
}

TEST_CASE("analog stage for the partially connected network") {
  SUBCASE("flat quadratic accepts any feasible point") {
    BlockDiagQuadratic a;
    a.block_size = 3;
    a.blocks = {CMat::Identity(3, 3), CMat::Identity(3, 3)};
    PhaseShifterSpec spec{Architecture::PartiallyConnected, 0};
    const CVec r = mm_analog_partial(a, spec, MmSchedule{});
    for (int i = 0; i < 6; ++i) CHECK(std::abs(std::abs(r(i)) - 1.0) < 1e-12);
    CHECK(a.quad(r) == doctest::Approx(6.0));
  }
  SUBCASE("rank-1 blocks align with the dominant eigenvector phases") {
    std::mt19937_64 rng(13);
    PhaseShifterSpec spec{Architecture::PartiallyConnected, 0};
    for (int trial = 0; trial < 10; ++trial) {
      CVec d(4);
      for (int i = 0; i < 4; ++i) d(i) = std::polar(1.3, 0.7 * i + 0.1 * trial);
      BlockDiagQuadratic a;
      a.block_size = 4;
      a.blocks = {CMat(d * d.adjoint())};
      const CVec r = mm_analog_partial(a, spec, MmSchedule{});
      const double lmax = d.squaredNorm();
      CHECK(a.quad(r) >= 0.999 * 4.0 * lmax);
    }
  }
  SUBCASE("discrete small blocks reach the enumerated optimum") {
    std::mt19937_64 rng(29);
    PhaseShifterSpec spec{Architecture::PartiallyConnected, 2};  // L = 4
    for (int trial = 0; trial < 20; ++trial) {
      const CMat b = oracle::random_complex_matrix(rng, 4, 2);
      const BlockDiagQuadratic a = build_blockdiag_quadratic(b, 2);
      const CVec r = mm_analog_partial(a, spec, MmSchedule{});
      // Enumerate all L^2 candidates per block.
      double best = 0.0;
      for (std::size_t blk = 0; blk < 2; ++blk) {
        double blk_best = -1.0;
        for (int m0 = 0; m0 < 4; ++m0) {
          for (int m1 = 0; m1 < 4; ++m1) {
            CVec p(2);
            p << constellation_point(m0, 4), constellation_point(m1, 4);
            blk_best = std::max(blk_best,
                                std::real((p.adjoint() * a.blocks[blk] * p)(0, 0)));
          }
        }
        best += blk_best;
      }
      CHECK(a.quad(r) >= best - 1e-6);
    }
  }
  SUBCASE("objective is monotone across iterations") {
    std::mt19937_64 rng(47);
    PhaseShifterSpec spec{Architecture::PartiallyConnected, 2};
    const CMat b = oracle::random_complex_matrix(rng, 16, 4);
    const BlockDiagQuadratic a = build_blockdiag_quadratic(b, 4);
    MmRunStats stats;
    (void)mm_analog_partial(a, spec, MmSchedule{}, &stats);
    REQUIRE(stats.f_trace.size() > 1);
    for (std::size_t i = 1; i < stats.f_trace.size(); ++i) {
      CHECK(stats.f_trace[i] <=
            stats.f_trace[i - 1] + 1e-10 * std::max(1.0, std::abs(stats.f_trace[i - 1])));
    }
  }
}

TEST_CASE("two-step factorization for the partially connected network") {
  std::mt19937_64 rng(59);
  PhaseShifterSpec spec{Architecture::PartiallyConnected, 2};
  const CMat b = oracle::random_precoder(rng, 12, 3, 4.0);
  const FactorizeResult res = avpim_adp(b, 3, spec);

  SUBCASE("analog structure and power equality") {
    CHECK(analog_is_feasible(res.hp.analog));
    CHECK(std::abs(res.hp.effective().norm() - b.norm()) <= 1e-8 * b.norm());
  }
  SUBCASE("residual matches the closed-form expansion") {
    const double beta = fro2(b) * 3.0 / 12.0;
    const double vhb = (res.hp.analog.v.adjoint() * b).norm();
    const double expansion = fro2(b) - 2.0 * std::sqrt(beta) * vhb + beta * 12.0 / 3.0;
    CHECK(res.residual_trace.front() * res.residual_trace.front() ==
          doctest::Approx(expansion).epsilon(1e-8));
  }
  SUBCASE("exhaustive optimum at the smallest scale") {
    PhaseShifterSpec tiny{Architecture::PartiallyConnected, 1};  // L = 2
    for (int seed = 0; seed < 10; ++seed) {
      std::mt19937_64 inst(700 + seed);
      const CMat bt = oracle::random_complex_matrix(inst, 4, 2);
      const FactorizeResult mine = avpim_adp(bt, 2, tiny);
      double best = std::numeric_limits<double>::infinity();
      for (int bits = 0; bits < 16; ++bits) {
        CVec r(4);
        for (int i = 0; i < 4; ++i) r(i) = constellation_point((bits >> i) & 1, 2);
        AnalogPrecoder v{assemble_partial_analog(r, 2), tiny};
        const CMat w = vp_digital_partial(bt, v);
        best = std::min(best, (bt - v.v * w).norm());
      }
      CHECK(mine.residual_trace.front() <= best + 1e-6);
    }
  }
}

TEST_CASE("projection baseline factorization") {
  std::mt19937_64 rng(71);
  SUBCASE("fully connected baseline is monotone and feasible") {
    PhaseShifterSpec spec{Architecture::FullyConnected, 2};
    const CMat b = oracle::random_precoder(rng, 16, 4, 5.0);
    const FactorizeResult res = npp_factorize(b, 8, spec);
    for (std::size_t i = 1; i < res.residual_trace.size(); ++i) {
      CHECK(res.residual_trace[i] <= res.residual_trace[i - 1] + 1e-10);
    }
    CHECK(analog_is_feasible(res.hp.analog));
    CHECK(std::abs(res.hp.effective().norm() - b.norm()) <= 1e-8 * b.norm());
  }
  SUBCASE("partially connected baseline stays on the support") {
    PhaseShifterSpec spec{Architecture::PartiallyConnected, 0};
    const CMat b = oracle::random_precoder(rng, 12, 3, 5.0);
    const FactorizeResult res = npp_factorize(b, 4, spec);
    CHECK(analog_is_feasible(res.hp.analog));
  }
  SUBCASE("fully digital architecture is rejected") {
    PhaseShifterSpec spec{Architecture::FullyDigital, 0};
    CHECK_THROWS_AS(npp_factorize(CMat::Ones(4, 2), 2, spec), std::invalid_argument);
  }
}
