#include <doctest.h>

#include "leosat/power.hpp"
#include "oracles.hpp"

using namespace leosat;

TEST_CASE("static transmitter power per architecture") {
  PowerModel pm;
  CHECK(transmit_power_static(Architecture::FullyConnected, 9, 4, pm, 144) ==
        doctest::Approx(29.167));  // 144*9*20 + 9*338 + 5 + 200 mW
  CHECK(transmit_power_static(Architecture::PartiallyConnected, 9, 4, pm, 144) ==
        doctest::Approx(6.127));  // 144*20 + 9*338 + 205 mW
  CHECK(transmit_power_static(Architecture::FullyDigital, 9, 4, pm, 144) ==
        doctest::Approx(48.877));  // 144*338 + 205 mW
}

TEST_CASE("architecture power gap equals the extra phase shifters") {
  PowerModel pm;
  for (int bits : {2, 3, 4, 0}) {
    for (int m_rf : {1, 2, 9, 16, 36}) {
      const double fc = transmit_power_static(Architecture::FullyConnected, m_rf, bits, pm, 144);
      const double pc = transmit_power_static(Architecture::PartiallyConnected, m_rf, bits, pm, 144);
      const double expected = 144.0 * (m_rf - 1) * pm.ps_mw(bits) * 1e-3;
      CHECK(fc - pc == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("fully digital ignores RF chain count and resolution") {
  PowerModel pm;
  const double a = transmit_power_static(Architecture::FullyDigital, 9, 4, pm, 144);
  const double b = transmit_power_static(Architecture::FullyDigital, 36, 2, pm, 144);
  CHECK(a == b);
}

TEST_CASE("total power") {
  std::mt19937_64 rng(3);
  SUBCASE("zero precoder costs only static power") {
    const CMat b = CMat::Zero(16, 4);
    CHECK(total_power(b, 2.0, 6.127) == doctest::Approx(6.127));
  }
  SUBCASE("radiated term arithmetic") {
    CMat b = oracle::random_precoder(rng, 16, 4, 10.0);
    CHECK(total_power(b, 2.0, 6.127) == doctest::Approx(26.127));
  }
  SUBCASE("quadratic homogeneity") {
    CMat b = oracle::random_precoder(rng, 16, 4, 5.0);
    const double base = radiated_power(b);
    CHECK(radiated_power(std::sqrt(2.0) * b) == doctest::Approx(2.0 * base));
  }
}

TEST_CASE("architecture names round-trip") {
  for (Architecture a : {Architecture::FullyDigital, Architecture::FullyConnected,
                         Architecture::PartiallyConnected}) {
    CHECK(architecture_from_string(to_string(a)) == a);
  }
  CHECK_THROWS_AS(architecture_from_string("analog"), ConfigError);
}
