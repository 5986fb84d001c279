#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "freqbin/closedform.hpp"

using namespace freqbin;

constexpr double kPi = std::numbers::pi;

TEST_CASE("effective drive is the magnitude of the phasor sum") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> amp(0.0, 1.5);
  std::uniform_real_distribution<double> ph(-2.0 * kPi, 4.0 * kPi);
  for (int i = 0; i < 200; ++i) {
    const double a = amp(rng), alpha = ph(rng), b = amp(rng), beta = ph(rng);
    const std::complex<double> sum = std::polar(a, alpha) + std::polar(b, beta);
    const EffectiveDrive d = effective_drive({a, alpha}, {b, beta});
    CHECK(d.d == doctest::Approx(std::abs(sum)).epsilon(1e-12));
    if (d.d > 1e-9) {
      CHECK(std::abs(std::polar(d.d, d.delta) - sum) <= 1e-12);
    }
  }
}

TEST_CASE("zero drive") {
  const EffectiveDrive d = effective_drive({0.6955, kPi}, {0.6955, 0.0});
  CHECK(d.d <= 1e-15);
  CHECK(d.delta == 0.0);
  const ProbTable t = ideal_probabilities(ModulationSetting{0.0, 0.0}, {0.0, 1.0});
  CHECK(t.p_ee == 0.5);
  CHECK(t.p_eo == 0.0);
  CHECK(t.p_oe == 0.0);
  CHECK(t.p_oo == 0.5);
}

TEST_CASE("ideal probabilities against the Bessel formula") {
  const ProbTable t = ideal_probabilities(ModulationSetting{0.6955, 0.0}, {0.6955, 0.0});
  const double j0 = std::cyl_bessel_j(0.0, 2.0 * 1.391);
  CHECK(t.p_eo == doctest::Approx((1.0 - j0) / 4.0).epsilon(1e-13));
  CHECK(t.p_ee == doctest::Approx((1.0 + j0) / 4.0).epsilon(1e-13));
  CHECK(t.p_eo == t.p_oe);
  CHECK(t.p_ee == t.p_oo);
  CHECK(t.total() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("phase-average oracle agrees with the closed form") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> amp(0.0, 1.5);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
  for (int i = 0; i < 100; ++i) {
    const ModulationSetting a(amp(rng), ph(rng));
    const ModulationSetting b(amp(rng), ph(rng));
    const ProbTable x = ideal_probabilities(a, b);
    const ProbTable y = phase_average_oracle(a, b);
    for (Outcome o : kOutcomes) CHECK(std::abs(x[o] - y[o]) <= 1e-8);
  }
}

TEST_CASE("oracle convergence and argument checks") {
  const ModulationSetting a(1.5, 0.3), b(1.5, 0.1);
  const double exact = ideal_probabilities(a, b).p_eo;
  CHECK(std::abs(phase_average_oracle(a, b, 64).p_eo - exact) <= 1e-8);
  CHECK_THROWS_AS(phase_average_oracle(a, b, 63), std::invalid_argument);
}

TEST_CASE("symmetry under exchanging the arms and a common phase shift") {
  const ModulationSetting a(0.4, 1.0), b(0.9, 2.5);
  const ProbTable x = ideal_probabilities(a, b);
  const ProbTable y = ideal_probabilities(b, a);
  const ProbTable z = ideal_probabilities(ModulationSetting{0.4, 1.7}, {0.9, 3.2});
  for (Outcome o : kOutcomes) {
    CHECK(x[o] == doctest::Approx(y[o]).epsilon(1e-14));
    CHECK(x[o] == doctest::Approx(z[o]).epsilon(1e-12));
  }
}

TEST_CASE("crosstalk model") {
  const ProbTable t = ideal_probabilities(ModulationSetting{0.5, 0.0}, {0.2, 1.0});
  const ProbTable same = with_crosstalk(t, 0.0);
  for (Outcome o : kOutcomes) CHECK(same[o] == t[o]);
  const ProbTable mixed = with_crosstalk(t, 0.5);
  for (Outcome o : kOutcomes) CHECK(mixed[o] == doctest::Approx(0.25).epsilon(1e-14));
  const double chi = 0.03;
  const ProbTable f = with_crosstalk(t, chi);
  CHECK(f.total() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.correlator() == doctest::Approx((1 - 2 * chi) * (1 - 2 * chi) * t.correlator()).epsilon(1e-12));
  CHECK_THROWS_AS(with_crosstalk(t, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(with_crosstalk(t, -0.1), std::invalid_argument);
  CHECK(crosstalk_from_extinction_db(20.0) == doctest::Approx(1.0 / 101.0).epsilon(1e-14));
}

TEST_CASE("setting validation") {
  CHECK_THROWS_AS(ModulationSetting(-0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ModulationSetting(0.1, INFINITY), std::invalid_argument);
  const ModulationSetting s(0.2, -kPi / 2);
  CHECK(s.phase() == doctest::Approx(1.5 * kPi).epsilon(1e-15));
  CHECK(ModulationSetting(0.2, 2.0 * kPi).phase() == doctest::Approx(0.0));
  CHECK(parse_outcome("OE") == Outcome::OE);
  CHECK(outcome_name(Outcome::EO) == "EO");
  CHECK_THROWS_AS(parse_outcome("XE"), std::invalid_argument);
}

TEST_CASE("measurement model validation") {
  MeasurementModel m;
  CHECK_NOTHROW(m.validate());
  m.efficiency = 0.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = {};
  m.crosstalk = 0.7;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = {};
  m.duration = -1.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}
