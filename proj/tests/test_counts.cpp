#include <doctest.h>

#include <cmath>
#include <numbers>

#include "freqbin/bell.hpp"
#include "freqbin/closedform.hpp"
#include "freqbin/counts.hpp"

using namespace freqbin;

namespace {

constexpr double kPi = std::numbers::pi;

const SettingQuad kOptimalQuad{{0.2318, 0.0}, {0.6955, kPi}, {0.2318, 0.0}, {0.6955, kPi}};

std::array<ProbTable, 4> optimal_tables(double chi = 0.0) {
  std::array<ProbTable, 4> t;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto [i, j] = kSettingPairs[k];
    t[k] = with_crosstalk(ideal_probabilities(kOptimalQuad.alice(i), kOptimalQuad.bob(j)), chi);
  }
  return t;
}

CountRecord record_of(std::int64_t ee, std::int64_t eo, std::int64_t oe, std::int64_t oo) {
  CountRecord r;
  r.counts = {ee, eo, oe, oo};
  r.duration = 1.0;
  return r;
}

// Scan of a = b = 0.6955 with alpha over [0, 2 pi] and beta = 0.
std::vector<ProbTable> fringe_scan(int steps) {
  std::vector<ProbTable> scan;
  for (int k = 0; k < steps; ++k) {
    scan.push_back(ideal_probabilities(ModulationSetting{0.6955, 2 * kPi * k / (steps - 1)},
                                       {0.6955, 0.0}));
  }
  return scan;
}

}  // namespace

TEST_CASE("simulate_counts means") {
  MeasurementModel m;
  m.efficiency = 0.5;
  const ProbTable t{0.5, 0.0, 0.0, 0.5};
  const double mean_ee = 1800 * (0.5 * 1.5 * 0.5 + 0.75 / 4);
  const double mean_eo = 1800 * (0.75 / 4);
  CHECK(mean_ee == doctest::Approx(1012.5));
  CHECK(mean_eo == doctest::Approx(337.5));
  const CountRecord r = simulate_counts(t, m, 1, {"A0", "B0"});
  CHECK(std::abs(r[Outcome::EE] - mean_ee) <= 3 * std::sqrt(mean_ee));
  CHECK(std::abs(r[Outcome::EO] - mean_eo) <= 3 * std::sqrt(mean_eo));
  CHECK(std::abs(r[Outcome::OO] - mean_ee) <= 3 * std::sqrt(mean_ee));
  CHECK(r.background[0] == doctest::Approx(mean_eo));
  CHECK(r.duration == 1800.0);
  CHECK(r.setting_labels.first == "A0");
}

TEST_CASE("simulate_counts is deterministic per seed") {
  const MeasurementModel m;
  const ProbTable t = optimal_tables()[3];
  CHECK(simulate_counts(t, m, 42) == simulate_counts(t, m, 42));
  CHECK_FALSE(simulate_counts(t, m, 42) == simulate_counts(t, m, 43));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("tiny durations give no counts") {
  MeasurementModel m;
  m.duration = 1e-9;
  const CountRecord r = simulate_counts({0.25, 0.25, 0.25, 0.25}, m, 9);
  for (Outcome o : kOutcomes) CHECK(r[o] == 0);
}

TEST_CASE("long runs recover the coincidence-to-accidental ratio") {
  MeasurementModel m;
  m.duration = 1e7;
  const CountRecord r = simulate_counts({0.25, 0.25, 0.25, 0.25}, m, 4);
  double total = 0.0, background = 0.0;
  for (Outcome o : kOutcomes) {
    total += static_cast<double>(r[o]);
    background += r.background[static_cast<std::size_t>(o)];
  }
  CHECK((total - background) / background == doctest::Approx(2.0).epsilon(2e-3));
}

TEST_CASE("background subtraction is unbiased") {
  const MeasurementModel m;
  const ProbTable t = optimal_tables()[0];
  std::array<double, 4> mean{};
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    const CountRecord r = simulate_counts(t, m, derive_seed(77, s));
    for (Outcome o : kOutcomes) mean[static_cast<std::size_t>(o)] += r.net(o) / seeds;
  }
  for (Outcome o : kOutcomes) {
    const double signal = m.duration * m.efficiency * m.pair_rate * t[o];
    const double total = signal + m.duration * m.accidental_rate / 4;
    CHECK(std::abs(mean[static_cast<std::size_t>(o)] - signal) <= 3 * std::sqrt(total / seeds));
  }
}

TEST_CASE("chsh_estimate on counts proportional to the theory tables") {
  const auto tables = optimal_tables();
  std::array<CountRecord, 4> records;
  for (std::size_t k = 0; k < 4; ++k) {
    for (Outcome o : kOutcomes) {
      records[k].counts[static_cast<std::size_t>(o)] =
          std::llround(1e12 * tables[k][o]);
    }
  }
  const ChshEstimate est = chsh_estimate(records);
  CHECK(std::abs(est.s - 2.566) <= 1e-3);
  CHECK(std::abs(est.c_table[0] - 0.796) <= 5e-4);
  CHECK(std::abs(est.c_table[3] + 0.178) <= 5e-4);
  CHECK(est.s == doctest::Approx(chsh_ideal(kOptimalQuad).s_value).epsilon(1e-9));
}

TEST_CASE("chsh_estimate extremes and errors") {
  const std::array<CountRecord, 4> extreme{record_of(10, 0, 0, 10), record_of(5, 0, 0, 3),
                                           record_of(7, 0, 0, 1), record_of(0, 4, 9, 0)};
  CHECK(chsh_estimate(extreme).s == 4.0);

  std::array<CountRecord, 4> background_only;
  for (auto& r : background_only) {
    r = record_of(10, 10, 10, 10);
    r.background = {12, 12, 12, 12};
  }
  CHECK_THROWS_WITH_AS(chsh_estimate(background_only),
                       doctest::Contains("non-positive net denominator"), EstimationError);
  CHECK(chsh_estimate(background_only, false).s == 0.0);
}

TEST_CASE("sigma propagation matches finite differences") {
  const std::array<CountRecord, 4> r{record_of(400, 50, 60, 380), record_of(300, 40, 45, 310),
                                     record_of(350, 30, 70, 330), record_of(100, 200, 190, 90)};
  const ChshEstimate est = chsh_estimate(r);
  double var = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t o = 0; o < 4; ++o) {
      auto bumped = r;
      const double h = 1e-3;
      // derivative by a fractional bump of the net count through background
      bumped[k].background[o] -= h;
      const double ds = (chsh_estimate(bumped).s - est.s) / h;
      var += ds * ds * static_cast<double>(r[k].counts[o]);
    }
  }
  CHECK(est.sigma_s == doctest::Approx(std::sqrt(var)).epsilon(1e-4));
}

TEST_CASE("correlators stay within [-1, 1] for non-negative net counts") {
  MeasurementModel m;
  m.duration = 60.0;
  const auto tables = optimal_tables(0.02);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::array<CountRecord, 4> recs;
    for (std::size_t k = 0; k < 4; ++k) recs[k] = simulate_counts(tables[k], m, derive_seed(seed, k));
    const ChshEstimate est = chsh_estimate(recs, false);
    for (double c : est.c_table) CHECK(std::abs(c) <= 1.0);
  }
}

TEST_CASE("estimator converges to the generating model") {
  MeasurementModel m;
  m.duration = 1800.0 * 1e4;
  const auto tables = optimal_tables();
  std::array<CountRecord, 4> recs;
  for (std::size_t k = 0; k < 4; ++k) recs[k] = simulate_counts(tables[k], m, derive_seed(5, k));
  const ChshEstimate est = chsh_estimate(recs);
  CHECK(est.sigma_s < 1e-3);
  CHECK(std::abs(est.s - chsh_ideal(kOptimalQuad).s_value) <= 3 * est.sigma_s);
}

TEST_CASE("visibility") {
  std::vector<CountRecord> sweep;
  for (std::int64_t n : {0, 50, 100, 50, 0}) sweep.push_back(record_of(0, n, n, 0));
  const VisibilityResult v = visibility(sweep, Outcome::EO);
  CHECK(v.v == 1.0);
  CHECK(v.sigma_v == 0.0);

  sweep[0].background[1] = 5.0;
  const VisibilityResult clamped = visibility(sweep, Outcome::EO);
  CHECK(clamped.clamped_points == 1);
  CHECK(clamped.v == 1.0);

  std::vector<CountRecord> fringe;
  for (std::int64_t n : {20, 60, 100, 60, 20}) fringe.push_back(record_of(0, n, n, 0));
  const VisibilityResult f = visibility(fringe, Outcome::OE);
  CHECK(f.v == doctest::Approx(80.0 / 120.0));
  const double d_hi = 2 * 20.0 / (120.0 * 120.0), d_lo = 2 * 100.0 / (120.0 * 120.0);
  CHECK(f.sigma_v == doctest::Approx(std::sqrt(d_hi * d_hi * 100 + d_lo * d_lo * 20)));
  const std::array<double, 4> norm{1.0, 2.0, 2.0, 1.0};
  CHECK(visibility(fringe, Outcome::EO, norm).v == doctest::Approx(f.v));

  CHECK_THROWS_AS(visibility(std::span(fringe).first(4), Outcome::EO), std::invalid_argument);
  std::vector<CountRecord> empty(5, record_of(0, 0, 0, 0));
  CHECK_THROWS_AS(visibility(empty, Outcome::EO), EstimationError);
}

TEST_CASE("ideal synthetic scan has full visibility") {
  MeasurementModel m;
  m.accidental_rate = 0.0;
  const auto scan = fringe_scan(25);
  std::vector<CountRecord> sweep;
  for (std::size_t k = 0; k < scan.size(); ++k) sweep.push_back(simulate_counts(scan[k], m, k));
  CHECK(visibility(sweep, Outcome::EO).v >= 0.999);
  CHECK(model_visibility(scan, Outcome::EO, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("crosstalk calibration") {
  const auto scan = fringe_scan(25);
  const double chi = calibrate_crosstalk(scan, Outcome::EO, 0.85);
  CHECK(model_visibility(scan, Outcome::EO, chi) == doctest::Approx(0.85).epsilon(1e-10));
  CHECK(chi > 0.0);
  CHECK(chi < 0.5);
  CHECK_THROWS_AS(calibrate_crosstalk(scan, Outcome::EO, 1.5), std::invalid_argument);

  const MeasurementModel m{chi};
  std::vector<CountRecord> sweep;
  for (std::size_t k = 0; k < scan.size(); ++k) {
    sweep.push_back(simulate_counts(with_crosstalk(scan[k], chi), m, derive_seed(3, k)));
  }
  CHECK(std::abs(visibility(sweep, Outcome::EO).v - 0.85) <= 0.05);
}

TEST_CASE("ensemble statistics are reproducible and self-consistent") {
  const auto tables = optimal_tables(0.024);
  const MeasurementModel m{0.024};
  const EnsembleSummary a = chsh_ensemble(tables, m, 200, 11);
  const EnsembleSummary b = chsh_ensemble(tables, m, 200, 11);
  CHECK(a.samples == b.samples);
  CHECK(a.mean_s == b.mean_s);
  CHECK(a.std_s == doctest::Approx(a.mean_sigma_s).epsilon(0.25));
  CHECK_THROWS_AS(chsh_ensemble(tables, m, 1, 11), std::invalid_argument);
}

TEST_CASE("extract_counts") {
  Histogram h;
  h.bin_width = 1.0;
  for (Outcome o : kOutcomes) h.channels[o] = {-5, std::vector<std::int64_t>(11, 3)};
  const CountRecord flat = extract_counts(h, {-1, 1}, {2, 4});
  for (Outcome o : kOutcomes) {
    CHECK(flat[o] == 9);
    CHECK(flat.net(o) == 0.0);
  }

  Histogram spike = h;
  for (auto& [o, c] : spike.channels) {
    std::fill(c.counts.begin(), c.counts.end(), 0);
    c.counts[5] = 17;
  }
  const CountRecord s = extract_counts(spike, {-0.5, 0.5}, {2, 5});
  CHECK(s[Outcome::OO] == 17);
  CHECK(s.background[3] == 0.0);

  const CountRecord scaled = extract_counts(h, {-1, 0}, {1, 5});
  CHECK(scaled.background[0] == doctest::Approx(15.0 * 2 / 5));

  CHECK_THROWS_AS(extract_counts(h, {-1, 1}, {0.5, 3}), DataError);
  CHECK_THROWS_AS(extract_counts(h, {-1, 1}, {3, 9}), DataError);
  Histogram missing = h;
  missing.channels.erase(Outcome::OE);
  CHECK_THROWS_WITH_AS(extract_counts(missing, {-1, 1}, {2, 4}), doctest::Contains("OE"),
                       DataError);
}

TEST_CASE("synthetic histograms carry the generating means") {
  const MeasurementModel m;
  const HistogramLayout layout;
  const ProbTable t = optimal_tables()[1];
  const Histogram h = synthesize_histogram(t, m, layout, 99);
  const double w = layout.bin_width;
  const CountRecord r = extract_counts(h, {-2 * w, 1 * w}, {10 * w, 90 * w});
  for (Outcome o : kOutcomes) {
    const double signal = m.duration * m.pair_rate * t[o];
    const double total = signal + m.duration * m.accidental_rate / 4;
    CHECK(std::abs(r.net(o) - signal) <= 3 * std::sqrt(total * 1.1));
  }
  CHECK(h.coincidence_window.has_value());
  HistogramLayout bad = layout;
  bad.peak_first_bin = 500;
  CHECK_THROWS_AS(synthesize_histogram(t, m, bad, 1), std::invalid_argument);
}
