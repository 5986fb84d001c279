#include "freqbin/counts.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "parallel.hpp"

namespace freqbin {

namespace {

std::int64_t draw_poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) {
    return 0;
  }
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(rng);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

DataError::DataError(const std::string& what, std::size_t line)
    : std::runtime_error(line == 0 ? what
                                   : "line " + std::to_string(line) + ": " + what),
      line_(line) {}

CountRecord simulate_counts(const ProbTable& probs,
                            const MeasurementModel& model, std::uint64_t seed,
                            std::pair<std::string, std::string> labels) {
  model.validate();
  std::mt19937_64 rng(seed);
  CountRecord record;
  record.setting_labels = std::move(labels);
  record.duration = model.duration;
  const double accidental_mean = model.duration * model.accidental_rate / 4.0;
  for (Outcome o : kOutcomes) {
    const auto k = static_cast<std::size_t>(o);
    const double mean =
        model.duration * model.efficiency * model.pair_rate * probs[o] +
        accidental_mean;
    record.counts[k] = draw_poisson(rng, mean);
    record.background[k] = accidental_mean;
  }
  return record;
}

Histogram synthesize_histogram(const ProbTable& probs,
                               const MeasurementModel& model,
                               const HistogramLayout& layout,
                               std::uint64_t seed) {
  model.validate();
  if (!(layout.bin_width > 0.0) || layout.bin_count < 1 ||
      layout.peak_bin_count < 1 || layout.peak_first_bin < layout.first_bin ||
      layout.peak_first_bin + layout.peak_bin_count >
          layout.first_bin + layout.bin_count) {
    throw std::invalid_argument("synthesize_histogram: inconsistent layout");
  }
  Histogram h;
  h.bin_width = layout.bin_width;
  h.coincidence_window = std::pair{
      layout.peak_first_bin * layout.bin_width,
      (layout.peak_first_bin + layout.peak_bin_count - 1) * layout.bin_width};

  const double accidental_per_bin = model.duration * model.accidental_rate /
                                    4.0 / layout.peak_bin_count;
  for (Outcome o : kOutcomes) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(o)));
    const double signal_per_bin = model.duration * model.efficiency *
                                  model.pair_rate * probs[o] /
                                  layout.peak_bin_count;
    DelayChannel channel;
    channel.first_bin = layout.first_bin;
    channel.counts.reserve(static_cast<std::size_t>(layout.bin_count));
    for (int i = 0; i < layout.bin_count; ++i) {
      const int bin = layout.first_bin + i;
      const bool in_peak = bin >= layout.peak_first_bin &&
                           bin < layout.peak_first_bin + layout.peak_bin_count;
      channel.counts.push_back(draw_poisson(
          rng, accidental_per_bin + (in_peak ? signal_per_bin : 0.0)));
    }
    h.channels.emplace(o, std::move(channel));
  }
  return h;
}

namespace {

struct BinSpan {
  int lo = 0;
  int hi = -1;
  int size() const { return hi - lo + 1; }
};

BinSpan bins_in(TimeWindow w, double bin_width) {
  constexpr double slack = 1e-9;
  return {static_cast<int>(std::ceil(w.start / bin_width - slack)),
          static_cast<int>(std::floor(w.stop / bin_width + slack))};
}

std::int64_t sum_bins(const DelayChannel& c, BinSpan s) {
  std::int64_t total = 0;
  for (int i = s.lo; i <= s.hi; ++i) {
    total += c.counts[static_cast<std::size_t>(i - c.first_bin)];
  }
  return total;
}

}  // namespace

CountRecord extract_counts(const Histogram& histogram, TimeWindow peak,
                           TimeWindow background_window,
                           std::pair<std::string, std::string> labels) {
  if (peak.start > peak.stop || background_window.start > background_window.stop) {
    throw DataError("window start must not exceed its stop");
  }
  if (!(peak.stop < background_window.start ||
        background_window.stop < peak.start)) {
    throw DataError("peak and background windows overlap");
  }
  const BinSpan peak_bins = bins_in(peak, histogram.bin_width);
  const BinSpan bg_bins = bins_in(background_window, histogram.bin_width);
  if (peak_bins.size() < 1 || bg_bins.size() < 1) {
    throw DataError("a window contains no histogram bin centers");
  }

  CountRecord record;
  record.setting_labels = std::move(labels);
  const double ratio = static_cast<double>(peak_bins.size()) / bg_bins.size();
  for (Outcome o : kOutcomes) {
    const auto it = histogram.channels.find(o);
    if (it == histogram.channels.end()) {
      throw DataError("histogram has no " + std::string(outcome_name(o)) +
                      " channel");
    }
    const DelayChannel& c = it->second;
    for (const BinSpan& s : {peak_bins, bg_bins}) {
      if (s.lo < c.first_bin || s.hi > c.last_bin()) {
        throw DataError("window extends beyond the " +
                        std::string(outcome_name(o)) + " histogram span");
      }
    }
    const auto k = static_cast<std::size_t>(o);
    record.counts[k] = sum_bins(c, peak_bins);
    record.background[k] = static_cast<double>(sum_bins(c, bg_bins)) * ratio;
  }
  return record;
}

VisibilityResult visibility(std::span<const CountRecord> sweep, Outcome outcome,
                            const std::optional<std::array<double, 4>>& normalization) {
  if (sweep.size() < 5) {
    throw std::invalid_argument("visibility: need at least 5 scan points");
  }
  const auto k = static_cast<std::size_t>(outcome);
  const double factor = normalization ? (*normalization)[k] : 1.0;
  if (!(factor > 0.0)) {
    throw std::invalid_argument("visibility: normalization factors must be > 0");
  }

  VisibilityResult result;
  std::size_t i_max = 0;
  std::size_t i_min = 0;
  std::vector<double> net(sweep.size());
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    double n = sweep[i].net(outcome);
    if (n < 0.0) {
      ++result.clamped_points;
      n = 0.0;
    }
    net[i] = n / factor;
    if (net[i] > net[i_max]) i_max = i;
    if (net[i] < net[i_min]) i_min = i;
  }
  const double hi = net[i_max];
  const double lo = net[i_min];
  const double total = hi + lo;
  if (!(total > 0.0)) {
    throw EstimationError("visibility: N_max + N_min <= 0 after subtraction");
  }
  result.v = (hi - lo) / total;
  const double var_hi = static_cast<double>(sweep[i_max][outcome]) / (factor * factor);
  const double var_lo = static_cast<double>(sweep[i_min][outcome]) / (factor * factor);
  const double d_hi = 2.0 * lo / (total * total);
  const double d_lo = -2.0 * hi / (total * total);
  result.sigma_v = std::sqrt(d_hi * d_hi * var_hi + d_lo * d_lo * var_lo);
  return result;
}

ChshEstimate chsh_estimate(std::span<const CountRecord, 4> records,
                           bool subtract) {
  ChshEstimate est;
  double variance = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const CountRecord& r = records[k];
    auto value = [&](Outcome o) {
      return subtract ? r.net(o) : static_cast<double>(r[o]);
    };
    const double same = value(Outcome::EE) + value(Outcome::OO);
    const double diff = value(Outcome::EO) + value(Outcome::OE);
    const double plus = same + diff;
    if (!(plus > 0.0)) {
      throw EstimationError("non-positive net denominator for setting pair " +
                            std::to_string(k));
    }
    est.c_table[k] = (same - diff) / plus;

    const double var_same = static_cast<double>(r[Outcome::EE] + r[Outcome::OO]);
    const double var_diff = static_cast<double>(r[Outcome::EO] + r[Outcome::OE]);
    const double d_same = 2.0 * diff / (plus * plus);
    const double d_diff = -2.0 * same / (plus * plus);
    const double var_c = d_same * d_same * var_same + d_diff * d_diff * var_diff;
    est.sigma_c[k] = std::sqrt(var_c);
    variance += var_c;
  }
  est.s = est.c_table[0] + est.c_table[1] + est.c_table[2] - est.c_table[3];
  est.sigma_s = std::sqrt(variance);
  return est;
}

double model_visibility(std::span<const ProbTable> scan, Outcome outcome,
                        double chi) {
  if (scan.empty()) {
    throw std::invalid_argument("model_visibility: empty scan");
  }
  double hi = -1.0;
  double lo = 2.0;
  for (const ProbTable& t : scan) {
    const double p = with_crosstalk(t, chi)[outcome];
    hi = std::max(hi, p);
    lo = std::min(lo, p);
  }
  return hi + lo > 0.0 ? (hi - lo) / (hi + lo) : 0.0;
}

double calibrate_crosstalk(std::span<const ProbTable> scan, Outcome outcome,
                           double target) {
  double lo = 0.0;
  double hi = 0.5;
  if (model_visibility(scan, outcome, lo) < target) {
    throw std::invalid_argument(
        "calibrate_crosstalk: target visibility above the crosstalk-free value");
  }
  if (!(target >= 0.0)) {
    throw std::invalid_argument("calibrate_crosstalk: target must be >= 0");
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (model_visibility(scan, outcome, mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

EnsembleSummary chsh_ensemble(std::span<const ProbTable, 4> probs,
                              const MeasurementModel& model,
                              std::size_t ensemble_size, std::uint64_t seed) {
  if (ensemble_size < 2) {
    throw std::invalid_argument("chsh_ensemble: need at least 2 members");
  }
  EnsembleSummary out;
  out.samples.resize(ensemble_size);
  std::vector<double> sigmas(ensemble_size);
  detail::parallel_for(ensemble_size, [&](std::size_t e) {
    std::array<CountRecord, 4> records;
    for (std::size_t k = 0; k < 4; ++k) {
      records[k] = simulate_counts(probs[k], model, derive_seed(seed, 4 * e + k));
    }
    const ChshEstimate est = chsh_estimate(records);
    out.samples[e] = est.s;
    sigmas[e] = est.sigma_s;
  });

  double sum = 0.0;
  double sigma_sum = 0.0;
  for (std::size_t e = 0; e < ensemble_size; ++e) {
    sum += out.samples[e];
    sigma_sum += sigmas[e];
  }
  out.mean_s = sum / ensemble_size;
  out.mean_sigma_s = sigma_sum / ensemble_size;
  double ss = 0.0;
  for (double s : out.samples) {
    ss += (s - out.mean_s) * (s - out.mean_s);
  }
  out.std_s = std::sqrt(ss / (ensemble_size - 1));
  return out;
}

}  // namespace freqbin
