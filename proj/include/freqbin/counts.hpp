#pragma once

// Coincidence-count statistics: Poisson synthesis, histogram I/O and
// windowing, background subtraction, visibility and CHSH estimators.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "freqbin/types.hpp"

namespace freqbin {

struct CountRecord {
  std::array<std::int64_t, 4> counts{};  // indexed by Outcome
  std::pair<std::string, std::string> setting_labels;
  double duration = 0.0;                 // s
  std::array<double, 4> background{};    // expected accidentals per outcome

  std::int64_t operator[](Outcome o) const {
    return counts[static_cast<std::size_t>(o)];
  }
  double net(Outcome o) const {
    return static_cast<double>((*this)[o]) -
           background[static_cast<std::size_t>(o)];
  }

  friend bool operator==(const CountRecord&, const CountRecord&) = default;
};

/// Counts drawn independently with mean
/// duration * (efficiency * pair_rate * P(x,y) + accidental_rate / 4).
/// The accidental means are stored as the record's background.
CountRecord simulate_counts(const ProbTable& probs,
                            const MeasurementModel& model, std::uint64_t seed,
                            std::pair<std::string, std::string> labels = {});

/// Failure while reading input data; carries the 1-based line number when
/// the problem is tied to one line (0 otherwise).
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Estimator could not be formed (e.g. N+ <= 0 after subtraction).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DelayChannel {
  int first_bin = 0;                 // delay_bin_index of counts[0]
  std::vector<std::int64_t> counts;  // contiguous bins

  int last_bin() const {
    return first_bin + static_cast<int>(counts.size()) - 1;
  }

  friend bool operator==(const DelayChannel&, const DelayChannel&) = default;
};

/// Relative-delay histograms, one per outcome. Bin i is centered on delay
/// i * bin_width.
struct Histogram {
  double bin_width = 0.0;  // s
  std::map<Outcome, DelayChannel> channels;
  std::optional<std::pair<double, double>> coincidence_window;  // s

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

/// Reads "# coincidence-histogram v1, bin_width_s=<float>" followed by
/// "channel_pair,delay_bin_index,count" rows. Indices must increase
/// strictly within a channel; gaps read as zero counts. Throws DataError.
Histogram ingest_histogram(std::istream& source);

/// Writes the format read by ingest_histogram.
void emit_histogram(const Histogram& histogram, std::ostream& sink);

struct TimeWindow {
  double start = 0.0;  // s, inclusive
  double stop = 0.0;   // s, inclusive
};

/// Sums counts whose bin centers fall in `peak`; the background is the
/// `background_window` sum scaled by the ratio of bin counts.
CountRecord extract_counts(const Histogram& histogram, TimeWindow peak,
                           TimeWindow background_window,
                           std::pair<std::string, std::string> labels = {});

struct HistogramLayout {
  double bin_width = 0.5e-9;  // s
  int first_bin = -100;
  int bin_count = 200;
  int peak_first_bin = -2;    // signal is spread evenly over the peak bins
  int peak_bin_count = 4;
};

/// Poisson histograms: signal confined to the peak bins; accidentals flat
/// across all bins at accidental_rate / 4 per outcome per peak window.
Histogram synthesize_histogram(const ProbTable& probs,
                               const MeasurementModel& model,
                               const HistogramLayout& layout,
                               std::uint64_t seed);

struct VisibilityResult {
  double v = 0.0;
  double sigma_v = 0.0;
  std::size_t clamped_points = 0;  // scan points whose net count was < 0
};

/// V = (N_max - N_min) / (N_max + N_min) over net counts of `outcome`.
/// Needs >= 5 scan points. Optional per-outcome normalization factors
/// divide the net counts (e.g. rates recorded with modulation off).
VisibilityResult visibility(
    std::span<const CountRecord> sweep, Outcome outcome,
    const std::optional<std::array<double, 4>>& normalization = std::nullopt);

struct ChshEstimate {
  double s = 0.0;
  double sigma_s = 0.0;
  std::array<double, 4> c_table{};
  std::array<double, 4> sigma_c{};
};

/// C_ij = N-_ij / N+_ij with N+- = (EE + OO) +- (EO + OE); records in
/// (0,0), (0,1), (1,0), (1,1) order. Background subtracted when `subtract`.
/// Poisson variances from raw counts, first-order propagation.
ChshEstimate chsh_estimate(std::span<const CountRecord, 4> records,
                           bool subtract = true);

/// Noise-free visibility of `outcome` over a scan of ideal tables after
/// crosstalk chi.
double model_visibility(std::span<const ProbTable> scan, Outcome outcome,
                        double chi);

/// Crosstalk chi in [0, 1/2] whose model_visibility equals `target`
/// (bisection). Throws when the target is not reachable.
double calibrate_crosstalk(std::span<const ProbTable> scan, Outcome outcome,
                           double target);

struct EnsembleSummary {
  double mean_s = 0.0;
  double std_s = 0.0;
  double mean_sigma_s = 0.0;
  std::vector<double> samples;
};

/// Repeats simulate_counts + chsh_estimate for `ensemble_size` seeds derived
/// from `seed`. `probs` are the four generating tables (crosstalk already
/// applied).
EnsembleSummary chsh_ensemble(std::span<const ProbTable, 4> probs,
                              const MeasurementModel& model,
                              std::size_t ensemble_size, std::uint64_t seed);

/// Deterministic sub-seed for stream `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace freqbin
