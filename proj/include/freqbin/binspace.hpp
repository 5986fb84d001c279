#pragma once

// Finite-window simulation of the discrete frequency-bin space. Bin n stands
// for the absolute frequency w0 + n * Omega; a two-photon state is a dense
// complex table over a rectangle of (Alice bin, Bob bin) pairs.

#include <complex>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "freqbin/specialfn.hpp"
#include "freqbin/types.hpp"

namespace freqbin {

using Amplitude = std::complex<double>;

struct BinWindow {
  int min_bin = 0;
  int max_bin = 0;  // inclusive

  BinWindow() = default;
  BinWindow(int lo, int hi);

  int width() const noexcept { return max_bin - min_bin + 1; }
  bool contains(int n) const noexcept { return n >= min_bin && n <= max_bin; }
  BinWindow widened(int by) const { return {min_bin - by, max_bin + by}; }

  friend bool operator==(const BinWindow&, const BinWindow&) = default;
};

/// Intersection of two windows, or nullopt when they do not overlap.
std::optional<BinWindow> intersect(const BinWindow& x, const BinWindow& y);

class TwoPhotonState {
 public:
  /// All-zero amplitudes over window_a x window_b.
  TwoPhotonState(BinWindow window_a, BinWindow window_b);

  const BinWindow& window(Arm arm) const noexcept {
    return arm == Arm::A ? window_a_ : window_b_;
  }
  const BinWindow& window_a() const noexcept { return window_a_; }
  const BinWindow& window_b() const noexcept { return window_b_; }

  /// Amplitude on (Alice bin m, Bob bin n); zero outside the windows.
  Amplitude amplitude(int m, int n) const;
  Amplitude& at(int m, int n);

  /// Row-major storage, Alice index major.
  std::span<const Amplitude> amplitudes() const noexcept { return amps_; }

  double norm_squared() const;
  double leaked_norm() const noexcept { return leaked_norm_; }
  void add_leaked_norm(double weight);

 private:
  std::size_t index(int m, int n) const;

  BinWindow window_a_;
  BinWindow window_b_;
  std::vector<Amplitude> amps_;
  double leaked_norm_ = 0.0;
};

/// (1/sqrt(K)) sum_{n in bins_a} |n>|-n>. Throws on empty or duplicate bins.
TwoPhotonState correlated_state(std::span<const int> bins_a);

/// Convenience: bins lo..hi inclusive.
std::vector<int> bin_range(int lo, int hi);

class WindowBoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WindowLimits {
  /// Amplitude landing outside this window (on the modulated arm) is dropped
  /// and its weight added to leaked_norm.
  std::optional<BinWindow> clip;
  /// Widened windows must stay within [-max_abs_bin, max_abs_bin].
  int max_abs_bin = 4096;
};

/// Kernel J_p(c) e^{i p (gamma - pi/2)} for |p| <= truncation_order(c).
/// Index p + order.
std::vector<Amplitude> modulator_kernel(const ModulationSetting& setting,
                                        const TruncationPolicy& policy = {});

/// |m> -> sum_p J_p(c) e^{i p (gamma - pi/2)} |m + p> on the chosen arm.
TwoPhotonState apply_modulator(const TwoPhotonState& state, Arm arm,
                               const ModulationSetting& setting,
                               const TruncationPolicy& policy = {},
                               const WindowLimits& limits = {});

struct DispersionProfile {
  double quadratic_coefficient = 0.0;  // rad per bin index squared
  std::map<int, double> per_bin_overrides;

  double phase(int bin) const;
  bool is_zero() const;

  /// Same profile with override keys negated, for the partner photon of a
  /// correlated pair (Alice bin n pairs with Bob bin -n).
  DispersionProfile mirrored() const;
};

/// Multiplies amplitudes on `arm` bin n by exp(i phase(n)). Overrides must
/// lie inside that arm's window (std::invalid_argument otherwise).
TwoPhotonState apply_dispersion(const TwoPhotonState& state,
                                const DispersionProfile& profile, Arm arm);

/// Translates every bin on `arm` by k.
TwoPhotonState translate(const TwoPhotonState& state, Arm arm, int k);

/// Ideal parity statistics followed by per-photon crosstalk. Entries sum to
/// norm_squared(), i.e. 1 - leaked_norm for a valid state.
ProbTable parity_probabilities(const TwoPhotonState& state,
                               const MeasurementModel& model = {});

/// Single-photon amplitudes over a bin window.
struct BinVector {
  BinWindow window;
  std::vector<Amplitude> amplitudes;

  Amplitude at(int n) const {
    return window.contains(n) ? amplitudes[n - window.min_bin] : Amplitude{};
  }
};

/// Truncated phase state: entry e^{i n varphi} / sqrt(2 pi) on each bin.
/// Window width must be >= 3.
BinVector phase_state(double varphi, const BinWindow& window);

/// Single-photon modulator; output window widened by the truncation order.
BinVector apply_modulator(const BinVector& photon,
                          const ModulationSetting& setting,
                          const TruncationPolicy& policy = {});

BinVector translate(const BinVector& photon, int k);

}  // namespace freqbin
