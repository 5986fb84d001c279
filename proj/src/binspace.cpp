#include "freqbin/binspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

namespace freqbin {

BinWindow::BinWindow(int lo, int hi) : min_bin(lo), max_bin(hi) {
  if (lo > hi) {
    throw std::invalid_argument("bin window [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "] is empty");
  }
}

std::optional<BinWindow> intersect(const BinWindow& x, const BinWindow& y) {
  const int lo = std::max(x.min_bin, y.min_bin);
  const int hi = std::min(x.max_bin, y.max_bin);
  if (lo > hi) {
    return std::nullopt;
  }
  return BinWindow{lo, hi};
}

TwoPhotonState::TwoPhotonState(BinWindow window_a, BinWindow window_b)
    : window_a_(window_a),
      window_b_(window_b),
      amps_(static_cast<std::size_t>(window_a.width()) * window_b.width()) {}

std::size_t TwoPhotonState::index(int m, int n) const {
  return static_cast<std::size_t>(m - window_a_.min_bin) * window_b_.width() +
         static_cast<std::size_t>(n - window_b_.min_bin);
}

Amplitude TwoPhotonState::amplitude(int m, int n) const {
  if (!window_a_.contains(m) || !window_b_.contains(n)) {
    return {};
  }
  return amps_[index(m, n)];
}

Amplitude& TwoPhotonState::at(int m, int n) {
  if (!window_a_.contains(m) || !window_b_.contains(n)) {
    throw std::out_of_range("bin pair (" + std::to_string(m) + ", " +
                            std::to_string(n) + ") outside state window");
  }
  return amps_[index(m, n)];
}

double TwoPhotonState::norm_squared() const {
  double sum = 0.0;
  for (const Amplitude& z : amps_) {
    sum += std::norm(z);
  }
  return sum;
}

void TwoPhotonState::add_leaked_norm(double weight) {
  if (weight < 0.0) {
    throw std::invalid_argument("leaked weight must be non-negative");
  }
  leaked_norm_ += weight;
}

std::vector<int> bin_range(int lo, int hi) {
  std::vector<int> bins;
  for (int n = lo; n <= hi; ++n) {
    bins.push_back(n);
  }
  return bins;
}

TwoPhotonState correlated_state(std::span<const int> bins_a) {
  if (bins_a.empty()) {
    throw std::invalid_argument("correlated_state: no bins given");
  }
  std::set<int> seen;
  for (int n : bins_a) {
    if (!seen.insert(n).second) {
      throw std::invalid_argument("correlated_state: duplicate bin " +
                                  std::to_string(n));
    }
  }
  const int lo = *seen.begin();
  const int hi = *seen.rbegin();
  TwoPhotonState state({lo, hi}, {-hi, -lo});
  const double weight = 1.0 / std::sqrt(static_cast<double>(bins_a.size()));
  for (int n : bins_a) {
    state.at(n, -n) = weight;
  }
  return state;
}

std::vector<Amplitude> modulator_kernel(const ModulationSetting& setting,
                                        const TruncationPolicy& policy) {
  const int order = truncation_order(setting.amplitude(), policy);
  const std::vector<double> j = bessel_j_sequence(order, setting.amplitude());
  const double shifted = setting.phase() - std::numbers::pi / 2.0;

  std::vector<Amplitude> kernel(static_cast<std::size_t>(2 * order + 1));
  for (int p = -order; p <= order; ++p) {
    const int ap = std::abs(p);
    const double jp = (p < 0 && ap % 2 != 0) ? -j[ap] : j[ap];
    kernel[p + order] = jp * std::polar(1.0, p * shifted);
  }
  return kernel;
}

TwoPhotonState apply_modulator(const TwoPhotonState& state, Arm arm,
                               const ModulationSetting& setting,
                               const TruncationPolicy& policy,
                               const WindowLimits& limits) {
  const std::vector<Amplitude> kernel = modulator_kernel(setting, policy);
  const int order = static_cast<int>(kernel.size() / 2);

  const BinWindow wide = state.window(arm).widened(order);
  BinWindow kept = wide;
  if (limits.clip) {
    const auto overlap = intersect(wide, *limits.clip);
    if (!overlap) {
      throw std::invalid_argument("clip window does not overlap the state");
    }
    kept = *overlap;
  }
  if (kept.min_bin < -limits.max_abs_bin || kept.max_bin > limits.max_abs_bin) {
    throw WindowBoundError("modulated window [" + std::to_string(kept.min_bin) +
                           ", " + std::to_string(kept.max_bin) +
                           "] exceeds absolute bin bound " +
                           std::to_string(limits.max_abs_bin));
  }

  const BinWindow& wa = state.window_a();
  const BinWindow& wb = state.window_b();
  TwoPhotonState full = arm == Arm::A ? TwoPhotonState(wide, wb)
                                      : TwoPhotonState(wa, wide);
  for (int m = wa.min_bin; m <= wa.max_bin; ++m) {
    for (int n = wb.min_bin; n <= wb.max_bin; ++n) {
      const Amplitude z = state.amplitude(m, n);
      if (z == Amplitude{}) {
        continue;
      }
      for (int p = -order; p <= order; ++p) {
        const Amplitude contribution = kernel[p + order] * z;
        if (arm == Arm::A) {
          full.at(m + p, n) += contribution;
        } else {
          full.at(m, n + p) += contribution;
        }
      }
    }
  }

  const BinWindow& other = arm == Arm::A ? wb : wa;
  TwoPhotonState out = arm == Arm::A ? TwoPhotonState(kept, other)
                                     : TwoPhotonState(other, kept);
  out.add_leaked_norm(state.leaked_norm());
  double dropped = 0.0;
  for (int m = full.window_a().min_bin; m <= full.window_a().max_bin; ++m) {
    for (int n = full.window_b().min_bin; n <= full.window_b().max_bin; ++n) {
      const Amplitude z = full.amplitude(m, n);
      const int moved = arm == Arm::A ? m : n;
      if (kept.contains(moved)) {
        out.at(m, n) = z;
      } else {
        dropped += std::norm(z);
      }
    }
  }
  out.add_leaked_norm(dropped);
  return out;
}

double DispersionProfile::phase(int bin) const {
  if (auto it = per_bin_overrides.find(bin); it != per_bin_overrides.end()) {
    return it->second;
  }
  return quadratic_coefficient * static_cast<double>(bin) * bin;
}

bool DispersionProfile::is_zero() const {
  return quadratic_coefficient == 0.0 &&
         std::all_of(per_bin_overrides.begin(), per_bin_overrides.end(),
                     [](const auto& kv) { return kv.second == 0.0; });
}

DispersionProfile DispersionProfile::mirrored() const {
  DispersionProfile out;
  out.quadratic_coefficient = quadratic_coefficient;
  for (const auto& [bin, phi] : per_bin_overrides) {
    out.per_bin_overrides.emplace(-bin, phi);
  }
  return out;
}

TwoPhotonState apply_dispersion(const TwoPhotonState& state,
                                const DispersionProfile& profile, Arm arm) {
  const BinWindow& w = state.window(arm);
  for (const auto& [bin, _] : profile.per_bin_overrides) {
    if (!w.contains(bin)) {
      throw std::invalid_argument("dispersion override for bin " +
                                  std::to_string(bin) +
                                  " lies outside the active window");
    }
  }
  TwoPhotonState out = state;
  const BinWindow& wa = state.window_a();
  const BinWindow& wb = state.window_b();
  for (int m = wa.min_bin; m <= wa.max_bin; ++m) {
    for (int n = wb.min_bin; n <= wb.max_bin; ++n) {
      const int bin = arm == Arm::A ? m : n;
      out.at(m, n) *= std::polar(1.0, profile.phase(bin));
    }
  }
  return out;
}

TwoPhotonState translate(const TwoPhotonState& state, Arm arm, int k) {
  const BinWindow& wa = state.window_a();
  const BinWindow& wb = state.window_b();
  const int ka = arm == Arm::A ? k : 0;
  const int kb = arm == Arm::B ? k : 0;
  TwoPhotonState out({wa.min_bin + ka, wa.max_bin + ka},
                     {wb.min_bin + kb, wb.max_bin + kb});
  out.add_leaked_norm(state.leaked_norm());
  for (int m = wa.min_bin; m <= wa.max_bin; ++m) {
    for (int n = wb.min_bin; n <= wb.max_bin; ++n) {
      out.at(m + ka, n + kb) = state.amplitude(m, n);
    }
  }
  return out;
}

namespace {

bool is_odd(int n) { return (n % 2) != 0; }

}  // namespace

ProbTable parity_probabilities(const TwoPhotonState& state,
                               const MeasurementModel& model) {
  ProbTable ideal;
  const BinWindow& wa = state.window_a();
  const BinWindow& wb = state.window_b();
  for (int m = wa.min_bin; m <= wa.max_bin; ++m) {
    for (int n = wb.min_bin; n <= wb.max_bin; ++n) {
      const double w = std::norm(state.amplitude(m, n));
      if (!is_odd(m)) {
        (is_odd(n) ? ideal.p_eo : ideal.p_ee) += w;
      } else {
        (is_odd(n) ? ideal.p_oo : ideal.p_oe) += w;
      }
    }
  }
  return with_crosstalk(ideal, model.crosstalk);
}

BinVector phase_state(double varphi, const BinWindow& window) {
  if (window.width() < 3) {
    throw std::invalid_argument("phase_state: window width must be >= 3");
  }
  const double scale = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  BinVector v{window, {}};
  v.amplitudes.reserve(static_cast<std::size_t>(window.width()));
  for (int n = window.min_bin; n <= window.max_bin; ++n) {
    v.amplitudes.push_back(scale * std::polar(1.0, n * varphi));
  }
  return v;
}

BinVector apply_modulator(const BinVector& photon,
                          const ModulationSetting& setting,
                          const TruncationPolicy& policy) {
  const std::vector<Amplitude> kernel = modulator_kernel(setting, policy);
  const int order = static_cast<int>(kernel.size() / 2);
  BinVector out{photon.window.widened(order), {}};
  out.amplitudes.assign(static_cast<std::size_t>(out.window.width()), {});
  for (int n = photon.window.min_bin; n <= photon.window.max_bin; ++n) {
    const Amplitude z = photon.at(n);
    for (int p = -order; p <= order; ++p) {
      out.amplitudes[n + p - out.window.min_bin] += kernel[p + order] * z;
    }
  }
  return out;
}

BinVector translate(const BinVector& photon, int k) {
  return {{photon.window.min_bin + k, photon.window.max_bin + k},
          photon.amplitudes};
}

}  // namespace freqbin
