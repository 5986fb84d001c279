#pragma once

// CHSH correlators for the four (Alice, Bob) setting pairs, in the
// closed-form and finite-bin models, plus optimizers over the settings.

#include <array>
#include <cstdint>
#include <span>
#include <utility>

#include "freqbin/binspace.hpp"
#include "freqbin/closedform.hpp"
#include "freqbin/types.hpp"

namespace freqbin {

struct SettingQuad {
  ModulationSetting a0, a1;  // Alice
  ModulationSetting b0, b1;  // Bob

  const ModulationSetting& alice(int i) const { return i == 0 ? a0 : a1; }
  const ModulationSetting& bob(int j) const { return j == 0 ? b0 : b1; }

  /// a0 = b0 = (c, gamma), a1 = b1 = (3c, gamma + pi).
  static SettingQuad symmetric(double c, double gamma = 0.0);

  /// The quad with all four phases shifted so that alpha0 = 0.
  SettingQuad gauge_normalized() const;
};

/// Setting pair order used throughout: (0,0), (0,1), (1,0), (1,1).
inline constexpr std::array<std::pair<int, int>, 4> kSettingPairs = {
    std::pair{0, 0}, std::pair{0, 1}, std::pair{1, 0}, std::pair{1, 1}};

struct ChshReport {
  std::array<double, 4> correlators{};  // E00, E01, E10, E11
  double s_value = 0.0;                 // E00 + E01 + E10 - E11
  std::array<EffectiveDrive, 4> drives{};
};

/// E00 + E01 + E10 - E11.
double chsh_combination(std::span<const double, 4> correlators);

ChshReport chsh_ideal(const SettingQuad& quad);

/// S(c) = 3 J0(4c) - J0(12c).
double symmetric_chsh(double c);

struct SymmetricOptimum {
  double c_star = 0.0;
  double s_star = 0.0;
};

/// Golden-section maximization of symmetric_chsh on [lo, hi] (within
/// [0, 1]). Throws std::runtime_error when the maximum sits on an endpoint.
SymmetricOptimum optimize_symmetric(double lo = 0.0, double hi = 0.5,
                                    double tolerance = 1e-6);

struct GeneralOptimum {
  SettingQuad quad;  // gauge-normalized
  ChshReport report;
};

/// Nelder-Mead over the eight amplitudes and phases, amplitudes limited to
/// [0, amplitude_bound]. Restart 0 starts from `initial`; later restarts
/// start from seeded random points. Returns the best quad found.
GeneralOptimum optimize_general(const SettingQuad& initial,
                                double amplitude_bound = 1.5, int restarts = 20,
                                std::uint64_t seed = 1);

/// Runs the finite-bin pipeline for each setting pair: correlated state over
/// `bins`, dispersion on both arms, modulators, parity measurement.
ChshReport chsh_finite(const SettingQuad& quad, std::span<const int> bins,
                       const MeasurementModel& model = {},
                       const DispersionProfile& dispersion = {},
                       const TruncationPolicy& policy = {});

/// Finite-bin parity table for one setting pair.
ProbTable finite_probabilities(const ModulationSetting& a_setting,
                               const ModulationSetting& b_setting,
                               std::span<const int> bins,
                               const MeasurementModel& model = {},
                               const DispersionProfile& dispersion = {},
                               const TruncationPolicy& policy = {});

}  // namespace freqbin
