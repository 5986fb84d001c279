#pragma once

// Infinite-comb model: the coincidence statistics depend on the two
// modulator drives only through the amplitude of their phasor sum.

#include "freqbin/types.hpp"

namespace freqbin {

struct EffectiveDrive {
  double d = 0.0;      // combined amplitude, >= 0
  double delta = 0.0;  // combined phase, radians
};

/// d^2 = a^2 + b^2 + 2ab cos(alpha - beta), delta = atan2(...); delta = 0
/// when d = 0.
EffectiveDrive effective_drive(const ModulationSetting& a_setting,
                               const ModulationSetting& b_setting);

/// P(EE) = P(OO) = (1 + J0(2d)) / 4, P(EO) = P(OE) = (1 - J0(2d)) / 4.
ProbTable ideal_probabilities(const EffectiveDrive& drive);

inline ProbTable ideal_probabilities(const ModulationSetting& a_setting,
                                     const ModulationSetting& b_setting) {
  return ideal_probabilities(effective_drive(a_setting, b_setting));
}

inline constexpr int kDefaultQuadraturePoints = 256;

/// Averages cos^2 / sin^2 of theta_A(phi) + theta_B(phi) over phi in [0, pi)
/// with an equally spaced rule. Independent of the Bessel route; used as an
/// oracle for ideal_probabilities. Requires at least 64 points.
ProbTable phase_average_oracle(const ModulationSetting& a_setting,
                               const ModulationSetting& b_setting,
                               int quadrature_points = kDefaultQuadraturePoints);

}  // namespace freqbin
