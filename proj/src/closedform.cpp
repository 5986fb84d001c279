#include "freqbin/closedform.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "freqbin/specialfn.hpp"

namespace freqbin {

EffectiveDrive effective_drive(const ModulationSetting& a_setting,
                               const ModulationSetting& b_setting) {
  const double a = a_setting.amplitude();
  const double b = b_setting.amplitude();
  const double alpha = a_setting.phase();
  const double beta = b_setting.phase();

  // Sum the phasors directly; equals sqrt(a^2 + b^2 + 2ab cos(alpha - beta))
  // without the cancellation that formula suffers near d = 0.
  const double x = a * std::cos(alpha) + b * std::cos(beta);
  const double y = a * std::sin(alpha) + b * std::sin(beta);
  EffectiveDrive drive;
  drive.d = std::hypot(x, y);
  // rounding floor of the phasor sum
  if (drive.d <= 4.0 * std::numeric_limits<double>::epsilon() * (a + b)) {
    drive.d = 0.0;
  }
  drive.delta = drive.d == 0.0 ? 0.0 : std::atan2(y, x);
  return drive;
}

ProbTable ideal_probabilities(const EffectiveDrive& drive) {
  const double j0 = bessel_j(0, 2.0 * drive.d);
  ProbTable t;
  t.p_ee = t.p_oo = 0.25 * (1.0 + j0);
  t.p_eo = t.p_oe = 0.25 * (1.0 - j0);
  return t;
}

ProbTable phase_average_oracle(const ModulationSetting& a_setting,
                               const ModulationSetting& b_setting,
                               int quadrature_points) {
  if (quadrature_points < 64) {
    throw std::invalid_argument("phase_average_oracle: need >= 64 points, got " +
                                std::to_string(quadrature_points));
  }
  // cos^2(theta(phi)) is pi-periodic, so the rectangle rule converges
  // spectrally.
  const double step = std::numbers::pi / quadrature_points;
  double even_sum = 0.0;
  double odd_sum = 0.0;
  for (int k = 0; k < quadrature_points; ++k) {
    const double phi = k * step;
    const double theta =
        a_setting.amplitude() * std::cos(phi - a_setting.phase()) +
        b_setting.amplitude() * std::cos(phi - b_setting.phase());
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    even_sum += c * c;
    odd_sum += s * s;
  }
  // (1 / 2pi) * integral over [0, pi)
  const double scale = 1.0 / (2.0 * quadrature_points);
  ProbTable t;
  t.p_ee = t.p_oo = scale * even_sum;
  t.p_eo = t.p_oe = scale * odd_sum;
  return t;
}

}  // namespace freqbin
