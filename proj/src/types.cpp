#include "freqbin/types.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace freqbin {

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::EE:
      return "EE";
    case Outcome::EO:
      return "EO";
    case Outcome::OE:
      return "OE";
    case Outcome::OO:
      return "OO";
  }
  return "??";
}

Outcome parse_outcome(std::string_view name) {
  for (Outcome o : kOutcomes) {
    if (outcome_name(o) == name) {
      return o;
    }
  }
  throw std::invalid_argument("unknown outcome '" + std::string(name) +
                              "' (expected EE, EO, OE or OO)");
}

ModulationSetting::ModulationSetting(double amplitude, double phase)
    : amplitude_(amplitude) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw std::invalid_argument("modulation amplitude must be finite and >= 0");
  }
  if (!std::isfinite(phase)) {
    throw std::invalid_argument("modulation phase must be finite");
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  phase_ = std::fmod(phase, two_pi);
  if (phase_ < 0.0) {
    phase_ += two_pi;
  }
  if (phase_ >= two_pi) {
    phase_ = 0.0;
  }
}

double ProbTable::operator[](Outcome o) const {
  switch (o) {
    case Outcome::EE:
      return p_ee;
    case Outcome::EO:
      return p_eo;
    case Outcome::OE:
      return p_oe;
    case Outcome::OO:
      return p_oo;
  }
  return 0.0;
}

double& ProbTable::operator[](Outcome o) {
  switch (o) {
    case Outcome::EE:
      return p_ee;
    case Outcome::EO:
      return p_eo;
    case Outcome::OE:
      return p_oe;
    case Outcome::OO:
      break;
  }
  return p_oo;
}

ProbTable with_crosstalk(const ProbTable& t, double chi) {
  if (!(chi >= 0.0 && chi <= 0.5)) {
    throw std::invalid_argument("crosstalk must lie in [0, 0.5]");
  }
  const double keep = 1.0 - chi;
  const double kk = keep * keep;
  const double kf = keep * chi;
  const double ff = chi * chi;
  ProbTable out;
  out.p_ee = kk * t.p_ee + kf * (t.p_eo + t.p_oe) + ff * t.p_oo;
  out.p_eo = kk * t.p_eo + kf * (t.p_ee + t.p_oo) + ff * t.p_oe;
  out.p_oe = kk * t.p_oe + kf * (t.p_ee + t.p_oo) + ff * t.p_eo;
  out.p_oo = kk * t.p_oo + kf * (t.p_eo + t.p_oe) + ff * t.p_ee;
  return out;
}

double crosstalk_from_extinction_db(double extinction_db) {
  return 1.0 / (1.0 + std::pow(10.0, extinction_db / 10.0));
}

void MeasurementModel::validate() const {
  if (!(crosstalk >= 0.0 && crosstalk <= 0.5)) {
    throw std::invalid_argument("crosstalk must lie in [0, 0.5]");
  }
  if (!(efficiency > 0.0 && efficiency <= 1.0)) {
    throw std::invalid_argument("efficiency must lie in (0, 1]");
  }
  if (!(pair_rate >= 0.0) || !(accidental_rate >= 0.0)) {
    throw std::invalid_argument("rates must be >= 0");
  }
  if (!(duration > 0.0)) {
    throw std::invalid_argument("duration must be > 0");
  }
}

}  // namespace freqbin
