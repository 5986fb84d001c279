#pragma once

// Value types shared across the simulation, Bell and statistics layers.

#include <array>
#include <cstddef>
#include <string_view>

namespace freqbin {

enum class Arm { A, B };

/// Joint parity outcome; E is an even bin index, O an odd one.
enum class Outcome : std::size_t { EE = 0, EO = 1, OE = 2, OO = 3 };

inline constexpr std::array<Outcome, 4> kOutcomes = {Outcome::EE, Outcome::EO,
                                                     Outcome::OE, Outcome::OO};

std::string_view outcome_name(Outcome o);

/// Parses "EE", "EO", "OE" or "OO"; throws std::invalid_argument otherwise.
Outcome parse_outcome(std::string_view name);

/// RF drive of one phase modulator: normalized amplitude c = pi v / V_pi
/// and phase in radians, stored canonicalized to [0, 2 pi).
class ModulationSetting {
 public:
  ModulationSetting() = default;
  ModulationSetting(double amplitude, double phase);

  double amplitude() const noexcept { return amplitude_; }
  double phase() const noexcept { return phase_; }

  friend bool operator==(const ModulationSetting&,
                         const ModulationSetting&) = default;

 private:
  double amplitude_ = 0.0;
  double phase_ = 0.0;
};

/// Joint parity probabilities P(x, y).
struct ProbTable {
  double p_ee = 0.0;
  double p_eo = 0.0;
  double p_oe = 0.0;
  double p_oo = 0.0;

  double operator[](Outcome o) const;
  double& operator[](Outcome o);

  double total() const { return p_ee + p_eo + p_oe + p_oo; }

  /// P(EE) - P(EO) - P(OE) + P(OO)
  double correlator() const { return p_ee - p_eo - p_oe + p_oo; }
};

/// Each photon's parity label flips independently with probability chi.
ProbTable with_crosstalk(const ProbTable& table, double chi);

/// Parity-flip probability from an interleaver extinction ratio in dB.
double crosstalk_from_extinction_db(double extinction_db);

struct MeasurementModel {
  double crosstalk = 0.0;        // parity-flip probability, [0, 1/2]
  double efficiency = 1.0;       // (0, 1]
  double pair_rate = 1.5;        // true coincidences, Hz
  double accidental_rate = 0.75; // flat background over all outcomes, Hz
  double duration = 1800.0;      // s per setting pair

  void validate() const;
};

}  // namespace freqbin
