#pragma once

// Resolved run configuration shared by every CLI subcommand.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "freqbin/binspace.hpp"
#include "freqbin/specialfn.hpp"
#include "freqbin/types.hpp"

namespace freqbin {

struct RunConfig {
  // Metadata only: the discrete model depends on bin indices alone.
  double rf_frequency = 25e9;           // Hz, bin spacing
  double center_frequency = 193.125e12; // Hz, degenerate frequency
  std::vector<int> bins = bin_range(1, 6);
  TruncationPolicy truncation;
  MeasurementModel measurement;
  DispersionProfile dispersion;
  std::uint64_t seed = 1;

  void validate() const;
};

nlohmann::ordered_json config_to_json(const RunConfig& config);

/// "1..6", "-20..20" or "1,2,5"; throws std::invalid_argument.
std::vector<int> parse_bins(std::string_view text);
std::string format_bins(const std::vector<int>& bins);

/// "2:3.14159,5:-0.5" -> {2: 3.14159, 5: -0.5}; empty string -> {}.
std::map<int, double> parse_overrides(std::string_view text);

}  // namespace freqbin
