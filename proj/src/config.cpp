#include "freqbin/config.hpp"

#include <charconv>
#include <set>
#include <stdexcept>

namespace freqbin {

namespace {

template <class T>
T parse_or_throw(std::string_view text, std::string_view what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("cannot parse " + std::string(what) + " '" +
                                std::string(text) + "'");
  }
  return value;
}

}  // namespace

void RunConfig::validate() const {
  if (!(rf_frequency > 0.0)) {
    throw std::invalid_argument("rf_frequency must be > 0");
  }
  if (bins.empty()) {
    throw std::invalid_argument("bins must not be empty");
  }
  if (std::set<int>(bins.begin(), bins.end()).size() != bins.size()) {
    throw std::invalid_argument("bins must be distinct");
  }
  truncation.validate();
  measurement.validate();
}

std::vector<int> parse_bins(std::string_view text) {
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    const int lo = parse_or_throw<int>(text.substr(0, dots), "bin");
    const int hi = parse_or_throw<int>(text.substr(dots + 2), "bin");
    if (lo > hi) {
      throw std::invalid_argument("empty bin range '" + std::string(text) + "'");
    }
    return bin_range(lo, hi);
  }
  std::vector<int> bins;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t stop = comma == std::string_view::npos ? text.size() : comma;
    bins.push_back(parse_or_throw<int>(text.substr(start, stop - start), "bin"));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return bins;
}

std::string format_bins(const std::vector<int>& bins) {
  bool contiguous = !bins.empty();
  for (std::size_t i = 1; i < bins.size(); ++i) {
    contiguous = contiguous && bins[i] == bins[i - 1] + 1;
  }
  if (contiguous && bins.size() > 1) {
    return std::to_string(bins.front()) + ".." + std::to_string(bins.back());
  }
  std::string out;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(bins[i]);
  }
  return out;
}

std::map<int, double> parse_overrides(std::string_view text) {
  std::map<int, double> out;
  if (text.empty()) {
    return out;
  }
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = text.find(',', start);
    const std::string_view item =
        text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    const std::size_t colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw std::invalid_argument("dispersion override '" + std::string(item) +
                                  "' is not bin:phase");
    }
    out[parse_or_throw<int>(item.substr(0, colon), "bin")] =
        parse_or_throw<double>(item.substr(colon + 1), "phase");
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

nlohmann::ordered_json config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["rf_frequency_hz"] = c.rf_frequency;
  j["center_frequency_hz"] = c.center_frequency;
  j["bins"] = c.bins;
  j["truncation"] = {{"epsilon", c.truncation.epsilon},
                     {"max_order", c.truncation.max_order}};
  j["measurement"] = {{"crosstalk", c.measurement.crosstalk},
                      {"efficiency", c.measurement.efficiency},
                      {"pair_rate_hz", c.measurement.pair_rate},
                      {"accidental_rate_hz", c.measurement.accidental_rate},
                      {"duration_s", c.measurement.duration}};
  nlohmann::ordered_json overrides = nlohmann::ordered_json::object();
  for (const auto& [bin, phi] : c.dispersion.per_bin_overrides) {
    overrides[std::to_string(bin)] = phi;
  }
  j["dispersion"] = {{"quadratic_coefficient", c.dispersion.quadratic_coefficient},
                     {"per_bin_overrides", overrides}};
  j["seed"] = c.seed;
  return j;
}

}  // namespace freqbin
