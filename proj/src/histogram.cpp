#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "freqbin/counts.hpp"
#include "freqbin/record_json.hpp"

namespace freqbin {

namespace {

constexpr std::string_view kHeaderPrefix = "# coincidence-histogram v1, bin_width_s=";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <class T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Histogram ingest_histogram(std::istream& source) {
  Histogram h;
  std::string raw;
  std::size_t line_no = 0;

  if (!std::getline(source, raw)) {
    throw DataError("empty histogram stream", 1);
  }
  ++line_no;
  const std::string_view header = trim(raw);
  if (header.substr(0, kHeaderPrefix.size()) != kHeaderPrefix ||
      !parse_number(header.substr(kHeaderPrefix.size()), h.bin_width) ||
      !(h.bin_width > 0.0)) {
    throw DataError("bad header, expected '" + std::string(kHeaderPrefix) +
                        "<positive float>'",
                    line_no);
  }

  while (std::getline(source, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 3) {
      throw DataError("expected 3 fields 'channel_pair,delay_bin_index,count'",
                      line_no);
    }
    Outcome outcome{};
    try {
      outcome = parse_outcome(trim(fields[0]));
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what(), line_no);
    }
    int index = 0;
    if (!parse_number(fields[1], index)) {
      throw DataError("delay_bin_index is not an integer", line_no);
    }
    std::int64_t count = 0;
    if (!parse_number(fields[2], count)) {
      throw DataError("count is not an integer", line_no);
    }
    if (count < 0) {
      throw DataError("negative count", line_no);
    }

    auto [it, fresh] = h.channels.try_emplace(outcome);
    DelayChannel& channel = it->second;
    if (fresh) {
      channel.first_bin = index;
    } else if (index <= channel.last_bin()) {
      throw DataError("non-monotone delay bins in channel " +
                          std::string(outcome_name(outcome)),
                      line_no);
    }
    const int missing = index - channel.first_bin -
                        static_cast<int>(channel.counts.size());
    channel.counts.insert(channel.counts.end(), static_cast<std::size_t>(missing), 0);
    channel.counts.push_back(count);
  }
  return h;
}

void emit_histogram(const Histogram& histogram, std::ostream& sink) {
  sink << kHeaderPrefix << format_double(histogram.bin_width) << '\n';
  for (const auto& [outcome, channel] : histogram.channels) {
    for (std::size_t i = 0; i < channel.counts.size(); ++i) {
      sink << outcome_name(outcome) << ','
           << channel.first_bin + static_cast<int>(i) << ','
           << channel.counts[i] << '\n';
    }
  }
}

nlohmann::ordered_json record_to_json(const CountRecord& record) {
  nlohmann::ordered_json j;
  j["setting_a"] = record.setting_labels.first;
  j["setting_b"] = record.setting_labels.second;
  j["duration_s"] = record.duration;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  nlohmann::ordered_json background = nlohmann::ordered_json::object();
  for (Outcome o : kOutcomes) {
    const auto k = static_cast<std::size_t>(o);
    counts[std::string(outcome_name(o))] = record.counts[k];
    background[std::string(outcome_name(o))] = record.background[k];
  }
  j["counts"] = std::move(counts);
  j["background"] = std::move(background);
  return j;
}

CountRecord record_from_json(const nlohmann::json& j) {
  CountRecord r;
  try {
    r.setting_labels = {j.at("setting_a").get<std::string>(),
                        j.at("setting_b").get<std::string>()};
    r.duration = j.at("duration_s").get<double>();
    for (Outcome o : kOutcomes) {
      const auto k = static_cast<std::size_t>(o);
      const std::string key(outcome_name(o));
      r.counts[k] = j.at("counts").at(key).get<std::int64_t>();
      r.background[k] = j.at("background").at(key).get<double>();
      if (r.counts[k] < 0 || r.background[k] < 0.0) {
        throw DataError("count record: negative " + key + " entry");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("count record: ") + e.what());
  }
  return r;
}

}  // namespace freqbin
