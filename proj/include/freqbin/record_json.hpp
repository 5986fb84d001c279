#pragma once

// JSON form of CountRecord:
//   {"setting_a": "...", "setting_b": "...", "duration_s": 1800.0,
//    "counts": {"EE": n, "EO": n, "OE": n, "OO": n},
//    "background": {"EE": x, "EO": x, "OE": x, "OO": x}}

#include <json.hpp>

#include "freqbin/counts.hpp"

namespace freqbin {

nlohmann::ordered_json record_to_json(const CountRecord& record);

/// Throws DataError on missing keys, wrong types or negative values.
CountRecord record_from_json(const nlohmann::json& j);

}  // namespace freqbin
