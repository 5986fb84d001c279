#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

inline nlohmann::json load_golden(const std::string& name) {
  std::ifstream f(std::string(FREQBIN_GOLDEN_DIR) + "/" + name);
  if (!f) throw std::runtime_error("missing golden file " + name);
  return nlohmann::json::parse(f);
}
