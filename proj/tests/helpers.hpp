#pragma once

#include "uavee/config.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace testing {

inline uavee::ScenarioConfig tiny_config() { return uavee::load_config(UAVEE_TEST_DATA "/tiny.json"); }

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("uavee_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing
