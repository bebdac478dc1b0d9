#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include "cchain/kb_json.hpp"

namespace testsupport {

inline std::string data_path(const std::string& rel) { return std::string(CCHAIN_DATA_DIR) + "/" + rel; }

inline std::shared_ptr<const cchain::KnowledgeBase> demo_kb() {
  static auto kb = cchain::load_kb(data_path("demo/kb.json"));
  return kb;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cchain_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Fixed-seed generator so failures reproduce.
inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }
inline int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }

}  // namespace testsupport
