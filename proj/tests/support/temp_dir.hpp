#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace hogs::testing {

namespace fs = std::filesystem;

// Fresh, empty directory under the build tree's scratch area.
inline std::filesystem::path temp_dir(const std::string& name) {
  const std::filesystem::path p = std::filesystem::path(HOGS_TEST_TMP) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace hogs::testing
