#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "herdtrack/imaging.hpp"
#include "herdtrack/segmentation.hpp"

namespace testing_support {

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("herdtrack-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

/// Filled rectangle of class 1 in a mask, inclusive bounds.
inline void fill_rect(herdtrack::SemanticMask& m, int x0, int y0, int x1, int y1) {
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) m(x, y) = 1;
}

/// One-pixel wall of strength 1 around the inclusive rectangle.
inline void draw_square_contour(herdtrack::EdgeMap& e, int x0, int y0, int x1, int y1) {
  for (int x = x0; x <= x1; ++x) e(x, y0) = e(x, y1) = 1.0f;
  for (int y = y0; y <= y1; ++y) e(x0, y) = e(x1, y) = 1.0f;
}

}  // namespace testing_support
