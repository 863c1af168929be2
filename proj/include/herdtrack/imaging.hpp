#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace herdtrack {

/// Row-major 8-bit single-channel image. Width and height are at least 1.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  std::uint8_t operator()(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::uint8_t& operator()(int x, int y) noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<const std::uint8_t> pixels() const noexcept { return data_; }
  std::span<std::uint8_t> pixels() noexcept { return data_; }

  /// Copy of the inclusive rectangle [x0,x1]x[y0,y1], which must lie inside the image.
  GrayImage crop(int x0, int y0, int x1, int y1) const;

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Interleaved 8-bit raster with an arbitrary channel count, as decoded from disk.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  friend bool operator==(const Raster&, const Raster&) = default;
};

/// ITU-R 601 luma, rounded and clamped. Throws Format unless channels == 3.
GrayImage to_gray(const Raster& rgb);

/// Gray view of a decoded raster: 1 channel passes through, 3 channels go
/// through to_gray, 2/4 channels drop alpha first.
GrayImage as_gray(const Raster& raster);

Raster gray_to_rgb(const GrayImage& gray);

struct FrameSequence {
  std::vector<GrayImage> frames;
  std::vector<int> frame_ids;  ///< source indices, strictly increasing by `stride`
  int stride = 1;

  std::size_t size() const noexcept { return frames.size(); }
  bool empty() const noexcept { return frames.empty(); }
};

/// Frame files (.png / .pgm) of a directory in lexicographic order. Derived
/// artefacts (`*.mask.png`, `*.edge.png`, `*.overlay.png`) are skipped.
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir);

/// Load source frames 0, stride, 2*stride, ... from a directory.
/// `first`/`last` bound the source index range [first, last) before striding.
FrameSequence load_sequence(const std::filesystem::path& source, int stride,
                            int first = 0, int last = -1);

/// Every k-th frame of an already loaded sequence.
FrameSequence subsample(const FrameSequence& seq, int k);

}  // namespace herdtrack
