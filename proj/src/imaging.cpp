#include "herdtrack/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "herdtrack/error.hpp"
#include "herdtrack/image_io.hpp"

namespace herdtrack {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)), fill) {
  if (width < 1 || height < 1) throw Error(ErrorCode::Argument, "image dimensions must be >= 1");
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) throw Error(ErrorCode::Argument, "image dimensions must be >= 1");
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::Argument, "pixel buffer does not match dimensions");
  }
}

GrayImage GrayImage::crop(int x0, int y0, int x1, int y1) const {
  if (x0 < 0 || y0 < 0 || x1 >= width_ || y1 >= height_ || x1 < x0 || y1 < y0) {
    throw Error(ErrorCode::Argument, "crop rectangle outside image");
  }
  GrayImage out(x1 - x0 + 1, y1 - y0 + 1);
  for (int y = y0; y <= y1; ++y) {
    const auto* src = data_.data() + static_cast<std::size_t>(y) * width_ + x0;
    std::copy_n(src, out.width(), out.pixels().data() + static_cast<std::size_t>(y - y0) * out.width());
  }
  return out;
}

GrayImage to_gray(const Raster& rgb) {
  if (rgb.channels != 3) {
    throw Error(ErrorCode::Format, "expected 3 channels, got " + std::to_string(rgb.channels));
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(rgb.width) * rgb.height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double luma = 0.299 * rgb.data[3 * i] + 0.587 * rgb.data[3 * i + 1] + 0.114 * rgb.data[3 * i + 2];
    out[i] = static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
  }
  return GrayImage(rgb.width, rgb.height, std::move(out));
}

GrayImage as_gray(const Raster& raster) {
  const std::size_t n = static_cast<std::size_t>(raster.width) * raster.height;
  switch (raster.channels) {
    case 1: return GrayImage(raster.width, raster.height, raster.data);
    case 3: return to_gray(raster);
    case 2: {
      std::vector<std::uint8_t> out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = raster.data[2 * i];
      return GrayImage(raster.width, raster.height, std::move(out));
    }
    case 4: {
      Raster rgb{raster.width, raster.height, 3, std::vector<std::uint8_t>(3 * n)};
      for (std::size_t i = 0; i < n; ++i) std::copy_n(&raster.data[4 * i], 3, &rgb.data[3 * i]);
      return to_gray(rgb);
    }
    default: throw Error(ErrorCode::Format, "unsupported channel count " + std::to_string(raster.channels));
  }
}

Raster gray_to_rgb(const GrayImage& gray) {
  Raster out{gray.width(), gray.height(), 3, {}};
  out.data.reserve(gray.pixels().size() * 3);
  for (auto v : gray.pixels()) out.data.insert(out.data.end(), {v, v, v});
  return out;
}

std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext != ".png" && ext != ".pgm") continue;
    if (name.find(".mask.") != std::string::npos || name.find(".edge.") != std::string::npos ||
        name.find(".overlay.") != std::string::npos) {
      continue;
    }
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

FrameSequence load_sequence(const std::filesystem::path& source, int stride, int first, int last) {
  if (stride < 1) throw Error(ErrorCode::Argument, "stride must be positive");
  if (!std::filesystem::exists(source)) throw Error(ErrorCode::NotFound, "no such frame source: " + source.string());
  const auto files = list_frame_files(source);
  if (files.empty()) throw Error(ErrorCode::NotFound, "no frames in " + source.string());
  const int total = static_cast<int>(files.size());
  const int end = last < 0 ? total : std::min(last, total);
  if (first < 0 || first >= end) throw Error(ErrorCode::Argument, "frame range selects no frames");

  FrameSequence seq;
  seq.stride = stride;
  for (int idx = first; idx < end; idx += stride) {
    try {
      seq.frames.push_back(io::read_gray(files[static_cast<std::size_t>(idx)]));
    } catch (const Error& e) {
      throw Error(ErrorCode::Format, "frame " + std::to_string(idx) + " (" +
                                         files[static_cast<std::size_t>(idx)].filename().string() + "): " + e.what());
    }
    seq.frame_ids.push_back(idx);
  }
  return seq;
}

FrameSequence subsample(const FrameSequence& seq, int k) {
  if (k < 1) throw Error(ErrorCode::Argument, "subsample factor must be positive");
  FrameSequence out;
  out.stride = seq.stride * k;
  for (std::size_t i = 0; i < seq.size(); i += static_cast<std::size_t>(k)) {
    out.frames.push_back(seq.frames[i]);
    out.frame_ids.push_back(seq.frame_ids[i]);
  }
  return out;
}

}  // namespace herdtrack
