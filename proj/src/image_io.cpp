#include "herdtrack/image_io.hpp"

#include <png.h>

#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "herdtrack/error.hpp"

namespace herdtrack::io {
namespace {

bool is_png(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0;
}

Raster decode_png(std::span<const std::uint8_t> bytes, const std::string& name) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::Format, name + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const bool alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  image.format = color ? (alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB)
                       : (alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);
  Raster out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.channels = static_cast<int>(PNG_IMAGE_SAMPLE_CHANNELS(image.format));
  out.data.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::Format, name + ": " + msg);
  }
  return out;
}

// Netpbm header token, skipping whitespace and '#' comments.
int read_pgm_int(std::span<const std::uint8_t> bytes, std::size_t& pos, const std::string& name) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const auto* begin = reinterpret_cast<const char*>(bytes.data()) + pos;
  const auto* end = reinterpret_cast<const char*>(bytes.data()) + bytes.size();
  int value = 0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr == begin) throw Error(ErrorCode::Format, name + ": malformed PGM header");
  pos += static_cast<std::size_t>(ptr - begin);
  return value;
}

Raster decode_pgm(std::span<const std::uint8_t> bytes, const std::string& name) {
  std::size_t pos = 2;
  const int w = read_pgm_int(bytes, pos, name);
  const int h = read_pgm_int(bytes, pos, name);
  const int maxval = read_pgm_int(bytes, pos, name);
  if (w < 1 || h < 1) throw Error(ErrorCode::Format, name + ": PGM dimensions must be positive");
  if (maxval < 1 || maxval > 255) throw Error(ErrorCode::Format, name + ": only 8-bit PGM is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw Error(ErrorCode::Format, name + ": malformed PGM header");
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - pos < n) throw Error(ErrorCode::Format, name + ": truncated PGM data");
  Raster out{w, h, 1, std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                                bytes.begin() + static_cast<std::ptrdiff_t>(pos + n))};
  return out;
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

Raster decode_image(std::span<const std::uint8_t> bytes, const std::string& name) {
  if (is_png(bytes)) return decode_png(bytes, name);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes, name);
  throw Error(ErrorCode::Format, name + ": not a PNG or binary PGM file");
}

Raster read_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_image(bytes, path.string());
}

GrayImage read_gray(const std::filesystem::path& path) { return as_gray(read_image(path)); }

std::vector<std::uint8_t> encode_png(const Raster& raster) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width);
  image.height = static_cast<png_uint_32>(raster.height);
  switch (raster.channels) {
    case 1: image.format = PNG_FORMAT_GRAY; break;
    case 2: image.format = PNG_FORMAT_GA; break;
    case 3: image.format = PNG_FORMAT_RGB; break;
    case 4: image.format = PNG_FORMAT_RGBA; break;
    default: throw Error(ErrorCode::Format, "unsupported channel count " + std::to_string(raster.channels));
  }
  image.flags = PNG_IMAGE_FLAG_FAST;
  // Worst-case bound avoids a second full encode just to size the buffer.
  png_alloc_size_t size = PNG_IMAGE_PNG_SIZE_MAX(image);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, raster.data.data(), 0, nullptr)) {
    throw Error(ErrorCode::Io, std::string("png encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> encode_png(const GrayImage& gray) {
  const auto px = gray.pixels();
  return encode_png(Raster{gray.width(), gray.height(), 1, {px.begin(), px.end()}});
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& gray) {
  const std::string header =
      "P5\n" + std::to_string(gray.width()) + " " + std::to_string(gray.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const auto px = gray.pixels();
  out.insert(out.end(), px.begin(), px.end());
  return out;
}

void write_png(const std::filesystem::path& path, const Raster& raster) { write_file(path, encode_png(raster)); }
void write_png(const std::filesystem::path& path, const GrayImage& gray) { write_file(path, encode_png(gray)); }
void write_pgm(const std::filesystem::path& path, const GrayImage& gray) { write_file(path, encode_pgm(gray)); }

}  // namespace herdtrack::io
