#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "herdtrack/imaging.hpp"

namespace herdtrack::io {

/// Decode an 8-bit PNG (gray, gray+alpha, RGB, RGBA) or a binary PGM (P5).
/// The format is chosen from the file signature, not the extension.
Raster read_image(const std::filesystem::path& path);
Raster decode_image(std::span<const std::uint8_t> bytes, const std::string& name = "<memory>");

GrayImage read_gray(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const Raster& raster);
std::vector<std::uint8_t> encode_png(const GrayImage& gray);
std::vector<std::uint8_t> encode_pgm(const GrayImage& gray);

void write_png(const std::filesystem::path& path, const Raster& raster);
void write_png(const std::filesystem::path& path, const GrayImage& gray);
void write_pgm(const std::filesystem::path& path, const GrayImage& gray);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace herdtrack::io
