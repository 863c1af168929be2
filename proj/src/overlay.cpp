#include "herdtrack/overlay.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace herdtrack::overlay {
namespace {

void put(Raster& img, int x, int y, Color c) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  auto* px = &img.data[(static_cast<std::size_t>(y) * img.width + x) * 3];
  px[0] = c[0];
  px[1] = c[1];
  px[2] = c[2];
}

// Rows of 3-bit masks, most significant bit leftmost.
std::array<std::uint8_t, 5> glyph(char ch) {
  switch (ch) {
    case '0': return {7, 5, 5, 5, 7};
    case '1': return {2, 6, 2, 2, 7};
    case '2': return {7, 1, 7, 4, 7};
    case '3': return {7, 1, 7, 1, 7};
    case '4': return {5, 5, 7, 1, 1};
    case '5': return {7, 4, 7, 1, 7};
    case '6': return {7, 4, 7, 5, 7};
    case '7': return {7, 1, 1, 1, 1};
    case '8': return {7, 5, 7, 5, 7};
    case '9': return {7, 5, 7, 1, 7};
    case '.': return {0, 0, 0, 0, 2};
    case ':': return {0, 2, 0, 2, 0};
    case 'T': return {7, 2, 2, 2, 2};
    case 'D': return {6, 5, 5, 5, 6};
    case 'P': return {7, 5, 7, 4, 4};
    case 'N': return {5, 7, 7, 7, 5};
    default: return {0, 0, 0, 0, 0};
  }
}

std::string vote_text(int id, const Prediction& p) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%d:%d %.2f", id, p.label, p.vote_fraction);
  return buf;
}

}  // namespace

void draw_line(Raster& img, Point a, Point b, Color c) {
  int dx = std::abs(b.x - a.x), sx = a.x < b.x ? 1 : -1;
  int dy = -std::abs(b.y - a.y), sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    put(img, a.x, a.y, c);
    if (a.x == b.x && a.y == b.y) break;
    const int e2 = 2 * err;
    if (e2 >= dy) { err += dy; a.x += sx; }
    if (e2 <= dx) { err += dx; a.y += sy; }
  }
}

void draw_rect(Raster& img, const BBox& box, Color c) {
  draw_line(img, {box.x_min, box.y_min}, {box.x_max, box.y_min}, c);
  draw_line(img, {box.x_max, box.y_min}, {box.x_max, box.y_max}, c);
  draw_line(img, {box.x_max, box.y_max}, {box.x_min, box.y_max}, c);
  draw_line(img, {box.x_min, box.y_max}, {box.x_min, box.y_min}, c);
}

void draw_polygon(Raster& img, std::span<const Point> polygon, Color c) {
  for (std::size_t i = 0; i < polygon.size(); ++i) draw_line(img, polygon[i], polygon[(i + 1) % polygon.size()], c);
}

void draw_text(Raster& img, Point top_left, std::string_view text, Color c, int scale) {
  int pen = top_left.x;
  for (char ch : text) {
    const auto rows = glyph(ch);
    for (int r = 0; r < 5; ++r) {
      for (int col = 0; col < 3; ++col) {
        if (!(rows[static_cast<std::size_t>(r)] & (4 >> col))) continue;
        for (int sy = 0; sy < scale; ++sy) {
          for (int sx = 0; sx < scale; ++sx) put(img, pen + col * scale + sx, top_left.y + r * scale + sy, c);
        }
      }
    }
    pen += 4 * scale;
  }
}

Raster render_track(const GrayImage& frame, const TrackResult& result) {
  Raster img = gray_to_rgb(frame);
  for (std::size_t i = 0; i < result.instances.size(); ++i) {
    const auto& t = result.instances[i];
    const bool selected = result.selected && *result.selected == static_cast<int>(i);
    const Color c = selected ? kSelected : (t.prediction.label == 1 ? kExtraPositive : kNegative);
    draw_polygon(img, t.hull, c);
    draw_rect(img, t.bbox, c);
    draw_text(img, {t.bbox.x_min + 2, t.bbox.y_min + 2}, vote_text(static_cast<int>(i), t.prediction), c);
  }
  return img;
}

Raster render_instances(const GrayImage& frame, std::span<const Instance> instances, int highlight) {
  Raster img = gray_to_rgb(frame);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Color c = static_cast<int>(i) == highlight ? kSelected : kNegative;
    draw_polygon(img, instances[i].hull, c);
    draw_rect(img, instances[i].bbox, c);
    draw_text(img, {instances[i].bbox.x_min + 2, instances[i].bbox.y_min + 2}, std::to_string(i), c);
  }
  return img;
}

}  // namespace herdtrack::overlay
