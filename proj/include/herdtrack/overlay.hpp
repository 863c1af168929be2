#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "herdtrack/geometry.hpp"
#include "herdtrack/imaging.hpp"
#include "herdtrack/tracker.hpp"

namespace herdtrack::overlay {

using Color = std::array<std::uint8_t, 3>;

inline constexpr Color kSelected{40, 220, 60};
inline constexpr Color kExtraPositive{230, 50, 40};
inline constexpr Color kNegative{70, 140, 255};

void draw_line(Raster& img, Point a, Point b, Color c);
void draw_rect(Raster& img, const BBox& box, Color c);
void draw_polygon(Raster& img, std::span<const Point> polygon, Color c);
/// 3x5 pixel glyphs for digits, '.', ':' and upper-case letters; others render blank.
void draw_text(Raster& img, Point top_left, std::string_view text, Color c, int scale = 2);

/// Hull outline, bbox and "<id>:<label> <vote>" for every tracked instance.
Raster render_track(const GrayImage& frame, const TrackResult& result);

/// Hull, bbox and id for plain segmented instances; `highlight` drawn in the selected colour.
Raster render_instances(const GrayImage& frame, std::span<const Instance> instances, int highlight = -1);

}  // namespace herdtrack::overlay
