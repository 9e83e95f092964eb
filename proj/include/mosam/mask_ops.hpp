#pragma once

#include <span>
#include <vector>

#include "mosam/grid.hpp"

namespace mosam {

/// Intersection-over-union of two same-sized masks.
/// Both empty -> 1.0, exactly one empty -> 0.0.
double iou(Mask const &a, Mask const &b);

/// Mean foreground position. Throws on an empty mask.
Point centroid(Mask const &m);

/// Tightest box containing all foreground pixels. Throws on an empty mask.
Box bounding_box(Mask const &m);

/// Foreground pixels with at least one 4-neighbor that is background or
/// outside the frame. Row-major order.
std::vector<Pixel> boundary_pixels(Mask const &m);

/// Union of Euclidean discs of the given radius around each pixel, clipped to
/// width x height. Radius 0 keeps the input set (deduplicated, sorted).
std::vector<Pixel> dilate(std::span<Pixel const> pixels, double radius, int width, int height);

/// dilate() applied to a mask's foreground.
Mask dilate_mask(Mask const &m, double radius);

/// Morphological erosion with the same disc. Pixels outside the frame count
/// as foreground so a solid region touching the border survives closing.
Mask erode_mask(Mask const &m, double radius);

/// Dilation followed by erosion at the same radius.
Mask close_mask(Mask const &m, double radius);

/// Shift foreground by (dx, dy); pixels leaving the frame are dropped.
Mask translate_mask(Mask const &m, int dx, int dy);

/// IoU of two boxes in pixel counts (inclusive bounds).
double box_iou(Box const &a, Box const &b);

/// Clip a box to [0, width) x [0, height). Throws if nothing remains.
Box clip_box(Box const &b, int width, int height);

} // namespace mosam
