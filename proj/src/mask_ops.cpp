#include "mosam/mask_ops.hpp"

#include <algorithm>
#include <cmath>

namespace mosam {

namespace {

void require_same_size(Mask const &a, Mask const &b, char const *what) {
    if (!a.same_size(b)) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

// Integer offsets within Euclidean distance `radius` of the origin.
std::vector<Pixel> disc_offsets(double radius) {
    int const r = static_cast<int>(std::floor(radius));
    double const r2 = radius * radius + 1e-9;
    std::vector<Pixel> out;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            if (dx * dx + dy * dy <= r2) out.push_back({dx, dy});
    return out;
}

} // namespace

double iou(Mask const &a, Mask const &b) {
    require_same_size(a, b, "iou");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        bool const fa = a.cells[i] != 0, fb = b.cells[i] != 0;
        inter += fa && fb;
        uni += fa || fb;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

Point centroid(Mask const &m) {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.at(x, y)) {
                sx += x;
                sy += y;
                ++n;
            }
    if (n == 0) throw std::invalid_argument("centroid: empty mask");
    return {sx / n, sy / n};
}

Box bounding_box(Mask const &m) {
    Box box{m.width, m.height, -1, -1};
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.at(x, y)) {
                box.x_min = std::min(box.x_min, x);
                box.y_min = std::min(box.y_min, y);
                box.x_max = std::max(box.x_max, x);
                box.y_max = std::max(box.y_max, y);
            }
    if (box.x_max < 0) throw std::invalid_argument("bounding_box: empty mask");
    return box;
}

std::vector<Pixel> boundary_pixels(Mask const &m) {
    std::vector<Pixel> out;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            bool const edge = x == 0 || !m.at(x - 1, y) || x == m.width - 1 || !m.at(x + 1, y) ||
                              y == 0 || !m.at(x, y - 1) || y == m.height - 1 || !m.at(x, y + 1);
            if (edge) out.push_back({x, y});
        }
    return out;
}

std::vector<Pixel> dilate(std::span<Pixel const> pixels, double radius, int width, int height) {
    detail::check_dims(width, height, "dilate");
    if (radius < 0.0) throw std::invalid_argument("dilate: negative radius");
    auto const offsets = disc_offsets(radius);
    Mask hit(width, height);
    for (auto const &p : pixels)
        for (auto const &d : offsets) {
            int const x = p.x + d.x, y = p.y + d.y;
            if (hit.contains(x, y)) hit.set(x, y, true);
        }
    std::vector<Pixel> out;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (hit.at(x, y)) out.push_back({x, y});
    return out;
}

Mask dilate_mask(Mask const &m, double radius) {
    auto const offsets = disc_offsets(radius);
    Mask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            for (auto const &d : offsets) {
                int const nx = x + d.x, ny = y + d.y;
                if (out.contains(nx, ny)) out.set(nx, ny, true);
            }
        }
    return out;
}

Mask erode_mask(Mask const &m, double radius) {
    auto const offsets = disc_offsets(radius);
    Mask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            bool keep = m.at(x, y);
            for (auto const &d : offsets) {
                if (!keep) break;
                int const nx = x + d.x, ny = y + d.y;
                if (m.contains(nx, ny) && !m.at(nx, ny)) keep = false;
            }
            out.set(x, y, keep);
        }
    return out;
}

Mask close_mask(Mask const &m, double radius) { return erode_mask(dilate_mask(m, radius), radius); }

Mask translate_mask(Mask const &m, int dx, int dy) {
    Mask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            int const nx = x + dx, ny = y + dy;
            if (out.contains(nx, ny)) out.set(nx, ny, true);
        }
    return out;
}

double box_iou(Box const &a, Box const &b) {
    long long const ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min) + 1;
    long long const iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min) + 1;
    long long const inter = std::max(0LL, ix) * std::max(0LL, iy);
    long long const uni = a.area() + b.area() - inter;
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

Box clip_box(Box const &b, int width, int height) {
    Box out{std::max(b.x_min, 0), std::max(b.y_min, 0), std::min(b.x_max, width - 1),
            std::min(b.y_max, height - 1)};
    if (out.x_min > out.x_max || out.y_min > out.y_max)
        throw std::invalid_argument("clip_box: box entirely outside frame");
    return out;
}

} // namespace mosam
