#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mosam {

/// Continuous image position. Pixel (i, j) has its center at (i, j).
struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Integer pixel coordinate.
struct Pixel {
    int x = 0;
    int y = 0;

    friend bool operator==(Pixel const &a, Pixel const &b) { return a.x == b.x && a.y == b.y; }
    friend bool operator<(Pixel const &a, Pixel const &b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    }
};

/// Inclusive axis-aligned pixel rectangle.
struct Box {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    int width() const { return x_max - x_min + 1; }
    int height() const { return y_max - y_min + 1; }
    long long area() const { return static_cast<long long>(width()) * height(); }
    Point center() const { return {(x_min + x_max) / 2.0, (y_min + y_max) / 2.0}; }

    friend bool operator==(Box const &a, Box const &b) {
        return a.x_min == b.x_min && a.y_min == b.y_min && a.x_max == b.x_max && a.y_max == b.y_max;
    }
};

namespace detail {
inline void check_dims(int width, int height, char const *what) {
    if (width < 1 || height < 1)
        throw std::invalid_argument(std::string(what) + ": dimensions must be at least 1x1");
}
} // namespace detail

/// Binary mask over a pixel grid, row-major, 1 = foreground.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> cells;

    Mask() = default;
    Mask(int w, int h) : width(w), height(h), cells(static_cast<std::size_t>(w) * h, 0) {
        detail::check_dims(w, h, "Mask");
    }

    bool contains(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    bool at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { cells[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }

    std::size_t area() const {
        std::size_t n = 0;
        for (auto c : cells) n += c != 0;
        return n;
    }
    bool empty() const { return area() == 0; }
    bool same_size(Mask const &o) const { return width == o.width && height == o.height; }

    friend bool operator==(Mask const &a, Mask const &b) {
        return a.width == b.width && a.height == b.height && a.cells == b.cells;
    }
};

/// Per-pixel probability map, values in [0, 1].
struct ProbMap {
    int width = 0;
    int height = 0;
    std::vector<float> values;

    ProbMap() = default;
    ProbMap(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0f) {
        detail::check_dims(w, h, "ProbMap");
    }

    float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, float v) { values[static_cast<std::size_t>(y) * width + x] = v; }

    /// Mask of pixels with value strictly above the threshold.
    Mask threshold(double tau) const {
        Mask m(width, height);
        for (std::size_t i = 0; i < values.size(); ++i) m.cells[i] = values[i] > tau ? 1 : 0;
        return m;
    }
};

/// Grayscale frame, intensities in [0, 1].
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<float> intensity;

    Frame() = default;
    Frame(int w, int h) : width(w), height(h), intensity(static_cast<std::size_t>(w) * h, 0.0f) {
        detail::check_dims(w, h, "Frame");
    }

    float at(int x, int y) const { return intensity[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, float v) { intensity[static_cast<std::size_t>(y) * width + x] = v; }
    bool same_size(Frame const &o) const { return width == o.width && height == o.height; }
};

} // namespace mosam
