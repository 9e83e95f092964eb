#include "mosam/motion_sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mosam/mask_ops.hpp"

namespace mosam {

MotionHistory::MotionHistory(int capacity) : capacity_(capacity) {
    if (capacity < 2) throw std::invalid_argument("MotionHistory: capacity must be at least 2");
}

void MotionHistory::push(KeyPointSet set) {
    if (!entries_.empty() && set.frame_index <= entries_.back().frame_index)
        throw std::invalid_argument("MotionHistory: frame indices must be strictly increasing");
    entries_.push_back(std::move(set));
    if (entries_.size() > static_cast<std::size_t>(capacity_)) entries_.pop_front();
}

namespace {

struct Ray {
    int dx, dy;
};
constexpr Ray kRays[4] = {{0, -1}, {0, 1}, {-1, 0}, {1, 0}}; // up, down, left, right

// Last contiguous foreground pixel walking from `start` along the ray.
Pixel walk_ray(Mask const &m, Pixel start, Ray ray) {
    Pixel cur = start;
    for (;;) {
        int const nx = cur.x + ray.dx, ny = cur.y + ray.dy;
        if (!m.contains(nx, ny) || !m.at(nx, ny)) return cur;
        cur = {nx, ny};
    }
}

Point along(Point const &from, Point const &to, double fraction) {
    return {from.x + fraction * (to.x - from.x), from.y + fraction * (to.y - from.y)};
}

} // namespace

KeyPointSet extract_keypoints(Mask const &m, int count) {
    if (count != 1 && count != 3 && count != 5 && count != 7 && count != 9)
        throw std::invalid_argument("extract_keypoints: count must be one of 1, 3, 5, 7, 9");
    if (m.empty()) throw std::invalid_argument("extract_keypoints: empty mask");

    KeyPointSet out;
    Point const c = centroid(m);
    out.points.push_back(c);
    if (count == 1) return out;

    Pixel const cpix{static_cast<int>(std::lround(c.x)), static_cast<int>(std::lround(c.y))};
    bool const inside = m.contains(cpix.x, cpix.y) && m.at(cpix.x, cpix.y);
    out.bbox_fallback = !inside;

    // Ray exits: the last foreground pixel along each axis direction, or the
    // bounding box edge when the centroid is not on the mask (concave case).
    Point exits[4];
    if (inside) {
        for (int i = 0; i < 4; ++i) {
            Pixel const e = walk_ray(m, cpix, kRays[i]);
            exits[i] = {static_cast<double>(e.x), static_cast<double>(e.y)};
        }
    } else {
        Box const box = bounding_box(m);
        exits[0] = {c.x, static_cast<double>(box.y_min)};
        exits[1] = {c.x, static_cast<double>(box.y_max)};
        exits[2] = {static_cast<double>(box.x_min), c.y};
        exits[3] = {static_cast<double>(box.x_max), c.y};
    }

    int const pairs = std::min(count - 1, 4);
    for (int i = 0; i < pairs; ++i) out.points.push_back(along(c, exits[i], 0.5));
    for (int i = 0; static_cast<int>(out.points.size()) < count; ++i) {
        out.points.push_back(along(c, exits[i], 0.25));
        if (static_cast<int>(out.points.size()) < count)
            out.points.push_back(along(c, exits[i], 0.75));
    }
    return out;
}

KeyPointSet extrapolate_keypoints(MotionHistory const &history, int horizon) {
    if (history.size() < 2)
        throw std::invalid_argument("extrapolate_keypoints: need at least two observations");
    if (horizon < 1) throw std::invalid_argument("extrapolate_keypoints: horizon must be positive");

    KeyPointSet const &prev = history.at(history.size() - 2);
    KeyPointSet const &last = history.at(history.size() - 1);
    if (prev.points.size() != last.points.size())
        throw std::invalid_argument("extrapolate_keypoints: keypoint count changed");

    double const dt = last.frame_index - prev.frame_index;
    KeyPointSet out;
    out.frame_index = last.frame_index + horizon;
    out.points.reserve(last.points.size());
    for (std::size_t i = 0; i < last.points.size(); ++i) {
        double const vx = (last.points[i].x - prev.points[i].x) / dt;
        double const vy = (last.points[i].y - prev.points[i].y) / dt;
        out.points.push_back({last.points[i].x + vx * horizon, last.points[i].y + vy * horizon});
    }
    return out;
}

std::vector<Point> keypoints_to_point_prompts(KeyPointSet const &set, int width, int height) {
    detail::check_dims(width, height, "keypoints_to_point_prompts");
    std::vector<Point> out;
    out.reserve(set.points.size());
    for (auto const &p : set.points)
        out.push_back({std::clamp(p.x, 0.0, static_cast<double>(width - 1)),
                       std::clamp(p.y, 0.0, static_cast<double>(height - 1))});
    return out;
}

void write_keypoints_csv(std::span<KeyPointSet const> sets, std::filesystem::path const &path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "frame_index,point_index,x,y\n";
    char buf[96];
    for (auto const &set : sets)
        for (std::size_t i = 0; i < set.points.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%d,%zu,%.3f,%.3f\n", set.frame_index, i,
                          set.points[i].x, set.points[i].y);
            out << buf;
        }
}

} // namespace mosam
