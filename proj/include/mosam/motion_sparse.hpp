#pragma once

#include <deque>
#include <filesystem>
#include <span>
#include <vector>

#include "mosam/grid.hpp"

namespace mosam {

/// Keypoints summarizing a mask, in a fixed order:
/// [centroid, up, down, left, right, ...] where directional points sit half
/// way between the centroid and the last foreground pixel along that ray.
/// Counts 7 and 9 append quarter / three-quarter ray points, direction by
/// direction (up, down, left, right) until the count is reached.
struct KeyPointSet {
    std::vector<Point> points;
    int frame_index = 0;
    /// Set when the centroid fell outside the mask and rays were measured
    /// against the bounding box edges instead.
    bool bbox_fallback = false;
};

/// Bounded record of the most recent keypoint sets, oldest dropped first.
/// Frame indices must be strictly increasing. The history is only appended
/// to on success, so after failures it keeps the last good observations.
class MotionHistory {
public:
    explicit MotionHistory(int capacity = 2);

    void push(KeyPointSet set);
    std::size_t size() const { return entries_.size(); }
    KeyPointSet const &back() const { return entries_.back(); }
    KeyPointSet const &at(std::size_t i) const { return entries_.at(i); }
    int capacity() const { return capacity_; }

private:
    int capacity_;
    std::deque<KeyPointSet> entries_;
};

/// Extract `count` keypoints (count in {1, 3, 5, 7, 9}) from a nonempty mask.
KeyPointSet extract_keypoints(Mask const &m, int count);

/// Constant-velocity prediction from the two most recent sets: each point
/// moves by its own per-frame velocity times `horizon`. Requires at least two
/// history entries and a positive horizon.
KeyPointSet extrapolate_keypoints(MotionHistory const &history, int horizon);

/// Positive point prompts: the keypoints clamped into [0, w-1] x [0, h-1],
/// order preserved.
std::vector<Point> keypoints_to_point_prompts(KeyPointSet const &set, int width, int height);

/// CSV dump (frame_index, point_index, x, y) for inspecting traces.
void write_keypoints_csv(std::span<KeyPointSet const> sets, std::filesystem::path const &path);

} // namespace mosam
