#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "mosam/grid.hpp"

namespace mosam {

/// Region similarity: IoU with the empty-mask conventions
/// (both empty -> 1.0, exactly one empty -> 0.0).
double j_score(Mask const &pred, Mask const &gt);

/// Boundary match tolerance in pixels: ceil(0.008 * frame diagonal).
int default_f_tolerance(int width, int height);

/// Boundary F-measure. Precision / recall of the two 4-connected boundaries
/// matched within a Euclidean dilation of `tolerance` pixels; F = 2PR/(P+R),
/// 0 when P + R = 0, 1.0 when both boundaries are empty.
double f_score(Mask const &pred, Mask const &gt, int tolerance);
double f_score(Mask const &pred, Mask const &gt);

struct FrameMetrics {
    int frame_index = 0;
    double j = 0.0;
    double f = 0.0;
};

struct MetricsReport {
    std::vector<FrameMetrics> per_frame;
    double mean_j = 0.0;
    double mean_f = 0.0;
    double j_and_f = 0.0; ///< (mean_j + mean_f) / 2
    int frames_evaluated = 0;
};

/// Means over the given per-frame results. Empty input -> zero report.
MetricsReport aggregate(std::span<FrameMetrics const> per_frame);

/// Score a prediction sequence against ground truth. Frames where
/// `occluded[t]` is true are scored with the empty-mask conventions and kept
/// unless include_occluded is false. `occluded` may be empty (no occlusions).
MetricsReport evaluate_sequence(std::span<Mask const> pred, std::span<Mask const> gt,
                                std::span<bool const> occluded = {}, bool include_occluded = true,
                                int tolerance = -1);

void write_metrics_csv(MetricsReport const &report, std::filesystem::path const &path);
void write_metrics_json(MetricsReport const &report, std::filesystem::path const &path);

} // namespace mosam
