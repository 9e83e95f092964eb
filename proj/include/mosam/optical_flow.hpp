#pragma once

#include <memory>

#include "mosam/grid.hpp"

namespace mosam {

/// Dense flow mapping the earlier frame onto the later one:
/// prev(x, y) ~ cur(x + u(x,y), y + v(x,y)). `dt` is the frame gap spanned.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<float> u, v;
    int dt = 1;

    FlowField() = default;
    FlowField(int w, int h, int gap = 1)
        : width(w), height(h), u(static_cast<std::size_t>(w) * h, 0.0f),
          v(static_cast<std::size_t>(w) * h, 0.0f), dt(gap) {
        detail::check_dims(w, h, "FlowField");
    }

    std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

class FlowEstimator {
public:
    virtual ~FlowEstimator() = default;
    virtual FlowField estimate(Frame const &prev, Frame const &cur, int dt) const = 0;
};

struct LucasKanadeConfig {
    int pyramid_levels = 3;       ///< full, half and quarter resolution
    int window_radius = 2;        ///< 5x5 integration window
    int iterations = 3;           ///< refinement steps per level
    double min_eigenvalue = 1e-6; ///< below this the window is degenerate
    double max_step = 5.0;        ///< per-iteration increment clamp, pixels
};

/// Coarse-to-fine Lucas-Kanade: factor-2 box downsampling, central-difference
/// gradients on the earlier frame, bilinear warping of the later frame between
/// iterations, and zero incremental flow wherever the structure matrix'
/// smaller eigenvalue falls under the threshold.
class PyramidalLucasKanade final : public FlowEstimator {
public:
    explicit PyramidalLucasKanade(LucasKanadeConfig config = {});
    FlowField estimate(Frame const &prev, Frame const &cur, int dt) const override;

private:
    LucasKanadeConfig config_;
};

/// One-shot estimate with the default configuration.
FlowField estimate_flow(Frame const &prev, Frame const &cur, int dt = 1);

} // namespace mosam
