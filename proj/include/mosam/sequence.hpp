#pragma once

#include <string>
#include <vector>

#include "mosam/grid.hpp"

namespace mosam {

/// Per-frame reference annotation.
struct GroundTruthRecord {
    int frame_index = 0;
    Mask mask;            ///< empty while the object is occluded
    bool occluded = false;
};

/// A video plus whatever annotation is available. `gt` is either empty or has
/// one record per frame; the first frame's mask seeds the tracker.
struct SequenceData {
    std::string name;
    std::vector<Frame> frames;
    std::vector<GroundTruthRecord> gt;

    bool has_gt() const { return gt.size() == frames.size() && !frames.empty(); }
    std::vector<bool> occlusion_flags() const {
        std::vector<bool> flags(gt.size());
        for (std::size_t i = 0; i < gt.size(); ++i) flags[i] = gt[i].occluded;
        return flags;
    }
};

} // namespace mosam
