#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "mosam/grid.hpp"
#include "mosam/memory_bank.hpp"
#include "mosam/sequence.hpp"

namespace mosam {

/// Prompts assembled for one frame. All point prompts are positive.
struct PromptSet {
    std::vector<Point> positive_points;
    std::optional<Box> box;
    std::optional<Mask> first_frame_mask; ///< only on the first prompted frame
};

struct SegmenterOutput {
    ProbMap prob;
    Mask mask; ///< prob thresholded at 0.5
    FrameScores scores;
};

/// Anything that can turn (frame, prompts, memory) into a mask. Outputs must
/// be deterministic for a fixed construction seed and call sequence.
class Segmenter {
public:
    virtual ~Segmenter() = default;
    virtual SegmenterOutput segment(int frame_index, Frame const &frame, PromptSet const &prompts,
                                    MemoryBank const &bank) = 0;
};

struct OracleConfig {
    int boundary_noise = 1;          ///< band width for random boundary flips, pixels
    double flip_rate = 0.08;         ///< per-pixel flip chance inside the band
    double reacquire_box_iou = 0.3;  ///< box prompt hit threshold vs the GT box
    double score_noise = 0.05;       ///< uniform noise subtracted from s_iou
    std::uint64_t seed = 0;
};

/// Ground-truth-backed reference segmenter. Succeeds while it was tracking or
/// a prompt hits the object (a positive point inside the GT mask, a box prompt
/// overlapping the GT box, or the first-frame mask); returns the GT mask with
/// seeded boundary noise and s_occ = +0.5. Occluded frames fail with
/// s_occ = -0.5, untracked-and-unprompted frames with s_occ = -0.3. Ignores
/// the memory bank entirely: it isolates prompt-side behavior.
class OracleSegmenter final : public Segmenter {
public:
    OracleSegmenter(std::vector<GroundTruthRecord> gt, OracleConfig config);
    SegmenterOutput segment(int frame_index, Frame const &frame, PromptSet const &prompts,
                            MemoryBank const &bank) override;

private:
    std::vector<GroundTruthRecord> gt_;
    OracleConfig config_;
    bool tracked_ = false; ///< previous frame produced a nonempty mask
};

struct MatcherConfig {
    int search_radius = 16;      ///< placement offsets scanned per entry
    double vote_threshold = 0.5; ///< foreground needs a strict vote majority
    double min_match = 0.6;      ///< entries abstain below this correlation
    double center_penalty = 0.05;///< correlation discount per radius of offset
    double box_margin = 0.0;     ///< extra reach beyond a box prompt's half extent
};

/// Template matcher over the memory bank. Each entry's appearance patch (the
/// rectangle under its mask's bounding box) is searched in the current frame
/// by normalized cross-correlation around a prompt-derived center; the best
/// placement translates the entry's mask into a vote. Votes are averaged over
/// all bank entries. s_iou is the mean pairwise IoU of the translated masks,
/// s_occ the best correlation minus 0.5.
class MatcherSegmenter final : public Segmenter {
public:
    explicit MatcherSegmenter(MatcherConfig config = {});
    SegmenterOutput segment(int frame_index, Frame const &frame, PromptSet const &prompts,
                            MemoryBank const &bank) override;

private:
    MatcherConfig config_;
};

} // namespace mosam
