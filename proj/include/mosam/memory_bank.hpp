#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mosam/grid.hpp"

namespace mosam {

/// Frame-level confidence pair reported by a segmenter. s_iou in [0, 1]
/// estimates mask quality; s_occ >= 0 asserts the object is present.
struct FrameScores {
    double s_iou = 0.0;
    double s_occ = 0.0;
};

/// Everything the pipeline keeps per processed frame; memory entries are
/// rebuilt from these records.
struct FrameRecord {
    int frame_index = 0;
    ProbMap prob;
    Mask mask;
    Frame appearance;
    FrameScores scores;
    bool is_first_prompted = false;
};

struct MemoryEntry {
    int frame_index = 0;
    ProbMap filtered_map; ///< probability map after any pixel filtering
    Mask mask;            ///< indicator(filtered_map > 0)
    Frame appearance;
    FrameScores scores;
    bool is_first_frame = false;
};

/// The conditioning set handed to a segmenter: at most `capacity` entries,
/// unique frame indices, exactly one first-frame entry once initialized.
struct MemoryBank {
    int capacity = 7;
    std::vector<MemoryEntry> entries;

    MemoryEntry const *first_frame_entry() const;
    void validate() const; ///< throws std::logic_error on a broken invariant
};

struct SelectionConfig {
    double tau_iou = 0.7;  ///< tier-1 s_iou threshold (strict)
    double tau_occ = 0.0;  ///< tier-1 s_occ threshold (strict)
    double tau_rank = 0.6; ///< tier-2 s_iou admission threshold (strict)
    double tau_pix = 0.5;  ///< pixel confidence threshold (strict)
    int sample_interval = 1;
    /// Candidate window in frames; 0 means the default of
    /// 2 * capacity * sample_interval, resolved against the bank capacity.
    int window = 0;

    int effective_window(int capacity) const {
        return window > 0 ? window : 2 * capacity * sample_interval;
    }
};

struct Candidate {
    int frame_index = 0;
    FrameScores scores;
};

/// How temporal selection arrived at its choice, also used for run logs.
struct SelectionDecision {
    std::vector<int> chosen; ///< tier-1 picks (most recent first), then tier-2
    std::vector<int> tier1;
    std::vector<int> tier2;
    std::vector<std::pair<int, std::string>> rejected; ///< (frame, reason)
};

/// Past frames eligible for selection: indices in
/// [current - window, current - 1] whose offset from `current` is a multiple
/// of the sample interval. The first prompted frame never appears (it is
/// retained unconditionally). Ascending order.
std::vector<Candidate> sample_candidates(std::span<FrameRecord const> history,
                                         SelectionConfig const &config, int current_frame,
                                         int capacity);

/// Two-tier pick of up to `slots` frames.
/// Tier 1: s_iou > tau_iou and s_occ > tau_occ, taken most recent first.
/// Tier 2: the candidates not chosen in tier 1 with s_iou > tau_rank, sorted
/// by s_iou + s_occ descending (ties to the newer frame), filling what is
/// left. Candidates must be in ascending frame order.
SelectionDecision temporal_select(std::span<Candidate const> candidates,
                                  SelectionConfig const &config, int slots);

/// Pixel filtering: values strictly above tau_pix survive, the rest become 0.
/// Returns the filtered map and its support mask.
std::pair<ProbMap, Mask> spatial_select(ProbMap const &prob, double tau_pix);

struct MemoryPolicy {
    bool temporal_selection = true; ///< off: FIFO over the most recent frames
    bool spatial_filtering = true;  ///< off: maps stored unfiltered
};

/// Rebuild the bank from the frame records: the first prompted frame's entry
/// plus up to capacity - 1 selected frames (ascending frame order). With
/// temporal selection off the most recent frames are taken unconditionally.
/// `decision` (optional) receives the temporal reasoning for logging.
MemoryBank update_memory(std::span<FrameRecord const> history, SelectionConfig const &config,
                         int current_frame, int capacity, MemoryPolicy policy,
                         SelectionDecision *decision = nullptr);

} // namespace mosam
