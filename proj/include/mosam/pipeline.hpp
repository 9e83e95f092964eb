#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mosam/memory_bank.hpp"
#include "mosam/metrics.hpp"
#include "mosam/motion_sparse.hpp"
#include "mosam/optical_flow.hpp"
#include "mosam/segmenter.hpp"
#include "mosam/sequence.hpp"

namespace mosam {

/// Everything that shapes a tracking run. The motion_* and *_selection
/// switches gate the two prompting mechanisms and the two memory mechanisms
/// independently, so ablations are plain config edits.
struct RunConfig {
    std::string segmenter = "matcher"; ///< "matcher" or "oracle"

    bool motion_points = true;      ///< extrapolated keypoint prompts
    bool motion_flow = true;        ///< flow-warped mask box prompt
    bool temporal_selection = true; ///< score-gated memory picks (off: FIFO)
    bool spatial_filtering = true;  ///< per-pixel confidence filtering

    int keypoint_count = 5; ///< 1, 3, 5, 7 or 9
    int flow_interval = 1;  ///< frame gap of the flow pair
    int capacity = 7;       ///< memory bank size

    SelectionConfig selection;
    OracleConfig oracle;
    MatcherConfig matcher;

    bool include_occluded_in_metrics = true;
    bool record_flow = false; ///< keep flow fields in the result for dumping
};

/// Throws std::invalid_argument naming the offending field.
void validate_run_config(RunConfig const &config);

nlohmann::json run_config_to_json(RunConfig const &config);
RunConfig run_config_from_json(nlohmann::json const &j);

/// Per-frame trace of what the tracker saw and decided.
struct FrameLog {
    int frame_index = 0;
    FrameScores scores;
    std::size_t mask_area = 0;
    int prompt_points = 0;
    std::optional<Box> prompt_box;
    bool prompt_first_mask = false;
    SelectionDecision decision;   ///< memory decision behind this frame's bank
    std::vector<int> bank_frames; ///< entry frame indices, first entry included
};

struct FlowDump {
    int frame_index = 0; ///< frame whose prompt the flow fed
    FlowField field;
};

struct RunResult {
    std::vector<Mask> masks;
    std::vector<ProbMap> probs;
    std::vector<FrameLog> logs;
    std::vector<KeyPointSet> issued_points; ///< point prompts actually sent
    std::vector<FlowDump> flows;            ///< only when record_flow is set
    MetricsReport metrics;
    bool has_metrics = false;
};

/// Called after each frame's memory bank is assembled; used by tests to audit
/// bank invariants and selection provenance mid-run.
using BankObserver =
    std::function<void(int frame_index, MemoryBank const &bank, SelectionDecision const &decision)>;

/// Track the object through the sequence. Needs a nonempty first-frame mask;
/// the "oracle" segmenter needs per-frame ground truth. Metrics are filled
/// when every frame is annotated.
RunResult run_pipeline(SequenceData const &seq, RunConfig const &config,
                       BankObserver const &observer = {});

/// What write_run_outputs persists beyond masks, logs and metrics.
struct OutputOptions {
    bool save_probs = false;
    bool save_flow = false;     ///< needs RunConfig::record_flow
    bool save_overlays = false; ///< frame + boundary overlay renders
    bool save_keypoints = true; ///< keypoints.csv of issued point prompts
};

/// Persist a run: config.json, masks/%05d.pgm, scores.jsonl, selection.jsonl,
/// optional probs//flow//overlays/ dumps, metrics.csv + metrics.json.
void write_run_outputs(std::string const &dir, SequenceData const &seq, RunConfig const &config,
                       RunResult const &result, OutputOptions const &options = {});

/// Boundary overlay for one frame: the image at half intensity, ground-truth
/// boundary at gray 170/255, predicted boundary at full white.
Frame render_overlay(Frame const &frame, Mask const *gt, Mask const &pred);

/// One sweep measurement: `parameter` set to `value`, everything else from
/// the base config.
struct SweepRow {
    std::string parameter;
    double value = 0.0;
    MetricsReport report;
};

/// Sweepable parameter names: keypoint_count, flow_interval, capacity,
/// tau_iou, tau_occ, tau_rank, tau_pix, sample_interval, window.
void apply_parameter(RunConfig &config, std::string const &parameter, double value);

/// Re-run the sequence once per value of `parameter`.
std::vector<SweepRow> run_sweep(SequenceData const &seq, RunConfig const &base,
                                std::string const &parameter, std::vector<double> const &values);

/// CSV with header parameter,value,mean_j,mean_f,j_and_f,frames_evaluated.
void write_sweep_csv(std::vector<SweepRow> const &rows, std::string const &path);

/// Score externally produced masks against a fully annotated sequence.
MetricsReport evaluate_against(SequenceData const &seq, std::vector<Mask> const &pred,
                               bool include_occluded = true);

/// A built-in scenario name (generated on the fly) or a directory holding a
/// manifest.json written by write_sequence.
SequenceData resolve_input(std::string const &input);

} // namespace mosam
