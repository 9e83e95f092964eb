#include "mosam/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>

#include "mosam/mask_ops.hpp"
#include "mosam/motion_dense.hpp"
#include "mosam/pgm_io.hpp"
#include "mosam/simulator.hpp"

namespace fs = std::filesystem;

namespace mosam {

void validate_run_config(RunConfig const &config) {
    if (config.segmenter != "matcher" && config.segmenter != "oracle")
        throw std::invalid_argument("config: segmenter must be matcher or oracle");
    bool const count_ok = config.keypoint_count == 1 || config.keypoint_count == 3 ||
                          config.keypoint_count == 5 || config.keypoint_count == 7 ||
                          config.keypoint_count == 9;
    if (!count_ok)
        throw std::invalid_argument("config: keypoint_count must be one of 1, 3, 5, 7, 9");
    if (config.flow_interval < 1)
        throw std::invalid_argument("config: flow_interval must be at least 1");
    if (config.capacity < 1) throw std::invalid_argument("config: capacity must be at least 1");
    if (config.selection.tau_pix < 0.0 || config.selection.tau_pix >= 1.0)
        throw std::invalid_argument("config: selection.tau_pix must be in [0, 1)");
    if (config.selection.sample_interval < 1)
        throw std::invalid_argument("config: selection.sample_interval must be at least 1");
    if (config.selection.window < 0)
        throw std::invalid_argument("config: selection.window must be >= 0 (0 = default)");
    if (config.matcher.search_radius < 1)
        throw std::invalid_argument("config: matcher.search_radius must be at least 1");
    if (config.matcher.vote_threshold <= 0.0 || config.matcher.vote_threshold >= 1.0)
        throw std::invalid_argument("config: matcher.vote_threshold must be in (0, 1)");
    if (config.oracle.flip_rate < 0.0 || config.oracle.flip_rate > 1.0)
        throw std::invalid_argument("config: oracle.flip_rate must be in [0, 1]");
    if (config.oracle.boundary_noise < 0)
        throw std::invalid_argument("config: oracle.boundary_noise must be >= 0");
}

nlohmann::json run_config_to_json(RunConfig const &config) {
    return nlohmann::json{
        {"segmenter", config.segmenter},
        {"motion_points", config.motion_points},
        {"motion_flow", config.motion_flow},
        {"temporal_selection", config.temporal_selection},
        {"spatial_filtering", config.spatial_filtering},
        {"keypoint_count", config.keypoint_count},
        {"flow_interval", config.flow_interval},
        {"capacity", config.capacity},
        {"selection",
         {{"tau_iou", config.selection.tau_iou},
          {"tau_occ", config.selection.tau_occ},
          {"tau_rank", config.selection.tau_rank},
          {"tau_pix", config.selection.tau_pix},
          {"sample_interval", config.selection.sample_interval},
          {"window", config.selection.window}}},
        {"oracle",
         {{"boundary_noise", config.oracle.boundary_noise},
          {"flip_rate", config.oracle.flip_rate},
          {"reacquire_box_iou", config.oracle.reacquire_box_iou},
          {"score_noise", config.oracle.score_noise},
          {"seed", config.oracle.seed}}},
        {"matcher",
         {{"search_radius", config.matcher.search_radius},
          {"vote_threshold", config.matcher.vote_threshold},
          {"min_match", config.matcher.min_match},
          {"center_penalty", config.matcher.center_penalty},
          {"box_margin", config.matcher.box_margin}}},
        {"include_occluded_in_metrics", config.include_occluded_in_metrics},
        {"record_flow", config.record_flow}};
}

RunConfig run_config_from_json(nlohmann::json const &j) {
    RunConfig c;
    c.segmenter = j.value("segmenter", c.segmenter);
    c.motion_points = j.value("motion_points", c.motion_points);
    c.motion_flow = j.value("motion_flow", c.motion_flow);
    c.temporal_selection = j.value("temporal_selection", c.temporal_selection);
    c.spatial_filtering = j.value("spatial_filtering", c.spatial_filtering);
    c.keypoint_count = j.value("keypoint_count", c.keypoint_count);
    c.flow_interval = j.value("flow_interval", c.flow_interval);
    c.capacity = j.value("capacity", c.capacity);
    if (j.contains("selection")) {
        auto const &js = j.at("selection");
        c.selection.tau_iou = js.value("tau_iou", c.selection.tau_iou);
        c.selection.tau_occ = js.value("tau_occ", c.selection.tau_occ);
        c.selection.tau_rank = js.value("tau_rank", c.selection.tau_rank);
        c.selection.tau_pix = js.value("tau_pix", c.selection.tau_pix);
        c.selection.sample_interval = js.value("sample_interval", c.selection.sample_interval);
        c.selection.window = js.value("window", c.selection.window);
    }
    if (j.contains("oracle")) {
        auto const &jo = j.at("oracle");
        c.oracle.boundary_noise = jo.value("boundary_noise", c.oracle.boundary_noise);
        c.oracle.flip_rate = jo.value("flip_rate", c.oracle.flip_rate);
        c.oracle.reacquire_box_iou = jo.value("reacquire_box_iou", c.oracle.reacquire_box_iou);
        c.oracle.score_noise = jo.value("score_noise", c.oracle.score_noise);
        c.oracle.seed = jo.value("seed", c.oracle.seed);
    }
    if (j.contains("matcher")) {
        auto const &jm = j.at("matcher");
        c.matcher.search_radius = jm.value("search_radius", c.matcher.search_radius);
        c.matcher.vote_threshold = jm.value("vote_threshold", c.matcher.vote_threshold);
        c.matcher.min_match = jm.value("min_match", c.matcher.min_match);
        c.matcher.center_penalty = jm.value("center_penalty", c.matcher.center_penalty);
        c.matcher.box_margin = jm.value("box_margin", c.matcher.box_margin);
    }
    c.include_occluded_in_metrics =
        j.value("include_occluded_in_metrics", c.include_occluded_in_metrics);
    c.record_flow = j.value("record_flow", c.record_flow);
    return c;
}

RunResult run_pipeline(SequenceData const &seq, RunConfig const &config,
                       BankObserver const &observer) {
    validate_run_config(config);
    if (seq.frames.empty()) throw std::invalid_argument("run_pipeline: sequence has no frames");
    if (seq.gt.empty() || seq.gt.front().mask.empty())
        throw std::invalid_argument("run_pipeline: first frame needs a nonempty seed mask");
    bool const full_gt = seq.has_gt();
    if (config.segmenter == "oracle" && !full_gt)
        throw std::invalid_argument("run_pipeline: oracle segmenter needs full ground truth");

    int const n = static_cast<int>(seq.frames.size());
    int const width = seq.frames.front().width;
    int const height = seq.frames.front().height;

    std::unique_ptr<Segmenter> segmenter;
    if (config.segmenter == "oracle")
        segmenter = std::make_unique<OracleSegmenter>(seq.gt, config.oracle);
    else
        segmenter = std::make_unique<MatcherSegmenter>(config.matcher);

    MemoryPolicy const policy{config.temporal_selection, config.spatial_filtering};

    std::vector<FrameRecord> history;
    history.reserve(n);
    {
        FrameRecord first;
        first.frame_index = 0;
        first.mask = seq.gt.front().mask;
        first.prob = ProbMap(width, height);
        for (std::size_t i = 0; i < first.mask.cells.size(); ++i)
            first.prob.values[i] = first.mask.cells[i] ? 1.0f : 0.0f;
        first.appearance = seq.frames.front();
        first.scores = {1.0, 0.5};
        first.is_first_prompted = true;
        history.push_back(std::move(first));
    }

    MotionHistory motion(2);
    if (config.motion_points) {
        KeyPointSet seed = extract_keypoints(seq.gt.front().mask, config.keypoint_count);
        seed.frame_index = 0;
        motion.push(std::move(seed));
    }

    RunResult result;
    result.masks.reserve(n);
    result.probs.reserve(n);
    result.logs.reserve(n);

    for (int t = 0; t < n; ++t) {
        PromptSet prompts;
        if (t == 0) {
            prompts.first_frame_mask = seq.gt.front().mask;
        } else {
            if (config.motion_points && motion.size() >= 2) {
                int const horizon = t - motion.back().frame_index;
                KeyPointSet predicted = extrapolate_keypoints(motion, horizon);
                predicted.frame_index = t;
                prompts.positive_points = keypoints_to_point_prompts(predicted, width, height);
                result.issued_points.push_back({prompts.positive_points, t, false});
            }
            if (config.motion_flow) {
                int const prev = t - 1;
                int const base = prev - config.flow_interval;
                // The flow pair only says something about the object when the
                // tracker saw it in both frames.
                if (base >= 0 && !result.masks[prev].empty() && !result.masks[base].empty()) {
                    try {
                        FlowField flow = estimate_flow(seq.frames[base], seq.frames[prev],
                                                       config.flow_interval);
                        if (config.record_flow) result.flows.push_back({t, flow});
                        Mask const warped = warp_mask_forward(result.masks[prev], flow, 1);
                        prompts.box = flow_box_prompt(warped, width, height);
                    } catch (std::exception const &) {
                        // Motion estimate unusable this frame; the other
                        // prompts and the memory bank carry the tracker.
                    }
                }
            }
        }

        SelectionDecision decision;
        MemoryBank const bank =
            update_memory(history, config.selection, t, config.capacity, policy, &decision);
        SegmenterOutput out = segmenter->segment(t, seq.frames[t], prompts, bank);
        if (observer) observer(t, bank, decision);

        FrameLog log;
        log.frame_index = t;
        log.scores = out.scores;
        log.mask_area = out.mask.area();
        log.prompt_points = static_cast<int>(prompts.positive_points.size());
        log.prompt_box = prompts.box;
        log.prompt_first_mask = prompts.first_frame_mask.has_value();
        log.decision = std::move(decision);
        for (auto const &entry : bank.entries) log.bank_frames.push_back(entry.frame_index);
        result.logs.push_back(std::move(log));

        if (t > 0) {
            if (config.motion_points && !out.mask.empty()) {
                KeyPointSet observed = extract_keypoints(out.mask, config.keypoint_count);
                observed.frame_index = t;
                motion.push(std::move(observed));
            }
            history.push_back({t, out.prob, out.mask, seq.frames[t], out.scores, false});
        }
        result.probs.push_back(std::move(out.prob));
        result.masks.push_back(std::move(out.mask));
    }

    if (full_gt) {
        result.metrics = evaluate_against(seq, result.masks, config.include_occluded_in_metrics);
        result.has_metrics = true;
    }
    return result;
}

MetricsReport evaluate_against(SequenceData const &seq, std::vector<Mask> const &pred,
                               bool include_occluded) {
    if (!seq.has_gt()) throw std::invalid_argument("evaluate_against: sequence lacks ground truth");
    if (pred.size() != seq.frames.size())
        throw std::invalid_argument("evaluate_against: prediction count != frame count");
    std::vector<Mask> gt_masks;
    gt_masks.reserve(seq.gt.size());
    for (auto const &g : seq.gt) gt_masks.push_back(g.mask);
    std::vector<bool> const bits = seq.occlusion_flags();
    auto const flags = std::make_unique<bool[]>(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) flags[i] = bits[i];
    return evaluate_sequence(pred, gt_masks, {flags.get(), bits.size()}, include_occluded);
}

Frame render_overlay(Frame const &frame, Mask const *gt, Mask const &pred) {
    Frame out = frame;
    for (auto &v : out.intensity) v *= 0.5f;
    if (gt && !gt->empty())
        for (auto const &p : boundary_pixels(*gt)) out.set(p.x, p.y, 170.0f / 255.0f);
    if (!pred.empty())
        for (auto const &p : boundary_pixels(pred)) out.set(p.x, p.y, 1.0f);
    return out;
}

void write_run_outputs(std::string const &dir, SequenceData const &seq, RunConfig const &config,
                       RunResult const &result, OutputOptions const &options) {
    fs::path const root(dir);
    fs::create_directories(root / "masks");

    {
        std::ofstream out(root / "config.json");
        if (!out) throw std::runtime_error("write_run_outputs: cannot write under " + dir);
        out << run_config_to_json(config).dump(2) << "\n";
    }

    for (std::size_t i = 0; i < result.masks.size(); ++i)
        write_mask_pgm(result.masks[i], root / "masks" / frame_filename(static_cast<int>(i)));

    {
        std::ofstream out(root / "scores.jsonl");
        for (auto const &log : result.logs) {
            nlohmann::json j{{"frame", log.frame_index},
                             {"s_iou", log.scores.s_iou},
                             {"s_occ", log.scores.s_occ},
                             {"mask_area", log.mask_area},
                             {"prompt_points", log.prompt_points},
                             {"prompt_box", log.prompt_box.has_value()},
                             {"prompt_first_mask", log.prompt_first_mask},
                             {"bank", log.bank_frames}};
            if (log.prompt_box)
                j["box"] = {log.prompt_box->x_min, log.prompt_box->y_min, log.prompt_box->x_max,
                            log.prompt_box->y_max};
            out << j.dump() << "\n";
        }
    }
    {
        std::ofstream out(root / "selection.jsonl");
        for (auto const &log : result.logs) {
            auto rejected = nlohmann::json::array();
            for (auto const &[frame, reason] : log.decision.rejected)
                rejected.push_back({{"frame", frame}, {"reason", reason}});
            nlohmann::json j{{"frame", log.frame_index},
                             {"chosen", log.decision.chosen},
                             {"tier1", log.decision.tier1},
                             {"tier2", log.decision.tier2},
                             {"rejected", rejected}};
            out << j.dump() << "\n";
        }
    }

    if (options.save_probs) {
        fs::create_directories(root / "probs");
        for (std::size_t i = 0; i < result.probs.size(); ++i)
            write_prob_pgm(result.probs[i], root / "probs" / frame_filename(static_cast<int>(i)));
    }
    if (options.save_flow && !result.flows.empty()) {
        fs::create_directories(root / "flow");
        char name[32];
        for (auto const &dump : result.flows) {
            std::snprintf(name, sizeof name, "%05d", dump.frame_index);
            write_flow_pgm(dump.field, root / "flow" / (std::string(name) + "_u.pgm"),
                           root / "flow" / (std::string(name) + "_v.pgm"),
                           root / "flow" / (std::string(name) + ".json"));
        }
    }
    if (options.save_overlays) {
        fs::create_directories(root / "overlays");
        bool const full_gt = seq.has_gt();
        for (std::size_t i = 0; i < result.masks.size(); ++i) {
            Frame const overlay = render_overlay(
                seq.frames[i], full_gt ? &seq.gt[i].mask : nullptr, result.masks[i]);
            write_frame_pgm(overlay, root / "overlays" / frame_filename(static_cast<int>(i)));
        }
    }
    if (options.save_keypoints && !result.issued_points.empty())
        write_keypoints_csv(result.issued_points, root / "keypoints.csv");

    if (result.has_metrics) {
        write_metrics_csv(result.metrics, root / "metrics.csv");
        write_metrics_json(result.metrics, root / "metrics.json");
    }
}

void apply_parameter(RunConfig &config, std::string const &parameter, double value) {
    auto as_int = [&] { return static_cast<int>(std::lround(value)); };
    if (parameter == "keypoint_count")
        config.keypoint_count = as_int();
    else if (parameter == "flow_interval")
        config.flow_interval = as_int();
    else if (parameter == "capacity")
        config.capacity = as_int();
    else if (parameter == "tau_iou")
        config.selection.tau_iou = value;
    else if (parameter == "tau_occ")
        config.selection.tau_occ = value;
    else if (parameter == "tau_rank")
        config.selection.tau_rank = value;
    else if (parameter == "tau_pix")
        config.selection.tau_pix = value;
    else if (parameter == "sample_interval")
        config.selection.sample_interval = as_int();
    else if (parameter == "window")
        config.selection.window = as_int();
    else
        throw std::invalid_argument("sweep: unknown parameter " + parameter);
}

std::vector<SweepRow> run_sweep(SequenceData const &seq, RunConfig const &base,
                                std::string const &parameter, std::vector<double> const &values) {
    if (values.empty()) throw std::invalid_argument("sweep: no values");
    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (double value : values) {
        RunConfig config = base;
        apply_parameter(config, parameter, value);
        RunResult const result = run_pipeline(seq, config);
        if (!result.has_metrics) throw std::runtime_error("sweep: sequence has no ground truth");
        rows.push_back({parameter, value, result.metrics});
    }
    return rows;
}

void write_sweep_csv(std::vector<SweepRow> const &rows, std::string const &path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_sweep_csv: cannot write " + path);
    out << "parameter,value,mean_j,mean_f,j_and_f,frames_evaluated\n";
    char line[256];
    for (auto const &row : rows) {
        std::snprintf(line, sizeof line, "%s,%g,%.6f,%.6f,%.6f,%d\n", row.parameter.c_str(),
                      row.value, row.report.mean_j, row.report.mean_f, row.report.j_and_f,
                      row.report.frames_evaluated);
        out << line;
    }
}

SequenceData resolve_input(std::string const &input) {
    if (fs::exists(fs::path(input) / "manifest.json")) return load_sequence(input);
    for (auto const &scenario : scenario_suite())
        if (scenario.name == input) return generate_scenario(scenario);
    throw std::invalid_argument("input '" + input +
                                "' is neither a sequence directory with a manifest.json "
                                "nor a built-in scenario name");
}

} // namespace mosam
