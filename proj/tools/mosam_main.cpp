#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mosam/pgm_io.hpp"
#include "mosam/pipeline.hpp"
#include "mosam/simulator.hpp"

namespace {

void print_metrics_line(std::string const &label, mosam::MetricsReport const &report) {
    std::printf("%s: frames=%d mean_j=%.4f mean_f=%.4f j_and_f=%.4f\n", label.c_str(),
                report.frames_evaluated, report.mean_j, report.mean_f, report.j_and_f);
}

int run_cli(int argc, char **argv) {
    CLI::App app{"mosam: mask propagation tracker with motion prompts and memory selection"};
    app.require_subcommand(1);

    // ---- simulate ----------------------------------------------------
    auto *simulate = app.add_subcommand("simulate", "Render synthetic sequences to disk");
    std::string sim_scenario, sim_config, sim_output;
    bool sim_all = false, sim_list = false;
    simulate->add_option("--scenario", sim_scenario, "Built-in scenario name");
    simulate->add_option("--config", sim_config, "Scenario JSON file");
    simulate->add_option("--output", sim_output, "Output directory");
    simulate->add_flag("--all", sim_all, "Render every built-in scenario under --output/<name>");
    simulate->add_flag("--list", sim_list, "List built-in scenario names and exit");
    simulate->callback([&] {
        if (sim_list) {
            for (auto const &s : mosam::scenario_suite()) std::printf("%s\n", s.name.c_str());
            return;
        }
        if (sim_output.empty()) throw CLI::ValidationError("simulate", "--output is required");
        if (sim_all) {
            for (auto const &s : mosam::scenario_suite()) {
                mosam::SequenceData const data = mosam::generate_scenario(s);
                mosam::write_sequence(sim_output + "/" + s.name, data, &s);
                std::printf("wrote %s (%zu frames)\n", (sim_output + "/" + s.name).c_str(),
                            data.frames.size());
            }
            return;
        }
        mosam::Scenario scenario;
        if (!sim_config.empty()) {
            std::ifstream in(sim_config);
            if (!in) throw std::runtime_error("cannot open scenario config " + sim_config);
            scenario = mosam::scenario_from_json(nlohmann::json::parse(in));
        } else if (!sim_scenario.empty()) {
            scenario = mosam::suite_scenario(sim_scenario);
        } else {
            throw CLI::ValidationError("simulate", "need --scenario, --config, or --all");
        }
        mosam::SequenceData const data = mosam::generate_scenario(scenario);
        mosam::write_sequence(sim_output, data, &scenario);
        std::printf("wrote %s (%zu frames)\n", sim_output.c_str(), data.frames.size());
    });

    // ---- run ---------------------------------------------------------
    auto *run = app.add_subcommand("run", "Track an object through a sequence");
    std::string run_input, run_output, run_config_path;
    mosam::RunConfig config;
    mosam::OutputOptions out_options;
    std::uint64_t run_seed = 0;
    run->add_option("--input", run_input, "Scenario name or sequence directory")->required();
    run->add_option("--output", run_output, "Run output directory");
    run->add_option("--config", run_config_path, "Run config JSON (CLI flags override)");
    auto *opt_seg = run->add_option("--segmenter", config.segmenter, "matcher or oracle");
    auto *opt_mp = run->add_flag("--motion-points,!--no-motion-points", config.motion_points,
                                 "Extrapolated keypoint prompts");
    auto *opt_mf = run->add_flag("--motion-flow,!--no-motion-flow", config.motion_flow,
                                 "Flow-warped box prompt");
    auto *opt_ts = run->add_flag("--temporal-selection,!--no-temporal-selection",
                                 config.temporal_selection, "Score-gated memory (off: FIFO)");
    auto *opt_sf = run->add_flag("--spatial-filtering,!--no-spatial-filtering",
                                 config.spatial_filtering, "Pixel confidence filtering");
    auto *opt_kp = run->add_option("--keypoints", config.keypoint_count, "1, 3, 5, 7 or 9");
    auto *opt_fi = run->add_option("--flow-interval", config.flow_interval, "Flow pair gap");
    auto *opt_cap = run->add_option("--capacity", config.capacity, "Memory bank size");
    auto *opt_seed = run->add_option("--seed", run_seed, "Oracle noise seed");
    auto *opt_occ = run->add_flag("--include-occluded,!--exclude-occluded",
                                  config.include_occluded_in_metrics,
                                  "Score occluded frames too (default on)");
    run->add_flag("--save-probs", out_options.save_probs, "Dump per-frame probability maps");
    run->add_flag("--save-flow", out_options.save_flow, "Dump flow fields");
    run->add_flag("--save-overlays", out_options.save_overlays, "Dump boundary overlays");
    run->callback([&] {
        mosam::RunConfig effective = config;
        if (!run_config_path.empty()) {
            std::ifstream in(run_config_path);
            if (!in) throw std::runtime_error("cannot open run config " + run_config_path);
            effective = mosam::run_config_from_json(nlohmann::json::parse(in));
            if (opt_seg->count()) effective.segmenter = config.segmenter;
            if (opt_mp->count()) effective.motion_points = config.motion_points;
            if (opt_mf->count()) effective.motion_flow = config.motion_flow;
            if (opt_ts->count()) effective.temporal_selection = config.temporal_selection;
            if (opt_sf->count()) effective.spatial_filtering = config.spatial_filtering;
            if (opt_kp->count()) effective.keypoint_count = config.keypoint_count;
            if (opt_fi->count()) effective.flow_interval = config.flow_interval;
            if (opt_cap->count()) effective.capacity = config.capacity;
            if (opt_occ->count())
                effective.include_occluded_in_metrics = config.include_occluded_in_metrics;
        }
        if (opt_seed->count()) effective.oracle.seed = run_seed;
        effective.record_flow = effective.record_flow || out_options.save_flow;
        mosam::SequenceData const seq = mosam::resolve_input(run_input);
        mosam::RunResult const result = mosam::run_pipeline(seq, effective);
        if (!run_output.empty())
            mosam::write_run_outputs(run_output, seq, effective, result, out_options);
        if (result.has_metrics)
            print_metrics_line(seq.name, result.metrics);
        else
            std::printf("%s: frames=%zu (no ground truth, metrics skipped)\n", seq.name.c_str(),
                        result.masks.size());
    });

    // ---- eval ----------------------------------------------------------
    auto *eval = app.add_subcommand("eval", "Score a mask directory against ground truth");
    std::string eval_pred, eval_seq, eval_csv, eval_json;
    bool eval_exclude_occluded = false;
    eval->add_option("--pred", eval_pred, "Directory of predicted masks (%05d.pgm)")->required();
    eval->add_option("--input", eval_seq, "Scenario name or annotated sequence directory")
        ->required();
    eval->add_option("--csv", eval_csv, "Write per-frame metrics CSV here");
    eval->add_option("--json", eval_json, "Write summary metrics JSON here");
    eval->add_flag("--exclude-occluded", eval_exclude_occluded, "Skip occluded frames");
    eval->callback([&] {
        mosam::SequenceData const seq = mosam::resolve_input(eval_seq);
        std::vector<mosam::Mask> pred;
        pred.reserve(seq.frames.size());
        for (std::size_t i = 0; i < seq.frames.size(); ++i)
            pred.push_back(mosam::read_mask_pgm(std::filesystem::path(eval_pred) /
                                                mosam::frame_filename(static_cast<int>(i))));
        mosam::MetricsReport const report =
            mosam::evaluate_against(seq, pred, !eval_exclude_occluded);
        if (!eval_csv.empty()) mosam::write_metrics_csv(report, eval_csv);
        if (!eval_json.empty()) mosam::write_metrics_json(report, eval_json);
        print_metrics_line(seq.name, report);
    });

    // ---- sweep ---------------------------------------------------------
    auto *sweep = app.add_subcommand("sweep", "Re-run a sequence over a parameter range");
    std::string sweep_input, sweep_param, sweep_output, sweep_config_path, sweep_segmenter;
    std::vector<double> sweep_values;
    std::uint64_t sweep_seed = 0;
    sweep->add_option("--input", sweep_input, "Scenario name or sequence directory")->required();
    sweep->add_option("--parameter", sweep_param,
                      "keypoint_count, flow_interval, capacity, tau_iou, tau_occ, tau_rank, "
                      "tau_pix, sample_interval or window")
        ->required();
    sweep->add_option("--values", sweep_values, "Values to sweep")->required()->expected(-1);
    sweep->add_option("--output", sweep_output, "Sweep CSV path")->required();
    sweep->add_option("--config", sweep_config_path, "Base run config JSON");
    auto *opt_sweep_seg = sweep->add_option("--segmenter", sweep_segmenter, "matcher or oracle");
    auto *opt_sweep_seed = sweep->add_option("--seed", sweep_seed, "Oracle noise seed");
    sweep->callback([&] {
        mosam::RunConfig base;
        if (!sweep_config_path.empty()) {
            std::ifstream in(sweep_config_path);
            if (!in) throw std::runtime_error("cannot open run config " + sweep_config_path);
            base = mosam::run_config_from_json(nlohmann::json::parse(in));
        }
        if (opt_sweep_seg->count()) base.segmenter = sweep_segmenter;
        if (opt_sweep_seed->count()) base.oracle.seed = sweep_seed;
        mosam::SequenceData const seq = mosam::resolve_input(sweep_input);
        auto const rows = mosam::run_sweep(seq, base, sweep_param, sweep_values);
        mosam::write_sweep_csv(rows, sweep_output);
        for (auto const &row : rows)
            std::printf("%s=%g j_and_f=%.4f\n", row.parameter.c_str(), row.value,
                        row.report.j_and_f);
    });

    // ---- render --------------------------------------------------------
    auto *render = app.add_subcommand("render", "Write boundary overlays for an existing run");
    std::string render_input, render_run, render_output;
    render->add_option("--input", render_input, "Scenario name or sequence directory")->required();
    render->add_option("--run", render_run, "Run directory holding masks/")->required();
    render->add_option("--output", render_output, "Overlay directory (default <run>/overlays)");
    render->callback([&] {
        mosam::SequenceData const seq = mosam::resolve_input(render_input);
        std::filesystem::path const masks_dir = std::filesystem::path(render_run) / "masks";
        std::filesystem::path const out_dir =
            render_output.empty() ? std::filesystem::path(render_run) / "overlays"
                                  : std::filesystem::path(render_output);
        std::filesystem::create_directories(out_dir);
        for (std::size_t i = 0; i < seq.frames.size(); ++i) {
            auto const name = mosam::frame_filename(static_cast<int>(i));
            mosam::Mask const pred = mosam::read_mask_pgm(masks_dir / name);
            mosam::Frame const overlay = mosam::render_overlay(
                seq.frames[i], seq.has_gt() ? &seq.gt[i].mask : nullptr, pred);
            mosam::write_frame_pgm(overlay, out_dir / name);
        }
        std::printf("wrote %zu overlays to %s\n", seq.frames.size(), out_dir.string().c_str());
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    try {
        return run_cli(argc, argv);
    } catch (std::exception const &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
