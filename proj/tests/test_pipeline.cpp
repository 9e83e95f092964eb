#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "mosam/mask_ops.hpp"
#include "mosam/pgm_io.hpp"
#include "mosam/pipeline.hpp"
#include "mosam/simulator.hpp"
#include "test_util.hpp"

using namespace mosam;
namespace fs = std::filesystem;

namespace {

/// Small matcher-friendly scene: textured disc crossing a 64x48 frame with a
/// two-frame dropout in the middle.
SequenceData mini_sequence(bool with_occlusion = true) {
    Scenario s;
    s.name = "mini";
    s.width = 64;
    s.height = 48;
    s.frame_count = 12;
    s.shape = {"disc", 5.0, 16, 16, 3, 0.25};
    s.trajectory = {"linear", {12.0, 24.0}, {3.0, 0.0}, 0.0, 16.0};
    if (with_occlusion) s.occlusions = {{5, 6}};
    return generate_scenario(s);
}

RunConfig toggles(std::string segmenter, bool points, bool flow, bool temporal, bool spatial) {
    RunConfig c;
    c.segmenter = std::move(segmenter);
    c.motion_points = points;
    c.motion_flow = flow;
    c.temporal_selection = temporal;
    c.spatial_filtering = spatial;
    return c;
}

void expect_invalid_config(RunConfig const &config, std::string const &needle) {
    try {
        validate_run_config(config);
        FAIL("expected rejection mentioning '" << needle << "'");
    } catch (std::invalid_argument const &e) {
        CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
}

double frame_j(MetricsReport const &report, int frame_index) {
    for (auto const &m : report.per_frame)
        if (m.frame_index == frame_index) return m.j;
    FAIL("frame " << frame_index << " not in the report");
    return -1.0;
}

} // namespace

TEST_CASE("validate_run_config: rejections name the offending field") {
    RunConfig base;

    auto bad = base;
    bad.segmenter = "magic";
    expect_invalid_config(bad, "segmenter");

    bad = base;
    bad.keypoint_count = 4;
    expect_invalid_config(bad, "keypoint_count");

    bad = base;
    bad.flow_interval = 0;
    expect_invalid_config(bad, "flow_interval");

    bad = base;
    bad.capacity = 0;
    expect_invalid_config(bad, "capacity");

    bad = base;
    bad.selection.tau_pix = 1.0;
    expect_invalid_config(bad, "tau_pix");

    bad = base;
    bad.selection.sample_interval = 0;
    expect_invalid_config(bad, "sample_interval");

    bad = base;
    bad.selection.window = -1;
    expect_invalid_config(bad, "window");

    bad = base;
    bad.matcher.search_radius = 0;
    expect_invalid_config(bad, "search_radius");

    bad = base;
    bad.matcher.vote_threshold = 1.0;
    expect_invalid_config(bad, "vote_threshold");

    bad = base;
    bad.oracle.flip_rate = 1.5;
    expect_invalid_config(bad, "flip_rate");

    bad = base;
    bad.oracle.boundary_noise = -1;
    expect_invalid_config(bad, "boundary_noise");
}

TEST_CASE("run config JSON round trip preserves every field") {
    RunConfig config = toggles("oracle", false, true, false, true);
    config.keypoint_count = 7;
    config.flow_interval = 2;
    config.capacity = 5;
    config.selection.tau_rank = 0.45;
    config.selection.window = 9;
    config.oracle.seed = 99;
    config.matcher.min_match = 0.55;
    config.include_occluded_in_metrics = false;
    config.record_flow = true;

    auto const j = run_config_to_json(config);
    auto const parsed = run_config_from_json(j);
    CHECK(run_config_to_json(parsed) == j);

    auto const sparse = run_config_from_json(nlohmann::json{{"segmenter", "oracle"}});
    CHECK(sparse.segmenter == "oracle");
    CHECK(sparse.keypoint_count == 5);
    CHECK(sparse.motion_points);
}

TEST_CASE("run_pipeline: input validation") {
    auto const seq = mini_sequence();
    RunConfig config;

    CHECK_THROWS_AS(run_pipeline(SequenceData{}, config), std::invalid_argument);

    auto no_seed = seq;
    no_seed.gt.front().mask = Mask(64, 48);
    CHECK_THROWS_AS(run_pipeline(no_seed, config), std::invalid_argument);

    auto partial = seq;
    partial.gt.resize(1); // oracle needs annotation on every frame
    RunConfig oracle_config;
    oracle_config.segmenter = "oracle";
    CHECK_THROWS_AS(run_pipeline(partial, oracle_config), std::invalid_argument);
}

TEST_CASE("run_pipeline: reference segmenter tracks a steady scene accurately") {
    auto const seq = generate_scenario(suite_scenario("linear"));
    auto const config = toggles("oracle", false, false, false, false);
    auto const result = run_pipeline(seq, config);
    REQUIRE(result.has_metrics);
    REQUIRE(result.masks.size() == seq.frames.size());
    for (auto const &m : result.metrics.per_frame) CHECK(m.j >= 0.9);
}

TEST_CASE("run_pipeline: first frame is seeded, prompted with the mask, bank holds frame 0") {
    auto const seq = mini_sequence(false);
    auto const config = toggles("matcher", true, true, true, true);
    auto const result = run_pipeline(seq, config);

    auto const &log0 = result.logs.front();
    CHECK(log0.frame_index == 0);
    CHECK(log0.prompt_first_mask);
    CHECK(log0.prompt_points == 0);
    CHECK(!log0.prompt_box.has_value());
    CHECK(log0.bank_frames == std::vector<int>{0});
    // the matcher's self-match on the seeded bank reproduces the seed mask
    CHECK(result.masks[0] == seq.gt[0].mask);
}

TEST_CASE("run_pipeline: extrapolated point prompts start on the third frame") {
    auto const seq = mini_sequence(false);
    auto const config = toggles("oracle", true, false, false, false);
    auto const result = run_pipeline(seq, config);

    REQUIRE(!result.issued_points.empty());
    CHECK(result.issued_points.front().frame_index == 2); // two observations needed
    CHECK(result.logs[1].prompt_points == 0);
    for (auto const &set : result.issued_points) {
        CHECK(set.points.size() == 5); // default keypoint_count
        for (auto const &p : set.points) {
            CHECK(p.x >= 0.0);
            CHECK(p.x <= 63.0);
            CHECK(p.y >= 0.0);
            CHECK(p.y <= 47.0);
        }
    }
}

TEST_CASE("run_pipeline: flow dumps are recorded only on request") {
    auto const seq = mini_sequence(false);
    auto config = toggles("oracle", false, true, false, false);
    CHECK(run_pipeline(seq, config).flows.empty());

    config.record_flow = true;
    auto const result = run_pipeline(seq, config);
    REQUIRE(!result.flows.empty());
    CHECK(result.flows.front().frame_index == 2); // needs two tracked frames behind it
    CHECK(result.flows.front().field.dt == 1);
    // every recorded frame also logged a box prompt
    for (auto const &dump : result.flows)
        CHECK(result.logs[dump.frame_index].prompt_box.has_value());
}

TEST_CASE("run_pipeline: bank stays valid and score-gated on every frame") {
    auto const seq = generate_scenario(suite_scenario("occlusion"));
    auto const config = toggles("matcher", true, true, true, true);
    Mask const seed = seq.gt[0].mask;

    int calls = 0;
    auto const result = run_pipeline(seq, config, [&](int, MemoryBank const &bank,
                                                      SelectionDecision const &decision) {
        ++calls;
        CHECK_NOTHROW(bank.validate());
        CHECK(bank.entries.size() <= 7);
        REQUIRE(bank.first_frame_entry() != nullptr);
        CHECK(bank.first_frame_entry()->frame_index == 0);
        CHECK(bank.first_frame_entry()->mask == seed); // never filtered or replaced
        for (auto const &entry : bank.entries) {
            if (entry.is_first_frame) continue;
            CHECK(entry.scores.s_iou > 0.6); // both tiers demand it
            bool const via_tier1 = std::find(decision.tier1.begin(), decision.tier1.end(),
                                             entry.frame_index) != decision.tier1.end();
            if (via_tier1) CHECK(entry.scores.s_occ > 0.0);
        }
    });
    CHECK(calls == static_cast<int>(seq.frames.size()));
    CHECK(result.has_metrics);
}

TEST_CASE("run_pipeline: score-gated memory beats FIFO after an occlusion") {
    // Motion prompting re-finds the object either way; what differs is whether
    // the bank that conditions the matcher afterwards is polluted by the
    // masks hallucinated around the dropout.
    auto const seq = generate_scenario(suite_scenario("occlusion"));
    auto const fifo = run_pipeline(seq, toggles("matcher", true, true, false, false));
    auto const gated = run_pipeline(seq, toggles("matcher", true, true, true, false));
    REQUIRE(fifo.has_metrics);
    REQUIRE(gated.has_metrics);
    CHECK(gated.metrics.j_and_f > fifo.metrics.j_and_f);
}

TEST_CASE("run_pipeline: without prompts the reference segmenter never reacquires") {
    auto const seq = generate_scenario(suite_scenario("reappear-far")); // hidden on 15..19
    auto const result = run_pipeline(seq, toggles("oracle", false, false, false, false));
    REQUIRE(result.has_metrics);
    for (int t = 15; t <= 19; ++t) CHECK(frame_j(result.metrics, t) == 1.0); // both empty
    for (int t = 20; t < 36; ++t) CHECK(frame_j(result.metrics, t) == 0.0);
}

TEST_CASE("run_pipeline: motion prompting reacquires after a far reappearance") {
    auto const seq = generate_scenario(suite_scenario("reappear-far"));
    auto const result = run_pipeline(seq, toggles("oracle", true, true, true, true));
    REQUIRE(result.has_metrics);

    bool const reacquired_fast =
        frame_j(result.metrics, 20) > 0.5 || frame_j(result.metrics, 21) > 0.5;
    CHECK(reacquired_fast);
    double post = 0.0;
    for (int t = 20; t < 36; ++t) post += frame_j(result.metrics, t);
    CHECK(post / 16.0 >= 0.8);
}

TEST_CASE("run_pipeline: every prompting/memory toggle combination completes") {
    auto const seq = mini_sequence();
    for (int bits = 0; bits < 16; ++bits) {
        auto const config = toggles("matcher", bits & 1, bits & 2, bits & 4, bits & 8);
        auto const result = run_pipeline(seq, config);
        CHECK(result.masks.size() == seq.frames.size());
        CHECK(result.probs.size() == seq.frames.size());
        CHECK(result.logs.size() == seq.frames.size());
        CHECK(result.has_metrics);
    }
}

TEST_CASE("run_pipeline: identical configurations reproduce bit-identically") {
    auto const seq = mini_sequence();

    auto const matcher_cfg = toggles("matcher", true, true, true, true);
    auto const a = run_pipeline(seq, matcher_cfg);
    auto const b = run_pipeline(seq, matcher_cfg);
    REQUIRE(a.masks.size() == b.masks.size());
    for (std::size_t i = 0; i < a.masks.size(); ++i) {
        CHECK(a.masks[i] == b.masks[i]);
        CHECK(a.probs[i].values == b.probs[i].values);
        CHECK(a.logs[i].scores.s_iou == b.logs[i].scores.s_iou);
        CHECK(a.logs[i].bank_frames == b.logs[i].bank_frames);
    }
    CHECK(a.metrics.j_and_f == b.metrics.j_and_f);

    auto oracle_cfg = toggles("oracle", true, true, true, true);
    oracle_cfg.oracle.seed = 5;
    auto const c = run_pipeline(seq, oracle_cfg);
    auto const d = run_pipeline(seq, oracle_cfg);
    for (std::size_t i = 0; i < c.masks.size(); ++i) CHECK(c.masks[i] == d.masks[i]);
    CHECK(c.metrics.mean_j == d.metrics.mean_j);
}

TEST_CASE("run_pipeline: occluded frames can be excluded from the metrics") {
    auto const seq = generate_scenario(suite_scenario("reappear-far"));
    auto config = toggles("oracle", false, false, false, false);
    auto const with = run_pipeline(seq, config);
    config.include_occluded_in_metrics = false;
    auto const without = run_pipeline(seq, config);
    CHECK(with.metrics.frames_evaluated == 36);
    CHECK(without.metrics.frames_evaluated == 31); // five hidden frames dropped
    CHECK(with.metrics.mean_j > without.metrics.mean_j); // the easy 1.0 frames left
}

TEST_CASE("evaluate_against: agrees with the pipeline's own scoring") {
    auto const seq = mini_sequence();
    auto const result = run_pipeline(seq, toggles("matcher", true, true, true, true));
    auto const report = evaluate_against(seq, result.masks);
    CHECK(report.mean_j == result.metrics.mean_j);
    CHECK(report.mean_f == result.metrics.mean_f);
    CHECK(report.frames_evaluated == result.metrics.frames_evaluated);

    CHECK_THROWS_AS(evaluate_against(seq, std::vector<Mask>(3)), std::invalid_argument);
    SequenceData bare;
    bare.frames = seq.frames;
    CHECK_THROWS_AS(evaluate_against(bare, result.masks), std::invalid_argument);
}

TEST_CASE("render_overlay: dimmed frame, gray reference boundary, white prediction") {
    Frame frame(16, 12);
    for (auto &v : frame.intensity) v = 0.8f;
    Mask const gt = testutil::filled_rect(16, 12, 3, 3, 8, 8);
    Mask const pred = translate_mask(gt, 2, 0);

    Frame const overlay = render_overlay(frame, &gt, pred);
    CHECK(overlay.at(5, 10) == 0.4f);             // background halved
    CHECK(overlay.at(3, 3) == 170.0f / 255.0f);   // reference-only boundary
    CHECK(overlay.at(10, 3) == 1.0f);             // prediction boundary
    CHECK(overlay.at(5, 3) == 1.0f);              // overlap: prediction wins
    CHECK(overlay.at(6, 5) == 0.4f);              // interior of both, not boundary

    Frame const no_gt = render_overlay(frame, nullptr, pred);
    CHECK(no_gt.at(3, 3) == 0.4f);
    Frame const no_pred = render_overlay(frame, &gt, Mask(16, 12));
    CHECK(no_pred.at(10, 3) == 0.4f);
    CHECK(no_pred.at(3, 3) == 170.0f / 255.0f);
}

TEST_CASE("write_run_outputs: a full dump is complete and parseable") {
    auto const seq = mini_sequence();
    auto config = toggles("matcher", true, true, true, true);
    config.record_flow = true;
    auto const result = run_pipeline(seq, config);

    testutil::TempDir dir("run-outputs");
    OutputOptions options;
    options.save_probs = true;
    options.save_flow = true;
    options.save_overlays = true;
    write_run_outputs(dir.str(), seq, config, result, options);

    std::ifstream config_in(dir.path() / "config.json");
    REQUIRE(config_in.good());
    CHECK(nlohmann::json::parse(config_in) == run_config_to_json(config));

    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        CHECK(fs::exists(dir.path() / "masks" / frame_filename(static_cast<int>(i))));
        CHECK(fs::exists(dir.path() / "probs" / frame_filename(static_cast<int>(i))));
        CHECK(fs::exists(dir.path() / "overlays" / frame_filename(static_cast<int>(i))));
    }

    std::ifstream scores_in(dir.path() / "scores.jsonl");
    REQUIRE(scores_in.good());
    std::string line;
    int lines = 0;
    while (std::getline(scores_in, line)) {
        auto const j = nlohmann::json::parse(line);
        CHECK(j.at("frame") == lines);
        CHECK(j.contains("s_iou"));
        CHECK(j.at("bank").is_array());
        if (j.at("prompt_box").get<bool>()) {
            REQUIRE(j.at("box").is_array());
            CHECK(j.at("box").size() == 4);
        } else {
            CHECK(!j.contains("box"));
        }
        ++lines;
    }
    CHECK(lines == static_cast<int>(seq.frames.size()));

    std::ifstream selection_in(dir.path() / "selection.jsonl");
    REQUIRE(selection_in.good());
    lines = 0;
    while (std::getline(selection_in, line)) {
        auto const j = nlohmann::json::parse(line);
        CHECK(j.at("chosen").is_array());
        CHECK(j.at("rejected").is_array());
        ++lines;
    }
    CHECK(lines == static_cast<int>(seq.frames.size()));

    REQUIRE(!result.flows.empty());
    char name[16];
    std::snprintf(name, sizeof name, "%05d", result.flows.front().frame_index);
    CHECK(fs::exists(dir.path() / "flow" / (std::string(name) + "_u.pgm")));
    CHECK(fs::exists(dir.path() / "flow" / (std::string(name) + "_v.pgm")));
    CHECK(fs::exists(dir.path() / "flow" / (std::string(name) + ".json")));

    REQUIRE(!result.issued_points.empty());
    CHECK(fs::exists(dir.path() / "keypoints.csv"));

    std::ifstream metrics_in(dir.path() / "metrics.csv");
    REQUIRE(metrics_in.good());
    std::getline(metrics_in, line);
    CHECK(line == "frame_index,j,f");
    std::ifstream mj(dir.path() / "metrics.json");
    REQUIRE(mj.good());
    auto const metrics_json = nlohmann::json::parse(mj);
    CHECK(metrics_json.at("mean_j").get<double>() == doctest::Approx(result.metrics.mean_j));
}

TEST_CASE("apply_parameter: every sweepable knob lands, unknown names throw") {
    RunConfig config;
    apply_parameter(config, "keypoint_count", 7);
    CHECK(config.keypoint_count == 7);
    apply_parameter(config, "flow_interval", 4);
    CHECK(config.flow_interval == 4);
    apply_parameter(config, "capacity", 3);
    CHECK(config.capacity == 3);
    apply_parameter(config, "tau_iou", 0.75);
    CHECK(config.selection.tau_iou == 0.75);
    apply_parameter(config, "tau_occ", 0.1);
    CHECK(config.selection.tau_occ == 0.1);
    apply_parameter(config, "tau_rank", 0.45);
    CHECK(config.selection.tau_rank == 0.45);
    apply_parameter(config, "tau_pix", 0.3);
    CHECK(config.selection.tau_pix == 0.3);
    apply_parameter(config, "sample_interval", 2);
    CHECK(config.selection.sample_interval == 2);
    apply_parameter(config, "window", 9);
    CHECK(config.selection.window == 9);
    CHECK_THROWS_AS(apply_parameter(config, "bogus", 1.0), std::invalid_argument);
}

TEST_CASE("run_sweep: one row per value, CSV well formed") {
    auto const seq = mini_sequence();
    auto const base = toggles("oracle", true, false, true, false);
    auto const rows = run_sweep(seq, base, "tau_rank", {0.4, 0.6});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].parameter == "tau_rank");
    CHECK(rows[0].value == 0.4);
    CHECK(rows[1].value == 0.6);
    for (auto const &row : rows)
        CHECK(row.report.frames_evaluated == static_cast<int>(seq.frames.size()));

    testutil::TempDir dir("sweep-csv");
    auto const csv = (dir.path() / "sweep.csv").string();
    write_sweep_csv(rows, csv);
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "parameter,value,mean_j,mean_f,j_and_f,frames_evaluated");
    int data_lines = 0;
    while (std::getline(in, line)) {
        CHECK(line.rfind("tau_rank,", 0) == 0);
        CHECK(std::count(line.begin(), line.end(), ',') == 5);
        ++data_lines;
    }
    CHECK(data_lines == 2);

    CHECK_THROWS_AS(run_sweep(seq, base, "tau_rank", {}), std::invalid_argument);
    CHECK_THROWS_AS(run_sweep(seq, base, "bogus", {0.5}), std::invalid_argument);
}

TEST_CASE("resolve_input: scenario names and sequence directories both load") {
    auto const generated = resolve_input("linear");
    CHECK(generated.frames.size() == 40);
    CHECK(generated.has_gt());

    auto const seq = mini_sequence();
    testutil::TempDir dir("resolve-input");
    write_sequence(dir.str(), seq, nullptr);
    auto const loaded = resolve_input(dir.str());
    CHECK(loaded.frames.size() == seq.frames.size());
    CHECK(loaded.name == seq.name);

    CHECK_THROWS_AS(resolve_input("no-such-thing"), std::invalid_argument);
}
