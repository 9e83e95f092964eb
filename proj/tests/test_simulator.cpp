#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "mosam/mask_ops.hpp"
#include "mosam/simulator.hpp"
#include "test_util.hpp"

using namespace mosam;

namespace {

Scenario small_scenario() {
    Scenario s;
    s.name = "unit";
    s.width = 128;
    s.height = 96;
    s.frame_count = 20;
    s.shape = {"disc", 6.0, 16, 16, 5, 0.25};
    s.trajectory = {"linear", {20.0, 40.0}, {2.0, 0.0}, 0.0, 16.0};
    return s;
}

void expect_invalid(Scenario const &scenario, std::string const &needle) {
    try {
        validate_scenario(scenario);
        FAIL("expected rejection mentioning '" << needle << "'");
    } catch (std::invalid_argument const &e) {
        CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
}

} // namespace

TEST_CASE("trajectory_position: linear kinematics are exact") {
    TrajectorySpec traj{"linear", {10.0, 10.0}, {2.0, 0.0}, 0.0, 16.0};
    auto const p = trajectory_position(traj, 5);
    CHECK(p.x == 20.0);
    CHECK(p.y == 10.0);
    auto const origin = trajectory_position(traj, 0);
    CHECK(origin.x == 10.0);
    CHECK(origin.y == 10.0);
}

TEST_CASE("trajectory_position: sinusoidal peaks a quarter period in") {
    TrajectorySpec traj{"sinusoidal", {16.0, 48.0}, {3.0, 9.0}, 14.0, 16.0};
    auto const p0 = trajectory_position(traj, 0);
    CHECK(p0.y == doctest::Approx(48.0));
    auto const p4 = trajectory_position(traj, 4); // sin(pi/2) = 1
    CHECK(p4.x == doctest::Approx(16.0 + 3.0 * 4));
    CHECK(p4.y == doctest::Approx(48.0 + 14.0));
    // the vertical velocity component is ignored for sinusoidal motion
    auto const p8 = trajectory_position(traj, 8);
    CHECK(p8.y == doctest::Approx(48.0));
}

TEST_CASE("is_occluded: inclusive interval bounds, multiple intervals") {
    std::vector<OcclusionInterval> const occ{{8, 12}, {20, 20}};
    CHECK(!is_occluded(occ, 7));
    CHECK(is_occluded(occ, 8));
    CHECK(is_occluded(occ, 10));
    CHECK(is_occluded(occ, 12));
    CHECK(!is_occluded(occ, 13));
    CHECK(is_occluded(occ, 20));
    CHECK(!is_occluded(occ, 21));
    CHECK(!is_occluded({}, 0));
}

TEST_CASE("generate_scenario: rendered centroid follows the trajectory") {
    auto scenario = small_scenario();
    scenario.trajectory = {"linear", {20.0, 40.0}, {2.0, 1.0}, 0.0, 16.0};
    auto const data = generate_scenario(scenario);
    for (int t : {0, 5, 12}) {
        auto const expected = trajectory_position(scenario.trajectory, t);
        auto const c = centroid(data.gt[t].mask);
        CHECK(std::abs(c.x - expected.x) <= 0.5);
        CHECK(std::abs(c.y - expected.y) <= 0.5);
    }
}

TEST_CASE("generate_scenario: occluded frames have empty ground truth and a flag") {
    auto scenario = small_scenario();
    scenario.occlusions = {{8, 12}};
    auto const data = generate_scenario(scenario);
    for (int t = 0; t < scenario.frame_count; ++t) {
        bool const inside = t >= 8 && t <= 12;
        CHECK(data.gt[t].occluded == inside);
        CHECK(data.gt[t].mask.empty() == inside);
    }
}

TEST_CASE("generate_scenario: identical scenarios render bit-identically") {
    auto const scenario = small_scenario();
    auto const a = generate_scenario(scenario);
    auto const b = generate_scenario(scenario);
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
        CHECK(a.frames[i].intensity == b.frames[i].intensity);
        CHECK(a.gt[i].mask == b.gt[i].mask);
        CHECK(a.gt[i].occluded == b.gt[i].occluded);
    }

    auto reseeded = scenario;
    reseeded.background_seed += 1;
    auto const c = generate_scenario(reseeded);
    CHECK(a.frames[0].intensity != c.frames[0].intensity);
}

TEST_CASE("generate_scenario: the texture rides rigidly with integer motion") {
    auto const data = generate_scenario(small_scenario()); // velocity (2, 0)
    Mask const &m0 = data.gt[0].mask;
    Mask const &m1 = data.gt[1].mask;
    CHECK(m1 == translate_mask(m0, 2, 0));
    for (int y = 0; y < m0.height; ++y)
        for (int x = 0; x < m0.width; ++x) {
            if (!m0.at(x, y)) continue;
            CHECK(data.frames[1].at(x + 2, y) == data.frames[0].at(x, y));
        }
    // pixels touched by neither placement show the static background
    for (int y = 0; y < m0.height; ++y)
        for (int x = 0; x < m0.width; ++x)
            if (!m0.at(x, y) && !m1.at(x, y))
                CHECK(data.frames[1].at(x, y) == data.frames[0].at(x, y));
}

TEST_CASE("generate_scenario: object area is conserved while fully on screen") {
    auto const data = generate_scenario(suite_scenario("linear"));
    auto const area0 = data.gt[0].mask.area();
    CHECK(area0 > 0);
    for (auto const &g : data.gt) CHECK(g.mask.area() == area0);

    auto const curved = generate_scenario(suite_scenario("sinusoidal"));
    auto const base = static_cast<double>(curved.gt[0].mask.area());
    for (auto const &g : curved.gt) {
        CHECK(static_cast<double>(g.mask.area()) > 0.85 * base);
        CHECK(static_cast<double>(g.mask.area()) < 1.15 * base);
    }
}

TEST_CASE("generate_scenario: distractors stay painted and static") {
    auto const scenario = suite_scenario("distractor");
    auto const data = generate_scenario(scenario);
    auto const center = scenario.distractors.at(0).position; // (64, 52)
    int const last = scenario.frame_count - 1;
    for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) {
            int const x = static_cast<int>(center.x) + dx;
            int const y = static_cast<int>(center.y) + dy;
            CHECK(data.frames[0].at(x, y) == data.frames[last].at(x, y));
        }
    // the decoy never enters the ground truth
    for (auto const &g : data.gt) CHECK(!g.mask.at(64, 52));
}

TEST_CASE("validate_scenario: rejections name the offending field") {
    auto base = small_scenario();

    auto bad = base;
    bad.width = 8;
    expect_invalid(bad, "width/height");

    bad = base;
    bad.frame_count = 1;
    expect_invalid(bad, "frame_count");

    bad = base;
    bad.shape.kind = "triangle";
    expect_invalid(bad, "shape.kind");

    bad = base;
    bad.shape.radius = 0.0;
    expect_invalid(bad, "radius");

    bad = base;
    bad.shape.kind = "rect";
    bad.shape.rect_width = 0;
    expect_invalid(bad, "rect");

    bad = base;
    bad.shape.contrast = 0.9;
    expect_invalid(bad, "contrast");

    bad = base;
    bad.trajectory.kind = "spiral";
    expect_invalid(bad, "trajectory.kind");

    bad = base;
    bad.trajectory.kind = "sinusoidal";
    bad.trajectory.period = 0.0;
    expect_invalid(bad, "trajectory.period");

    bad = base;
    bad.occlusions = {{0, 3}};
    expect_invalid(bad, "occlusions");

    bad = base;
    bad.occlusions = {{5, 3}};
    expect_invalid(bad, "first > last");

    bad = base;
    bad.occlusions = {{10, 25}};
    expect_invalid(bad, "outside the sequence");

    bad = base;
    bad.distractors.push_back({{"blob", 8.0, 16, 16, 1, 0.25}, {50.0, 50.0}});
    expect_invalid(bad, "distractors.shape");

    bad = base;
    bad.trajectory.start = {-5.0, 40.0};
    expect_invalid(bad, "trajectory.start");

    CHECK_THROWS_AS(generate_scenario(bad), std::invalid_argument); // validation runs inside
}

TEST_CASE("scenario_suite: eight coherent scenarios, five with occlusions") {
    auto const suite = scenario_suite();
    REQUIRE(suite.size() == 8);
    std::set<std::string> names;
    for (auto const &s : suite) {
        names.insert(s.name);
        CHECK_NOTHROW(validate_scenario(s));
        auto const data = generate_scenario(s);
        CHECK(data.frames.size() == static_cast<std::size_t>(s.frame_count));
        CHECK(data.gt.size() == data.frames.size());
        CHECK(!data.gt.front().mask.empty());
    }
    CHECK(names.size() == 8);

    auto const occluded = occlusion_suite_names();
    REQUIRE(occluded.size() == 5);
    for (auto const &name : occluded) {
        CHECK(names.count(name) == 1);
        CHECK(!suite_scenario(name).occlusions.empty());
    }
    for (auto const &s : suite) {
        bool const listed =
            std::find(occluded.begin(), occluded.end(), s.name) != occluded.end();
        CHECK(s.occlusions.empty() == !listed);
    }

    CHECK(suite_scenario("linear").name == "linear");
    CHECK_THROWS_AS(suite_scenario("no-such-scene"), std::invalid_argument);
}

TEST_CASE("scenario JSON round trip preserves every field") {
    auto const original = suite_scenario("twin-blink"); // occlusions + a distractor
    auto const j = scenario_to_json(original);
    auto const parsed = scenario_from_json(j);
    CHECK(scenario_to_json(parsed) == j);
    CHECK(parsed.name == original.name);
    CHECK(parsed.occlusions.size() == original.occlusions.size());
    CHECK(parsed.distractors.size() == original.distractors.size());
    CHECK(parsed.trajectory.start.x == original.trajectory.start.x);
    CHECK(parsed.shape.texture_seed == original.shape.texture_seed);

    // defaults fill in for absent fields
    auto const sparse = scenario_from_json(nlohmann::json{{"name", "bare"}});
    CHECK(sparse.name == "bare");
    CHECK(sparse.width == 128);
    CHECK(sparse.shape.kind == "disc");
}

TEST_CASE("write_sequence / load_sequence round trip with manifest") {
    auto scenario = small_scenario();
    scenario.width = 48;
    scenario.height = 32;
    scenario.frame_count = 6;
    scenario.shape.radius = 4.0;
    scenario.trajectory.start = {12.0, 16.0};
    scenario.occlusions = {{3, 3}};
    auto const data = generate_scenario(scenario);

    testutil::TempDir dir("seq-roundtrip");
    write_sequence(dir.str(), data, &scenario);

    std::ifstream manifest_in(dir.path() / "manifest.json");
    REQUIRE(manifest_in.good());
    auto const manifest = nlohmann::json::parse(manifest_in);
    CHECK(manifest.at("name") == "unit");
    CHECK(manifest.at("width") == 48);
    CHECK(manifest.at("height") == 32);
    CHECK(manifest.at("frame_count") == 6);
    CHECK(manifest.at("frames_dir") == "frames");
    CHECK(manifest.at("gt_dir") == "gt");
    CHECK(manifest.at("occluded") == nlohmann::json::array({3}));

    std::ifstream scenario_in(dir.path() / "scenario.json");
    REQUIRE(scenario_in.good());
    CHECK(nlohmann::json::parse(scenario_in) == scenario_to_json(scenario));

    auto const loaded = load_sequence(dir.str());
    CHECK(loaded.name == data.name);
    REQUIRE(loaded.frames.size() == data.frames.size());
    REQUIRE(loaded.gt.size() == data.gt.size());
    for (std::size_t i = 0; i < data.frames.size(); ++i) {
        for (std::size_t p = 0; p < data.frames[i].intensity.size(); ++p)
            CHECK(std::abs(loaded.frames[i].intensity[p] - data.frames[i].intensity[p]) <=
                  0.5f / 255.0f + 1e-6f);
        CHECK(loaded.gt[i].mask == data.gt[i].mask); // masks survive exactly
        CHECK(loaded.gt[i].occluded == data.gt[i].occluded);
    }
}

TEST_CASE("sequence IO rejects unusable inputs") {
    CHECK_THROWS_AS(write_sequence("/tmp/never-created", SequenceData{}, nullptr),
                    std::invalid_argument);
    testutil::TempDir dir("seq-empty");
    CHECK_THROWS_AS(load_sequence(dir.str()), std::runtime_error); // no manifest.json
}
