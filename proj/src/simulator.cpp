#include "mosam/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "mosam/pgm_io.hpp"
#include "rng_util.hpp"

namespace fs = std::filesystem;

namespace mosam {

using detail::mix_seed;
using detail::Rng;

namespace {

/// Seeded white noise in [0, 1], smoothed with a 3x3 box (replicated edges)
/// so patches carry structure an intensity matcher can lock onto.
std::vector<float> smoothed_noise(int width, int height, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0xa17e57u));
    std::vector<float> raw(static_cast<std::size_t>(width) * height);
    for (auto &v : raw) v = static_cast<float>(rng.u01());
    std::vector<float> out(raw.size());
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            float sum = 0.0f;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int const sx = std::clamp(x + dx, 0, width - 1);
                    int const sy = std::clamp(y + dy, 0, height - 1);
                    sum += raw[static_cast<std::size_t>(sy) * width + sx];
                }
            out[static_cast<std::size_t>(y) * width + x] = sum / 9.0f;
        }
    return out;
}

struct ShapeTexture {
    int width = 0;
    int height = 0;
    std::vector<float> values; // absolute intensities, object-local grid
};

ShapeTexture make_texture(ShapeSpec const &shape) {
    ShapeTexture tex;
    if (shape.kind == "disc") {
        int const side = 2 * static_cast<int>(std::ceil(shape.radius)) + 3;
        tex.width = tex.height = side;
    } else {
        tex.width = shape.rect_width + 2;
        tex.height = shape.rect_height + 2;
    }
    tex.values = smoothed_noise(tex.width, tex.height, shape.texture_seed);
    for (auto &v : tex.values)
        v = std::clamp(0.30f + static_cast<float>(shape.contrast) + 0.25f * v, 0.0f, 1.0f);
    return tex;
}

bool inside_shape(ShapeSpec const &shape, double x, double y, Point const &center) {
    double const dx = x - center.x;
    double const dy = y - center.y;
    if (shape.kind == "disc") return dx * dx + dy * dy <= shape.radius * shape.radius;
    return std::abs(dx) < shape.rect_width / 2.0 && std::abs(dy) < shape.rect_height / 2.0;
}

/// Paints the shape onto `frame`, optionally recording coverage in `mask`.
void render_shape(Frame &frame, ShapeSpec const &shape, ShapeTexture const &tex,
                  Point const &center, Mask *mask) {
    int const x_lo = std::max(0, static_cast<int>(std::floor(center.x - tex.width)));
    int const x_hi = std::min(frame.width - 1, static_cast<int>(std::ceil(center.x + tex.width)));
    int const y_lo = std::max(0, static_cast<int>(std::floor(center.y - tex.height)));
    int const y_hi = std::min(frame.height - 1, static_cast<int>(std::ceil(center.y + tex.height)));
    for (int y = y_lo; y <= y_hi; ++y)
        for (int x = x_lo; x <= x_hi; ++x) {
            if (!inside_shape(shape, x, y, center)) continue;
            int const lx =
                std::clamp(static_cast<int>(std::lround(x - center.x)) + tex.width / 2, 0,
                           tex.width - 1);
            int const ly =
                std::clamp(static_cast<int>(std::lround(y - center.y)) + tex.height / 2, 0,
                           tex.height - 1);
            frame.set(x, y, tex.values[static_cast<std::size_t>(ly) * tex.width + lx]);
            if (mask) mask->set(x, y, true);
        }
}

void validate_shape(ShapeSpec const &shape, std::string const &field) {
    if (shape.kind != "disc" && shape.kind != "rect")
        throw std::invalid_argument("scenario: " + field + ".kind must be disc or rect");
    if (shape.kind == "disc" && !(shape.radius > 0.0))
        throw std::invalid_argument("scenario: " + field + ".radius must be positive");
    if (shape.kind == "rect" && (shape.rect_width < 1 || shape.rect_height < 1))
        throw std::invalid_argument("scenario: " + field + ".rect dimensions must be >= 1");
    if (shape.contrast < -0.3 || shape.contrast > 0.7)
        throw std::invalid_argument("scenario: " + field + ".contrast out of range [-0.3, 0.7]");
}

} // namespace

void validate_scenario(Scenario const &scenario) {
    if (scenario.width < 16 || scenario.height < 16)
        throw std::invalid_argument("scenario: width/height must be at least 16");
    if (scenario.frame_count < 2)
        throw std::invalid_argument("scenario: frame_count must be at least 2");
    validate_shape(scenario.shape, "shape");
    if (scenario.trajectory.kind != "linear" && scenario.trajectory.kind != "sinusoidal")
        throw std::invalid_argument("scenario: trajectory.kind must be linear or sinusoidal");
    if (scenario.trajectory.kind == "sinusoidal" && !(scenario.trajectory.period > 0.0))
        throw std::invalid_argument("scenario: trajectory.period must be positive");
    for (auto const &occ : scenario.occlusions) {
        if (occ.first > occ.last)
            throw std::invalid_argument("scenario: occlusions interval has first > last");
        if (occ.first < 0 || occ.last >= scenario.frame_count)
            throw std::invalid_argument("scenario: occlusions interval outside the sequence");
        if (occ.first == 0)
            throw std::invalid_argument("scenario: occlusions must not cover frame 0");
    }
    for (auto const &d : scenario.distractors) validate_shape(d.shape, "distractors.shape");
    // The seed mask comes from frame 0, so the object must start on screen.
    Point const start = trajectory_position(scenario.trajectory, 0);
    if (start.x < 0 || start.x >= scenario.width || start.y < 0 || start.y >= scenario.height)
        throw std::invalid_argument("scenario: trajectory.start must lie inside the frame");
}

Point trajectory_position(TrajectorySpec const &trajectory, int frame_index) {
    double const t = static_cast<double>(frame_index);
    if (trajectory.kind == "sinusoidal")
        return {trajectory.start.x + trajectory.velocity.x * t,
                trajectory.start.y +
                    trajectory.amplitude * std::sin(2.0 * std::numbers::pi * t / trajectory.period)};
    return {trajectory.start.x + trajectory.velocity.x * t,
            trajectory.start.y + trajectory.velocity.y * t};
}

bool is_occluded(std::vector<OcclusionInterval> const &occlusions, int frame_index) {
    return std::any_of(occlusions.begin(), occlusions.end(), [&](OcclusionInterval const &o) {
        return frame_index >= o.first && frame_index <= o.last;
    });
}

SequenceData generate_scenario(Scenario const &scenario) {
    validate_scenario(scenario);

    std::vector<float> background =
        smoothed_noise(scenario.width, scenario.height, scenario.background_seed);
    for (auto &v : background) v = 0.30f + 0.25f * v;

    ShapeTexture const object_tex = make_texture(scenario.shape);
    std::vector<ShapeTexture> distractor_tex;
    distractor_tex.reserve(scenario.distractors.size());
    for (auto const &d : scenario.distractors) distractor_tex.push_back(make_texture(d.shape));

    SequenceData data;
    data.name = scenario.name;
    data.frames.reserve(scenario.frame_count);
    data.gt.reserve(scenario.frame_count);

    for (int t = 0; t < scenario.frame_count; ++t) {
        Frame frame(scenario.width, scenario.height);
        frame.intensity = background;
        for (std::size_t i = 0; i < scenario.distractors.size(); ++i)
            render_shape(frame, scenario.distractors[i].shape, distractor_tex[i],
                         scenario.distractors[i].position, nullptr);

        GroundTruthRecord record;
        record.frame_index = t;
        record.mask = Mask(scenario.width, scenario.height);
        record.occluded = is_occluded(scenario.occlusions, t);
        if (!record.occluded)
            render_shape(frame, scenario.shape, object_tex,
                         trajectory_position(scenario.trajectory, t), &record.mask);

        data.frames.push_back(std::move(frame));
        data.gt.push_back(std::move(record));
    }
    if (data.gt.front().mask.empty())
        throw std::runtime_error("scenario: object invisible on frame 0");
    return data;
}

std::vector<Scenario> scenario_suite() {
    std::vector<Scenario> suite;

    {
        Scenario s;
        s.name = "linear";
        s.width = 128;
        s.height = 96;
        s.frame_count = 40;
        s.shape = {"disc", 8.0, 16, 16, 11, 0.25};
        s.trajectory = {"linear", {18.0, 40.0}, {2.0, 1.0}, 0.0, 16.0};
        suite.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "occlusion";
        s.width = 176;
        s.height = 96;
        s.frame_count = 36;
        s.shape = {"disc", 8.0, 16, 16, 13, 0.25};
        s.trajectory = {"linear", {16.0, 48.0}, {4.0, 0.0}, 0.0, 16.0};
        s.occlusions = {{16, 20}};
        suite.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "reappear-far";
        s.width = 176;
        s.height = 96;
        s.frame_count = 36;
        s.shape = {"rect", 8.0, 17, 17, 17, 0.25};
        s.trajectory = {"linear", {16.0, 48.0}, {4.0, 0.0}, 0.0, 16.0};
        s.occlusions = {{15, 19}};
        suite.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "sinusoidal";
        s.width = 160;
        s.height = 96;
        s.frame_count = 40;
        s.shape = {"disc", 8.0, 16, 16, 19, 0.25};
        s.trajectory = {"sinusoidal", {16.0, 48.0}, {3.0, 0.0}, 14.0, 16.0};
        suite.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "distractor";
        s.width = 144;
        s.height = 96;
        s.frame_count = 36;
        s.shape = {"disc", 8.0, 16, 16, 23, 0.25};
        s.trajectory = {"linear", {16.0, 30.0}, {3.0, 0.0}, 0.0, 16.0};
        s.distractors.push_back({s.shape, {64.0, 52.0}});
        suite.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "flicker";
        s.width = 176;
        s.height = 96;
        s.frame_count = 36;
        s.shape = {"disc", 8.0, 16, 16, 29, 0.25};
        s.trajectory = {"linear", {14.0, 40.0}, {4.0, 0.0}, 0.0, 16.0};
        s.occlusions = {{12, 13}, {24, 25}};
        suite.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "twin-blink";
        s.width = 160;
        s.height = 96;
        s.frame_count = 44;
        s.shape = {"disc", 8.0, 16, 16, 31, 0.25};
        s.trajectory = {"linear", {14.0, 40.0}, {2.0, 0.0}, 0.0, 16.0};
        s.distractors.push_back({s.shape, {58.0, 57.0}});
        s.occlusions = {{18, 18}, {21, 21}, {24, 24}};
        suite.push_back(std::move(s));
    }
    {
        Scenario s;
        s.name = "fast";
        s.width = 208;
        s.height = 96;
        s.frame_count = 30;
        s.shape = {"disc", 8.0, 16, 16, 37, 0.25};
        s.trajectory = {"linear", {16.0, 48.0}, {6.0, 0.0}, 0.0, 16.0};
        s.occlusions = {{14, 16}};
        suite.push_back(std::move(s));
    }
    return suite;
}

std::vector<std::string> occlusion_suite_names() {
    return {"occlusion", "reappear-far", "flicker", "twin-blink", "fast"};
}

Scenario suite_scenario(std::string const &name) {
    for (auto &s : scenario_suite())
        if (s.name == name) return s;
    throw std::invalid_argument("unknown scenario: " + name);
}

nlohmann::json scenario_to_json(Scenario const &scenario) {
    auto shape_json = [](ShapeSpec const &s) {
        return nlohmann::json{{"kind", s.kind},           {"radius", s.radius},
                              {"rect_width", s.rect_width}, {"rect_height", s.rect_height},
                              {"texture_seed", s.texture_seed}, {"contrast", s.contrast}};
    };
    nlohmann::json j{{"name", scenario.name},
                     {"width", scenario.width},
                     {"height", scenario.height},
                     {"frame_count", scenario.frame_count},
                     {"background_seed", scenario.background_seed},
                     {"shape", shape_json(scenario.shape)},
                     {"trajectory",
                      {{"kind", scenario.trajectory.kind},
                       {"start", {scenario.trajectory.start.x, scenario.trajectory.start.y}},
                       {"velocity",
                        {scenario.trajectory.velocity.x, scenario.trajectory.velocity.y}},
                       {"amplitude", scenario.trajectory.amplitude},
                       {"period", scenario.trajectory.period}}}};
    j["occlusions"] = nlohmann::json::array();
    for (auto const &o : scenario.occlusions) j["occlusions"].push_back({o.first, o.last});
    j["distractors"] = nlohmann::json::array();
    for (auto const &d : scenario.distractors)
        j["distractors"].push_back(
            {{"shape", shape_json(d.shape)}, {"position", {d.position.x, d.position.y}}});
    return j;
}

Scenario scenario_from_json(nlohmann::json const &j) {
    auto shape_from = [](nlohmann::json const &js) {
        ShapeSpec s;
        s.kind = js.value("kind", s.kind);
        s.radius = js.value("radius", s.radius);
        s.rect_width = js.value("rect_width", s.rect_width);
        s.rect_height = js.value("rect_height", s.rect_height);
        s.texture_seed = js.value("texture_seed", s.texture_seed);
        s.contrast = js.value("contrast", s.contrast);
        return s;
    };
    Scenario s;
    s.name = j.value("name", s.name);
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.frame_count = j.value("frame_count", s.frame_count);
    s.background_seed = j.value("background_seed", s.background_seed);
    if (j.contains("shape")) s.shape = shape_from(j.at("shape"));
    if (j.contains("trajectory")) {
        auto const &jt = j.at("trajectory");
        s.trajectory.kind = jt.value("kind", s.trajectory.kind);
        if (jt.contains("start"))
            s.trajectory.start = {jt.at("start").at(0).get<double>(),
                                  jt.at("start").at(1).get<double>()};
        if (jt.contains("velocity"))
            s.trajectory.velocity = {jt.at("velocity").at(0).get<double>(),
                                     jt.at("velocity").at(1).get<double>()};
        s.trajectory.amplitude = jt.value("amplitude", s.trajectory.amplitude);
        s.trajectory.period = jt.value("period", s.trajectory.period);
    }
    for (auto const &jo : j.value("occlusions", nlohmann::json::array()))
        s.occlusions.push_back({jo.at(0).get<int>(), jo.at(1).get<int>()});
    for (auto const &jd : j.value("distractors", nlohmann::json::array())) {
        DistractorSpec d;
        if (jd.contains("shape")) d.shape = shape_from(jd.at("shape"));
        if (jd.contains("position"))
            d.position = {jd.at("position").at(0).get<double>(),
                          jd.at("position").at(1).get<double>()};
        s.distractors.push_back(std::move(d));
    }
    return s;
}

void write_sequence(std::string const &dir, SequenceData const &data, Scenario const *scenario) {
    if (data.frames.empty()) throw std::invalid_argument("write_sequence: no frames");
    fs::path const root(dir);
    fs::create_directories(root / "frames");
    if (data.has_gt()) fs::create_directories(root / "gt");

    for (std::size_t i = 0; i < data.frames.size(); ++i)
        write_frame_pgm(data.frames[i], root / "frames" / frame_filename(static_cast<int>(i)));

    nlohmann::json manifest{{"name", data.name},
                            {"width", data.frames.front().width},
                            {"height", data.frames.front().height},
                            {"frame_count", data.frames.size()},
                            {"frames_dir", "frames"}};
    if (data.has_gt()) {
        manifest["gt_dir"] = "gt";
        auto occluded = nlohmann::json::array();
        for (auto const &g : data.gt) {
            write_mask_pgm(g.mask, root / "gt" / frame_filename(g.frame_index));
            if (g.occluded) occluded.push_back(g.frame_index);
        }
        manifest["occluded"] = occluded;
    }
    std::ofstream out(root / "manifest.json");
    if (!out) throw std::runtime_error("write_sequence: cannot write manifest under " + dir);
    out << manifest.dump(2) << "\n";

    if (scenario) {
        std::ofstream sc(root / "scenario.json");
        sc << scenario_to_json(*scenario).dump(2) << "\n";
    }
}

SequenceData load_sequence(std::string const &dir) {
    fs::path const root(dir);
    std::ifstream in(root / "manifest.json");
    if (!in) throw std::runtime_error("load_sequence: no manifest.json under " + dir);
    nlohmann::json manifest = nlohmann::json::parse(in);

    SequenceData data;
    data.name = manifest.value("name", root.filename().string());
    int const count = manifest.at("frame_count").get<int>();
    std::string const frames_dir = manifest.value("frames_dir", "frames");
    data.frames.reserve(count);
    for (int i = 0; i < count; ++i)
        data.frames.push_back(read_frame_pgm(root / frames_dir / frame_filename(i)));

    if (manifest.contains("gt_dir")) {
        std::string const gt_dir = manifest.at("gt_dir").get<std::string>();
        std::vector<bool> occluded(count, false);
        for (auto const &idx : manifest.value("occluded", nlohmann::json::array()))
            occluded[idx.get<int>()] = true;
        data.gt.reserve(count);
        for (int i = 0; i < count; ++i)
            data.gt.push_back(
                {i, read_mask_pgm(root / gt_dir / frame_filename(i)), occluded[i]});
    }
    return data;
}

} // namespace mosam
