#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mosam/grid.hpp"
#include "mosam/sequence.hpp"

namespace mosam {

/// Textured shape rendered by the scene generator. Texture values are drawn
/// from `texture_seed` in object-local coordinates, so the pattern rides along
/// rigidly with the shape.
struct ShapeSpec {
    std::string kind = "disc"; // "disc" or "rect"
    double radius = 8.0;       // disc only
    int rect_width = 16;       // rect only
    int rect_height = 16;      // rect only
    std::uint64_t texture_seed = 1;
    double contrast = 0.25; // mean intensity offset of the shape over background
};

/// Center position over time. "linear" moves at constant velocity;
/// "sinusoidal" moves at constant horizontal speed while the vertical
/// coordinate oscillates around the start row.
struct TrajectorySpec {
    std::string kind = "linear"; // "linear" or "sinusoidal"
    Point start{0.0, 0.0};
    Point velocity{0.0, 0.0}; // sinusoidal uses only velocity.x
    double amplitude = 0.0;   // sinusoidal: peak vertical deviation, pixels
    double period = 16.0;     // sinusoidal: frames per full cycle
};

/// Inclusive frame interval during which the tracked object is not rendered.
struct OcclusionInterval {
    int first = 0;
    int last = 0;
};

/// Static decoy shape that is always rendered.
struct DistractorSpec {
    ShapeSpec shape;
    Point position{0.0, 0.0};
};

/// Full description of a synthetic sequence.
struct Scenario {
    std::string name = "scenario";
    int width = 128;
    int height = 96;
    int frame_count = 30;
    std::uint64_t background_seed = 7;
    ShapeSpec shape;
    TrajectorySpec trajectory;
    std::vector<OcclusionInterval> occlusions;
    std::vector<DistractorSpec> distractors;
};

/// Throws std::invalid_argument naming the offending field when the scenario
/// is not renderable (bad dimensions, unknown kinds, occluded first frame...).
void validate_scenario(Scenario const &scenario);

/// Object center at a given frame.
Point trajectory_position(TrajectorySpec const &trajectory, int frame_index);

/// True when `frame_index` falls inside any occlusion interval.
bool is_occluded(std::vector<OcclusionInterval> const &occlusions, int frame_index);

/// Renders the full sequence: frames plus per-frame ground truth (empty mask,
/// occluded flag set, on occluded frames). Deterministic for a given scenario.
SequenceData generate_scenario(Scenario const &scenario);

/// The built-in scenario catalogue used by tests and the command line;
/// covers steady motion, occlusion with near and far reappearance, curved
/// motion, a look-alike static decoy, and repeated short dropouts.
std::vector<Scenario> scenario_suite();

/// Subset of suite names whose sequences contain occlusion intervals.
std::vector<std::string> occlusion_suite_names();

/// Finds a suite scenario by name; throws std::invalid_argument if unknown.
Scenario suite_scenario(std::string const &name);

nlohmann::json scenario_to_json(Scenario const &scenario);
Scenario scenario_from_json(nlohmann::json const &j);

/// Writes frames/%05d.pgm, gt/%05d.pgm, and manifest.json under `dir`.
/// When `scenario` is non-null its JSON echo lands in scenario.json.
void write_sequence(std::string const &dir, SequenceData const &data,
                    Scenario const *scenario = nullptr);

/// Loads a directory previously written by write_sequence (or any directory
/// with a compatible manifest.json).
SequenceData load_sequence(std::string const &dir);

} // namespace mosam
