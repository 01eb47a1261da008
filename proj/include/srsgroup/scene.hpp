#ifndef SRSGROUP_SCENE_HPP
#define SRSGROUP_SCENE_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "srsgroup/geometry.hpp"

namespace srsgroup {

enum class Scenario { LoS, NLoS };

enum class Pattern { Clockwise, ClockwiseRandom, Anticlockwise, AnticlockwiseRandom };

const char* scenario_name(Scenario s);
const char* pattern_name(Pattern p);
Scenario scenario_from_name(std::string_view name);
Pattern pattern_from_name(std::string_view name);
std::vector<Pattern> all_patterns();

// Measurement-campaign geometry: base station on a rooftop, a closed lap
// around the lot, fixed scatterers. Defaults model the LoS garage-roof
// route; see default_scenario() for the NLoS ground route.
struct ScenarioConfig {
    Scenario scenario = Scenario::LoS;
    // Rooftop site kept off both symmetry axes of the course: with the BS on
    // an axis, mirrored positions produce near-identical beam fingerprints
    // and the regressor collapses to the mean of the two candidates.
    Vec3 bs_position{30.0, -70.0, 20.0};
    double path_height = 10.0;
    std::vector<Vec2> lap_waypoints{{-60.0, -40.0}, {60.0, -40.0}, {60.0, 40.0}, {-60.0, 40.0}};
    double speed = 5.0;            // m/s
    double sample_interval = 0.02; // s, SRS reporting periodicity
    // Lateral bound for the *Random patterns. The wander is low-pass filtered
    // over 1 s of travel, so its amplitude sets the slope of the track and
    // with it how far the course over ground swings about the path tangent
    // (~8 deg rms at 0.1 m). Large values do more than blur the heading
    // labels: the UE gain depends on departure-minus-heading, so a heading
    // swing at one spot imitates the fingerprint of a different spot at
    // normal heading, and position regression degrades with it.
    double jitter_amplitude = 0.1;
    double corner_radius = 0.0;    // m, optional rounding of waypoint corners
    std::vector<Vec3> scatterers{
        {80.0, 0.0, 15.0}, {-80.0, 10.0, 12.0},  {20.0, 60.0, 18.0},
        {-30.0, -60.0, 10.0}, {60.0, 50.0, 8.0}, {-70.0, -45.0, 14.0}};
    // Heading-dependent gain of the vehicle-mounted UE antennas. Without it
    // the amplitude fingerprint would be a pure function of position and the
    // course-over-ground target would not be learnable from one snapshot.
    // Kept mild so the position fingerprint still transfers between laps
    // driven in opposite directions.
    double ue_directivity = 0.2;
    std::uint64_t rng_seed = 1;

    void validate() const; // throws std::invalid_argument
};

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double heading = 0.0; // degrees clockwise from north, [0, 360)
    double t = 0.0;       // seconds
};

struct Lap {
    Pattern pattern = Pattern::Clockwise;
    std::vector<Pose> poses;
};

struct UserTrack {
    int user = 0;
    Pattern pattern = Pattern::Clockwise;
    std::vector<Pose> poses;
};

// Samples one lap of the configured loop at constant speed, one pose per
// sample_interval. Clockwise/Anticlockwise fix the traversal direction
// independently of the waypoint order; the *Random variants add smooth
// seeded lateral jitter bounded by jitter_amplitude.
Lap generate_trajectory(const ScenarioConfig& cfg, Pattern pattern);

// Halves every lap into two virtual users (first half keeps the extra
// sample on odd counts). Users are numbered 2*lap and 2*lap+1.
std::vector<UserTrack> split_virtual_users(const std::vector<Lap>& laps);

ScenarioConfig default_scenario(Scenario s);

void export_trajectories_csv(const std::string& path, const std::vector<UserTrack>& tracks);
std::vector<UserTrack> import_trajectories_csv(const std::string& path);

} // namespace srsgroup

#endif
