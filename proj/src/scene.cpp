#include "srsgroup/scene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "srsgroup/io.hpp"
#include "srsgroup/rng.hpp"

namespace srsgroup {

const char* scenario_name(Scenario s)
{
    return s == Scenario::LoS ? "los" : "nlos";
}

const char* pattern_name(Pattern p)
{
    switch (p) {
    case Pattern::Clockwise: return "clockwise";
    case Pattern::ClockwiseRandom: return "clockwise_random";
    case Pattern::Anticlockwise: return "anticlockwise";
    case Pattern::AnticlockwiseRandom: return "anticlockwise_random";
    }
    return "?";
}

Scenario scenario_from_name(std::string_view name)
{
    if (name == "los")
        return Scenario::LoS;
    if (name == "nlos")
        return Scenario::NLoS;
    throw std::invalid_argument("unknown scenario: " + std::string(name));
}

Pattern pattern_from_name(std::string_view name)
{
    for (Pattern p : all_patterns())
        if (name == pattern_name(p))
            return p;
    throw std::invalid_argument("unknown pattern: " + std::string(name));
}

std::vector<Pattern> all_patterns()
{
    return {Pattern::Clockwise, Pattern::ClockwiseRandom, Pattern::Anticlockwise,
            Pattern::AnticlockwiseRandom};
}

void ScenarioConfig::validate() const
{
    if (speed <= 0.0)
        throw std::invalid_argument("scenario: speed must be > 0");
    if (sample_interval <= 0.0)
        throw std::invalid_argument("scenario: sample_interval must be > 0");
    if (lap_waypoints.size() < 3)
        throw std::invalid_argument("scenario: need at least 3 lap waypoints");
    if (jitter_amplitude < 0.0)
        throw std::invalid_argument("scenario: jitter_amplitude must be >= 0");
    if (corner_radius < 0.0)
        throw std::invalid_argument("scenario: corner_radius must be >= 0");
}

namespace {

// The lap path is a closed sequence of straight segments and, when corner
// rounding is enabled, tangent circular arcs. Everything is evaluated by
// arc length so constant-speed sampling is exact.
struct PathPiece {
    bool arc = false;
    // segment
    Vec2 a, b;
    // arc
    Vec2 center;
    double radius = 0.0;
    double angle0 = 0.0; // start angle at center
    double sweep = 0.0;  // signed, positive = counterclockwise
    double length = 0.0;
};

struct LapPath {
    std::vector<PathPiece> pieces;
    std::vector<double> cum; // cumulative length at piece start
    double perimeter = 0.0;

    void eval(double s, Vec2& pos, Vec2& tangent) const
    {
        s = std::fmod(s, perimeter);
        if (s < 0.0)
            s += perimeter;
        std::size_t lo = 0, hi = pieces.size();
        while (lo + 1 < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (cum[mid] <= s)
                lo = mid;
            else
                hi = mid;
        }
        const PathPiece& p = pieces[lo];
        double local = s - cum[lo];
        if (!p.arc) {
            Vec2 d = p.b - p.a;
            double len = p.length;
            tangent = {d.x / len, d.y / len};
            pos = {p.a.x + tangent.x * local, p.a.y + tangent.y * local};
        } else {
            double ang = p.angle0 + p.sweep * (local / p.length);
            pos = {p.center.x + p.radius * std::cos(ang), p.center.y + p.radius * std::sin(ang)};
            double sgn = p.sweep >= 0.0 ? 1.0 : -1.0;
            tangent = {-std::sin(ang) * sgn, std::cos(ang) * sgn};
        }
    }
};

double polygon_signed_area(const std::vector<Vec2>& pts)
{
    double a = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec2& p = pts[i];
        const Vec2& q = pts[(i + 1) % pts.size()];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

LapPath build_path(const std::vector<Vec2>& loop, double corner_radius)
{
    const std::size_t n = loop.size();
    LapPath path;

    if (corner_radius <= 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            PathPiece seg;
            seg.a = loop[i];
            seg.b = loop[(i + 1) % n];
            seg.length = norm(seg.b - seg.a);
            if (seg.length > 1e-12)
                path.pieces.push_back(seg);
        }
    } else {
        // Trim each corner by r*tan(turn/2) and bridge with a tangent arc.
        std::vector<double> trim(n, 0.0);
        std::vector<Vec2> dir(n);
        std::vector<double> seglen(n);
        for (std::size_t i = 0; i < n; ++i) {
            Vec2 d = loop[(i + 1) % n] - loop[i];
            seglen[i] = norm(d);
            dir[i] = seglen[i] > 1e-12 ? Vec2{d.x / seglen[i], d.y / seglen[i]} : Vec2{0, 0};
        }
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& din = dir[(i + n - 1) % n];
            const Vec2& dout = dir[i];
            double turn = std::acos(std::clamp(dot(din, dout), -1.0, 1.0));
            if (turn < 1e-9 || turn > kPi - 1e-9) {
                trim[i] = 0.0;
                continue;
            }
            double t = corner_radius * std::tan(turn / 2.0);
            double cap = 0.49 * std::min(seglen[(i + n - 1) % n], seglen[i]);
            trim[i] = std::min(t, cap);
        }
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = (i + 1) % n;
            Vec2 a = loop[i] + dir[i] * trim[i];
            Vec2 b = loop[j] - dir[i] * trim[j];
            PathPiece seg;
            seg.a = a;
            seg.b = b;
            seg.length = norm(b - a);
            if (seg.length > 1e-12)
                path.pieces.push_back(seg);
            // arc around corner j
            if (trim[j] > 1e-12) {
                const Vec2& din = dir[i];
                const Vec2& dout = dir[j];
                double turn = std::acos(std::clamp(dot(din, dout), -1.0, 1.0));
                double r = trim[j] / std::tan(turn / 2.0);
                double side = cross(din, dout) >= 0.0 ? 1.0 : -1.0; // left or right turn
                Vec2 nrm{-din.y * side, din.x * side};              // toward arc center
                Vec2 center = b + nrm * r;
                PathPiece arc;
                arc.arc = true;
                arc.center = center;
                arc.radius = r;
                arc.angle0 = std::atan2(b.y - center.y, b.x - center.x);
                arc.sweep = side * turn;
                arc.length = r * turn;
                path.pieces.push_back(arc);
            }
        }
    }

    path.cum.resize(path.pieces.size());
    double total = 0.0;
    for (std::size_t i = 0; i < path.pieces.size(); ++i) {
        path.cum[i] = total;
        total += path.pieces[i].length;
    }
    path.perimeter = total;
    return path;
}

bool is_random_pattern(Pattern p)
{
    return p == Pattern::ClockwiseRandom || p == Pattern::AnticlockwiseRandom;
}

bool is_clockwise_pattern(Pattern p)
{
    return p == Pattern::Clockwise || p == Pattern::ClockwiseRandom;
}

} // namespace

Lap generate_trajectory(const ScenarioConfig& cfg, Pattern pattern)
{
    cfg.validate();

    // Traversal direction is a property of the pattern, not of the order
    // the waypoints happen to be listed in. Positive signed area in
    // east/north axes means the listed order runs anticlockwise.
    std::vector<Vec2> loop = cfg.lap_waypoints;
    bool listed_acw = polygon_signed_area(loop) > 0.0;
    bool want_acw = !is_clockwise_pattern(pattern);
    if (listed_acw != want_acw)
        std::reverse(loop.begin() + 1, loop.end()); // keep the start waypoint

    LapPath path = build_path(loop, cfg.corner_radius);
    if (path.perimeter < 1e-9)
        throw std::invalid_argument("scenario: degenerate lap (zero perimeter)");

    const double step = cfg.speed * cfg.sample_interval;
    const std::size_t count = static_cast<std::size_t>(std::ceil(path.perimeter / step - 1e-9));

    // Jittered laps enter the loop a quarter circuit in. The virtual users
    // carved out of each lap half then cover arcs offset from the jitter-free
    // users', so every stretch of the course shows up in the early part of
    // one same-direction stream and the late part of another.
    const double start = is_random_pattern(pattern) ? 0.25 * path.perimeter : 0.0;

    std::vector<Vec2> base(count), tang(count);
    for (std::size_t k = 0; k < count; ++k)
        path.eval(start + static_cast<double>(k) * step, base[k], tang[k]);

    Lap lap;
    lap.pattern = pattern;
    lap.poses.resize(count);

    if (!is_random_pattern(pattern)) {
        for (std::size_t k = 0; k < count; ++k) {
            lap.poses[k] = {base[k].x, base[k].y, cfg.path_height,
                            course_over_ground(tang[k].x, tang[k].y),
                            static_cast<double>(k) * cfg.sample_interval};
        }
        return lap;
    }

    // Lateral jitter: white Gaussian noise smoothed by a circular 1 s
    // moving average, rescaled to keep the configured spread, clamped to
    // jitter_amplitude, applied along the local left normal.
    auto rng = make_rng(cfg.rng_seed, rng_stream::trajectory, static_cast<std::uint64_t>(pattern));
    std::normal_distribution<double> gauss(0.0, cfg.jitter_amplitude);
    std::vector<double> noise(count);
    for (auto& v : noise)
        v = gauss(rng);

    const std::size_t window =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(1.0 / cfg.sample_interval)));
    const double scale = std::sqrt(static_cast<double>(window));
    std::vector<double> offset(count, 0.0);
    for (std::size_t k = 0; k < count; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < window; ++j)
            acc += noise[(k + count - (j % count)) % count];
        double v = scale * acc / static_cast<double>(window);
        offset[k] = std::clamp(v, -cfg.jitter_amplitude, cfg.jitter_amplitude);
    }

    std::vector<Vec2> pos(count);
    for (std::size_t k = 0; k < count; ++k) {
        Vec2 left{-tang[k].y, tang[k].x};
        pos[k] = base[k] + left * offset[k];
    }
    for (std::size_t k = 0; k < count; ++k) {
        // Course over ground of the jittered motion itself; the lap is a
        // closed loop so the last pose wraps to the first.
        Vec2 d = pos[(k + 1) % count] - pos[k];
        double heading = (norm(d) > 1e-12) ? course_over_ground(d.x, d.y)
                                           : course_over_ground(tang[k].x, tang[k].y);
        lap.poses[k] = {pos[k].x, pos[k].y, cfg.path_height, heading,
                        static_cast<double>(k) * cfg.sample_interval};
    }
    return lap;
}

std::vector<UserTrack> split_virtual_users(const std::vector<Lap>& laps)
{
    std::vector<UserTrack> users;
    users.reserve(laps.size() * 2);
    for (std::size_t i = 0; i < laps.size(); ++i) {
        const Lap& lap = laps[i];
        const std::size_t n = lap.poses.size();
        const std::size_t first = (n + 1) / 2; // extra sample goes to the first half
        UserTrack a, b;
        a.user = static_cast<int>(2 * i);
        b.user = static_cast<int>(2 * i + 1);
        a.pattern = b.pattern = lap.pattern;
        a.poses.assign(lap.poses.begin(), lap.poses.begin() + static_cast<std::ptrdiff_t>(first));
        b.poses.assign(lap.poses.begin() + static_cast<std::ptrdiff_t>(first), lap.poses.end());
        users.push_back(std::move(a));
        users.push_back(std::move(b));
    }
    return users;
}

ScenarioConfig default_scenario(Scenario s)
{
    ScenarioConfig cfg;
    cfg.scenario = s;
    if (s == Scenario::NLoS)
        cfg.path_height = 0.0;
    return cfg;
}

void export_trajectories_csv(const std::string& path, const std::vector<UserTrack>& tracks)
{
    CsvWriter w(path, {"t", "x", "y", "z", "heading", "user", "pattern"});
    for (const UserTrack& track : tracks) {
        for (const Pose& p : track.poses) {
            w.write_row({format_double(p.t), format_double(p.x), format_double(p.y),
                         format_double(p.z), format_double(p.heading),
                         std::to_string(track.user), pattern_name(track.pattern)});
        }
    }
}

std::vector<UserTrack> import_trajectories_csv(const std::string& path)
{
    CsvTable table = read_csv(path);
    const int ct = table.column("t"), cx = table.column("x"), cy = table.column("y"),
              cz = table.column("z"), ch = table.column("heading"), cu = table.column("user"),
              cp = table.column("pattern");
    if (ct < 0 || cx < 0 || cy < 0 || cz < 0 || ch < 0 || cu < 0 || cp < 0)
        throw std::runtime_error("trajectory csv missing columns: " + path);

    std::vector<UserTrack> tracks;
    for (const auto& row : table.rows) {
        int user = std::stoi(row[cu]);
        if (tracks.empty() || tracks.back().user != user) {
            UserTrack t;
            t.user = user;
            t.pattern = pattern_from_name(row[cp]);
            tracks.push_back(std::move(t));
        }
        tracks.back().poses.push_back({std::stod(row[cx]), std::stod(row[cy]), std::stod(row[cz]),
                                       std::stod(row[ch]), std::stod(row[ct])});
    }
    return tracks;
}

} // namespace srsgroup
