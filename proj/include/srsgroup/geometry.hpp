#ifndef SRSGROUP_GEOMETRY_HPP
#define SRSGROUP_GEOMETRY_HPP

#include <cmath>

namespace srsgroup {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0; // m/s

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
};

inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }
inline double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

// Normalize an angle in degrees to [0, 360).
inline double wrap_degrees(double d)
{
    double w = std::fmod(d, 360.0);
    if (w < 0.0)
        w += 360.0;
    // fmod can return values that round up to exactly 360 after the add
    if (w >= 360.0)
        w = 0.0;
    return w;
}

// Course over ground of a motion direction (dx east, dy north),
// in degrees clockwise from north. East = 90.
inline double course_over_ground(double dx, double dy)
{
    return wrap_degrees(rad_to_deg(std::atan2(dx, dy)));
}

} // namespace srsgroup

#endif
