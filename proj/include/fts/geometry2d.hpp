#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace fts::geom {

// Planar vector; 1-dimensional workspaces use y = 0 throughout.
struct Vec2 {
    double x = 0;
    double y = 0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2&) const = default;
};

double dot(Vec2 a, Vec2 b);
double norm(Vec2 a);

struct Box {
    Vec2 lo;
    Vec2 hi;

    bool contains(Vec2 p) const { return lo.x <= p.x && p.x <= hi.x && lo.y <= p.y && p.y <= hi.y; }
    Vec2 size() const { return hi - lo; }
};

// Convex body shapes. Boxes are axis-aligned and described by half extents.
struct Shape {
    enum class Kind { box, disc };
    Kind kind = Kind::disc;
    Vec2 half_extents;  // box
    double radius = 0;  // disc

    static Shape box(Vec2 half_extents) { return {Kind::box, half_extents, 0}; }
    static Shape disc(double radius) { return {Kind::disc, {}, radius}; }
};

struct PlacedBody {
    Shape shape;
    Vec2 pose;
};

struct Segment {
    Vec2 a;
    Vec2 b;
};

// Strict-interior overlap between two placed shapes; touching boundaries do
// not count as a collision.
bool shapes_overlap(const Shape& sa, Vec2 pa, const Shape& sb, Vec2 pb);

// True when the robot body, swept along the segment, clears every obstacle.
// The segment is sampled at ceil(1/resolution) uniform steps, endpoints
// included.
bool segment_clear(const Segment& seg, const Shape& robot, std::span<const PlacedBody> obstacles,
                   double resolution);

// True when neither the robot nor an optionally held body (rigidly offset
// from the robot) overlaps the movable body at any sampled point of the
// sweep.
bool swept_pair_clear(const Segment& seg, const Shape& robot,
                      const std::optional<std::pair<Shape, Vec2>>& held,
                      const PlacedBody& movable, double resolution);

inline constexpr double kDefaultResolution = 0.01;

}  // namespace fts::geom
