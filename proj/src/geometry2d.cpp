#include "fts/geometry2d.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace fts::geom {

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

namespace {

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

bool disc_disc(Vec2 pa, double ra, Vec2 pb, double rb) {
    Vec2 d = pa - pb;
    double r = ra + rb;
    return dot(d, d) < r * r;
}

bool box_disc(Vec2 pbox, Vec2 he, Vec2 pdisc, double r) {
    Vec2 closest{clamp(pdisc.x, pbox.x - he.x, pbox.x + he.x),
                 clamp(pdisc.y, pbox.y - he.y, pbox.y + he.y)};
    Vec2 d = pdisc - closest;
    return dot(d, d) < r * r;
}

bool box_box(Vec2 pa, Vec2 ha, Vec2 pb, Vec2 hb) {
    return std::abs(pa.x - pb.x) < ha.x + hb.x && std::abs(pa.y - pb.y) < ha.y + hb.y;
}

}  // namespace

bool shapes_overlap(const Shape& sa, Vec2 pa, const Shape& sb, Vec2 pb) {
    if (sa.kind == Shape::Kind::disc && sb.kind == Shape::Kind::disc)
        return disc_disc(pa, sa.radius, pb, sb.radius);
    if (sa.kind == Shape::Kind::box && sb.kind == Shape::Kind::box)
        return box_box(pa, sa.half_extents, pb, sb.half_extents);
    if (sa.kind == Shape::Kind::box)
        return box_disc(pa, sa.half_extents, pb, sb.radius);
    return box_disc(pb, sb.half_extents, pa, sa.radius);
}

namespace {

template <typename Check>
bool sweep(const Segment& seg, double resolution, Check&& collides) {
    assert(resolution > 0);
    int steps = std::max(1, static_cast<int>(std::ceil(1.0 / resolution)));
    for (int i = 0; i <= steps; ++i) {
        double lambda = static_cast<double>(i) / steps;
        Vec2 pos = seg.a + (seg.b - seg.a) * lambda;
        if (collides(pos))
            return false;
    }
    // The loop covers lambda = 0 and 1, but guard against accumulation by
    // re-checking the exact endpoints.
    return !collides(seg.a) && !collides(seg.b);
}

}  // namespace

bool segment_clear(const Segment& seg, const Shape& robot, std::span<const PlacedBody> obstacles,
                   double resolution) {
    return sweep(seg, resolution, [&](Vec2 pos) {
        for (const PlacedBody& obst : obstacles)
            if (shapes_overlap(robot, pos, obst.shape, obst.pose))
                return true;
        return false;
    });
}

bool swept_pair_clear(const Segment& seg, const Shape& robot,
                      const std::optional<std::pair<Shape, Vec2>>& held,
                      const PlacedBody& movable, double resolution) {
    return sweep(seg, resolution, [&](Vec2 pos) {
        if (shapes_overlap(robot, pos, movable.shape, movable.pose))
            return true;
        if (held && shapes_overlap(held->first, pos + held->second, movable.shape, movable.pose))
            return true;
        return false;
    });
}

}  // namespace fts::geom
