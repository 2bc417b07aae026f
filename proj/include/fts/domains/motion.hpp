#pragma once

#include "fts/domains/common.hpp"

namespace fts::domains {

// Holonomic point-to-point motion planning: one configuration variable, one
// trajectory control, straight-line segments checked against static
// obstacles.
struct MotionDomain {
    int dimension = 2;
    geom::Box bounds;
    geom::Shape robot = geom::Shape::disc(0.1);
    std::vector<geom::PlacedBody> obstacles;
    double resolution = geom::kDefaultResolution;
};

BuiltProblem build_motion_problem(const MotionDomain& domain, geom::Vec2 start, geom::Vec2 goal);

}  // namespace fts::domains
