#pragma once

#include "fts/domains/common.hpp"

#include <optional>

namespace fts::domains {

// Tabletop manipulation without an explicit configuration variable: each
// MPick/MPlace transition bundles the drive out from a home position, the
// grasp or release, and the drive back. State is object poses plus the hand.

// 1D analytic variant. A manipulation targeting pose p with grasp offset g
// puts the hand at p + g, which must stay inside the workspace; it conflicts
// with another object at pose p' when |p + g - p'| < clearance. Manipulation
// values record (hand target, grasp, pose) as a three-waypoint trajectory.
struct Tabletop1DObject {
    std::string name;
    double initial_pose = 0;
    std::vector<double> grasps;
    std::optional<std::pair<double, double>> goal_region;
    std::optional<double> goal_pose;
    // Interval the pose sampler draws from; pairs with goal_region for
    // fixtures that alternate between region and free placements.
    std::vector<std::pair<double, double>> placements;
};

struct Tabletop1DDomain {
    std::pair<double, double> workspace{0, 10};
    std::vector<std::pair<double, double>> tables;  // stable pose intervals
    double clearance = 1.0;
    std::vector<Tabletop1DObject> objects;
};

BuiltProblem build_tabletop1d_problem(const Tabletop1DDomain& domain);

// 2D geometric variant used by the benchmark generators. A manipulation of
// object o at pose p with grasp g drives the robot body from home to the
// kinematic configuration p - g and back; collision tests sweep both the
// robot and the held disc against the other objects.
struct Tabletop2DObject {
    std::string name;
    double radius = 0.3;
    geom::Vec2 initial_pose;
    std::vector<geom::Vec2> grasps;
    std::optional<geom::Box> goal_region;
    std::optional<geom::Vec2> goal_pose;
};

struct Tabletop2DDomain {
    geom::Box workspace{{0, 0}, {20, 10}};
    geom::Shape robot = geom::Shape::box({0.3, 0.3});
    std::vector<geom::Box> tables;  // valid placement centers
    geom::Vec2 home{10, 1};
    double resolution = geom::kDefaultResolution;
    std::vector<Tabletop2DObject> objects;
};

BuiltProblem build_tabletop2d_problem(const Tabletop2DDomain& domain);

}  // namespace fts::domains
