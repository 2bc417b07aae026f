#pragma once

#include "fts/domains/common.hpp"

#include <optional>

namespace fts::domains {

// Full pick-and-place encoding with an explicit robot configuration
// variable: Move / MoveH / Pick / Place clauses, straight-line trajectories,
// and exact translate-only kinematics (configuration = pose - grasp).
struct PickPlaceObject {
    std::string name;
    double radius = 0.3;
    geom::Vec2 initial_pose;
    std::vector<geom::Vec2> grasps;
    std::vector<geom::Box> surfaces;          // valid placement centers
    std::optional<geom::Box> goal_region;
    std::optional<geom::Vec2> goal_pose;
};

struct PickPlaceDomain {
    int dimension = 2;
    geom::Box bounds;                    // configuration space
    geom::Shape robot = geom::Shape::box({0.3, 0.3});
    std::vector<PickPlaceObject> objects;
    std::vector<geom::PlacedBody> fixed_obstacles;
    double resolution = geom::kDefaultResolution;
    geom::Vec2 initial_config;
    std::optional<geom::Vec2> goal_config;
};

BuiltProblem build_pickplace_problem(const PickPlaceDomain& domain);

// The skeleton (Move, Pick[o], MoveH[o], Place[o], Move) manipulating one
// object, used by structural analyses.
PlanSkeleton pick_place_skeleton(const std::string& object);

}  // namespace fts::domains
