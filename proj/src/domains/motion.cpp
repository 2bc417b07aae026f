#include "fts/domains/motion.hpp"

namespace fts::domains {

Value vec_value(geom::Vec2 v, int dimension) {
    if (dimension == 1)
        return Value::reals({v.x});
    return Value::reals({v.x, v.y});
}

geom::Vec2 value_vec(const Value& v) {
    const auto& reals = v.as_reals();
    if (reals.size() == 1)
        return {reals[0], 0};
    return {reals[0], reals[1]};
}

namespace {

geom::Segment traj_segment(const Value& traj) {
    const auto& wps = traj.as_trajectory();
    geom::Vec2 a{wps[0][0], wps[0].size() > 1 ? wps[0][1] : 0};
    geom::Vec2 b{wps[1][0], wps[1].size() > 1 ? wps[1][1] : 0};
    return {a, b};
}

}  // namespace

BuiltProblem build_motion_problem(const MotionDomain& domain, geom::Vec2 start, geom::Vec2 goal) {
    auto system = std::make_shared<TransitionSystem>();
    system->state_vars.push_back({"q", "conf", {VariableDomain::Kind::box, {}, {}}});
    system->control_vars.push_back({"t", "traj", {}});

    const geom::Box bounds = domain.bounds;
    const int dim = domain.dimension;
    SchemaPtr conf = make_schema(
        "Conf", {"conf"},
        [bounds](std::span<const Value> vals) { return bounds.contains(value_vec(vals[0])); },
        true);
    SchemaPtr motion = make_schema(
        "Motion", {"conf", "traj", "conf"}, [](std::span<const Value> vals) {
            const auto& wps = vals[1].as_trajectory();
            return wps.size() == 2 && Value::reals(wps[0]) == vals[0] &&
                   Value::reals(wps[1]) == vals[2];
        });
    const geom::Shape robot = domain.robot;
    const auto obstacles = domain.obstacles;
    const double resolution = domain.resolution;
    SchemaPtr cfree = make_schema(
        "CFree", {"traj"},
        [robot, obstacles, resolution](std::span<const Value> vals) {
            return geom::segment_clear(traj_segment(vals[0]), robot, obstacles, resolution);
        },
        true);
    system->add_schema(conf);
    system->add_schema(motion);
    system->add_schema(cfree);
    system->extra_applications.push_back({conf, {state_in(0)}});

    Clause move;
    move.name = "Move";
    move.constraints.push_back(
        Constraint::relational(motion, {state_in(0), control(0), state_out(0)}));
    move.constraints.push_back(Constraint::relational(cfree, {control(0)}));
    system->clauses.push_back(std::move(move));

    BuiltProblem built;
    built.problem.system = system;
    built.problem.initial_clause.name = "<init>";
    built.problem.initial_clause.constraints.push_back(
        Constraint::constant(state_in(0), vec_value(start, dim)));
    built.problem.goal_clause.name = "<goal>";
    built.problem.goal_clause.constraints.push_back(
        Constraint::constant(state_in(0), vec_value(goal, dim)));

    auto conf_sampler = std::make_shared<ConditionalSampler>();
    conf_sampler->name = "conf";
    conf_sampler->output_tags = {"conf"};
    conf_sampler->certified = {{conf, {CertSlot::out(0)}}};
    conf_sampler->make_generator = [bounds, dim](const std::vector<Value>&, std::uint64_t seed) {
        auto rng = std::make_shared<Rng>(seed);
        return std::make_unique<FnDraw>([rng, bounds, dim](int) {
            geom::Vec2 p{rng->uniform(bounds.lo.x, bounds.hi.x),
                         dim == 1 ? 0 : rng->uniform(bounds.lo.y, bounds.hi.y)};
            return Draw::make({vec_value(p, dim)});
        });
    };

    auto traj_sampler = std::make_shared<ConditionalSampler>();
    traj_sampler->name = "traj";
    traj_sampler->input_tags = {"conf", "conf"};
    traj_sampler->output_tags = {"traj"};
    traj_sampler->certified = {{motion, {CertSlot::in(0), CertSlot::out(0), CertSlot::in(1)}}};
    traj_sampler->make_generator = [](const std::vector<Value>& inputs, std::uint64_t) {
        std::vector<std::vector<double>> wps = {inputs[0].as_reals(), inputs[1].as_reals()};
        return std::make_unique<SingleDraw>(std::vector<Value>{Value::trajectory(std::move(wps))});
    };

    built.samplers = {conf_sampler, traj_sampler};
    built.network = {{"conf", {}, {"conf"}}, {"traj", {"conf"}, {"traj"}}};
    built.network_params = {"conf", "traj"};
    return built;
}

}  // namespace fts::domains
