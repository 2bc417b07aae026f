#include "fts/domains/pickplace.hpp"

#include <algorithm>

namespace fts::domains {

namespace {

geom::Segment traj_segment(const Value& traj) {
    const auto& wps = traj.as_trajectory();
    geom::Vec2 a{wps[0][0], wps[0].size() > 1 ? wps[0][1] : 0};
    geom::Vec2 b{wps[1][0], wps[1].size() > 1 ? wps[1][1] : 0};
    return {a, b};
}

bool in_any(const std::vector<geom::Box>& boxes, geom::Vec2 p) {
    return std::any_of(boxes.begin(), boxes.end(),
                       [&](const geom::Box& b) { return b.contains(p); });
}

// q = p - g, computed once here; the schema test recomputes the identical
// expression so certified elements match it bit for bit.
Value ik_config(const Value& pose, const Value& grasp, int dim) {
    geom::Vec2 q = value_vec(pose) - value_vec(grasp);
    return vec_value(q, dim);
}

}  // namespace

PlanSkeleton pick_place_skeleton(const std::string& object) {
    return {{"Move", "Pick[" + object + "]", "MoveH[" + object + "]", "Place[" + object + "]",
             "Move"}};
}

BuiltProblem build_pickplace_problem(const PickPlaceDomain& domain) {
    const int dim = domain.dimension;
    const int num_objects = static_cast<int>(domain.objects.size());
    auto system = std::make_shared<TransitionSystem>();
    system->state_vars.push_back({"q", "conf", {VariableDomain::Kind::box, {}, {}}});
    for (const PickPlaceObject& obj : domain.objects)
        system->state_vars.push_back({"x[" + obj.name + "]", "pose-" + obj.name, {}});
    std::vector<Value> hand_values = {Value::symbol("None")};
    for (const PickPlaceObject& obj : domain.objects)
        hand_values.push_back(Value::symbol(obj.name));
    system->state_vars.push_back(
        {"h", "hand", {VariableDomain::Kind::finite, {}, hand_values}});
    system->control_vars.push_back({"t", "traj", {}});

    const int var_q = 0;
    auto var_obj = [](int index) { return 1 + index; };
    const int var_h = 1 + num_objects;

    const geom::Box bounds = domain.bounds;
    const geom::Shape robot = domain.robot;
    const double resolution = domain.resolution;
    const auto fixed = domain.fixed_obstacles;

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
    SchemaPtr cfree = make_schema(
        "CFree", {"traj"},
        [robot, fixed, resolution](std::span<const Value> vals) {
            return geom::segment_clear(traj_segment(vals[0]), robot, fixed, resolution);
        },
        true);
    system->add_schema(conf);
    system->add_schema(motion);
    system->add_schema(cfree);
    system->extra_applications.push_back({conf, {state_in(var_q)}});

    std::vector<SchemaPtr> stable(num_objects), grasp(num_objects), kin(num_objects);
    std::vector<SchemaPtr> cfree_obj(num_objects), cfreeh(num_objects), region(num_objects);
    std::vector<std::vector<SchemaPtr>> cfreeh_pair(num_objects,
                                                    std::vector<SchemaPtr>(num_objects));
    for (int i = 0; i < num_objects; ++i) {
        const PickPlaceObject& obj = domain.objects[i];
        const std::string pose_tag = "pose-" + obj.name;
        const std::string grasp_tag = "grasp-" + obj.name;
        const auto surfaces = obj.surfaces;
        const auto grasps = obj.grasps;
        const geom::Shape body = geom::Shape::disc(obj.radius);

        stable[i] = make_schema(
            "Stable[" + obj.name + "]", {pose_tag},
            [surfaces](std::span<const Value> vals) { return in_any(surfaces, value_vec(vals[0])); },
            true);
        grasp[i] = make_schema(
            "Grasp[" + obj.name + "]", {grasp_tag}, [grasps](std::span<const Value> vals) {
                geom::Vec2 g = value_vec(vals[0]);
                return std::any_of(grasps.begin(), grasps.end(),
                                   [&](geom::Vec2 k) { return k == g; });
            });
        kin[i] = make_schema("Kin[" + obj.name + "]", {grasp_tag, pose_tag, "conf"},
                             [dim](std::span<const Value> vals) {
                                 return ik_config(vals[1], vals[0], dim) == vals[2];
                             });
        cfree_obj[i] = make_schema(
            "CFree[" + obj.name + "]", {"traj", pose_tag},
            [robot, body, resolution](std::span<const Value> vals) {
                return geom::swept_pair_clear(traj_segment(vals[0]), robot, std::nullopt,
                                              {body, value_vec(vals[1])}, resolution);
            },
            true);
        cfreeh[i] = make_schema(
            "CFreeH[" + obj.name + "]", {"traj", grasp_tag},
            [body, fixed, resolution](std::span<const Value> vals) {
                geom::Segment seg = traj_segment(vals[0]);
                geom::Vec2 g = value_vec(vals[1]);
                for (const geom::PlacedBody& obst : fixed)
                    if (!geom::swept_pair_clear({seg.a + g, seg.b + g}, body, std::nullopt, obst,
                                                resolution))
                        return false;
                return true;
            },
            true);
        if (obj.goal_region) {
            geom::Box r = *obj.goal_region;
            region[i] = make_schema(
                "Region[" + obj.name + "]", {pose_tag},
                [r](std::span<const Value> vals) { return r.contains(value_vec(vals[0])); }, true);
        }
        system->add_schema(stable[i]);
        system->add_schema(grasp[i]);
        system->add_schema(kin[i]);
        system->add_schema(cfree_obj[i]);
        system->add_schema(cfreeh[i]);
        if (region[i])
            system->add_schema(region[i]);
    }
    for (int i = 0; i < num_objects; ++i) {
        const geom::Shape held = geom::Shape::disc(domain.objects[i].radius);
        for (int j = 0; j < num_objects; ++j) {
            if (i == j)
                continue;
            const geom::Shape other = geom::Shape::disc(domain.objects[j].radius);
            cfreeh_pair[i][j] = make_schema(
                "CFreeH[" + domain.objects[i].name + "," + domain.objects[j].name + "]",
                {"traj", "grasp-" + domain.objects[i].name, "pose-" + domain.objects[j].name},
                [robot, held, other, resolution](std::span<const Value> vals) {
                    geom::Segment seg = traj_segment(vals[0]);
                    geom::Vec2 g = value_vec(vals[1]);
                    return geom::swept_pair_clear(seg, robot, std::make_pair(held, g),
                                                  {other, value_vec(vals[2])}, resolution);
                },
                true);
            system->add_schema(cfreeh_pair[i][j]);
        }
    }

    const Value none = Value::symbol("None");
    const Value traj_none = Value::symbol("None");

    // Move: drive with an empty gripper; every object stays put and must be
    // clear of the swept robot body.
    {
        Clause c;
        c.name = "Move";
        c.constraints.push_back(
            Constraint::relational(motion, {state_in(var_q), control(0), state_out(var_q)}));
        c.constraints.push_back(Constraint::relational(cfree, {control(0)}));
        c.constraints.push_back(Constraint::constant(state_in(var_h), none));
        c.constraints.push_back(Constraint::pairwise(state_in(var_h), state_out(var_h)));
        for (int i = 0; i < num_objects; ++i) {
            c.constraints.push_back(Constraint::pairwise(state_in(var_obj(i)), state_out(var_obj(i))));
            c.constraints.push_back(
                Constraint::relational(cfree_obj[i], {control(0), state_in(var_obj(i))}));
        }
        system->clauses.push_back(std::move(c));
    }
    for (int i = 0; i < num_objects; ++i) {
        const std::string& name = domain.objects[i].name;
        // MoveH: drive while holding object i at a fixed grasp.
        {
            Clause c;
            c.name = "MoveH[" + name + "]";
            c.constraints.push_back(
                Constraint::relational(motion, {state_in(var_q), control(0), state_out(var_q)}));
            c.constraints.push_back(Constraint::relational(cfree, {control(0)}));
            c.constraints.push_back(
                Constraint::relational(cfreeh[i], {control(0), state_in(var_obj(i))}));
            c.constraints.push_back(Constraint::constant(state_in(var_h), Value::symbol(name)));
            c.constraints.push_back(Constraint::pairwise(state_in(var_h), state_out(var_h)));
            c.constraints.push_back(Constraint::pairwise(state_in(var_obj(i)), state_out(var_obj(i))));
            for (int j = 0; j < num_objects; ++j) {
                if (j == i)
                    continue;
                c.constraints.push_back(
                    Constraint::pairwise(state_in(var_obj(j)), state_out(var_obj(j))));
                c.constraints.push_back(Constraint::relational(
                    cfreeh_pair[i][j], {control(0), state_in(var_obj(i)), state_in(var_obj(j))}));
            }
            system->clauses.push_back(std::move(c));
        }
        // Pick: instantaneous grasp at a kinematic solution.
        {
            Clause c;
            c.name = "Pick[" + name + "]";
            c.constraints.push_back(Constraint::relational(stable[i], {state_in(var_obj(i))}));
            c.constraints.push_back(Constraint::relational(grasp[i], {state_out(var_obj(i))}));
            c.constraints.push_back(Constraint::relational(
                kin[i], {state_out(var_obj(i)), state_in(var_obj(i)), state_in(var_q)}));
            c.constraints.push_back(Constraint::pairwise(state_in(var_q), state_out(var_q)));
            c.constraints.push_back(Constraint::constant(state_in(var_h), none));
            c.constraints.push_back(Constraint::constant(state_out(var_h), Value::symbol(name)));
            c.constraints.push_back(Constraint::constant(control(0), traj_none));
            for (int j = 0; j < num_objects; ++j)
                if (j != i)
                    c.constraints.push_back(
                        Constraint::pairwise(state_in(var_obj(j)), state_out(var_obj(j))));
            system->clauses.push_back(std::move(c));
        }
        // Place: the mirror image of Pick.
        {
            Clause c;
            c.name = "Place[" + name + "]";
            c.constraints.push_back(Constraint::relational(grasp[i], {state_in(var_obj(i))}));
            c.constraints.push_back(Constraint::relational(stable[i], {state_out(var_obj(i))}));
            c.constraints.push_back(Constraint::relational(
                kin[i], {state_in(var_obj(i)), state_out(var_obj(i)), state_in(var_q)}));
            c.constraints.push_back(Constraint::pairwise(state_in(var_q), state_out(var_q)));
            c.constraints.push_back(Constraint::constant(state_in(var_h), Value::symbol(name)));
            c.constraints.push_back(Constraint::constant(state_out(var_h), none));
            c.constraints.push_back(Constraint::constant(control(0), traj_none));
            for (int j = 0; j < num_objects; ++j)
                if (j != i)
                    c.constraints.push_back(
                        Constraint::pairwise(state_in(var_obj(j)), state_out(var_obj(j))));
            system->clauses.push_back(std::move(c));
        }
    }

    BuiltProblem built;
    built.problem.system = system;
    built.problem.initial_clause.name = "<init>";
    built.problem.initial_clause.constraints.push_back(
        Constraint::constant(state_in(var_q), vec_value(domain.initial_config, dim)));
    for (int i = 0; i < num_objects; ++i)
        built.problem.initial_clause.constraints.push_back(Constraint::constant(
            state_in(var_obj(i)), vec_value(domain.objects[i].initial_pose, dim)));
    built.problem.initial_clause.constraints.push_back(Constraint::constant(state_in(var_h), none));
    built.problem.goal_clause.name = "<goal>";
    if (domain.goal_config)
        built.problem.goal_clause.constraints.push_back(
            Constraint::constant(state_in(var_q), vec_value(*domain.goal_config, dim)));
    for (int i = 0; i < num_objects; ++i) {
        if (domain.objects[i].goal_pose)
            built.problem.goal_clause.constraints.push_back(Constraint::constant(
                state_in(var_obj(i)), vec_value(*domain.objects[i].goal_pose, dim)));
        if (region[i])
            built.problem.goal_clause.constraints.push_back(
                Constraint::relational(region[i], {state_in(var_obj(i))}));
    }

    // Samplers.
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

    // Initial poses of all objects, for the collision-biased pose draw.
    std::vector<geom::PlacedBody> initial_bodies;
    for (const PickPlaceObject& obj : domain.objects)
        initial_bodies.push_back({geom::Shape::disc(obj.radius), obj.initial_pose});

    for (int i = 0; i < num_objects; ++i) {
        const PickPlaceObject& obj = domain.objects[i];
        const std::string pose_tag = "pose-" + obj.name;
        const std::string grasp_tag = "grasp-" + obj.name;

        auto grasp_sampler = std::make_shared<ConditionalSampler>();
        grasp_sampler->name = "grasp[" + obj.name + "]";
        grasp_sampler->output_tags = {grasp_tag};
        grasp_sampler->certified = {{grasp[i], {CertSlot::out(0)}}};
        std::vector<std::vector<Value>> grasp_tuples;
        for (geom::Vec2 g : obj.grasps)
            grasp_tuples.push_back({vec_value(g, dim)});
        grasp_sampler->make_generator = [grasp_tuples](const std::vector<Value>&, std::uint64_t) {
            return std::make_unique<EnumerationDraw>(grasp_tuples);
        };

        auto pose_sampler = std::make_shared<ConditionalSampler>();
        pose_sampler->name = "pose[" + obj.name + "]";
        pose_sampler->output_tags = {pose_tag};
        pose_sampler->certified = {{stable[i], {CertSlot::out(0)}}};
        const auto surfaces = obj.surfaces;
        const double radius = obj.radius;
        pose_sampler->make_generator = [surfaces, initial_bodies, radius, dim](
                                           const std::vector<Value>&, std::uint64_t seed) {
            auto rng = std::make_shared<Rng>(seed);
            return std::make_unique<FnDraw>([rng, surfaces, initial_bodies, radius,
                                             dim](int max_attempts) {
                if (surfaces.empty())
                    return Draw::finish();
                auto draw_uniform = [&]() {
                    const geom::Box& s = surfaces[rng->below(static_cast<int>(surfaces.size()))];
                    return geom::Vec2{rng->uniform(s.lo.x, s.hi.x),
                                      dim == 1 ? 0 : rng->uniform(s.lo.y, s.hi.y)};
                };
                // Half the draws are uniform over the surfaces; the other half
                // reject placements colliding with any initially placed body.
                if (rng->canonical() < 0.5)
                    return Draw::make({vec_value(draw_uniform(), dim)});
                geom::Shape body = geom::Shape::disc(radius);
                for (int attempt = 0; attempt < max_attempts; ++attempt) {
                    geom::Vec2 p = draw_uniform();
                    bool clear = true;
                    for (const geom::PlacedBody& other : initial_bodies)
                        if (geom::shapes_overlap(body, p, other.shape, other.pose)) {
                            clear = false;
                            break;
                        }
                    if (clear)
                        return Draw::make({vec_value(p, dim)});
                }
                return Draw::fail();
            });
        };

        auto ik_sampler = std::make_shared<ConditionalSampler>();
        ik_sampler->name = "ik[" + obj.name + "]";
        ik_sampler->input_tags = {pose_tag, grasp_tag};
        ik_sampler->output_tags = {"conf"};
        ik_sampler->certified = {
            {kin[i], {CertSlot::in(1), CertSlot::in(0), CertSlot::out(0)}}};
        ik_sampler->make_generator = [bounds, dim](const std::vector<Value>& inputs,
                                                   std::uint64_t) -> std::unique_ptr<Generator> {
            Value q = ik_config(inputs[0], inputs[1], dim);
            if (!bounds.contains(value_vec(q)))
                return std::make_unique<EmptyDraw>();
            return std::make_unique<SingleDraw>(std::vector<Value>{q});
        };

        built.samplers.push_back(grasp_sampler);
        built.samplers.push_back(pose_sampler);
        built.samplers.push_back(ik_sampler);
    }

    // Declared network roles for one manipulation cycle of a single object.
    built.network = {{"grasp", {}, {"grasp"}},
                     {"pose", {}, {"pose"}},
                     {"ik", {"pose", "grasp"}, {"conf"}},
                     {"traj", {"conf"}, {"traj"}}};
    built.network_params = {"grasp", "pose", "conf", "traj"};
    return built;
}

}  // namespace fts::domains
