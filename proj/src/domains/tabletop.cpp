#include "fts/domains/tabletop.hpp"

#include <algorithm>

namespace fts::domains {

namespace {

// Shared clause layout for both tabletop variants. Schemas per object o:
//   Stable[o](pose), Grasp[o](grasp), Manip[o](pose, grasp, manip),
//   Region[o](pose) when a region goal exists, and per ordered pair
//   CFree[o,o'](manip-of-o, pose-of-o').
struct TabletopSchemas {
    std::vector<SchemaPtr> stable, grasp, manip, region;
    std::vector<std::vector<SchemaPtr>> cfree;
};

struct TabletopGoal {
    std::optional<Value> pose;
    bool has_region = false;
};

template <typename Objects>
void build_tabletop_system(TransitionSystem& system, const Objects& objects,
                           const TabletopSchemas& schemas) {
    const int num_objects = static_cast<int>(objects.size());
    auto var_obj = [](int index) { return index; };
    const int var_h = num_objects;
    const Value none = Value::symbol("None");

    for (int i = 0; i < num_objects; ++i) {
        const std::string& name = objects[i].name;
        // MPick: drive out, grasp object i, drive home holding it.
        {
            Clause c;
            c.name = "MPick[" + name + "]";
            c.constraints.push_back(Constraint::relational(schemas.stable[i], {state_in(var_obj(i))}));
            c.constraints.push_back(Constraint::relational(schemas.grasp[i], {state_out(var_obj(i))}));
            c.constraints.push_back(Constraint::relational(
                schemas.manip[i], {state_in(var_obj(i)), state_out(var_obj(i)), control(0)}));
            c.constraints.push_back(Constraint::constant(state_in(var_h), none));
            c.constraints.push_back(
                Constraint::constant(state_out(var_h), Value::symbol(name)));
            for (int j = 0; j < num_objects; ++j) {
                if (j == i)
                    continue;
                c.constraints.push_back(
                    Constraint::pairwise(state_in(var_obj(j)), state_out(var_obj(j))));
                c.constraints.push_back(Constraint::relational(
                    schemas.cfree[i][j], {control(0), state_in(var_obj(j))}));
            }
            system.clauses.push_back(std::move(c));
        }
        // MPlace: drive out holding object i, release it, drive home.
        {
            Clause c;
            c.name = "MPlace[" + name + "]";
            c.constraints.push_back(Constraint::relational(schemas.grasp[i], {state_in(var_obj(i))}));
            c.constraints.push_back(Constraint::relational(schemas.stable[i], {state_out(var_obj(i))}));
            c.constraints.push_back(Constraint::relational(
                schemas.manip[i], {state_out(var_obj(i)), state_in(var_obj(i)), control(0)}));
            c.constraints.push_back(Constraint::constant(state_in(var_h), Value::symbol(name)));
            c.constraints.push_back(Constraint::constant(state_out(var_h), none));
            for (int j = 0; j < num_objects; ++j) {
                if (j == i)
                    continue;
                c.constraints.push_back(
                    Constraint::pairwise(state_in(var_obj(j)), state_out(var_obj(j))));
                c.constraints.push_back(Constraint::relational(
                    schemas.cfree[i][j], {control(0), state_in(var_obj(j))}));
            }
            system.clauses.push_back(std::move(c));
        }
    }
}

void add_problem_clauses(BuiltProblem& built, const TransitionSystem& system, int num_objects,
                         const std::vector<Value>& initial_poses,
                         const std::vector<TabletopGoal>& goals,
                         const TabletopSchemas& schemas) {
    built.problem.initial_clause.name = "<init>";
    for (int i = 0; i < num_objects; ++i)
        built.problem.initial_clause.constraints.push_back(
            Constraint::constant(state_in(i), initial_poses[i]));
    built.problem.initial_clause.constraints.push_back(
        Constraint::constant(state_in(num_objects), Value::symbol("None")));
    built.problem.goal_clause.name = "<goal>";
    for (int i = 0; i < num_objects; ++i) {
        if (goals[i].pose)
            built.problem.goal_clause.constraints.push_back(
                Constraint::constant(state_in(i), *goals[i].pose));
        if (goals[i].has_region)
            built.problem.goal_clause.constraints.push_back(
                Constraint::relational(schemas.region[i], {state_in(i)}));
    }
    (void)system;
}

void declare_network(BuiltProblem& built) {
    built.network = {{"grasp", {}, {"grasp"}},
                     {"pose", {}, {"pose"}},
                     {"manip", {"pose", "grasp"}, {"manip"}}};
    built.network_params = {"grasp", "pose", "manip"};
}

}  // namespace

BuiltProblem build_tabletop1d_problem(const Tabletop1DDomain& domain) {
    const int num_objects = static_cast<int>(domain.objects.size());
    auto system = std::make_shared<TransitionSystem>();
    for (const Tabletop1DObject& obj : domain.objects)
        system->state_vars.push_back({"x[" + obj.name + "]", "pose-" + obj.name, {}});
    std::vector<Value> hand_values = {Value::symbol("None")};
    for (const Tabletop1DObject& obj : domain.objects)
        hand_values.push_back(Value::symbol(obj.name));
    system->state_vars.push_back({"h", "hand", {VariableDomain::Kind::finite, {}, hand_values}});
    system->control_vars.push_back({"m", "manip", {}});

    const auto workspace = domain.workspace;
    const auto tables = domain.tables;
    const double clearance = domain.clearance;

    auto hand_target = [](const Value& manip) { return manip.as_trajectory()[0][0]; };

    TabletopSchemas schemas;
    schemas.stable.resize(num_objects);
    schemas.grasp.resize(num_objects);
    schemas.manip.resize(num_objects);
    schemas.region.resize(num_objects);
    schemas.cfree.assign(num_objects, std::vector<SchemaPtr>(num_objects));
    for (int i = 0; i < num_objects; ++i) {
        const Tabletop1DObject& obj = domain.objects[i];
        const std::string pose_tag = "pose-" + obj.name;
        const std::string grasp_tag = "grasp-" + obj.name;
        const std::string manip_tag = "manip-" + obj.name;
        schemas.stable[i] = make_schema(
            "Stable[" + obj.name + "]", {pose_tag},
            [tables](std::span<const Value> vals) {
                double p = vals[0].as_reals()[0];
                return std::any_of(tables.begin(), tables.end(),
                                   [&](const auto& t) { return t.first <= p && p <= t.second; });
            },
            true);
        const auto grasps = obj.grasps;
        schemas.grasp[i] = make_schema(
            "Grasp[" + obj.name + "]", {grasp_tag}, [grasps](std::span<const Value> vals) {
                double g = vals[0].as_reals()[0];
                return std::find(grasps.begin(), grasps.end(), g) != grasps.end();
            });
        // Manipulation value: waypoints [[p+g], [g], [p]].
        schemas.manip[i] = make_schema(
            "Manip[" + obj.name + "]", {pose_tag, grasp_tag, manip_tag},
            [workspace](std::span<const Value> vals) {
                double p = vals[0].as_reals()[0];
                double g = vals[1].as_reals()[0];
                const auto& wps = vals[2].as_trajectory();
                return wps.size() == 3 && wps[0][0] == p + g && wps[1][0] == g && wps[2][0] == p &&
                       workspace.first <= p + g && p + g <= workspace.second;
            });
        if (obj.goal_region) {
            auto r = *obj.goal_region;
            schemas.region[i] = make_schema(
                "Region[" + obj.name + "]", {pose_tag},
                [r](std::span<const Value> vals) {
                    double p = vals[0].as_reals()[0];
                    return r.first <= p && p <= r.second;
                },
                true);
        }
        system->add_schema(schemas.stable[i]);
        system->add_schema(schemas.grasp[i]);
        system->add_schema(schemas.manip[i]);
        if (schemas.region[i])
            system->add_schema(schemas.region[i]);
    }
    for (int i = 0; i < num_objects; ++i) {
        for (int j = 0; j < num_objects; ++j) {
            if (i == j)
                continue;
            schemas.cfree[i][j] = make_schema(
                "CFree[" + domain.objects[i].name + "," + domain.objects[j].name + "]",
                {"manip-" + domain.objects[i].name, "pose-" + domain.objects[j].name},
                [clearance, hand_target](std::span<const Value> vals) {
                    double target = hand_target(vals[0]);
                    double other = vals[1].as_reals()[0];
                    return std::abs(target - other) >= clearance;
                },
                true);
            system->add_schema(schemas.cfree[i][j]);
        }
    }

    build_tabletop_system(*system, domain.objects, schemas);

    BuiltProblem built;
    built.problem.system = system;
    std::vector<Value> initial_poses;
    std::vector<TabletopGoal> goals;
    for (const Tabletop1DObject& obj : domain.objects) {
        initial_poses.push_back(Value::real1(obj.initial_pose));
        TabletopGoal goal;
        if (obj.goal_pose)
            goal.pose = Value::real1(*obj.goal_pose);
        goal.has_region = obj.goal_region.has_value();
        goals.push_back(goal);
    }
    add_problem_clauses(built, *system, num_objects, initial_poses, goals, schemas);

    for (int i = 0; i < num_objects; ++i) {
        const Tabletop1DObject& obj = domain.objects[i];
        auto grasp_sampler = std::make_shared<ConditionalSampler>();
        grasp_sampler->name = "grasp[" + obj.name + "]";
        grasp_sampler->output_tags = {"grasp-" + obj.name};
        grasp_sampler->certified = {{schemas.grasp[i], {CertSlot::out(0)}}};
        std::vector<std::vector<Value>> tuples;
        for (double g : obj.grasps)
            tuples.push_back({Value::real1(g)});
        grasp_sampler->make_generator = [tuples](const std::vector<Value>&, std::uint64_t) {
            return std::make_unique<EnumerationDraw>(tuples);
        };

        auto pose_sampler = std::make_shared<ConditionalSampler>();
        pose_sampler->name = "pose[" + obj.name + "]";
        pose_sampler->output_tags = {"pose-" + obj.name};
        pose_sampler->certified = {{schemas.stable[i], {CertSlot::out(0)}}};
        const auto placements = obj.placements;
        pose_sampler->make_generator = [placements](const std::vector<Value>&,
                                                    std::uint64_t seed) -> std::unique_ptr<Generator> {
            if (placements.empty())
                return std::make_unique<EmptyDraw>();
            auto rng = std::make_shared<Rng>(seed);
            auto count = std::make_shared<int>(0);
            return std::make_unique<FnDraw>([rng, placements, count](int) {
                // Cycle through the placement intervals so every interval is
                // drawn from infinitely often.
                const auto& r = placements[*count % placements.size()];
                *count += 1;
                return Draw::make({Value::real1(rng->uniform(r.first, r.second))});
            });
        };

        auto manip_sampler = std::make_shared<ConditionalSampler>();
        manip_sampler->name = "manip[" + obj.name + "]";
        manip_sampler->input_tags = {"pose-" + obj.name, "grasp-" + obj.name};
        manip_sampler->output_tags = {"manip-" + obj.name};
        manip_sampler->certified = {
            {schemas.manip[i], {CertSlot::in(0), CertSlot::in(1), CertSlot::out(0)}}};
        manip_sampler->make_generator = [workspace](const std::vector<Value>& inputs,
                                                    std::uint64_t) -> std::unique_ptr<Generator> {
            double p = inputs[0].as_reals()[0];
            double g = inputs[1].as_reals()[0];
            double hand = p + g;
            if (hand < workspace.first || hand > workspace.second)
                return std::make_unique<EmptyDraw>();
            Value manip = Value::trajectory({{hand}, {g}, {p}});
            return std::make_unique<SingleDraw>(std::vector<Value>{manip});
        };

        built.samplers.push_back(grasp_sampler);
        built.samplers.push_back(pose_sampler);
        built.samplers.push_back(manip_sampler);
    }
    declare_network(built);
    return built;
}

BuiltProblem build_tabletop2d_problem(const Tabletop2DDomain& domain) {
    const int num_objects = static_cast<int>(domain.objects.size());
    auto system = std::make_shared<TransitionSystem>();
    for (const Tabletop2DObject& obj : domain.objects)
        system->state_vars.push_back({"x[" + obj.name + "]", "pose-" + obj.name, {}});
    std::vector<Value> hand_values = {Value::symbol("None")};
    for (const Tabletop2DObject& obj : domain.objects)
        hand_values.push_back(Value::symbol(obj.name));
    system->state_vars.push_back({"h", "hand", {VariableDomain::Kind::finite, {}, hand_values}});
    system->control_vars.push_back({"m", "manip", {}});

    const geom::Box workspace = domain.workspace;
    const geom::Shape robot = domain.robot;
    const geom::Vec2 home = domain.home;
    const double resolution = domain.resolution;
    const auto tables = domain.tables;

    // Manipulation value: waypoints [home, kin config, grasp, pose].
    auto manip_value = [home](geom::Vec2 kin, geom::Vec2 g, geom::Vec2 p) {
        return Value::trajectory({{home.x, home.y}, {kin.x, kin.y}, {g.x, g.y}, {p.x, p.y}});
    };

    TabletopSchemas schemas;
    schemas.stable.resize(num_objects);
    schemas.grasp.resize(num_objects);
    schemas.manip.resize(num_objects);
    schemas.region.resize(num_objects);
    schemas.cfree.assign(num_objects, std::vector<SchemaPtr>(num_objects));
    for (int i = 0; i < num_objects; ++i) {
        const Tabletop2DObject& obj = domain.objects[i];
        const std::string pose_tag = "pose-" + obj.name;
        const std::string grasp_tag = "grasp-" + obj.name;
        const std::string manip_tag = "manip-" + obj.name;
        schemas.stable[i] = make_schema(
            "Stable[" + obj.name + "]", {pose_tag},
            [tables](std::span<const Value> vals) {
                geom::Vec2 p = value_vec(vals[0]);
                return std::any_of(tables.begin(), tables.end(),
                                   [&](const geom::Box& t) { return t.contains(p); });
            },
            true);
        const auto grasps = obj.grasps;
        schemas.grasp[i] = make_schema(
            "Grasp[" + obj.name + "]", {grasp_tag}, [grasps](std::span<const Value> vals) {
                geom::Vec2 g = value_vec(vals[0]);
                return std::any_of(grasps.begin(), grasps.end(),
                                   [&](geom::Vec2 k) { return k == g; });
            });
        schemas.manip[i] = make_schema(
            "Manip[" + obj.name + "]", {pose_tag, grasp_tag, manip_tag},
            [workspace, home](std::span<const Value> vals) {
                geom::Vec2 p = value_vec(vals[0]);
                geom::Vec2 g = value_vec(vals[1]);
                const auto& wps = vals[2].as_trajectory();
                if (wps.size() != 4)
                    return false;
                geom::Vec2 h{wps[0][0], wps[0][1]}, kin{wps[1][0], wps[1][1]};
                geom::Vec2 gg{wps[2][0], wps[2][1]}, pp{wps[3][0], wps[3][1]};
                return h == home && gg == g && pp == p && kin == p - g && workspace.contains(kin);
            });
        if (obj.goal_region) {
            geom::Box r = *obj.goal_region;
            schemas.region[i] = make_schema(
                "Region[" + obj.name + "]", {pose_tag},
                [r](std::span<const Value> vals) { return r.contains(value_vec(vals[0])); }, true);
        }
        system->add_schema(schemas.stable[i]);
        system->add_schema(schemas.grasp[i]);
        system->add_schema(schemas.manip[i]);
        if (schemas.region[i])
            system->add_schema(schemas.region[i]);
    }
    for (int i = 0; i < num_objects; ++i) {
        const geom::Shape held = geom::Shape::disc(domain.objects[i].radius);
        for (int j = 0; j < num_objects; ++j) {
            if (i == j)
                continue;
            const geom::Shape other = geom::Shape::disc(domain.objects[j].radius);
            schemas.cfree[i][j] = make_schema(
                "CFree[" + domain.objects[i].name + "," + domain.objects[j].name + "]",
                {"manip-" + domain.objects[i].name, "pose-" + domain.objects[j].name},
                [robot, held, other, resolution](std::span<const Value> vals) {
                    const auto& wps = vals[0].as_trajectory();
                    geom::Segment seg{{wps[0][0], wps[0][1]}, {wps[1][0], wps[1][1]}};
                    geom::Vec2 g{wps[2][0], wps[2][1]};
                    geom::PlacedBody obstacle{other, value_vec(vals[1])};
                    // Both legs traverse the same segment; one of them carries
                    // the object at its grasp offset.
                    return geom::swept_pair_clear(seg, robot, std::make_pair(held, g), obstacle,
                                                  resolution);
                },
                true);
            system->add_schema(schemas.cfree[i][j]);
        }
    }

    build_tabletop_system(*system, domain.objects, schemas);

    BuiltProblem built;
    built.problem.system = system;
    std::vector<Value> initial_poses;
    std::vector<TabletopGoal> goals;
    for (const Tabletop2DObject& obj : domain.objects) {
        initial_poses.push_back(vec_value(obj.initial_pose, 2));
        TabletopGoal goal;
        if (obj.goal_pose)
            goal.pose = vec_value(*obj.goal_pose, 2);
        goal.has_region = obj.goal_region.has_value();
        goals.push_back(goal);
    }
    add_problem_clauses(built, *system, num_objects, initial_poses, goals, schemas);

    std::vector<geom::PlacedBody> initial_bodies;
    for (const Tabletop2DObject& obj : domain.objects)
        initial_bodies.push_back({geom::Shape::disc(obj.radius), obj.initial_pose});

    for (int i = 0; i < num_objects; ++i) {
        const Tabletop2DObject& obj = domain.objects[i];
        auto grasp_sampler = std::make_shared<ConditionalSampler>();
        grasp_sampler->name = "grasp[" + obj.name + "]";
        grasp_sampler->output_tags = {"grasp-" + obj.name};
        grasp_sampler->certified = {{schemas.grasp[i], {CertSlot::out(0)}}};
        std::vector<std::vector<Value>> tuples;
        for (geom::Vec2 g : obj.grasps)
            tuples.push_back({vec_value(g, 2)});
        grasp_sampler->make_generator = [tuples](const std::vector<Value>&, std::uint64_t) {
            return std::make_unique<EnumerationDraw>(tuples);
        };

        auto pose_sampler = std::make_shared<ConditionalSampler>();
        pose_sampler->name = "pose[" + obj.name + "]";
        pose_sampler->output_tags = {"pose-" + obj.name};
        pose_sampler->certified = {{schemas.stable[i], {CertSlot::out(0)}}};
        const double radius = obj.radius;
        pose_sampler->make_generator = [tables, initial_bodies, radius](
                                           const std::vector<Value>&, std::uint64_t seed) {
            auto rng = std::make_shared<Rng>(seed);
            return std::make_unique<FnDraw>([rng, tables, initial_bodies, radius](int max_attempts) {
                auto draw_uniform = [&]() {
                    const geom::Box& t = tables[rng->below(static_cast<int>(tables.size()))];
                    return geom::Vec2{rng->uniform(t.lo.x, t.hi.x), rng->uniform(t.lo.y, t.hi.y)};
                };
                if (rng->canonical() < 0.5)
                    return Draw::make({vec_value(draw_uniform(), 2)});
                geom::Shape body = geom::Shape::disc(radius);
                for (int attempt = 0; attempt < max_attempts; ++attempt) {
                    geom::Vec2 p = draw_uniform();
                    bool clear = true;
                    for (const geom::PlacedBody& otherb : initial_bodies)
                        if (geom::shapes_overlap(body, p, otherb.shape, otherb.pose)) {
                            clear = false;
                            break;
                        }
                    if (clear)
                        return Draw::make({vec_value(p, 2)});
                }
                return Draw::fail();
            });
        };

        auto manip_sampler = std::make_shared<ConditionalSampler>();
        manip_sampler->name = "manip[" + obj.name + "]";
        manip_sampler->input_tags = {"pose-" + obj.name, "grasp-" + obj.name};
        manip_sampler->output_tags = {"manip-" + obj.name};
        manip_sampler->certified = {
            {schemas.manip[i], {CertSlot::in(0), CertSlot::in(1), CertSlot::out(0)}}};
        manip_sampler->make_generator = [workspace, manip_value](
                                            const std::vector<Value>& inputs,
                                            std::uint64_t) -> std::unique_ptr<Generator> {
            geom::Vec2 p = value_vec(inputs[0]);
            geom::Vec2 g = value_vec(inputs[1]);
            geom::Vec2 kin = p - g;
            if (!workspace.contains(kin))
                return std::make_unique<EmptyDraw>();
            return std::make_unique<SingleDraw>(std::vector<Value>{manip_value(kin, g, p)});
        };

        built.samplers.push_back(grasp_sampler);
        built.samplers.push_back(pose_sampler);
        built.samplers.push_back(manip_sampler);
    }
    declare_network(built);
    return built;
}

}  // namespace fts::domains
