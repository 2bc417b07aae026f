#include "fts/analysis.hpp"
#include "fts/domains/common.hpp"
#include "fts/domains/motion.hpp"
#include "fts/domains/pickplace.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace fts;
using namespace fts::domains;

namespace {

// Two discs on one long surface; the running two-object setup.
PickPlaceDomain two_object_domain() {
    PickPlaceDomain d;
    d.dimension = 2;
    d.bounds = {{0, 0}, {10, 10}};
    d.robot = geom::Shape::box({0.3, 0.3});
    d.initial_config = {5, 1};
    d.goal_config = geom::Vec2{5, 1};
    geom::Box surface{{1, 5}, {9, 5}};  // a line of placements
    PickPlaceObject a{"A", 0.3, {2, 5}, {{0, 1.0}}, {surface}, geom::Box{{6, 5}, {9, 5}}, {}};
    PickPlaceObject b{"B", 0.3, {8, 5}, {{0, 1.0}}, {surface}, {}, {}};
    d.objects = {a, b};
    return d;
}

}  // namespace

TEST_CASE("running skeleton has 29 parameters of which 7 are free") {
    BuiltProblem built = build_pickplace_problem(two_object_domain());
    FreeParamAnalysis analysis = skeleton_free_parameters(built.problem, pick_place_skeleton("A"));
    CHECK(analysis.total_params() == 29);
    CHECK(analysis.free_count() == 7);
    // Every component is classified exactly once; constant components are
    // never free.
    int fixed = 0, free = 0, framed = 0;
    for (const ParamComponent& comp : analysis.components) {
        if (comp.constant) {
            CHECK(!comp.free);
            fixed += 1;
        } else if (comp.free) {
            free += 1;
        } else {
            framed += 1;
        }
    }
    CHECK(fixed + free + framed == static_cast<int>(analysis.components.size()));
    CHECK(free == 7);
}

TEST_CASE("pick clause frees exactly the pose, grasp, and configuration") {
    BuiltProblem built = build_pickplace_problem(two_object_domain());
    const TransitionSystem& system = *built.problem.system;
    FreeParamAnalysis analysis = free_parameters(system, system.clause("Pick[A]"));
    CHECK(analysis.free_count() == 3);
    std::set<std::string> reps;
    for (int rep : analysis.free_representatives())
        reps.insert(analysis.space.describe(rep, system));
    // Representatives: current pose of A, next-state grasp of A, and the
    // shared configuration (named at its first occurrence).
    CHECK(reps == std::set<std::string>{"x[A]^0", "x[A]^1", "q^0"});
}

TEST_CASE("fully constant clause has no free parameters") {
    auto system = std::make_shared<TransitionSystem>();
    system->state_vars.push_back({"x", "x", {}});
    Clause c;
    c.name = "Set";
    c.constraints.push_back(Constraint::constant(state_in(0), Value::real1(1)));
    c.constraints.push_back(Constraint::constant(state_out(0), Value::real1(2)));
    system->clauses.push_back(c);
    FreeParamAnalysis analysis = free_parameters(*system, system->clauses[0]);
    CHECK(analysis.free_count() == 0);
}

TEST_CASE("conflicting constants in one equality chain are rejected") {
    auto system = std::make_shared<TransitionSystem>();
    system->state_vars.push_back({"x", "x", {}});
    Clause c;
    c.name = "Bad";
    c.constraints.push_back(Constraint::constant(state_in(0), Value::real1(1)));
    c.constraints.push_back(Constraint::constant(state_out(0), Value::real1(2)));
    c.constraints.push_back(Constraint::pairwise(state_in(0), state_out(0)));
    system->clauses.push_back(c);
    CHECK_THROWS_AS(free_parameters(*system, system->clauses[0]), ModelError);
}

namespace {

Plan solved_two_object_plan() {
    // Hand-built plan: move to a kinematic configuration for A, pick it,
    // carry it into the region, place, and return to the goal configuration.
    const Value q0 = Value::reals({5, 1});
    const Value a0 = Value::reals({2, 5});
    const Value b0 = Value::reals({8, 5});
    const Value g = Value::reals({0, 1.0});
    const Value none = Value::symbol("None");
    const Value hold = Value::symbol("A");
    const Value tnone = Value::symbol("None");
    auto ik = [](const Value& pose) {
        return Value::reals({pose.as_reals()[0] - 0.0, pose.as_reals()[1] - 1.0});
    };
    const Value p1 = Value::reals({7, 5});  // inside the region
    const Value q_pick = ik(a0);
    const Value q_place = ik(p1);
    auto traj = [](const Value& from, const Value& to) {
        return Value::trajectory({from.as_reals(), to.as_reals()});
    };
    Plan plan;
    plan.skeleton = pick_place_skeleton("A");
    plan.states = {
        {q0, a0, b0, none},     {q_pick, a0, b0, none},  {q_pick, g, b0, hold},
        {q_place, g, b0, hold}, {q_place, p1, b0, none}, {q0, p1, b0, none},
    };
    plan.controls = {
        {traj(q0, q_pick)}, {tnone}, {traj(q_pick, q_place)}, {tnone}, {traj(q_place, q0)},
    };
    return plan;
}

}  // namespace

TEST_CASE("validate_plan accepts a hand-built solution and rejects violations") {
    BuiltProblem built = build_pickplace_problem(two_object_domain());
    Plan plan = solved_two_object_plan();
    ValidationResult ok = validate_plan(built.problem, plan);
    std::string why = ok.violation ? ok.violation->constraint + ": " + ok.violation->message
                                   : std::string("ok");
    INFO(why);
    CHECK(ok.ok);

    SUBCASE("sweeping through the other object violates its collision constraint") {
        Plan bad = plan;
        Value near_b = Value::reals({8, 4});
        bad.states[1][0] = near_b;
        bad.states[2][0] = near_b;
        bad.controls[0][0] = Value::trajectory({{5, 1}, {8, 4}});
        bad.controls[2][0] = Value::trajectory({{8, 4}, {7, 4}});
        bad.states[3][0] = Value::reals({7, 4});
        bad.states[4][0] = Value::reals({7, 4});
        ValidationResult res = validate_plan(built.problem, bad);
        REQUIRE(!res.ok);
        // The first Move's sweep ends right under B; picking A from there is
        // impossible, so the first failure is the kinematic or collision
        // constraint; with these coordinates the robot body at (8,4) clears
        // B at (8,5) but the pick step no longer matches.
        CHECK(res.violation->step >= 1);
    }

    SUBCASE("a sweep through B is reported against B's collision constraint") {
        Plan bad = plan;
        // Route the carry segment straight through B.
        bad.controls[2][0] = Value::trajectory({{2, 4}, {8, 5}});
        bad.states[3][0] = Value::reals({8, 5});
        ValidationResult res = validate_plan(built.problem, bad);
        REQUIRE(!res.ok);
        CHECK(res.violation->step == 3);
        CHECK(res.violation->constraint == "CFreeH[A,B]");
    }

    SUBCASE("perturbing a step is caught at that step") {
        Plan bad = plan;
        bad.controls[2][0] = Value::trajectory({{2, 4}, {3.25, 4}});
        ValidationResult res = validate_plan(built.problem, bad);
        REQUIRE(!res.ok);
        CHECK(res.violation->step == 3);
    }

    SUBCASE("unknown clause names are malformed, not invalid") {
        Plan bad = plan;
        bad.skeleton.clause_names[0] = "Teleport";
        CHECK_THROWS_AS(validate_plan(built.problem, bad), ModelError);
    }
}

TEST_CASE("empty plan is valid exactly when the initial state is a goal state") {
    PickPlaceDomain d = two_object_domain();
    d.goal_config.reset();
    BuiltProblem built = build_pickplace_problem(d);
    Plan empty;
    empty.states = {built.problem.initial_state()};
    CHECK(!validate_plan(built.problem, empty).ok);  // A starts outside the region

    d.objects[0].initial_pose = {7, 5};  // start inside the region
    BuiltProblem done = build_pickplace_problem(d);
    Plan empty2;
    empty2.states = {done.problem.initial_state()};
    CHECK(validate_plan(done.problem, empty2).ok);
}

TEST_CASE("constraint network edges count parameter memberships") {
    SUBCASE("star graph for a single unary constraint") {
        auto system = std::make_shared<TransitionSystem>();
        system->state_vars.push_back({"x", "x", {}});
        SchemaPtr s = make_schema("S", {"x"});
        system->add_schema(s);
        Clause c;
        c.name = "C";
        c.constraints.push_back(Constraint::relational(s, {state_in(0)}));
        system->clauses.push_back(c);
        Problem problem;
        problem.system = system;
        problem.initial_clause.constraints.push_back(
            Constraint::constant(state_in(0), Value::real1(0)));
        ConstraintNetwork net = skeleton_constraint_network(problem, {{"C"}});
        // One constant from the initial clause plus the unary constraint.
        CHECK(net.constraints.size() == 2);
        CHECK(net.edge_count() == 2);
    }

    SUBCASE("running skeleton matches the hand count") {
        BuiltProblem built = build_pickplace_problem(two_object_domain());
        ConstraintNetwork net =
            skeleton_constraint_network(built.problem, pick_place_skeleton("A"));
        int expected_edges = 0;
        std::size_t expected_nodes = built.problem.initial_clause.constraints.size() +
                                     built.problem.goal_clause.constraints.size();
        for (const std::string& name : pick_place_skeleton("A").clause_names) {
            for (const Constraint& c : built.problem.system->clause(name).constraints)
                expected_edges += static_cast<int>(c.params.size());
            expected_nodes += built.problem.system->clause(name).constraints.size();
        }
        for (const Constraint& c : built.problem.initial_clause.constraints)
            expected_edges += static_cast<int>(c.params.size());
        for (const Constraint& c : built.problem.goal_clause.constraints)
            expected_edges += static_cast<int>(c.params.size());
        CHECK(net.constraints.size() == expected_nodes);
        CHECK(net.edge_count() == expected_edges);
        CHECK(net.space.total() == 29);
    }
}

TEST_CASE("motion skeleton network has k motion and k collision constraints") {
    auto domain = MotionDomain{};
    domain.bounds = {{0, 0}, {10, 10}};
    BuiltProblem built = build_motion_problem(domain, {1, 1}, {9, 9});
    PlanSkeleton skeleton{{"Move", "Move", "Move"}};
    ConstraintNetwork net = skeleton_constraint_network(built.problem, skeleton);
    int motion = 0, cfree = 0;
    for (const auto& node : net.constraints) {
        if (node.constraint == "Motion")
            motion += 1;
        if (node.constraint == "CFree")
            cfree += 1;
    }
    CHECK(motion == 3);
    CHECK(cfree == 3);
    // Each Motion touches 3 parameters, each CFree 1, plus 2 constants.
    CHECK(net.edge_count() == 3 * 3 + 3 * 1 + 2);
}

TEST_CASE("sampling network validity requires a partition and an order") {
    std::set<std::string> params = {"grasp", "pose", "conf", "traj"};
    std::vector<SamplerIO> good = {{"grasp", {}, {"grasp"}},
                                   {"pose", {}, {"pose"}},
                                   {"ik", {"pose", "grasp"}, {"conf"}},
                                   {"traj", {"conf"}, {"traj"}}};
    NetworkCheck ok = validate_sampling_network(good, params);
    CHECK(ok.ok);
    CHECK(ok.order.size() == 4);
    auto position = [&](const std::string& name) {
        return std::find(ok.order.begin(), ok.order.end(), name) - ok.order.begin();
    };
    CHECK(position("ik") > position("pose"));
    CHECK(position("ik") > position("grasp"));
    CHECK(position("traj") > position("ik"));

    SUBCASE("two producers of one parameter violate the partition") {
        std::vector<SamplerIO> dup = good;
        dup.push_back({"conf2", {}, {"conf"}});
        NetworkCheck bad = validate_sampling_network(dup, params);
        CHECK(!bad.ok);
        CHECK(bad.violating_param == "conf");
    }

    SUBCASE("self-dependent samplers admit no order") {
        std::vector<SamplerIO> loop = {{"a", {"x"}, {"x"}}};
        NetworkCheck bad = validate_sampling_network(loop, {"x"});
        CHECK(!bad.ok);
        CHECK(bad.violating_param == "x");
    }

    SUBCASE("an unproduced parameter is diagnosed") {
        NetworkCheck bad =
            validate_sampling_network(good, {"grasp", "pose", "conf", "traj", "extra"});
        CHECK(!bad.ok);
        CHECK(bad.violating_param == "extra");
    }

    SUBCASE("valid networks give every parameter exactly one producer") {
        std::map<std::string, int> producers;
        for (const SamplerIO& s : good)
            for (const std::string& out : s.outputs)
                producers[out] += 1;
        for (const std::string& p : params)
            CHECK(producers[p] == 1);
    }
}

TEST_CASE("declared domain networks pass the validity check") {
    BuiltProblem pp = build_pickplace_problem(two_object_domain());
    CHECK(validate_sampling_network(pp.network, pp.network_params).ok);
    auto motion = MotionDomain{};
    motion.bounds = {{0, 0}, {1, 1}};
    BuiltProblem m = build_motion_problem(motion, {0, 0}, {1, 1});
    CHECK(validate_sampling_network(m.network, m.network_params).ok);
}
