#include "fts/domains/pickplace.hpp"
#include "fts/domains/tabletop.hpp"
#include "fts/grounding.hpp"
#include "fts/planners.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

using namespace fts;
using namespace fts::domains;

namespace {

Tabletop1DDomain trace_domain() {
    Tabletop1DDomain d;
    d.workspace = {0, 11};
    d.tables = {{0, 4}, {6, 10}};
    d.clearance = 1.0;
    Tabletop1DObject a{"A", 3.0, {0.6}, std::pair<double, double>{6, 10}, {}, {{6, 10}}};
    Tabletop1DObject b{"B", 1.0, {0.6}, {}, {}, {{6, 10}}};
    d.objects = {a, b};
    return d;
}

PickPlaceDomain small_pickplace() {
    PickPlaceDomain d;
    d.dimension = 1;
    d.bounds = {{0, 0}, {10, 0}};
    d.robot = geom::Shape::box({0.2, 0.2});
    d.initial_config = {5, 0};
    geom::Box surface{{0.5, 0}, {9.5, 0}};
    PickPlaceObject a{"A", 0.2, {2, 0}, {{0.5, 0}}, {surface}, geom::Box{{7, 0}, {9, 0}}, {}};
    PickPlaceObject b{"B", 0.2, {8, 0}, {{0.5, 0}}, {surface}, {}, {}};
    d.objects = {a, b};
    return d;
}

int count_actions(const GroundedTask& task, const std::string& prefix) {
    int count = 0;
    for (const GroundAction& a : task.actions)
        if (a.name.substr(0, prefix.size()) == prefix)
            count += 1;
    return count;
}

}  // namespace

TEST_CASE("discretization projects elements onto their variables") {
    BuiltProblem built = build_tabletop1d_problem(trace_domain());
    const TransitionSystem& system = *built.problem.system;

    SUBCASE("no elements, empty domains") {
        ElementStore store({}, false);
        DiscretizedDomains domains = discretize(system, store.elements());
        for (const auto& dom : domains.state_values)
            CHECK(dom.empty());
    }

    SUBCASE("stable poses populate exactly their object's variable") {
        ElementStore store({}, false);
        store.add(make_element(system.schema("Stable[A]"), {Value::real1(3.0)}));
        store.add(make_element(system.schema("Stable[B]"), {Value::real1(1.0)}));
        DiscretizedDomains domains = discretize(system, store.elements());
        CHECK(domains.state_values[0] == std::vector<Value>{Value::real1(3.0)});
        CHECK(domains.state_values[1] == std::vector<Value>{Value::real1(1.0)});
        CHECK(domains.state_values[2].empty());  // hand has no elements
    }

    SUBCASE("lazy placeholders are first-class domain values") {
        ElementStore store({}, true);
        Value lazy_pose = Value::lazy(1, {"pose[A]", 0, ""});
        Element e = make_element(system.schema("Stable[A]"), {lazy_pose});
        e.producers = {0};
        store.add(e);
        DiscretizedDomains domains = discretize(system, store.elements());
        REQUIRE(domains.state_values[0].size() == 1);
        CHECK(domains.state_values[0][0].is_lazy());
    }
}

TEST_CASE("arrangement and transition counts factor the discretization") {
    // Ten configurations, four poses per object, thirteen undirected edges.
    auto system = std::make_shared<TransitionSystem>();
    system->state_vars.push_back({"q", "conf", {}});
    system->state_vars.push_back({"a", "pose-a", {}});
    system->state_vars.push_back({"b", "pose-b", {}});
    SchemaPtr conf = make_schema("Conf", {"conf"});
    SchemaPtr motion = make_schema("Motion", {"conf", "traj", "conf"});
    SchemaPtr stable_a = make_schema("Stable[a]", {"pose-a"});
    SchemaPtr stable_b = make_schema("Stable[b]", {"pose-b"});
    system->control_vars.push_back({"t", "traj", {}});
    system->add_schema(conf);
    system->add_schema(motion);
    system->add_schema(stable_a);
    system->add_schema(stable_b);
    system->extra_applications.push_back({conf, {state_in(0)}});
    system->extra_applications.push_back({stable_a, {state_in(1)}});
    system->extra_applications.push_back({stable_b, {state_in(2)}});
    Clause move;
    move.name = "Move";
    move.constraints.push_back(
        Constraint::relational(motion, {state_in(0), control(0), state_out(0)}));
    system->clauses.push_back(move);

    ElementStore store({}, false);
    std::vector<Value> confs;
    for (int i = 0; i < 10; ++i) {
        confs.push_back(Value::real1(i));
        store.add(make_element(conf, {confs.back()}));
    }
    for (int i = 0; i < 4; ++i) {
        store.add(make_element(stable_a, {Value::real1(20 + i)}));
        store.add(make_element(stable_b, {Value::real1(30 + i)}));
    }
    // Thirteen undirected edges as twenty-six directed trajectories.
    int edges = 0;
    for (int i = 0; i < 10 && edges < 13; ++i) {
        for (int j = i + 1; j < 10 && edges < 13; ++j) {
            if ((i + j) % 2)
                continue;
            Value t1 = Value::trajectory({{double(i)}, {double(j)}});
            Value t2 = Value::trajectory({{double(j)}, {double(i)}});
            store.add(make_element(motion, {confs[i], t1, confs[j]}));
            store.add(make_element(motion, {confs[j], t2, confs[i]}));
            edges += 1;
        }
    }
    REQUIRE(edges == 13);

    DiscretizedDomains domains = discretize(*system, store.elements());
    DiscretizationCounts counts =
        count_discretization(*system, domains, store.elements(), "Motion", 0);
    CHECK(counts.states == 160);
    CHECK(counts.move_transitions == 208);

    SUBCASE("single sample per variable gives one state") {
        ElementStore tiny({}, false);
        tiny.add(make_element(conf, {Value::real1(0)}));
        tiny.add(make_element(stable_a, {Value::real1(1)}));
        tiny.add(make_element(stable_b, {Value::real1(2)}));
        DiscretizedDomains d2 = discretize(*system, tiny.elements());
        CHECK(count_discretization(*system, d2, tiny.elements(), "Motion", 0).states == 1);
    }
}

TEST_CASE("pick actions bind pose, grasp, and configuration from kin elements") {
    BuiltProblem built = build_pickplace_problem(small_pickplace());
    const TransitionSystem& system = *built.problem.system;
    ElementStore store = initial_elements(built.problem);
    Value p = Value::reals({2, 0});
    Value g = Value::reals({0.5, 0});
    Value q = Value::reals({1.5, 0});
    store.add(make_element(system.schema("Kin[A]"), {g, p, q}));
    store.add(make_element(system.schema("Grasp[A]"), {g}));

    GroundingOptions options;
    options.use_axioms = false;
    GroundedTask task = ground(built.problem, store, options);
    REQUIRE(count_actions(task, "Pick[A]") == 1);
    const GroundAction* pick = nullptr;
    for (const GroundAction& a : task.actions)
        if (a.name.substr(0, 7) == "Pick[A]")
            pick = &a;
    REQUIRE(pick);
    // pre: x_A = p, h = None, q = q; eff: x_A = g, h = A.
    std::set<std::pair<int, std::string>> pre, eff;
    for (auto [var, val] : pick->pre)
        pre.insert({var, task.value(var, val).str()});
    for (auto [var, val] : pick->eff)
        eff.insert({var, task.value(var, val).str()});
    CHECK(pre == std::set<std::pair<int, std::string>>{
                     {0, q.str()}, {1, p.str()}, {3, "'None'"}});
    CHECK(eff.count({1, g.str()}));
    CHECK(eff.count({3, "'A'"}));

    SUBCASE("with axioms the pick action drops the pose and configuration") {
        options.use_axioms = true;
        GroundedTask with = ground(built.problem, store, options);
        const GroundAction* pick2 = nullptr;
        for (const GroundAction& a : with.actions)
            if (a.name.substr(0, 7) == "Pick[A]")
                pick2 = &a;
        REQUIRE(pick2);
        std::set<int> pre_vars;
        for (auto [var, val] : pick2->pre)
            pre_vars.insert(var);
        CHECK(pre_vars == std::set<int>{3});  // only the hand
        CHECK(pick2->derived_pre.size() >= 2);  // stability and kinematics
    }
}

TEST_CASE("no elements grounds only unconditional actions") {
    BuiltProblem built = build_tabletop1d_problem(trace_domain());
    ElementStore store({}, false);
    GroundedTask task = ground(built.problem, store, {false});
    CHECK(task.actions.empty());  // every clause needs elements; so does the goal
}

TEST_CASE("move action count tracks motion elements, not pose samples") {
    BuiltProblem built = build_pickplace_problem(small_pickplace());
    const TransitionSystem& system = *built.problem.system;
    ElementStore store = initial_elements(built.problem);
    auto add_motion = [&](double from, double to) {
        Value qa = Value::reals({from, 0});
        Value qb = Value::reals({to, 0});
        store.add(make_element(system.schema("Conf"), {qa}));
        store.add(make_element(system.schema("Conf"), {qb}));
        store.add(make_element(system.schema("Motion"),
                               {qa, Value::trajectory({{from, 0}, {to, 0}}), qb}));
    };
    // All four sweeps stay clear of A at x=2 and B at x=8.
    add_motion(5, 3);
    add_motion(3, 6.5);
    add_motion(6.5, 4);
    add_motion(5, 7.3);

    GroundedTask task = ground(built.problem, store, {true});
    int with_axioms = count_actions(task, "Move#");
    CHECK(with_axioms == 4);

    // Injecting more pose samples leaves the move count unchanged.
    for (int i = 0; i < 3; ++i) {
        store.add(make_element(system.schema("Stable[A]"), {Value::reals({3.0 + i, 0})}));
        store.add(make_element(system.schema("Stable[B]"), {Value::reals({6.0 + i, 0})}));
    }
    GroundedTask task2 = ground(built.problem, store, {true});
    CHECK(count_actions(task2, "Move#") == with_axioms);

    // The exhaustive grounding pays for every pose combination instead; each
    // trajectory must clear both objects, so distinct (t, q') projections of
    // the axiom-free actions match the axiom count.
    GroundedTask flat = ground(built.problem, store, {false});
    std::set<std::string> projections;
    for (const GroundAction& a : flat.actions) {
        if (a.name.substr(0, 5) != "Move#")
            continue;
        std::string key = a.control_values[0].str();
        for (auto [var, val] : a.eff)
            key += "|" + std::to_string(var) + "=" + flat.value(var, val).str();
        projections.insert(key);
    }
    CHECK(static_cast<int>(projections.size()) == with_axioms);
}

TEST_CASE("axioms restrict current-state slots and derive the rest") {
    BuiltProblem built = build_pickplace_problem(small_pickplace());
    const TransitionSystem& system = *built.problem.system;
    ElementStore store = initial_elements(built.problem);
    Value qa = Value::reals({5, 0});
    Value qb = Value::reals({6.5, 0});
    Value t = Value::trajectory({{5, 0}, {6.5, 0}});
    store.add(make_element(system.schema("Motion"), {qa, t, qb}));

    GroundedTask task = ground(built.problem, store, {true});
    // One axiom: pre {q = qa} derives Motion(t, qb).
    bool found_motion_axiom = false;
    for (const GroundAxiom& axiom : task.axioms) {
        if (task.derived_names[axiom.derived].substr(0, 6) != "Motion")
            continue;
        REQUIRE(axiom.pre.size() == 1);
        CHECK(axiom.pre[0].first == 0);
        CHECK(task.value(0, axiom.pre[0].second) == qa);
        found_motion_axiom = true;
    }
    CHECK(found_motion_axiom);

    // Collision axioms condition on the object pose and derive a
    // trajectory-indexed variable.
    bool found_cfree_axiom = false;
    for (const GroundAxiom& axiom : task.axioms) {
        if (task.derived_names[axiom.derived].substr(0, 8) != "CFree[A]")
            continue;
        REQUIRE(axiom.pre.size() == 1);
        CHECK(axiom.pre[0].first == 1);  // x[A]
        found_cfree_axiom = true;
    }
    CHECK(found_cfree_axiom);

    SUBCASE("constraints without current-state slots make unconditional axioms") {
        // Goal-clause constraints range over the final state only; their
        // axioms carry the full parameterization as preconditions, and the
        // derived variable has no arguments.
        ElementStore store2 = initial_elements(built.problem);
        store2.add(make_element(system.schema("Region[A]"), {Value::reals({8, 0})}));
        GroundedTask task2 = ground(built.problem, store2, {true});
        bool found = false;
        for (const GroundAxiom& axiom : task2.axioms) {
            if (task2.derived_names[axiom.derived].substr(0, 9) != "Region[A]")
                continue;
            CHECK(axiom.pre.size() == 1);
            found = true;
        }
        CHECK(found);
    }
}

TEST_CASE("goal transition compiles to goal-flag actions") {
    PickPlaceDomain d = small_pickplace();
    d.goal_config = geom::Vec2{5, 0};
    d.objects[0].goal_region.reset();
    BuiltProblem built = build_pickplace_problem(d);
    ElementStore store = initial_elements(built.problem);

    SUBCASE("single configuration goal gives one action") {
        GroundedTask task = ground(built.problem, store, {false});
        REQUIRE(count_actions(task, "<goal>") == 1);
        const GroundAction& goal = task.actions.back();
        CHECK(goal.eff == std::vector<std::pair<int, int>>{{task.goal_var(), 1}});
        REQUIRE(goal.pre.size() == 1);
        CHECK(task.value(goal.pre[0].first, goal.pre[0].second) == Value::reals({5}));
    }

    SUBCASE("goal satisfied initially is applicable at the start") {
        GroundedTask task = ground(built.problem, store, {false});
        const GroundAction& goal = task.actions.back();
        bool applicable = true;
        for (auto [var, val] : goal.pre)
            applicable = applicable && task.initial[var] == val;
        CHECK(applicable);
    }

    SUBCASE("region goals ground one action per in-region sample") {
        PickPlaceDomain d2 = small_pickplace();
        d2.goal_config.reset();
        BuiltProblem built2 = build_pickplace_problem(d2);
        ElementStore store2 = initial_elements(built2.problem);
        store2.add(make_element(built2.problem.system->schema("Stable[A]"),
                                {Value::reals({7.5, 0})}));
        store2.add(make_element(built2.problem.system->schema("Stable[A]"),
                                {Value::reals({8.5, 0})}));
        store2.add(make_element(built2.problem.system->schema("Stable[A]"),
                                {Value::reals({1.5, 0})}));  // outside the region
        GroundedTask task = ground(built2.problem, store2, {false});
        CHECK(count_actions(task, "<goal>") == 2);
    }
}

TEST_CASE("action lazy cost counts distinct placeholders in the binding") {
    BuiltProblem built = build_tabletop1d_problem(trace_domain());
    const TransitionSystem& system = *built.problem.system;
    ElementStore store = initial_elements(built.problem);
    ElementStore mixed({}, true);
    for (const Element& e : store.elements())
        mixed.add(e);
    Value lazy_g = Value::lazy(1, {"grasp[A]", 0, ""});
    Value lazy_m = Value::lazy(2, {"manip[A]", 0, ""});
    Element manip = make_element(system.schema("Manip[A]"), {Value::real1(3.0), lazy_g, lazy_m});
    manip.producers = {0};
    mixed.add(manip);
    Element grasp = make_element(system.schema("Grasp[A]"), {lazy_g});
    grasp.producers = {1};
    mixed.add(grasp);
    Element cfree = make_element(system.schema("CFree[A,B]"), {lazy_m, Value::real1(1.0)});
    cfree.producers = {0};
    mixed.add(cfree);

    GroundedTask task = ground(built.problem, mixed, {true});
    REQUIRE(count_actions(task, "MPick[A]") == 1);
    for (const GroundAction& a : task.actions)
        if (a.name.substr(0, 8) == "MPick[A]")
            CHECK(a.lazy_cost == 2);  // lazy grasp and lazy manipulation
}

TEST_CASE("grounded task dumps one block per action") {
    BuiltProblem built = build_tabletop1d_problem(trace_domain());
    ElementStore store = initial_elements(built.problem);
    GroundedTask task = ground(built.problem, store, {true});
    std::ostringstream out;
    dump_grounded_task(task, out);
    std::string text = out.str();
    std::size_t names = 0, pos = 0;
    while ((pos = text.find("NAME ", pos)) != std::string::npos) {
        names += 1;
        pos += 5;
    }
    CHECK(names == task.actions.size());
}
