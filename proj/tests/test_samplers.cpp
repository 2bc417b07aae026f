#include "fts/domains/tabletop.hpp"
#include "fts/planners.hpp"
#include "fts/sampling.hpp"

#include <doctest.h>

#include <algorithm>

using namespace fts;
using namespace fts::domains;

namespace {

// The worked two-table setup: A at 3 and B at 1 on the left table, goal
// region the whole right table, one grasp each, generous clearance.
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

const SamplerPtr& sampler_named(const SamplerSet& samplers, const std::string& name) {
    for (const SamplerPtr& s : samplers)
        if (s->name == name)
            return s;
    throw std::runtime_error("no sampler " + name);
}

}  // namespace

TEST_CASE("pose sampler draws certify stability") {
    BuiltProblem built = build_tabletop1d_problem(trace_domain());
    InstanceRegistry registry(42);
    SamplerInstance& inst = registry.get_or_create(sampler_named(built.samplers, "pose[A]"), {});
    std::vector<Element> out = sample(inst);
    REQUIRE(out.size() == 1);
    CHECK(out[0].schema->name == "Stable[A]");
    CHECK(out[0].schema->test(out[0].values));
    CHECK(!inst.exhausted);
}

TEST_CASE("finite grasp enumeration exhausts and then yields nothing") {
    BuiltProblem built = build_tabletop1d_problem(trace_domain());
    InstanceRegistry registry(42);
    SamplerInstance& inst = registry.get_or_create(sampler_named(built.samplers, "grasp[A]"), {});
    std::vector<Element> out = sample(inst);
    REQUIRE(out.size() == 1);
    CHECK(inst.exhausted);  // single grasp, eagerly marked final
    CHECK(sample(inst).empty());
}

TEST_CASE("manipulation sampler emits one element then exhausts") {
    BuiltProblem built = build_tabletop1d_problem(trace_domain());
    InstanceRegistry registry(42);
    SamplerInstance& inst = registry.get_or_create(
        sampler_named(built.samplers, "manip[A]"), {Value::real1(3.0), Value::real1(0.6)});
    std::vector<Element> out = sample(inst);
    REQUIRE(out.size() == 1);
    CHECK(out[0].schema->name == "Manip[A]");
    CHECK(out[0].values[0] == Value::real1(3.0));
    CHECK(out[0].values[1] == Value::real1(0.6));
    CHECK(inst.exhausted);
    CHECK(sample(inst).empty());
}

TEST_CASE("infeasible manipulation inputs finish without output") {
    BuiltProblem built = build_tabletop1d_problem(trace_domain());
    InstanceRegistry registry(42);
    // Hand position 10.4 + 0.6 leaves the workspace.
    SamplerInstance& inst = registry.get_or_create(
        sampler_named(built.samplers, "manip[A]"), {Value::real1(10.9), Value::real1(0.6)});
    CHECK(sample(inst).empty());
    CHECK(inst.exhausted);
}

TEST_CASE("instantiation draws typed tuples from the pool") {
    BuiltProblem built = build_tabletop1d_problem(trace_domain());
    ElementStore store = initial_elements(built.problem);
    // The initial seeds give Stable[A](3), Stable[B](1) through eager tests.
    REQUIRE(store.contains(
        make_element(built.problem.system->schema("Stable[A]"), {Value::real1(3.0)})));
    REQUIRE(store.contains(
        make_element(built.problem.system->schema("Stable[B]"), {Value::real1(1.0)})));

    auto instances = instantiate_samplers(store.pool(), built.samplers);
    // Only the nullary samplers are instantiable: no grasps exist yet.
    std::multiset<std::string> names;
    for (const auto& [sampler, inputs] : instances)
        names.insert(sampler->name);
    CHECK(names == std::multiset<std::string>{"grasp[A]", "grasp[B]", "pose[A]", "pose[B]"});

    SUBCASE("two poses and one grasp give two manipulation instances") {
        store.add(make_element(built.problem.system->schema("Stable[A]"), {Value::real1(7.0)}));
        store.add(make_element(built.problem.system->schema("Grasp[A]"), {Value::real1(0.6)}));
        auto more = instantiate_samplers(store.pool(), built.samplers);
        int manips = 0;
        for (const auto& [sampler, inputs] : more)
            if (sampler->name == "manip[A]")
                manips += 1;
        CHECK(manips == 2);
    }
}

TEST_CASE("element stores deduplicate facts") {
    BuiltProblem built = build_tabletop1d_problem(trace_domain());
    ElementStore store = initial_elements(built.problem);
    int before = store.size();
    CHECK(!store.add(
        make_element(built.problem.system->schema("Stable[A]"), {Value::real1(3.0)})));
    CHECK(store.size() == before);
}

TEST_CASE("eager tests certify new value combinations immediately") {
    BuiltProblem built = build_tabletop1d_problem(trace_domain());
    ElementStore store = initial_elements(built.problem);
    // A manipulation of A at 7 conflicts with nothing: hand at 7.6, B at 1.
    Value manip = Value::trajectory({{7.6}, {0.6}, {7.0}});
    store.add(make_element(built.problem.system->schema("Manip[A]"),
                           {Value::real1(7.0), Value::real1(0.6), manip}));
    CHECK(store.contains(
        make_element(built.problem.system->schema("CFree[A,B]"), {manip, Value::real1(1.0)})));
    // Region membership of the new pose is also certified on arrival.
    CHECK(store.contains(
        make_element(built.problem.system->schema("Region[A]"), {Value::real1(7.0)})));
}

TEST_CASE("process_samplers visits at most k instances and requeues new ones") {
    BuiltProblem built = build_tabletop1d_problem(trace_domain());
    ElementStore store = initial_elements(built.problem);
    InstanceRegistry registry(7);
    InstantiationTracker tracker;
    std::deque<int> queue;
    for (auto& [sampler, inputs] : tracker.instantiate(store.pool(), built.samplers)) {
        SamplerInstance& inst = registry.get_or_create(sampler, std::move(inputs));
        inst.in_queue = true;
        queue.push_back(inst.id);
    }
    REQUIRE(queue.size() == 4);

    SUBCASE("k = 0 does nothing") {
        int before = store.size();
        auto processed =
            process_samplers(queue, store, registry, tracker, built.samplers, 0, nullptr, {});
        CHECK(processed.empty());
        CHECK(store.size() == before);
        CHECK(queue.size() == 4);
    }

    SUBCASE("one full pass draws from every queued instance") {
        SamplerStats stats;
        auto processed =
            process_samplers(queue, store, registry, tracker, built.samplers, 4, &stats, {});
        CHECK(processed.size() == 4);
        CHECK(stats.calls_by_sampler["grasp[A]"] == 1);
        CHECK(stats.calls_by_sampler["pose[B]"] == 1);
        // Grasps plus initial poses make manipulation instances available.
        CHECK(!queue.empty());
        for (int id : queue)
            CHECK(registry.at(id).sampler->name.substr(0, 5) == "manip");
    }
}

TEST_CASE("two runs with one seed draw identical values") {
    BuiltProblem built = build_tabletop1d_problem(trace_domain());
    auto run = [&](std::uint64_t seed) {
        ElementStore store = initial_elements(built.problem);
        InstanceRegistry registry(seed);
        InstantiationTracker tracker;
        std::deque<int> queue;
        for (auto& [sampler, inputs] : tracker.instantiate(store.pool(), built.samplers)) {
            SamplerInstance& inst = registry.get_or_create(sampler, std::move(inputs));
            inst.in_queue = true;
            queue.push_back(inst.id);
        }
        SamplerStats stats;
        for (int round = 0; round < 3; ++round) {
            auto processed = process_samplers(queue, store, registry, tracker, built.samplers,
                                              static_cast<int>(queue.size()), &stats, {});
            for (int id : processed) {
                SamplerInstance& inst = registry.at(id);
                if (!inst.exhausted && !inst.in_queue) {
                    inst.in_queue = true;
                    queue.push_back(id);
                }
            }
        }
        std::vector<std::string> facts;
        for (const Element& e : store.elements())
            facts.push_back(e.str());
        return std::make_pair(facts, stats.draw_log);
    };
    auto [facts1, log1] = run(123);
    auto [facts2, log2] = run(123);
    CHECK(facts1 == facts2);
    CHECK(log1 == log2);
    auto [facts3, log3] = run(124);
    CHECK(facts1 != facts3);
}

TEST_CASE("queue fairness revisits every live instance each cycle") {
    BuiltProblem built = build_tabletop1d_problem(trace_domain());
    ElementStore store = initial_elements(built.problem);
    InstanceRegistry registry(50);
    InstantiationTracker tracker;
    std::deque<int> queue;
    for (auto& [sampler, inputs] : tracker.instantiate(store.pool(), built.samplers)) {
        SamplerInstance& inst = registry.get_or_create(sampler, std::move(inputs));
        inst.in_queue = true;
        queue.push_back(inst.id);
    }
    const int cycles = 6;
    for (int round = 0; round < cycles; ++round) {
        auto processed = process_samplers(queue, store, registry, tracker, built.samplers,
                                          static_cast<int>(queue.size()), nullptr, {});
        for (int id : processed) {
            SamplerInstance& inst = registry.at(id);
            if (!inst.exhausted && !inst.in_queue) {
                inst.in_queue = true;
                queue.push_back(id);
            }
        }
    }
    // Pose samplers never exhaust: they must have been drawn every cycle.
    for (int id = 0; id < registry.size(); ++id) {
        const SamplerInstance& inst = registry.at(id);
        if (inst.sampler->name.substr(0, 4) == "pose")
            CHECK(inst.attempts >= cycles - 1);
    }
}
