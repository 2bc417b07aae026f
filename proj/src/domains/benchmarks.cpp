#include "fts/domains/benchmarks.hpp"

#include <cmath>
#include <stdexcept>

namespace fts::domains {

namespace {

const std::vector<geom::Vec2> kSideGrasps = {{1.0, 0}, {-1.0, 0}, {0, 1.0}, {0, -1.0}};

Tabletop2DDomain base_domain() {
    Tabletop2DDomain d;
    d.workspace = {{0, 0}, {20, 12}};
    d.robot = geom::Shape::box({0.3, 0.3});
    d.home = {10, 1};
    return d;
}

// Rejection-samples a pose on `table` at least `separation` away from all
// poses placed so far.
geom::Vec2 place_clear(Rng& rng, const geom::Box& table, const std::vector<geom::Vec2>& placed,
                       double separation) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        geom::Vec2 p{rng.uniform(table.lo.x, table.hi.x), rng.uniform(table.lo.y, table.hi.y)};
        bool ok = true;
        for (geom::Vec2 q : placed)
            if (geom::norm(p - q) < separation) {
                ok = false;
                break;
            }
        if (ok)
            return p;
    }
    throw std::runtime_error("could not place benchmark object without overlap");
}

Tabletop2DDomain grid_domain(int size, std::uint64_t seed) {
    Tabletop2DDomain d = base_domain();
    geom::Box table{{4, 4}, {16, 8}};
    d.tables = {table};
    Rng rng(stable_hash_combine(seed, 1));
    std::vector<geom::Vec2> placed;
    for (int k = 0; k < size; ++k) {
        Tabletop2DObject obj;
        obj.name = "b" + std::to_string(k + 1);
        obj.radius = 0.25;
        obj.grasps = {{0, 1.0}};  // approach from below
        obj.goal_pose = geom::Vec2{5.0 + 1.4 * k, 5.0};
        geom::Box initial_band{{5, 6.2}, {15, 7.6}};
        obj.initial_pose = place_clear(rng, initial_band, placed, 1.2);
        placed.push_back(obj.initial_pose);
        d.objects.push_back(std::move(obj));
    }
    return d;
}

Tabletop2DDomain distractor_domain(int size, std::uint64_t seed) {
    Tabletop2DDomain d = base_domain();
    geom::Box left{{2, 3}, {8, 7}};
    geom::Box right{{12, 3}, {18, 7}};
    d.tables = {left, right};
    (void)seed;

    Tabletop2DObject green;
    green.name = "green";
    green.radius = 0.25;
    green.grasps = kSideGrasps;
    green.initial_pose = {3.2, 5.0};
    green.goal_region = geom::Box{{6.0, 3.6}, {7.6, 6.4}};
    d.objects.push_back(std::move(green));

    for (int k = 0; k < size; ++k) {
        Tabletop2DObject red;
        red.name = "red" + std::to_string(k + 1);
        red.radius = 0.25;
        red.grasps = kSideGrasps;
        red.initial_pose = {12.4 + 0.6 * (k % 10), 3.4 + 0.9 * (k / 10)};
        d.objects.push_back(std::move(red));
    }
    return d;
}

Tabletop2DDomain clear_table_domain(int size, std::uint64_t seed) {
    Tabletop2DDomain d = base_domain();
    geom::Box table{{4, 4}, {16, 8}};
    geom::Box shelf{{4, 1.6}, {16, 2.6}};
    d.tables = {table, shelf};
    d.home = {2, 1};
    Rng rng(stable_hash_combine(seed, 3));

    Tabletop2DObject blue;
    blue.name = "blue";
    blue.radius = 0.25;
    blue.grasps = kSideGrasps;
    blue.initial_pose = {10, 6};
    blue.goal_region = shelf;
    d.objects.push_back(std::move(blue));

    std::vector<geom::Vec2> placed = {blue.initial_pose};
    for (int k = 0; k < size; ++k) {
        Tabletop2DObject red;
        red.name = "red" + std::to_string(k + 1);
        red.radius = 0.25;
        red.grasps = kSideGrasps;
        double angle = rng.uniform(0, 2 * 3.14159265358979323846);
        double dist = rng.uniform(1.1, 2.3);
        geom::Vec2 p = blue.initial_pose + geom::Vec2{dist * std::cos(angle), dist * std::sin(angle)};
        bool ok = table.contains(p);
        for (geom::Vec2 q : placed)
            ok = ok && geom::norm(p - q) >= 0.75;
        if (!ok)
            p = place_clear(rng, {{table.lo.x + 1, table.lo.y + 1}, {table.hi.x - 1, table.hi.y - 1}},
                            placed, 0.75);
        red.initial_pose = p;
        placed.push_back(p);
        d.objects.push_back(std::move(red));
    }
    return d;
}

}  // namespace

Tabletop2DDomain generate_benchmark_domain(const BenchmarkSpec& spec) {
    if (spec.size < 0)
        throw std::runtime_error("benchmark size must be non-negative");
    if (spec.experiment == "tabletop-grid")
        return grid_domain(spec.size, spec.seed);
    if (spec.experiment == "distractors")
        return distractor_domain(spec.size, spec.seed);
    if (spec.experiment == "clear-table")
        return clear_table_domain(spec.size, spec.seed);
    throw std::runtime_error("unknown benchmark experiment: " + spec.experiment);
}

BuiltProblem generate_benchmark(const BenchmarkSpec& spec) {
    return build_tabletop2d_problem(generate_benchmark_domain(spec));
}

std::vector<std::string> benchmark_distractor_objects(const BenchmarkSpec& spec) {
    std::vector<std::string> names;
    Tabletop2DDomain domain = generate_benchmark_domain(spec);
    for (const Tabletop2DObject& obj : domain.objects)
        if (!obj.goal_pose && !obj.goal_region)
            names.push_back(obj.name);
    return names;
}

}  // namespace fts::domains
