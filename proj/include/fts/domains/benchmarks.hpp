#pragma once

#include "fts/domains/tabletop.hpp"

#include <string>

namespace fts::domains {

// Seeded benchmark families over the 2D tabletop domain:
//   tabletop-grid: `size` objects, each with a goal pose on a grid.
//   distractors:   one goal object with a region goal on the left table and
//                  `size` red objects parked on the right table.
//   clear-table:   goal object at the table center among `size` random
//                  objects; the goal region is a second table.
struct BenchmarkSpec {
    std::string experiment;  // tabletop-grid | distractors | clear-table
    int size = 1;
    std::uint64_t seed = 0;
};

Tabletop2DDomain generate_benchmark_domain(const BenchmarkSpec& spec);
BuiltProblem generate_benchmark(const BenchmarkSpec& spec);

// Names of the non-goal objects of a spec (used to account sampler effort).
std::vector<std::string> benchmark_distractor_objects(const BenchmarkSpec& spec);

}  // namespace fts::domains
