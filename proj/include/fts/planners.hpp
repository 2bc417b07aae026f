#pragma once

#include "fts/analysis.hpp"
#include "fts/grounding.hpp"
#include "fts/sampling.hpp"
#include "fts/search.hpp"
#include "fts/system.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fts {

enum class SearchKind { bfs, hff };
enum class LazyNaming { per_instance, per_sampler };

struct PlannerConfig {
    SearchKind search = SearchKind::hff;
    double lazy_cost_weight = 1.0;
    std::uint64_t seed = 0;
    double timeout_s = 120.0;
    bool use_axioms = true;
    // Placeholder naming and element flushing. The default per-instance
    // naming with direct element insertion applies when the sampler graph is
    // acyclic; per-sampler naming with deferred insertion reproduces the
    // episode-by-episode behaviour exactly.
    std::optional<LazyNaming> lazy_naming;  // defaults by acyclicity
    bool defer_new_elements = false;
    // Samplers listed here are evaluated eagerly inside the focused
    // algorithm's optimistic pass instead of producing placeholders.
    std::set<std::string> eager_samplers;
    // Hybrid variant: instances that have been sampled switch to eager
    // evaluation and the sampled set is never reset.
    bool hybrid_eager = false;
    bool trace = false;
    int max_iterations = 0;  // 0 = unlimited
};

enum class PlanOutcome { solved, infeasible, timeout };

struct IterationTrace {
    int iteration = 0;
    int episode = 0;
    std::vector<std::string> draws;  // instance keys sampled this iteration
    bool search_found = false;
    int elements = 0;
};

struct RunStats {
    int iterations = 0;
    int episodes = 0;
    int search_calls = 0;
    std::map<std::string, int> sampler_calls;
    std::vector<int> elements_over_time;
    double total_seconds = 0;
    std::vector<IterationTrace> trace;
    std::vector<std::string> plan_hashes;  // optimistic plans, for blocking checks
    std::vector<std::string> warnings;
};

struct PlannerResult {
    PlanOutcome outcome = PlanOutcome::timeout;
    Plan plan;
    RunStats stats;

    bool solved() const { return outcome == PlanOutcome::solved; }
};

// Seed values for a problem: the initial and goal clause constants, tagged
// by their variable, from which the initial element set is derived by eager
// test evaluation.
std::vector<std::pair<std::string, Value>> problem_seed_values(const Problem& problem);

ElementStore initial_elements(const Problem& problem, bool optimistic = false);

// Alternates between searching the discretization of the accumulated
// elements and drawing from every queued sampler instance.
PlannerResult incremental(const Problem& problem, const SamplerSet& samplers,
                          const PlannerConfig& config);

// Plans over a mix of concrete elements and optimistic placeholder elements,
// then draws only from the sampler instances a plan actually needs. Declares
// infeasibility when the optimistic discretization itself admits no plan.
PlannerResult focused(const Problem& problem, const SamplerSet& samplers,
                      const PlannerConfig& config);

// One sampler instance of the optimistic pass (inputs may hold placeholders).
struct LazyInstanceInfo {
    SamplerPtr sampler;
    std::vector<Value> inputs;
    std::string key;
};

// Walks the producers of every target element missing from `elements` and
// returns the frontier instances whose inputs are fully concrete, in
// deterministic order.
std::vector<int> retrace_instances(const std::vector<Element>& targets,
                                   const ElementStore& elements, const ElementStore& mixed,
                                   const std::vector<LazyInstanceInfo>& instances);

// True when no sampler's output tag feeds (transitively) back into itself.
bool sampler_graph_acyclic(const SamplerSet& samplers);

}  // namespace fts
