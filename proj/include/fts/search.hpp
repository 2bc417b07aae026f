#pragma once

#include "fts/grounding.hpp"
#include "fts/sampling.hpp"

#include <limits>
#include <vector>

namespace fts {

inline constexpr int kInfinity = std::numeric_limits<int>::max();

enum class SearchStatus { found, exhausted, aborted };

struct SearchResult {
    SearchStatus status = SearchStatus::exhausted;
    std::vector<int> action_ids;  // indices into task.actions, goal transition included
    long long expanded = 0;

    bool found() const { return status == SearchStatus::found; }
};

struct SearchOptions {
    Deadline deadline;
    bool trace = false;
};

// Precomputed applicability indexes over one grounded task: axiom and action
// candidates bucketed by a selective precondition pair.
class TaskIndex {
public:
    explicit TaskIndex(const GroundedTask& task);

    const GroundedTask& task() const { return *task_ptr; }

    // Evaluates all axioms against the core state; returns the set of true
    // derived variables. `order` optionally overrides the evaluation order
    // (the closure is order-independent; tests exercise this).
    std::vector<bool> axiom_closure(std::span<const int> state,
                                    std::span<const int> order = {}) const;

    // Actions applicable in `state` given the derived closure, in action order.
    std::vector<int> applicable(std::span<const int> state, const std::vector<bool>& derived) const;

private:
    const GroundedTask* task_ptr;
    // axiom ids bucketed by one (var, value) precondition; -1 bucket for
    // axioms with empty preconditions
    std::vector<std::vector<std::vector<int>>> axiom_buckets;  // [var][val] -> axiom ids
    std::vector<int> axiom_unconditional;
    std::vector<std::vector<std::vector<int>>> action_buckets;
    std::vector<int> action_unconditional;
};

// Shortest plan in action count from the initial state, or exhausted when
// the reachable space contains no goal state. Axioms are evaluated to
// fixpoint at every state before applicability tests.
SearchResult bfs(const GroundedTask& task, const SearchOptions& options = {});

// Delete-relaxation estimate: the length of a relaxed plan extracted from
// the monotone planning graph, with axioms applied at zero cost. Returns
// kInfinity when the goal is unreachable in the relaxation.
int relaxed_plan_heuristic(const TaskIndex& index, std::span<const int> state);

// Greedy best-first search on h(state) + w * g_lazy(state), where g_lazy
// accumulates action lazy costs; ties break toward fewer steps, then
// insertion order. Complete on finite tasks.
SearchResult lazy_greedy_search(const GroundedTask& task, double lazy_cost_weight,
                                const SearchOptions& options = {});

}  // namespace fts
