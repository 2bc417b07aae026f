#pragma once

#include "fts/system.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fts {

// Indexing for the parameters of a whole plan skeleton of length k:
// (x^0, u^1, x^1, ..., u^k, x^k), m + k*(m+n) parameters in total. The
// state-out parameters of step i and the state-in parameters of step i+1 are
// the same node.
struct PlanParamSpace {
    int m = 0;
    int n = 0;
    int steps = 0;

    int total() const { return m + steps * (m + n); }
    int state_param(int time, int var) const { return time == 0 ? var : m + (time - 1) * (m + n) + n + var; }
    int control_param(int step, int var) const { return m + (step - 1) * (m + n) + var; }
    // Maps a transition-level parameter of step `step` (1-based) to a plan param.
    int plan_param(int step, ParameterIndex p) const;

    bool is_state(int id, int* time, int* var) const;
    bool is_control(int id, int* step, int* var) const;
    std::string describe(int id, const TransitionSystem& system) const;
};

// One connected component of the pairwise-equality graph over plan
// parameters. A component is `fixed` when anchored by a constant, `free`
// when it requires a binding during grounding, and framed otherwise (its
// value flows from the previous state at execution time).
struct ParamComponent {
    std::vector<int> params;  // sorted plan param ids
    std::optional<Value> constant;
    bool free = false;
    int representative = -1;
};

struct FreeParamAnalysis {
    PlanParamSpace space;
    std::vector<ParamComponent> components;
    std::vector<int> component_of;  // plan param id -> component index

    int total_params() const { return space.total(); }
    int free_count() const;
    std::vector<int> free_representatives() const;
    const ParamComponent& component(int param_id) const { return components[component_of[param_id]]; }
};

// Equality-component analysis for a single clause (a skeleton of length one,
// without initial or goal conditions). `extra_constants` anchors additional
// parameters, e.g. values known from an enclosing context.
FreeParamAnalysis free_parameters(const TransitionSystem& system, const Clause& clause,
                                  const std::vector<std::pair<ParameterIndex, Value>>& extra_constants = {});

// Equality-component analysis over a full skeleton including the problem's
// initial and goal clauses.
FreeParamAnalysis skeleton_free_parameters(const Problem& problem, const PlanSkeleton& skeleton);

struct Violation {
    int step = -1;  // 1-based step; 0 = initial state, length+1 = goal
    std::string constraint;
    std::string message;
};

struct ValidationResult {
    bool ok = true;
    std::optional<Violation> violation;

    explicit operator bool() const { return ok; }
};

// Checks that every step of the plan satisfies every constraint of its
// skeleton clause (equalities exactly, test-backed constraints evaluated)
// and that the final state satisfies the goal clause. Reports the first
// violation found. Throws ModelError for malformed plans.
ValidationResult validate_plan(const Problem& problem, const Plan& plan);

// Bipartite constraint network between the constraints gathered over a
// skeleton (initial clause, per-step clauses, goal clause) and the plan
// parameters they touch.
struct ConstraintNetwork {
    struct Node {
        std::string constraint;
        int step;  // 0 = initial, 1..k = transition step, k+1 = goal
        std::vector<int> params;
    };
    PlanParamSpace space;
    std::vector<Node> constraints;

    int edge_count() const;
};

ConstraintNetwork skeleton_constraint_network(const Problem& problem, const PlanSkeleton& skeleton);

// Abstract declaration of a sampler's role for the network validity check:
// which parameters it consumes and produces.
struct SamplerIO {
    std::string name;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
};

struct NetworkCheck {
    bool ok = false;
    std::vector<std::string> order;  // witness topological order of sampler names
    std::string diagnostic;
    std::string violating_param;

    explicit operator bool() const { return ok; }
};

// Validity conditions for a sampling network over parameter set `params`:
// the samplers' outputs must partition the set and there must exist an order
// in which every input was produced earlier.
NetworkCheck validate_sampling_network(const std::vector<SamplerIO>& samplers,
                                       const std::set<std::string>& params);

}  // namespace fts
