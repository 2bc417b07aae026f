#pragma once

#include "fts/analysis.hpp"
#include "fts/sampling.hpp"
#include "fts/system.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fts {

// Finite per-variable value sets projected from a set of constraint
// elements. Lazy placeholders are first-class values here.
struct DiscretizedDomains {
    std::vector<std::vector<Value>> state_values;
    std::vector<std::vector<Value>> control_values;

    bool state_contains(int var, const Value& v) const;
};

// Canonical applications of schemas to transition parameters: every clause
// constraint counts, plus any extra applications the system registers for
// schemas that appear in no clause (e.g. plain variable-domain constraints).
struct SchemaApplication {
    SchemaPtr schema;
    std::vector<ParameterIndex> params;
};

std::vector<SchemaApplication> schema_applications(const TransitionSystem& system);

DiscretizedDomains discretize(const TransitionSystem& system, std::span<const Element> elements,
                              const std::vector<SchemaApplication>& extra_applications = {});

struct DiscretizationCounts {
    unsigned long long states = 0;
    unsigned long long move_transitions = 0;
};

// Combinatorial size of the discretization: the number of variable
// arrangements, and the number of move-style transitions implied by treating
// each motion element as an undirected edge between configurations
// multiplied by the arrangements of the remaining state variables. Variables
// with empty domains are skipped.
DiscretizationCounts count_discretization(const TransitionSystem& system,
                                          const DiscretizedDomains& domains,
                                          std::span<const Element> elements,
                                          const std::string& motion_schema, int conf_var);

struct GroundAction {
    std::string name;
    int clause_index = -1;  // index into system clauses; -1 for the goal action
    std::vector<std::pair<int, int>> pre;  // (core var, value id), sorted by var
    std::vector<int> derived_pre;          // derived variable ids
    std::vector<std::pair<int, int>> eff;  // (var, value id); var m is the goal flag
    int lazy_cost = 0;                     // distinct lazy placeholders in the binding
    std::vector<Value> control_values;     // one per control variable
};

struct GroundAxiom {
    std::vector<std::pair<int, int>> pre;  // (core var, value id)
    int derived = -1;
};

struct GroundingOptions {
    bool use_axioms = true;
};

// A finite-domain task: core state variables with interned value domains, a
// boolean goal flag as variable m, grounded actions (the goal transition
// last), and axioms deriving boolean variables from the core state.
class GroundedTask {
public:
    SystemPtr system;
    int num_core_vars = 0;
    std::vector<std::vector<Value>> var_values;  // per core var
    std::vector<int> initial;                    // value ids per core var, then goal flag 0
    std::vector<GroundAction> actions;
    std::vector<GroundAxiom> axioms;
    int derived_count = 0;
    std::vector<std::string> derived_names;
    std::vector<std::string> diagnostics;  // skipped clauses etc.

    int goal_var() const { return num_core_vars; }
    int state_size() const { return num_core_vars + 1; }
    int value_id(int var, const Value& v) const;  // -1 when absent
    const Value& value(int var, int id) const { return var_values[var][id]; }

    bool goal_reached(std::span<const int> state) const { return state[goal_var()] == 1; }
};

GroundedTask ground(const Problem& problem, const ElementStore& elements,
                    const GroundingOptions& options = {});

// Rebuilds a full plan (states, controls, skeleton) from a sequence of
// action indices, dropping the final goal transition.
Plan reconstruct_plan(const GroundedTask& task, const Problem& problem,
                      std::span<const int> action_ids);

// Line-oriented dump (NAME / PRE / EFF / COST per action) for diffing.
void dump_grounded_task(const GroundedTask& task, std::ostream& out);

}  // namespace fts
