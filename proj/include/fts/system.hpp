#pragma once

#include "fts/value.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fts {

// Thrown for structurally invalid inputs (bad clause names, inconsistent
// constant equalities, malformed plans).
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ParamKind { state_in, control, state_out };

// A position in the transition parameter tuple (x_1..x_m, u_1..u_n, x'_1..x'_m).
struct ParameterIndex {
    ParamKind kind = ParamKind::state_in;
    int slot = 0;

    bool operator==(const ParameterIndex&) const = default;
};

inline ParameterIndex state_in(int slot) { return {ParamKind::state_in, slot}; }
inline ParameterIndex control(int slot) { return {ParamKind::control, slot}; }
inline ParameterIndex state_out(int slot) { return {ParamKind::state_out, slot}; }

using ConstraintTest = std::function<bool(std::span<const Value>)>;

// The relation behind a constraint, independent of where it is applied.
// Each slot carries a value-domain tag (e.g. "conf", "pose-A") used to type
// sample pools. Test-backed schemas hold a predicate; schemas flagged
// eager_test are evaluated on every new combination of pooled values.
struct ConstraintSchema {
    std::string name;
    std::vector<std::string> slot_tags;
    ConstraintTest test;
    bool eager_test = false;

    int arity() const { return static_cast<int>(slot_tags.size()); }
};

using SchemaPtr = std::shared_ptr<const ConstraintSchema>;

SchemaPtr make_schema(std::string name, std::vector<std::string> slot_tags,
                      ConstraintTest test = nullptr, bool eager_test = false);

enum class EqualityKind { none, constant, pairwise };

// One constraint applied to specific transition parameters within a clause.
// Equality constraints have no schema; relational constraints reference a
// schema whose slot order matches `params`.
struct Constraint {
    SchemaPtr schema;
    std::vector<ParameterIndex> params;
    EqualityKind equality = EqualityKind::none;
    Value constant_value;

    const std::string& name() const;
    bool is_equality() const { return equality != EqualityKind::none; }

    static Constraint relational(SchemaPtr schema, std::vector<ParameterIndex> params);
    static Constraint constant(ParameterIndex param, Value value);
    static Constraint pairwise(ParameterIndex a, ParameterIndex b);
};

struct Clause {
    std::string name;
    std::vector<Constraint> constraints;
};

// Descriptor of a single variable's domain: a bounded box over reals, a
// finite set of values, or an open symbolic domain.
struct VariableDomain {
    enum class Kind { box, finite, symbolic };
    Kind kind = Kind::symbolic;
    std::vector<std::pair<double, double>> bounds;  // box
    std::vector<Value> values;                      // finite
};

struct VariableInfo {
    std::string name;
    std::string tag;  // pool tag for values of this variable
    VariableDomain domain;
};

class TransitionSystem {
public:
    std::vector<VariableInfo> state_vars;
    std::vector<VariableInfo> control_vars;
    std::vector<Clause> clauses;
    std::vector<SchemaPtr> schemas;
    // Canonical parameter bindings for schemas that appear in no clause but
    // whose elements still discretize a variable (plain domain constraints).
    std::vector<std::pair<SchemaPtr, std::vector<ParameterIndex>>> extra_applications;

    int num_state_vars() const { return static_cast<int>(state_vars.size()); }
    int num_control_vars() const { return static_cast<int>(control_vars.size()); }
    // Parameters of one transition: (x, u, x').
    int num_transition_params() const { return 2 * num_state_vars() + num_control_vars(); }

    const Clause& clause(const std::string& name) const;
    const Clause* find_clause(const std::string& name) const;
    const VariableInfo& variable(ParameterIndex p) const;

    void add_schema(SchemaPtr schema);
    SchemaPtr schema(const std::string& name) const;

    // Checks parameter ranges, schema arities, and per-parameter constant
    // consistency within each clause. Throws ModelError on violation.
    void check() const;
};

using SystemPtr = std::shared_ptr<const TransitionSystem>;

struct Problem {
    SystemPtr system;
    Clause initial_clause;  // constant equalities over state-in vars, one per variable
    Clause goal_clause;     // constraints over state-in vars

    std::vector<Value> initial_state() const;
    void check() const;
};

struct PlanSkeleton {
    std::vector<std::string> clause_names;

    bool empty() const { return clause_names.empty(); }
    int length() const { return static_cast<int>(clause_names.size()); }
};

struct Plan {
    std::vector<std::vector<Value>> states;    // k+1 entries of m values
    std::vector<std::vector<Value>> controls;  // k entries of n values
    PlanSkeleton skeleton;

    int length() const { return static_cast<int>(controls.size()); }
};

}  // namespace fts
