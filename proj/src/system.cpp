#include "fts/system.hpp"

#include <map>

namespace fts {

SchemaPtr make_schema(std::string name, std::vector<std::string> slot_tags,
                      ConstraintTest test, bool eager_test) {
    auto s = std::make_shared<ConstraintSchema>();
    s->name = std::move(name);
    s->slot_tags = std::move(slot_tags);
    s->test = std::move(test);
    s->eager_test = eager_test;
    return s;
}

const std::string& Constraint::name() const {
    static const std::string kConstant = "=const";
    static const std::string kPairwise = "=pair";
    if (schema)
        return schema->name;
    return equality == EqualityKind::constant ? kConstant : kPairwise;
}

Constraint Constraint::relational(SchemaPtr schema, std::vector<ParameterIndex> params) {
    if (!schema)
        throw ModelError("relational constraint requires a schema");
    if (static_cast<int>(params.size()) != schema->arity())
        throw ModelError("constraint " + schema->name + " arity mismatch");
    Constraint c;
    c.schema = std::move(schema);
    c.params = std::move(params);
    return c;
}

Constraint Constraint::constant(ParameterIndex param, Value value) {
    Constraint c;
    c.params = {param};
    c.equality = EqualityKind::constant;
    c.constant_value = std::move(value);
    return c;
}

Constraint Constraint::pairwise(ParameterIndex a, ParameterIndex b) {
    if (a == b)
        throw ModelError("pairwise equality requires distinct parameters");
    Constraint c;
    c.params = {a, b};
    c.equality = EqualityKind::pairwise;
    return c;
}

const Clause& TransitionSystem::clause(const std::string& name) const {
    if (const Clause* c = find_clause(name))
        return *c;
    throw ModelError("unknown clause: " + name);
}

const Clause* TransitionSystem::find_clause(const std::string& name) const {
    for (const Clause& c : clauses)
        if (c.name == name)
            return &c;
    return nullptr;
}

const VariableInfo& TransitionSystem::variable(ParameterIndex p) const {
    if (p.kind == ParamKind::control) {
        if (p.slot < 0 || p.slot >= num_control_vars())
            throw ModelError("control slot out of range");
        return control_vars[p.slot];
    }
    if (p.slot < 0 || p.slot >= num_state_vars())
        throw ModelError("state slot out of range");
    return state_vars[p.slot];
}

void TransitionSystem::add_schema(SchemaPtr schema) {
    if (!schema)
        throw ModelError("null schema");
    for (const SchemaPtr& s : schemas)
        if (s->name == schema->name)
            throw ModelError("duplicate schema name: " + schema->name);
    schemas.push_back(std::move(schema));
}

SchemaPtr TransitionSystem::schema(const std::string& name) const {
    for (const SchemaPtr& s : schemas)
        if (s->name == name)
            return s;
    throw ModelError("unknown schema: " + name);
}

void TransitionSystem::check() const {
    auto check_param = [&](ParameterIndex p) {
        int limit = p.kind == ParamKind::control ? num_control_vars() : num_state_vars();
        if (p.slot < 0 || p.slot >= limit)
            throw ModelError("parameter slot out of range");
    };
    std::map<std::string, int> clause_names;
    for (const Clause& clause : clauses) {
        if (++clause_names[clause.name] > 1)
            throw ModelError("duplicate clause name: " + clause.name);
        // No parameter may carry two distinct constant equalities.
        std::vector<std::pair<ParameterIndex, Value>> constants;
        for (const Constraint& c : clause.constraints) {
            if (c.params.empty())
                throw ModelError("constraint with no parameters in clause " + clause.name);
            for (std::size_t i = 0; i < c.params.size(); ++i) {
                check_param(c.params[i]);
                for (std::size_t j = i + 1; j < c.params.size(); ++j)
                    if (c.params[i] == c.params[j])
                        throw ModelError("repeated parameter in constraint " + c.name());
            }
            if (c.equality == EqualityKind::constant) {
                for (const auto& [p, v] : constants)
                    if (p == c.params[0] && !(v == c.constant_value))
                        throw ModelError("conflicting constants in clause " + clause.name);
                constants.emplace_back(c.params[0], c.constant_value);
            }
            if (c.schema && static_cast<int>(c.params.size()) != c.schema->arity())
                throw ModelError("constraint " + c.name() + " arity mismatch");
        }
    }
}

std::vector<Value> Problem::initial_state() const {
    std::vector<Value> state(system->num_state_vars());
    std::vector<bool> seen(state.size(), false);
    for (const Constraint& c : initial_clause.constraints) {
        if (c.equality != EqualityKind::constant || c.params[0].kind != ParamKind::state_in)
            throw ModelError("initial clause must contain only state constants");
        int slot = c.params[0].slot;
        if (seen[slot])
            throw ModelError("initial clause assigns variable twice");
        seen[slot] = true;
        state[slot] = c.constant_value;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i])
            throw ModelError("initial clause misses variable " + system->state_vars[i].name);
    return state;
}

void Problem::check() const {
    system->check();
    initial_state();
    for (const Constraint& c : goal_clause.constraints)
        for (ParameterIndex p : c.params)
            if (p.kind != ParamKind::state_in)
                throw ModelError("goal clause must mention state variables only");
}

}  // namespace fts
