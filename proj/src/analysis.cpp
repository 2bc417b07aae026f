#include "fts/analysis.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <numeric>

namespace fts {

int PlanParamSpace::plan_param(int step, ParameterIndex p) const {
    switch (p.kind) {
    case ParamKind::state_in:
        return state_param(step - 1, p.slot);
    case ParamKind::control:
        return control_param(step, p.slot);
    case ParamKind::state_out:
        return state_param(step, p.slot);
    }
    return -1;
}

bool PlanParamSpace::is_state(int id, int* time, int* var) const {
    if (id < m) {
        *time = 0;
        *var = id;
        return true;
    }
    int rest = (id - m) % (m + n);
    if (rest < n)
        return false;
    *time = (id - m) / (m + n) + 1;
    *var = rest - n;
    return true;
}

bool PlanParamSpace::is_control(int id, int* step, int* var) const {
    if (id < m)
        return false;
    int rest = (id - m) % (m + n);
    if (rest >= n)
        return false;
    *step = (id - m) / (m + n) + 1;
    *var = rest;
    return true;
}

std::string PlanParamSpace::describe(int id, const TransitionSystem& system) const {
    int t = 0, v = 0;
    if (is_state(id, &t, &v))
        return system.state_vars[v].name + "^" + std::to_string(t);
    if (is_control(id, &t, &v))
        return system.control_vars[v].name + "^" + std::to_string(t);
    return "param" + std::to_string(id);
}

int FreeParamAnalysis::free_count() const {
    int count = 0;
    for (const ParamComponent& c : components)
        count += c.free ? 1 : 0;
    return count;
}

std::vector<int> FreeParamAnalysis::free_representatives() const {
    std::vector<int> reps;
    for (const ParamComponent& c : components)
        if (c.free)
            reps.push_back(c.representative);
    return reps;
}

namespace {

struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(int size) : parent(size) { std::iota(parent.begin(), parent.end(), 0); }

    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    void merge(int a, int b) { parent[find(a)] = find(b); }
};

struct SkeletonConstraint {
    const Constraint* constraint;
    int step;  // 0 = initial, 1..k = clause step, k+1 = goal
};

// Gathers the combined clause over a skeleton: initial conditions, the
// constraints of every step, and the goal conditions mapped to plan params.
std::vector<SkeletonConstraint> gather_constraints(const Problem& problem, const PlanSkeleton& skeleton) {
    std::vector<SkeletonConstraint> out;
    for (const Constraint& c : problem.initial_clause.constraints)
        out.push_back({&c, 0});
    for (int step = 1; step <= skeleton.length(); ++step) {
        const Clause& clause = problem.system->clause(skeleton.clause_names[step - 1]);
        for (const Constraint& c : clause.constraints)
            out.push_back({&c, step});
    }
    for (const Constraint& c : problem.goal_clause.constraints)
        out.push_back({&c, skeleton.length() + 1});
    return out;
}

int map_param(const PlanParamSpace& space, int step, ParameterIndex p) {
    // Initial/goal constraints are expressed over state-in variables; the
    // goal refers to the final state.
    if (step == 0)
        return space.state_param(0, p.slot);
    if (step == space.steps + 1)
        return space.state_param(space.steps, p.slot);
    return space.plan_param(step, p);
}

FreeParamAnalysis analyze(const TransitionSystem& system, const PlanParamSpace& space,
                          const std::vector<SkeletonConstraint>& constraints,
                          const std::vector<std::pair<int, Value>>& anchors) {
    UnionFind uf(space.total());
    std::vector<bool> mentioned(space.total(), false);
    std::vector<std::pair<int, Value>> constants = anchors;

    for (const SkeletonConstraint& sc : constraints) {
        const Constraint& c = *sc.constraint;
        std::vector<int> ids;
        ids.reserve(c.params.size());
        for (ParameterIndex p : c.params)
            ids.push_back(map_param(space, sc.step, p));
        switch (c.equality) {
        case EqualityKind::constant:
            constants.emplace_back(ids[0], c.constant_value);
            break;
        case EqualityKind::pairwise:
            uf.merge(ids[0], ids[1]);
            break;
        case EqualityKind::none:
            for (int id : ids)
                mentioned[id] = true;
            break;
        }
    }

    std::map<int, int> root_to_component;
    FreeParamAnalysis result;
    result.space = space;
    result.component_of.assign(space.total(), -1);
    for (int id = 0; id < space.total(); ++id) {
        int root = uf.find(id);
        auto [it, inserted] = root_to_component.emplace(root, static_cast<int>(result.components.size()));
        if (inserted)
            result.components.push_back({});
        result.components[it->second].params.push_back(id);
        result.component_of[id] = it->second;
    }

    for (const auto& [id, value] : constants) {
        ParamComponent& comp = result.components[result.component_of[id]];
        if (comp.constant && !(*comp.constant == value))
            throw ModelError("inconsistent clause: parameter chain carries two distinct constants");
        comp.constant = value;
    }

    for (ParamComponent& comp : result.components) {
        comp.representative = comp.params.front();
        if (comp.constant) {
            comp.free = false;
            continue;
        }
        bool any_mentioned = false;
        bool any_prior_state = false;
        for (int id : comp.params) {
            any_mentioned |= mentioned[id];
            int t = 0, v = 0;
            // A component touching a non-final... any state parameter that is
            // an input of some step (time < steps) receives its value from the
            // preceding state at execution time.
            if (space.is_state(id, &t, &v) && t < space.steps)
                any_prior_state = true;
        }
        // Free components need a binding: they are mentioned by a relational
        // constraint, or they hold a control / dangling next-state value that
        // no equality determines.
        comp.free = any_mentioned || !any_prior_state;
    }
    (void)system;
    return result;
}

}  // namespace fts::(anonymous)

FreeParamAnalysis free_parameters(const TransitionSystem& system, const Clause& clause,
                                  const std::vector<std::pair<ParameterIndex, Value>>& extra_constants) {
    PlanParamSpace space{system.num_state_vars(), system.num_control_vars(), 1};
    std::vector<SkeletonConstraint> constraints;
    for (const Constraint& c : clause.constraints)
        constraints.push_back({&c, 1});
    std::vector<std::pair<int, Value>> anchors;
    for (const auto& [p, v] : extra_constants)
        anchors.emplace_back(space.plan_param(1, p), v);
    return analyze(system, space, constraints, anchors);
}

FreeParamAnalysis skeleton_free_parameters(const Problem& problem, const PlanSkeleton& skeleton) {
    if (skeleton.empty())
        throw ModelError("empty plan skeleton");
    const TransitionSystem& system = *problem.system;
    PlanParamSpace space{system.num_state_vars(), system.num_control_vars(), skeleton.length()};
    return analyze(system, space, gather_constraints(problem, skeleton), {});
}

namespace {

const Value& plan_value(const Plan& plan, int step, ParameterIndex p) {
    switch (p.kind) {
    case ParamKind::state_in:
        return plan.states[step - 1][p.slot];
    case ParamKind::control:
        return plan.controls[step - 1][p.slot];
    case ParamKind::state_out:
        return plan.states[step][p.slot];
    }
    throw ModelError("bad parameter kind");
}

std::optional<Violation> check_constraint(const Constraint& c, int step,
                                          const std::vector<Value>& values) {
    switch (c.equality) {
    case EqualityKind::constant:
        if (!(values[0] == c.constant_value))
            return Violation{step, c.name(),
                             values[0].str() + " != " + c.constant_value.str()};
        return std::nullopt;
    case EqualityKind::pairwise:
        if (!(values[0] == values[1]))
            return Violation{step, c.name(), values[0].str() + " != " + values[1].str()};
        return std::nullopt;
    case EqualityKind::none:
        break;
    }
    for (const Value& v : values)
        if (v.is_lazy())
            return Violation{step, c.name(), "plan contains lazy placeholder " + v.str()};
    if (c.schema && c.schema->test && !c.schema->test(values))
        return Violation{step, c.name(), "test failed"};
    return std::nullopt;
}

}  // namespace fts::(anonymous)

ValidationResult validate_plan(const Problem& problem, const Plan& plan) {
    const TransitionSystem& system = *problem.system;
    int k = plan.length();
    if (static_cast<int>(plan.states.size()) != k + 1)
        throw ModelError("plan must contain one more state than controls");
    if (plan.skeleton.length() != k)
        throw ModelError("plan skeleton length mismatch");
    for (const auto& s : plan.states)
        if (static_cast<int>(s.size()) != system.num_state_vars())
            throw ModelError("plan state arity mismatch");
    for (const auto& u : plan.controls)
        if (static_cast<int>(u.size()) != system.num_control_vars())
            throw ModelError("plan control arity mismatch");

    ValidationResult result;
    auto fail = [&result](Violation v) {
        result.ok = false;
        result.violation = std::move(v);
        return result;
    };

    std::vector<Value> initial = problem.initial_state();
    for (int i = 0; i < system.num_state_vars(); ++i)
        if (!(plan.states[0][i] == initial[i]))
            return fail({0, "initial", system.state_vars[i].name + " does not match the initial state"});

    for (int step = 1; step <= k; ++step) {
        const Clause& clause = system.clause(plan.skeleton.clause_names[step - 1]);
        for (const Constraint& c : clause.constraints) {
            std::vector<Value> values;
            values.reserve(c.params.size());
            for (ParameterIndex p : c.params)
                values.push_back(plan_value(plan, step, p));
            if (auto violation = check_constraint(c, step, values))
                return fail(std::move(*violation));
        }
    }

    for (const Constraint& c : problem.goal_clause.constraints) {
        std::vector<Value> values;
        for (ParameterIndex p : c.params)
            values.push_back(plan.states[k][p.slot]);
        if (auto violation = check_constraint(c, k + 1, values))
            return fail(std::move(*violation));
    }
    return result;
}

int ConstraintNetwork::edge_count() const {
    int edges = 0;
    for (const Node& node : constraints)
        edges += static_cast<int>(node.params.size());
    return edges;
}

ConstraintNetwork skeleton_constraint_network(const Problem& problem, const PlanSkeleton& skeleton) {
    if (skeleton.empty())
        throw ModelError("empty plan skeleton");
    const TransitionSystem& system = *problem.system;
    ConstraintNetwork net;
    net.space = {system.num_state_vars(), system.num_control_vars(), skeleton.length()};
    for (const SkeletonConstraint& sc : gather_constraints(problem, skeleton)) {
        ConstraintNetwork::Node node;
        node.constraint = sc.constraint->name();
        node.step = sc.step;
        for (ParameterIndex p : sc.constraint->params)
            node.params.push_back(map_param(net.space, sc.step, p));
        net.constraints.push_back(std::move(node));
    }
    return net;
}

NetworkCheck validate_sampling_network(const std::vector<SamplerIO>& samplers,
                                       const std::set<std::string>& params) {
    NetworkCheck check;
    std::map<std::string, std::string> producer;
    for (const SamplerIO& s : samplers) {
        for (const std::string& out : s.outputs) {
            if (!params.count(out)) {
                check.diagnostic = "sampler " + s.name + " outputs unknown parameter " + out;
                check.violating_param = out;
                return check;
            }
            auto [it, inserted] = producer.emplace(out, s.name);
            if (!inserted) {
                check.diagnostic = "parameter " + out + " produced by both " + it->second + " and " + s.name;
                check.violating_param = out;
                return check;
            }
        }
    }
    for (const std::string& p : params) {
        if (!producer.count(p)) {
            check.diagnostic = "parameter " + p + " has no producing sampler";
            check.violating_param = p;
            return check;
        }
    }

    std::set<std::string> produced;
    std::vector<bool> placed(samplers.size(), false);
    for (std::size_t round = 0; round < samplers.size(); ++round) {
        bool progress = false;
        for (std::size_t i = 0; i < samplers.size(); ++i) {
            if (placed[i])
                continue;
            const SamplerIO& s = samplers[i];
            bool ready = std::all_of(s.inputs.begin(), s.inputs.end(),
                                     [&](const std::string& in) { return produced.count(in) > 0; });
            if (!ready)
                continue;
            placed[i] = true;
            progress = true;
            produced.insert(s.outputs.begin(), s.outputs.end());
            check.order.push_back(s.name);
        }
        if (!progress)
            break;
    }
    for (std::size_t i = 0; i < samplers.size(); ++i) {
        if (!placed[i]) {
            for (const std::string& in : samplers[i].inputs) {
                if (!produced.count(in)) {
                    check.violating_param = in;
                    break;
                }
            }
            check.diagnostic = "no order admits sampler " + samplers[i].name +
                               " (waits on " + check.violating_param + ")";
            check.order.clear();
            return check;
        }
    }
    check.ok = true;
    return check;
}

}  // namespace fts
