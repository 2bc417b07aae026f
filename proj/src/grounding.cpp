#include "fts/grounding.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

namespace fts {

bool DiscretizedDomains::state_contains(int var, const Value& v) const {
    const auto& dom = state_values[var];
    return std::find(dom.begin(), dom.end(), v) != dom.end();
}

std::vector<SchemaApplication> schema_applications(const TransitionSystem& system) {
    std::vector<SchemaApplication> apps;
    auto push_unique = [&apps](const SchemaPtr& schema, const std::vector<ParameterIndex>& params) {
        for (const SchemaApplication& a : apps)
            if (a.schema->name == schema->name && a.params == params)
                return;
        apps.push_back({schema, params});
    };
    for (const Clause& clause : system.clauses)
        for (const Constraint& c : clause.constraints)
            if (!c.is_equality())
                push_unique(c.schema, c.params);
    for (const auto& [schema, params] : system.extra_applications)
        push_unique(schema, params);
    return apps;
}

namespace {

// Ordered, deduplicated value collection.
struct ValueSet {
    std::vector<Value> values;
    std::unordered_map<std::uint64_t, std::vector<int>> index;

    int find(const Value& v) const {
        auto it = index.find(v.hash());
        if (it == index.end())
            return -1;
        for (int pos : it->second)
            if (values[pos] == v)
                return pos;
        return -1;
    }

    int insert(const Value& v) {
        int pos = find(v);
        if (pos >= 0)
            return pos;
        pos = static_cast<int>(values.size());
        index[v.hash()].push_back(pos);
        values.push_back(v);
        return pos;
    }
};

std::vector<const Element*> elements_of(std::span<const Element> elements, const std::string& schema) {
    std::vector<const Element*> out;
    for (const Element& e : elements)
        if (e.schema->name == schema)
            out.push_back(&e);
    return out;
}

std::vector<const Element*> elements_of(const ElementStore& store, const std::string& schema) {
    std::vector<const Element*> out;
    for (int pos : store.of_schema(schema))
        out.push_back(&store.elements()[pos]);
    return out;
}

}  // namespace

DiscretizedDomains discretize(const TransitionSystem& system, std::span<const Element> elements,
                              const std::vector<SchemaApplication>& extra_applications) {
    std::vector<ValueSet> state(system.num_state_vars());
    std::vector<ValueSet> control(system.num_control_vars());
    std::vector<SchemaApplication> apps = schema_applications(system);
    apps.insert(apps.end(), extra_applications.begin(), extra_applications.end());
    for (const SchemaApplication& app : apps) {
        for (const Element* e : elements_of(elements, app.schema->name)) {
            for (std::size_t slot = 0; slot < app.params.size(); ++slot) {
                ParameterIndex p = app.params[slot];
                if (p.kind == ParamKind::control)
                    control[p.slot].insert(e->values[slot]);
                else
                    state[p.slot].insert(e->values[slot]);
            }
        }
    }
    DiscretizedDomains out;
    for (auto& vs : state)
        out.state_values.push_back(std::move(vs.values));
    for (auto& vs : control)
        out.control_values.push_back(std::move(vs.values));
    return out;
}

DiscretizationCounts count_discretization(const TransitionSystem& system,
                                          const DiscretizedDomains& domains,
                                          std::span<const Element> elements,
                                          const std::string& motion_schema, int conf_var) {
    DiscretizationCounts counts;
    counts.states = 1;
    for (const auto& dom : domains.state_values)
        if (!dom.empty())
            counts.states *= dom.size();

    // Undirected configuration pairs covered by motion elements. The schema's
    // application tells which slots hold the two configurations.
    std::vector<SchemaApplication> apps = schema_applications(system);
    const SchemaApplication* motion = nullptr;
    for (const SchemaApplication& app : apps)
        if (app.schema->name == motion_schema)
            motion = &app;
    if (!motion)
        return counts;
    std::vector<int> conf_slots;
    for (std::size_t slot = 0; slot < motion->params.size(); ++slot)
        if (motion->params[slot].kind != ParamKind::control && motion->params[slot].slot == conf_var)
            conf_slots.push_back(static_cast<int>(slot));
    if (conf_slots.size() != 2)
        return counts;
    std::set<std::pair<std::uint64_t, std::uint64_t>> pairs;
    for (const Element* e : elements_of(elements, motion_schema)) {
        std::uint64_t a = e->values[conf_slots[0]].hash();
        std::uint64_t b = e->values[conf_slots[1]].hash();
        pairs.insert({std::min(a, b), std::max(a, b)});
    }
    counts.move_transitions = pairs.size();
    for (int var = 0; var < system.num_state_vars(); ++var)
        if (var != conf_var && !domains.state_values[var].empty())
            counts.move_transitions *= domains.state_values[var].size();
    return counts;
}

int GroundedTask::value_id(int var, const Value& v) const {
    const auto& dom = var_values[var];
    for (std::size_t i = 0; i < dom.size(); ++i)
        if (dom[i] == v)
            return static_cast<int>(i);
    return -1;
}

namespace {

// Working state while grounding one problem.
struct Grounder {
    const Problem& problem;
    const TransitionSystem& system;
    const ElementStore& store;
    GroundingOptions options;
    GroundedTask task;

    std::vector<ValueSet> var_domains;      // per core var
    std::vector<ValueSet> control_domains;  // per control var

    // Derived variable interning: (schema, D slot mask, D values) -> id.
    std::map<std::string, int> derived_ids;
    std::set<std::string> axiom_keys;

    explicit Grounder(const Problem& p, const ElementStore& s, const GroundingOptions& o)
        : problem(p), system(*p.system), store(s), options(o) {
        var_domains.resize(system.num_state_vars());
        control_domains.resize(system.num_control_vars());
    }

    void collect_domains() {
        for (const SchemaApplication& app : schema_applications(system)) {
            for (const Element* e : elements_of(store, app.schema->name)) {
                for (std::size_t slot = 0; slot < app.params.size(); ++slot) {
                    ParameterIndex p = app.params[slot];
                    if (p.kind == ParamKind::control)
                        control_domains[p.slot].insert(e->values[slot]);
                    else
                        var_domains[p.slot].insert(e->values[slot]);
                }
            }
        }
        auto sweep_constants = [this](const Clause& clause) {
            for (const Constraint& c : clause.constraints)
                if (c.equality == EqualityKind::constant) {
                    ParameterIndex p = c.params[0];
                    if (p.kind == ParamKind::control)
                        control_domains[p.slot].insert(c.constant_value);
                    else
                        var_domains[p.slot].insert(c.constant_value);
                }
        };
        for (const Clause& clause : system.clauses)
            sweep_constants(clause);
        sweep_constants(problem.initial_clause);
        sweep_constants(problem.goal_clause);
    }

    int intern(int var, const Value& v) { return var_domains[var].insert(v); }

    int derived_id(const std::string& schema, const std::vector<int>& d_slots,
                   const std::vector<Value>& d_values) {
        std::string key = schema;
        for (std::size_t i = 0; i < d_slots.size(); ++i)
            key += "|" + std::to_string(d_slots[i]) + ":" + d_values[i].str();
        auto [it, inserted] = derived_ids.emplace(key, static_cast<int>(derived_ids.size()));
        if (inserted)
            task.derived_names.push_back(key);
        return it->second;
    }

    // ---- binding enumeration ----------------------------------------------

    // A partial assignment of component index -> value, kept sorted.
    using Binding = std::vector<std::pair<int, Value>>;

    static const Value* lookup(const Binding& b, int comp) {
        for (const auto& [c, v] : b)
            if (c == comp)
                return &v;
        return nullptr;
    }

    struct ConstraintPlan {
        const Constraint* constraint = nullptr;
        bool axiom_route = false;
        std::vector<int> d_slots;  // slots grounded by the binding (all slots on the direct route)
    };

    // Computes the actions of one clause. `goal_mode` grounds the problem's
    // goal clause: all constraints range over the final state and the action
    // sets the goal flag.
    void ground_clause(const Clause& clause, int clause_index, bool goal_mode) {
        FreeParamAnalysis analysis;
        try {
            analysis = free_parameters(system, clause);
        } catch (const ModelError& err) {
            task.diagnostics.push_back("skipping clause " + clause.name + ": " + err.what());
            return;
        }
        PlanParamSpace space = analysis.space;

        std::vector<ConstraintPlan> plans;
        for (const Constraint& c : clause.constraints) {
            if (c.is_equality())
                continue;
            ConstraintPlan plan;
            plan.constraint = &c;
            bool has_state_in = false;
            for (ParameterIndex p : c.params)
                has_state_in |= p.kind == ParamKind::state_in;
            plan.axiom_route = options.use_axioms && has_state_in && !goal_mode;
            for (std::size_t slot = 0; slot < c.params.size(); ++slot)
                if (!plan.axiom_route || c.params[slot].kind != ParamKind::state_in)
                    plan.d_slots.push_back(static_cast<int>(slot));
            plans.push_back(std::move(plan));
        }
        if (goal_mode && options.use_axioms) {
            // Goal constraints mention only state variables; compile each to
            // an empty-parameter derived variable so the goal action stays
            // unary.
            for (ConstraintPlan& plan : plans) {
                plan.axiom_route = true;
                plan.d_slots.clear();
            }
        }

        // Join element projections constraint by constraint. A constraint
        // whose grounded slots are all determined already contributes no
        // binding: it compiles purely into derived preconditions whose
        // axioms gate applicability at search time.
        std::set<int> determined;
        for (std::size_t ci = 0; ci < analysis.components.size(); ++ci)
            if (analysis.components[ci].constant)
                determined.insert(static_cast<int>(ci));
        std::vector<Binding> bindings = {{}};
        for (const ConstraintPlan& plan : plans) {
            const Constraint& c = *plan.constraint;
            bool binds = !plan.axiom_route;
            std::vector<int> slot_components;
            for (int slot : plan.d_slots) {
                int ci = analysis.component_of[space.plan_param(1, c.params[slot])];
                slot_components.push_back(ci);
                binds = binds || !determined.count(ci);
            }
            if (!binds || plan.d_slots.empty())
                continue;
            determined.insert(slot_components.begin(), slot_components.end());
            std::vector<const Element*> els = elements_of(store, c.schema->name);
            std::vector<Binding> next;
            for (const Binding& base : bindings) {
                for (const Element* e : els) {
                    Binding extended = base;
                    if (extend_binding(analysis, space, c, plan.d_slots, *e, extended))
                        next.push_back(std::move(extended));
                }
            }
            dedup_bindings(next);
            bindings = std::move(next);
            if (bindings.empty())
                return;
        }

        // Components that still need values range over the discretized
        // variable domain of their representative. The goal transition has
        // no effects or controls, so nothing remains to bind there.
        if (!goal_mode) {
            std::vector<int> open_components;
            for (std::size_t ci = 0; ci < analysis.components.size(); ++ci) {
                const ParamComponent& comp = analysis.components[ci];
                if (!comp.free || determined.count(static_cast<int>(ci)))
                    continue;
                if (needs_binding(space, comp, plans))
                    open_components.push_back(static_cast<int>(ci));
            }
            for (int ci : open_components) {
                const ParamComponent& comp = analysis.components[ci];
                const std::vector<Value>* domain = representative_domain(space, comp);
                std::vector<Binding> next;
                if (domain) {
                    for (const Binding& base : bindings) {
                        for (const Value& v : *domain) {
                            Binding extended = base;
                            insert_binding(extended, ci, v);
                            next.push_back(std::move(extended));
                        }
                    }
                }
                bindings = std::move(next);
                if (bindings.empty())
                    return;
            }
        }

        int counter = 0;
        for (const Binding& binding : bindings)
            emit_action(clause, clause_index, goal_mode, analysis, space, plans, binding, counter);
    }

    static void insert_binding(Binding& b, int comp, const Value& v) {
        auto it = std::lower_bound(b.begin(), b.end(), comp,
                                   [](const auto& entry, int c) { return entry.first < c; });
        b.insert(it, {comp, v});
    }

    static void dedup_bindings(std::vector<Binding>& bindings) {
        std::set<std::string> seen;
        std::vector<Binding> out;
        for (Binding& b : bindings) {
            std::string key;
            for (const auto& [c, v] : b)
                key += std::to_string(c) + "=" + v.str() + ";";
            if (seen.insert(key).second)
                out.push_back(std::move(b));
        }
        bindings = std::move(out);
    }

    // Whether a free component's value actually appears in the action: it
    // grounds a constraint slot, an effect, or a control.
    bool needs_binding(const PlanParamSpace& space, const ParamComponent& comp,
                       const std::vector<ConstraintPlan>& plans) const {
        for (int id : comp.params) {
            int step = 0, var = 0;
            if (space.is_control(id, &step, &var))
                return true;
            int time = 0;
            if (space.is_state(id, &time, &var) && time == 1) {
                // Next-state value: needed unless framed to the previous state.
                bool framed = false;
                for (int other : comp.params) {
                    int t2 = 0, v2 = 0;
                    if (space.is_state(other, &t2, &v2) && t2 == 0 && v2 == var)
                        framed = true;
                }
                if (!framed)
                    return true;
            }
        }
        for (const ConstraintPlan& plan : plans) {
            const Constraint& c = *plan.constraint;
            for (int slot : plan.d_slots) {
                int id = space.plan_param(1, c.params[slot]);
                for (int other : comp.params)
                    if (other == id)
                        return true;
            }
        }
        return false;
    }

    const std::vector<Value>* representative_domain(const PlanParamSpace& space,
                                                    const ParamComponent& comp) const {
        for (int id : comp.params) {
            int step = 0, var = 0;
            if (space.is_control(id, &step, &var))
                return control_domains[var].values.empty() ? nullptr : &control_domains[var].values;
            int time = 0;
            if (space.is_state(id, &time, &var))
                return var_domains[var].values.empty() ? nullptr : &var_domains[var].values;
        }
        return nullptr;
    }

    // Matches one element against a constraint application: fixed slots must
    // equal the component constant; free slots extend or agree with the
    // binding. Only `slots` participate (the rest are carried by axioms).
    bool extend_binding(const FreeParamAnalysis& analysis, const PlanParamSpace& space,
                        const Constraint& c, const std::vector<int>& slots, const Element& e,
                        Binding& binding) const {
        for (int slot : slots) {
            int param = space.plan_param(1, c.params[slot]);
            const ParamComponent& comp = analysis.components[analysis.component_of[param]];
            const Value& v = e.values[slot];
            if (comp.constant) {
                if (!(*comp.constant == v))
                    return false;
                continue;
            }
            int ci = analysis.component_of[param];
            if (const Value* bound = lookup(binding, ci)) {
                if (!(*bound == v))
                    return false;
            } else {
                insert_binding(binding, ci, v);
            }
        }
        return true;
    }

    std::optional<Value> component_value(const FreeParamAnalysis& analysis, const Binding& binding,
                                         int param) const {
        const ParamComponent& comp = analysis.components[analysis.component_of[param]];
        if (comp.constant)
            return *comp.constant;
        if (const Value* v = lookup(binding, analysis.component_of[param]))
            return *v;
        return std::nullopt;
    }

    void emit_action(const Clause& clause, int clause_index, bool goal_mode,
                     const FreeParamAnalysis& analysis, const PlanParamSpace& space,
                     const std::vector<ConstraintPlan>& plans, const Binding& binding,
                     int& counter) {
        GroundAction action;
        action.clause_index = clause_index;
        std::set<std::uint64_t> lazy_tokens;
        auto note_value = [&lazy_tokens](const Value& v) {
            if (v.is_lazy())
                lazy_tokens.insert(v.lazy_id());
        };

        // Preconditions from current-state parameters whose value is known.
        for (int var = 0; var < system.num_state_vars(); ++var) {
            int param = space.state_param(0, var);
            if (auto v = component_value(analysis, binding, param)) {
                note_value(*v);
                action.pre.emplace_back(var, intern(var, *v));
            }
        }
        // Derived preconditions for axiom-compiled constraints.
        for (const ConstraintPlan& plan : plans) {
            if (!plan.axiom_route)
                continue;
            const Constraint& c = *plan.constraint;
            std::vector<Value> d_values;
            for (int slot : plan.d_slots) {
                auto v = component_value(analysis, binding, space.plan_param(1, c.params[slot]));
                assert(v && "derived slot must be bound");
                note_value(*v);
                d_values.push_back(*v);
            }
            action.derived_pre.push_back(derived_id(c.schema->name, plan.d_slots, d_values));
        }
        std::sort(action.derived_pre.begin(), action.derived_pre.end());
        action.derived_pre.erase(std::unique(action.derived_pre.begin(), action.derived_pre.end()),
                                 action.derived_pre.end());

        // Effects: next-state parameters with known values, skipping frames.
        if (goal_mode) {
            action.eff.emplace_back(task.goal_var(), 1);
        } else {
            for (int var = 0; var < system.num_state_vars(); ++var) {
                int param_out = space.state_param(1, var);
                int param_in = space.state_param(0, var);
                if (analysis.component_of[param_out] == analysis.component_of[param_in]) {
                    const ParamComponent& comp = analysis.components[analysis.component_of[param_out]];
                    if (!comp.constant)
                        continue;  // framed
                }
                auto v = component_value(analysis, binding, param_out);
                if (!v) {
                    task.diagnostics.push_back("clause " + clause.name +
                                               ": next state under-determined for variable " +
                                               system.state_vars[var].name);
                    return;
                }
                note_value(*v);
                action.eff.emplace_back(var, intern(var, *v));
            }
        }

        action.control_values.resize(system.num_control_vars(), Value::symbol("None"));
        if (!goal_mode) {
            for (int var = 0; var < system.num_control_vars(); ++var) {
                if (auto v = component_value(analysis, binding, space.control_param(1, var))) {
                    note_value(*v);
                    action.control_values[var] = *v;
                }
            }
        }

        action.lazy_cost = static_cast<int>(lazy_tokens.size());
        action.name = clause.name + "#" + std::to_string(counter++);
        task.actions.push_back(std::move(action));
    }

    void ground_axioms() {
        for (std::size_t clause_index = 0; clause_index < system.clauses.size() + 1; ++clause_index) {
            bool goal_mode = clause_index == system.clauses.size();
            const Clause& clause = goal_mode ? problem.goal_clause : system.clauses[clause_index];
            for (const Constraint& c : clause.constraints) {
                if (c.is_equality())
                    continue;
                bool has_state_in = false;
                for (ParameterIndex p : c.params)
                    has_state_in |= p.kind == ParamKind::state_in;
                if (!options.use_axioms || (!has_state_in && !goal_mode))
                    continue;
                std::vector<int> d_slots;
                std::vector<int> pre_slots;
                for (std::size_t slot = 0; slot < c.params.size(); ++slot) {
                    if (!goal_mode && c.params[slot].kind != ParamKind::state_in)
                        d_slots.push_back(static_cast<int>(slot));
                    else
                        pre_slots.push_back(static_cast<int>(slot));
                }
                for (const Element* e : elements_of(store, c.schema->name)) {
                    GroundAxiom axiom;
                    std::string key;
                    for (int slot : pre_slots) {
                        int var = c.params[slot].slot;
                        int val = intern(var, e->values[slot]);
                        axiom.pre.emplace_back(var, val);
                    }
                    std::sort(axiom.pre.begin(), axiom.pre.end());
                    std::vector<Value> d_values;
                    for (int slot : d_slots)
                        d_values.push_back(e->values[slot]);
                    axiom.derived = derived_id(c.schema->name, d_slots, d_values);
                    for (const auto& [var, val] : axiom.pre)
                        key += std::to_string(var) + "=" + std::to_string(val) + ";";
                    key += "->" + std::to_string(axiom.derived);
                    if (axiom_keys.insert(key).second)
                        task.axioms.push_back(std::move(axiom));
                }
            }
        }
    }

    GroundedTask run() {
        task.system = problem.system;
        task.num_core_vars = system.num_state_vars();
        collect_domains();
        // Intern initial values first so variable domains always cover them.
        std::vector<Value> init = problem.initial_state();
        for (int var = 0; var < system.num_state_vars(); ++var)
            intern(var, init[var]);

        for (std::size_t i = 0; i < system.clauses.size(); ++i)
            ground_clause(system.clauses[i], static_cast<int>(i), false);
        Clause goal = problem.goal_clause;
        goal.name = "<goal>";
        ground_clause(goal, -1, true);
        ground_axioms();
        task.derived_count = static_cast<int>(derived_ids.size());

        task.var_values.resize(system.num_state_vars());
        for (int var = 0; var < system.num_state_vars(); ++var)
            task.var_values[var] = var_domains[var].values;
        task.initial.resize(task.state_size(), 0);
        for (int var = 0; var < system.num_state_vars(); ++var)
            task.initial[var] = task.value_id(var, init[var]);
        task.initial[task.goal_var()] = 0;
        return std::move(task);
    }
};

}  // namespace

GroundedTask ground(const Problem& problem, const ElementStore& elements,
                    const GroundingOptions& options) {
    Grounder grounder(problem, elements, options);
    return grounder.run();
}

Plan reconstruct_plan(const GroundedTask& task, const Problem& problem,
                      std::span<const int> action_ids) {
    const TransitionSystem& system = *problem.system;
    Plan plan;
    std::vector<Value> state = problem.initial_state();
    plan.states.push_back(state);
    for (int id : action_ids) {
        const GroundAction& action = task.actions[id];
        if (action.clause_index < 0)
            continue;  // goal transition carries no controls
        for (const auto& [var, val] : action.eff)
            if (var < task.num_core_vars)
                state[var] = task.value(var, val);
        plan.states.push_back(state);
        plan.controls.push_back(action.control_values);
        plan.skeleton.clause_names.push_back(system.clauses[action.clause_index].name);
    }
    return plan;
}

void dump_grounded_task(const GroundedTask& task, std::ostream& out) {
    for (const GroundAction& action : task.actions) {
        out << "NAME " << action.name << "\n";
        out << "PRE";
        for (const auto& [var, val] : action.pre)
            out << " " << task.system->state_vars[var].name << "=" << task.value(var, val).str();
        for (int d : action.derived_pre)
            out << " " << task.derived_names[d];
        out << "\nEFF";
        for (const auto& [var, val] : action.eff) {
            if (var == task.goal_var())
                out << " goal=true";
            else
                out << " " << task.system->state_vars[var].name << "=" << task.value(var, val).str();
        }
        out << "\nCOST " << action.lazy_cost << "\n\n";
    }
}

}  // namespace fts
