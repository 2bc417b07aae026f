#include "fts/planners.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <unordered_map>

namespace fts {

std::vector<std::pair<std::string, Value>> problem_seed_values(const Problem& problem) {
    std::vector<std::pair<std::string, Value>> seeds;
    auto sweep = [&](const Clause& clause) {
        for (const Constraint& c : clause.constraints) {
            if (c.equality != EqualityKind::constant)
                continue;
            const VariableInfo& var = problem.system->variable(c.params[0]);
            seeds.emplace_back(var.tag, c.constant_value);
        }
    };
    sweep(problem.initial_clause);
    sweep(problem.goal_clause);
    return seeds;
}

namespace {

std::vector<SchemaPtr> eager_schemas(const TransitionSystem& system) {
    std::vector<SchemaPtr> out;
    for (const SchemaPtr& s : system.schemas)
        if (s->eager_test)
            out.push_back(s);
    return out;
}

}  // namespace

ElementStore initial_elements(const Problem& problem, bool optimistic) {
    ElementStore store(eager_schemas(*problem.system), optimistic);
    for (const auto& [tag, value] : problem_seed_values(problem))
        store.seed(tag, value);
    return store;
}

bool sampler_graph_acyclic(const SamplerSet& samplers) {
    // Edge tag -> tag whenever some sampler consumes the first and produces
    // the second; a cycle means placeholders could feed their own ancestry.
    std::map<std::string, std::set<std::string>> edges;
    std::set<std::string> tags;
    for (const SamplerPtr& s : samplers) {
        for (const std::string& in : s->input_tags) {
            tags.insert(in);
            for (const std::string& out : s->output_tags) {
                tags.insert(out);
                edges[in].insert(out);
            }
        }
        for (const std::string& out : s->output_tags)
            tags.insert(out);
    }
    std::map<std::string, int> mark;  // 0 new, 1 active, 2 done
    std::vector<std::pair<std::string, bool>> stack;
    for (const std::string& root : tags) {
        if (mark[root])
            continue;
        stack.push_back({root, false});
        while (!stack.empty()) {
            auto [tag, expanded] = stack.back();
            stack.pop_back();
            if (expanded) {
                mark[tag] = 2;
                continue;
            }
            if (mark[tag] == 1)
                continue;
            mark[tag] = 1;
            stack.push_back({tag, true});
            for (const std::string& next : edges[tag]) {
                if (mark[next] == 1)
                    return false;
                if (mark[next] == 0)
                    stack.push_back({next, false});
            }
        }
    }
    return true;
}

namespace {

// ---- shared planner plumbing -----------------------------------------------

struct RunContext {
    const Problem& problem;
    const SamplerSet& samplers;
    const PlannerConfig& config;
    Deadline deadline;
    RunStats stats;
    SamplerStats sampler_stats;
    std::size_t draw_log_mark = 0;

    RunContext(const Problem& p, const SamplerSet& s, const PlannerConfig& c)
        : problem(p), samplers(s), config(c), deadline(c.timeout_s) {
        advisory_checks();
    }

    void advisory_checks() {
        std::set<std::string> producible;
        for (const auto& [tag, value] : problem_seed_values(problem))
            producible.insert(tag);
        for (const SamplerPtr& s : samplers)
            producible.insert(s->output_tags.begin(), s->output_tags.end());
        for (const SamplerPtr& s : samplers)
            for (const std::string& in : s->input_tags)
                if (!producible.count(in))
                    stats.warnings.push_back("sampler " + s->name + " input " + in +
                                             " is produced by no sampler or seed value");
    }

    SearchResult run_search(const GroundedTask& task) {
        stats.search_calls += 1;
        SearchOptions options;
        options.deadline = deadline;
        if (config.search == SearchKind::bfs)
            return bfs(task, options);
        return lazy_greedy_search(task, config.lazy_cost_weight, options);
    }

    void finish_iteration(int episode, bool found, int element_count) {
        stats.elements_over_time.push_back(element_count);
        if (config.trace) {
            IterationTrace t;
            t.iteration = stats.iterations;
            t.episode = episode;
            t.draws.assign(sampler_stats.draw_log.begin() + draw_log_mark,
                           sampler_stats.draw_log.end());
            t.search_found = found;
            t.elements = element_count;
            stats.trace.push_back(std::move(t));
        }
        draw_log_mark = sampler_stats.draw_log.size();
    }

    PlannerResult wrap(PlanOutcome outcome, Plan plan = {}) {
        stats.sampler_calls = sampler_stats.calls_by_sampler;
        stats.total_seconds = deadline.elapsed();
        PlannerResult result;
        result.outcome = outcome;
        result.plan = std::move(plan);
        result.stats = std::move(stats);
        return result;
    }

    PlannerResult solved(const Plan& plan) {
        ValidationResult check = validate_plan(problem, plan);
        if (!check.ok)
            throw ModelError("planner produced an invalid plan: " +
                             check.violation->constraint + " at step " +
                             std::to_string(check.violation->step) + " (" +
                             check.violation->message + ")");
        return wrap(PlanOutcome::solved, plan);
    }
};

std::vector<Element> plan_elements(const Problem& problem, const Plan& plan) {
    const TransitionSystem& system = *problem.system;
    std::vector<Element> out;
    auto value_at = [&](int step, ParameterIndex p) -> const Value& {
        switch (p.kind) {
        case ParamKind::state_in:
            return plan.states[step - 1][p.slot];
        case ParamKind::control:
            return plan.controls[step - 1][p.slot];
        case ParamKind::state_out:
            return plan.states[step][p.slot];
        }
        throw ModelError("bad parameter kind");
    };
    for (int step = 1; step <= plan.length(); ++step) {
        const Clause& clause = system.clause(plan.skeleton.clause_names[step - 1]);
        for (const Constraint& c : clause.constraints) {
            if (c.is_equality())
                continue;
            std::vector<Value> values;
            for (ParameterIndex p : c.params)
                values.push_back(value_at(step, p));
            out.push_back(make_element(c.schema, std::move(values)));
        }
    }
    for (const Constraint& c : problem.goal_clause.constraints) {
        if (c.is_equality())
            continue;
        std::vector<Value> values;
        for (ParameterIndex p : c.params)
            values.push_back(plan.states[plan.length()][p.slot]);
        out.push_back(make_element(c.schema, std::move(values)));
    }
    return out;
}

std::string plan_hash(const Plan& plan) {
    std::string text;
    for (const std::string& name : plan.skeleton.clause_names)
        text += name + ";";
    for (const auto& state : plan.states)
        for (const Value& v : state)
            text += v.str() + ",";
    for (const auto& u : plan.controls)
        for (const Value& v : u)
            text += v.str() + ",";
    return std::to_string(stable_hash_bytes(text.data(), text.size()));
}

}  // namespace

// ---- incremental ------------------------------------------------------------

PlannerResult incremental(const Problem& problem, const SamplerSet& samplers,
                          const PlannerConfig& config) {
    RunContext ctx(problem, samplers, config);
    ElementStore elements = initial_elements(problem, false);
    InstanceRegistry registry(config.seed);
    InstantiationTracker tracker;
    std::deque<int> queue;

    auto enqueue_new = [&]() {
        for (auto& [sampler, inputs] : tracker.instantiate(elements.pool(), samplers)) {
            SamplerInstance& inst = registry.get_or_create(sampler, std::move(inputs));
            if (!inst.in_queue && !inst.exhausted) {
                inst.in_queue = true;
                queue.push_back(inst.id);
            }
        }
    };
    enqueue_new();

    while (true) {
        if (config.max_iterations > 0 && ctx.stats.iterations >= config.max_iterations)
            return ctx.wrap(PlanOutcome::timeout);
        if (ctx.deadline.expired())
            return ctx.wrap(PlanOutcome::timeout);
        ctx.stats.iterations += 1;

        GroundedTask task = ground(problem, elements, {config.use_axioms});
        SearchResult search = ctx.run_search(task);
        if (search.status == SearchStatus::aborted)
            return ctx.wrap(PlanOutcome::timeout);
        if (search.found()) {
            Plan plan = reconstruct_plan(task, problem, search.action_ids);
            ctx.finish_iteration(1, true, elements.size());
            return ctx.solved(plan);
        }

        int k = static_cast<int>(queue.size());
        std::vector<int> processed;
        try {
            processed = process_samplers(queue, elements, registry, tracker, samplers, k,
                                         &ctx.sampler_stats, ctx.deadline);
        } catch (const TimeoutError&) {
            return ctx.wrap(PlanOutcome::timeout);
        }
        for (int id : processed) {
            SamplerInstance& inst = registry.at(id);
            if (!inst.exhausted && !inst.in_queue) {
                inst.in_queue = true;
                queue.push_back(id);
            }
        }
        ctx.finish_iteration(1, false, elements.size());
    }
}

// ---- focused ----------------------------------------------------------------

namespace {

// Stable placeholder values per (sampler, output slot) or per instance.
class TokenRegistry {
public:
    TokenRegistry(LazyNaming naming) : naming(naming) {}

    Value token(const ConditionalSampler& sampler, int slot, const std::string& key) {
        std::string id = naming == LazyNaming::per_instance
                             ? key + "#" + std::to_string(slot)
                             : sampler.name + "#" + std::to_string(slot);
        auto it = tokens.find(id);
        if (it != tokens.end())
            return it->second;
        LazyOrigin origin;
        origin.sampler = sampler.name;
        origin.slot = slot;
        if (naming == LazyNaming::per_instance)
            origin.instance_key = key;
        Value v = Value::lazy(next_id++, std::move(origin));
        tokens.emplace(id, v);
        return v;
    }

private:
    LazyNaming naming;
    std::uint64_t next_id = 1;
    std::map<std::string, Value> tokens;
};

// One optimistic pass: every instantiable sampler instance that has not been
// sampled this episode contributes placeholder elements.
struct LazyWorld {
    ElementStore mixed;
    std::vector<LazyInstanceInfo> instances;
    std::unordered_map<std::string, int> by_key;

    explicit LazyWorld(const ElementStore& elements) : mixed(elements) {}

    int intern(SamplerPtr sampler, std::vector<Value> inputs) {
        std::string key = instance_key(*sampler, inputs);
        auto it = by_key.find(key);
        if (it != by_key.end())
            return it->second;
        int id = static_cast<int>(instances.size());
        by_key.emplace(key, id);
        instances.push_back({std::move(sampler), std::move(inputs), std::move(key)});
        return id;
    }
};

std::vector<Element> sample_lazy(const LazyInstanceInfo& inst, int producer_id,
                                 TokenRegistry& tokens) {
    std::vector<Value> outputs;
    for (std::size_t slot = 0; slot < inst.sampler->output_tags.size(); ++slot)
        outputs.push_back(tokens.token(*inst.sampler, static_cast<int>(slot), inst.key));
    std::vector<Element> elements = certified_elements(*inst.sampler, inst.inputs, outputs);
    for (Element& e : elements)
        e.producers = {producer_id};
    return elements;
}

}  // namespace

std::vector<int> retrace_instances(const std::vector<Element>& targets,
                                   const ElementStore& elements, const ElementStore& mixed,
                                   const std::vector<LazyInstanceInfo>& instances) {
    std::vector<int> roots;
    std::set<int> visited;
    std::vector<int> stack;
    auto push_instance = [&](int id) {
        if (visited.insert(id).second)
            stack.push_back(id);
    };
    for (const Element& e : targets) {
        if (elements.contains(e))
            continue;
        if (const Element* stored = mixed.find(e))
            for (int producer : stored->producers)
                push_instance(producer);
    }
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        const LazyInstanceInfo& inst = instances[id];
        bool concrete = true;
        for (std::size_t i = 0; i < inst.inputs.size(); ++i) {
            const Value& v = inst.inputs[i];
            if (!v.is_lazy())
                continue;
            concrete = false;
            for (int producer : mixed.pool().producers_of(inst.sampler->input_tags[i], v))
                push_instance(producer);
        }
        if (concrete)
            roots.push_back(id);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

PlannerResult focused(const Problem& problem, const SamplerSet& samplers,
                      const PlannerConfig& config) {
    RunContext ctx(problem, samplers, config);
    ElementStore elements = initial_elements(problem, false);
    InstanceRegistry registry(config.seed);
    LazyNaming naming = config.lazy_naming.value_or(
        sampler_graph_acyclic(samplers) ? LazyNaming::per_instance : LazyNaming::per_sampler);
    TokenRegistry tokens(naming);
    std::set<std::string> sampled;
    std::vector<Element> deferred;
    int episode = 1;
    ctx.stats.episodes = 1;

    // The mixed store needs optimistic behaviour; rebuild the concrete seed
    // store with the optimistic flag when copying each iteration.
    ElementStore optimistic_base = initial_elements(problem, true);

    auto add_sampled_element = [&](Element e) {
        if (config.defer_new_elements)
            deferred.push_back(std::move(e));
        else
            elements.add(std::move(e));
    };

    while (true) {
        if (config.max_iterations > 0 && ctx.stats.iterations >= config.max_iterations)
            return ctx.wrap(PlanOutcome::timeout);
        if (ctx.deadline.expired())
            return ctx.wrap(PlanOutcome::timeout);
        ctx.stats.iterations += 1;

        // Optimistic pass: rebuild the mixed world from the concrete elements.
        LazyWorld world(optimistic_base);
        for (const Element& e : elements.elements())
            world.mixed.add(e);
        std::set<std::string> processed;
        if (!config.hybrid_eager)
            processed = sampled;
        InstantiationTracker tracker;
        std::deque<int> queue;
        auto enqueue = [&]() {
            for (auto& [sampler, inputs] : tracker.instantiate(world.mixed.pool(), samplers)) {
                int id = world.intern(sampler, std::move(inputs));
                const LazyInstanceInfo& inst = world.instances[id];
                if (!processed.count(inst.key))
                    queue.push_back(id);
            }
        };
        enqueue();
        while (!queue.empty()) {
            if (ctx.deadline.expired())
                return ctx.wrap(PlanOutcome::timeout);
            int id = queue.front();
            queue.pop_front();
            // Copy: world.instances may reallocate when new instances appear.
            LazyInstanceInfo inst = world.instances[id];
            if (processed.count(inst.key))
                continue;
            processed.insert(inst.key);
            SamplerInstance* persistent = registry.find(inst.key);
            if (persistent && persistent->exhausted)
                continue;  // provably no further outputs to stand for
            bool concrete_inputs = std::none_of(inst.inputs.begin(), inst.inputs.end(),
                                                [](const Value& v) { return v.is_lazy(); });
            bool eager = concrete_inputs &&
                         (config.eager_samplers.count(inst.sampler->name) ||
                          (config.hybrid_eager && sampled.count(inst.key)));
            if (eager) {
                SamplerInstance& real = registry.get_or_create(inst.sampler, inst.inputs);
                for (Element& e : sample(real, &ctx.sampler_stats)) {
                    world.mixed.add(e);
                    add_sampled_element(std::move(e));
                }
            } else {
                for (Element& e : sample_lazy(inst, id, tokens))
                    world.mixed.add(std::move(e));
            }
            enqueue();
        }

        GroundedTask task = ground(problem, world.mixed, {config.use_axioms});
        SearchResult search = ctx.run_search(task);
        if (search.status == SearchStatus::aborted)
            return ctx.wrap(PlanOutcome::timeout);

        if (!search.found()) {
            if (sampled.empty() && deferred.empty()) {
                ctx.finish_iteration(episode, false, elements.size());
                return ctx.wrap(PlanOutcome::infeasible);
            }
            for (Element& e : deferred)
                elements.add(std::move(e));
            deferred.clear();
            if (!config.hybrid_eager)
                sampled.clear();
            episode += 1;
            ctx.stats.episodes += 1;
            ctx.finish_iteration(episode, false, elements.size());
            continue;
        }

        Plan plan = reconstruct_plan(task, problem, search.action_ids);
        ctx.stats.plan_hashes.push_back("ep" + std::to_string(episode) + ":" + plan_hash(plan));
        std::vector<Element> needed = plan_elements(problem, plan);
        bool complete = std::all_of(needed.begin(), needed.end(), [&](const Element& e) {
            return !e.lazy && elements.contains(e);
        });
        if (complete) {
            ctx.finish_iteration(episode, true, elements.size());
            return ctx.solved(plan);
        }

        // Frontier sampler instances that produce the placeholders this plan
        // relies on.
        std::vector<int> roots = retrace_instances(needed, elements, world.mixed, world.instances);

        if (roots.empty()) {
            // The plan depends on placeholders that no reachable instance can
            // realize this episode; force an episode boundary.
            for (Element& e : deferred)
                elements.add(std::move(e));
            deferred.clear();
            if (!config.hybrid_eager)
                sampled.clear();
            episode += 1;
            ctx.stats.episodes += 1;
            ctx.finish_iteration(episode, false, elements.size());
            continue;
        }

        for (int id : roots) {
            if (ctx.deadline.expired())
                return ctx.wrap(PlanOutcome::timeout);
            const LazyInstanceInfo& inst = world.instances[id];
            SamplerInstance& real = registry.get_or_create(inst.sampler, inst.inputs);
            for (Element& e : sample(real, &ctx.sampler_stats))
                add_sampled_element(std::move(e));
            sampled.insert(inst.key);
        }
        ctx.finish_iteration(episode, false, elements.size());
    }
}

}  // namespace fts
