#include "fts/search.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <queue>
#include <unordered_map>

namespace fts {

namespace {

std::uint64_t state_hash(std::span<const int> state) {
    return stable_hash_bytes(state.data(), state.size() * sizeof(int));
}

struct StateTable {
    // state -> node id; nodes store parent and action for reconstruction
    struct Node {
        std::vector<int> state;
        int parent = -1;
        int action = -1;
    };
    std::vector<Node> nodes;
    std::unordered_map<std::uint64_t, std::vector<int>> index;

    int find(std::span<const int> state) const {
        auto it = index.find(state_hash(state));
        if (it == index.end())
            return -1;
        for (int id : it->second)
            if (std::equal(state.begin(), state.end(), nodes[id].state.begin()))
                return id;
        return -1;
    }

    int insert(std::vector<int> state, int parent, int action) {
        int id = static_cast<int>(nodes.size());
        index[state_hash(state)].push_back(id);
        nodes.push_back({std::move(state), parent, action});
        return id;
    }

    std::vector<int> reconstruct(int id) const {
        std::vector<int> actions;
        while (nodes[id].parent >= 0) {
            actions.push_back(nodes[id].action);
            id = nodes[id].parent;
        }
        std::reverse(actions.begin(), actions.end());
        return actions;
    }
};

template <typename Pairs>
bool pre_satisfied(const Pairs& pre, std::span<const int> state) {
    for (const auto& [var, val] : pre)
        if (state[var] != val)
            return false;
    return true;
}

}  // namespace

TaskIndex::TaskIndex(const GroundedTask& task) : task_ptr(&task) {
    axiom_buckets.resize(task.num_core_vars);
    action_buckets.resize(task.num_core_vars);
    for (int var = 0; var < task.num_core_vars; ++var) {
        axiom_buckets[var].resize(task.var_values[var].size());
        action_buckets[var].resize(task.var_values[var].size());
    }
    // Bucket each axiom/action under its most selective precondition pair
    // (largest variable domain); unconditioned ones are always candidates.
    auto pick_bucket = [&](const std::vector<std::pair<int, int>>& pre) -> std::pair<int, int> {
        int best_var = -1, best_val = -1;
        std::size_t best_domain = 0;
        for (const auto& [var, val] : pre) {
            if (task.var_values[var].size() > best_domain) {
                best_domain = task.var_values[var].size();
                best_var = var;
                best_val = val;
            }
        }
        return {best_var, best_val};
    };
    for (std::size_t i = 0; i < task.axioms.size(); ++i) {
        auto [var, val] = pick_bucket(task.axioms[i].pre);
        if (var < 0)
            axiom_unconditional.push_back(static_cast<int>(i));
        else
            axiom_buckets[var][val].push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < task.actions.size(); ++i) {
        auto [var, val] = pick_bucket(task.actions[i].pre);
        if (var < 0)
            action_unconditional.push_back(static_cast<int>(i));
        else
            action_buckets[var][val].push_back(static_cast<int>(i));
    }
}

std::vector<bool> TaskIndex::axiom_closure(std::span<const int> state,
                                           std::span<const int> order) const {
    const GroundedTask& task = *task_ptr;
    std::vector<bool> derived(task.derived_count, false);
    // Derived variables depend only on core state variables, so a single
    // pass over the candidate axioms reaches the fixpoint regardless of
    // evaluation order.
    auto apply = [&](int id) {
        const GroundAxiom& axiom = task.axioms[id];
        if (pre_satisfied(axiom.pre, state))
            derived[axiom.derived] = true;
    };
    if (!order.empty()) {
        for (int id : order)
            apply(id);
        return derived;
    }
    for (int id : axiom_unconditional)
        apply(id);
    for (int var = 0; var < task.num_core_vars; ++var)
        for (int id : axiom_buckets[var][state[var]])
            apply(id);
    return derived;
}

std::vector<int> TaskIndex::applicable(std::span<const int> state,
                                       const std::vector<bool>& derived) const {
    const GroundedTask& task = *task_ptr;
    std::vector<int> out;
    auto consider = [&](int id) {
        const GroundAction& action = task.actions[id];
        if (!pre_satisfied(action.pre, state))
            return;
        for (int d : action.derived_pre)
            if (!derived[d])
                return;
        out.push_back(id);
    };
    for (int id : action_unconditional)
        consider(id);
    for (int var = 0; var < task.num_core_vars; ++var)
        for (int id : action_buckets[var][state[var]])
            consider(id);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

std::vector<int> successor(const GroundedTask& task, std::span<const int> state, int action_id) {
    std::vector<int> next(state.begin(), state.end());
    for (const auto& [var, val] : task.actions[action_id].eff)
        next[var] = val;
    return next;
}

}  // namespace

SearchResult bfs(const GroundedTask& task, const SearchOptions& options) {
    TaskIndex index(task);
    SearchResult result;
    StateTable table;
    std::deque<int> open;
    open.push_back(table.insert(task.initial, -1, -1));

    while (!open.empty()) {
        if (options.deadline.expired()) {
            result.status = SearchStatus::aborted;
            return result;
        }
        int node = open.front();
        open.pop_front();
        std::vector<int> state = table.nodes[node].state;
        result.expanded += 1;
        if (task.goal_reached(state)) {
            result.status = SearchStatus::found;
            result.action_ids = table.reconstruct(node);
            return result;
        }
        std::vector<bool> derived = index.axiom_closure(state);
        for (int action_id : index.applicable(state, derived)) {
            std::vector<int> next = successor(task, state, action_id);
            if (table.find(next) >= 0)
                continue;
            open.push_back(table.insert(std::move(next), node, action_id));
        }
    }
    result.status = SearchStatus::exhausted;
    return result;
}

namespace {

// Proposition layout for the relaxed planning graph: one proposition per
// (variable, value) pair plus one per derived variable.
struct PropSpace {
    std::vector<int> var_offset;
    int derived_offset = 0;
    int total = 0;

    explicit PropSpace(const GroundedTask& task) {
        var_offset.resize(task.num_core_vars + 1);
        int offset = 0;
        for (int var = 0; var < task.num_core_vars; ++var) {
            var_offset[var] = offset;
            offset += static_cast<int>(task.var_values[var].size());
        }
        var_offset[task.num_core_vars] = offset;
        offset += 2;  // goal flag false/true
        derived_offset = offset;
        total = offset + task.derived_count;
    }

    int fact(int var, int val) const { return var_offset[var] + val; }
    int derived(int d) const { return derived_offset + d; }
};

}  // namespace

int relaxed_plan_heuristic(const TaskIndex& index, std::span<const int> state) {
    const GroundedTask& task = index.task();
    PropSpace props(task);
    int goal_prop = props.fact(task.goal_var(), 1);

    // layer[p]: first layer at which proposition p becomes true;
    // achiever[p]: action (>= 0) or axiom (encoded as -2 - axiom_id) that
    // first added it, chosen in (layer, id) order.
    std::vector<int> layer(props.total, kInfinity);
    std::vector<int> achiever(props.total, -1);
    for (int var = 0; var <= task.num_core_vars; ++var)
        layer[props.fact(var, state[var])] = 0;

    std::vector<bool> action_applied(task.actions.size(), false);
    std::vector<bool> axiom_applied(task.axioms.size(), false);

    auto reached = [&](int prop) { return layer[prop] < kInfinity; };
    auto facts_reached = [&](const std::vector<std::pair<int, int>>& pre) {
        for (const auto& [var, val] : pre)
            if (!reached(props.fact(var, val)))
                return false;
        return true;
    };

    int current = 0;
    while (true) {
        if (reached(goal_prop))
            break;
        // Zero-cost axiom fixpoint within the current layer.
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i < task.axioms.size(); ++i) {
                if (axiom_applied[i])
                    continue;
                const GroundAxiom& axiom = task.axioms[i];
                if (!facts_reached(axiom.pre))
                    continue;
                int pre_layer = 0;
                for (const auto& [var, val] : axiom.pre)
                    pre_layer = std::max(pre_layer, layer[props.fact(var, val)]);
                if (pre_layer > current)
                    continue;
                axiom_applied[i] = true;
                int prop = props.derived(axiom.derived);
                if (layer[prop] == kInfinity) {
                    layer[prop] = current;
                    achiever[prop] = -2 - static_cast<int>(i);
                    changed = true;
                }
            }
        }
        if (reached(goal_prop))
            break;
        // Apply all newly applicable actions; effects appear at layer + 1.
        bool progress = false;
        for (std::size_t i = 0; i < task.actions.size(); ++i) {
            if (action_applied[i])
                continue;
            const GroundAction& action = task.actions[i];
            if (!facts_reached(action.pre))
                continue;
            bool derived_ok = true;
            int pre_layer = 0;
            for (const auto& [var, val] : action.pre)
                pre_layer = std::max(pre_layer, layer[props.fact(var, val)]);
            for (int d : action.derived_pre) {
                int prop = props.derived(d);
                if (!reached(prop)) {
                    derived_ok = false;
                    break;
                }
                pre_layer = std::max(pre_layer, layer[prop]);
            }
            if (!derived_ok || pre_layer > current)
                continue;
            action_applied[i] = true;
            progress = true;
            for (const auto& [var, val] : action.eff) {
                int prop = props.fact(var, val);
                if (layer[prop] == kInfinity) {
                    layer[prop] = current + 1;
                    achiever[prop] = static_cast<int>(i);
                }
            }
        }
        if (!progress)
            return kInfinity;
        current += 1;
    }

    // Extract the relaxed plan by chasing first achievers from the goal.
    std::vector<bool> marked_prop(props.total, false);
    std::vector<bool> plan_action(task.actions.size(), false);
    std::vector<int> stack = {goal_prop};
    while (!stack.empty()) {
        int prop = stack.back();
        stack.pop_back();
        if (marked_prop[prop])
            continue;
        marked_prop[prop] = true;
        if (layer[prop] == 0 && achiever[prop] == -1)
            continue;  // true in the evaluated state
        int who = achiever[prop];
        if (who >= 0) {
            plan_action[who] = true;
            const GroundAction& action = task.actions[who];
            for (const auto& [var, val] : action.pre)
                stack.push_back(props.fact(var, val));
            for (int d : action.derived_pre)
                stack.push_back(props.derived(d));
        } else if (who <= -2) {
            const GroundAxiom& axiom = task.axioms[-2 - who];
            for (const auto& [var, val] : axiom.pre)
                stack.push_back(props.fact(var, val));
        }
    }
    int count = 0;
    for (bool used : plan_action)
        count += used ? 1 : 0;
    return count;
}

SearchResult lazy_greedy_search(const GroundedTask& task, double lazy_cost_weight,
                                const SearchOptions& options) {
    TaskIndex index(task);
    SearchResult result;
    StateTable table;

    struct Entry {
        double f = 0;
        int steps = 0;
        long long order = 0;
        int node = -1;

        bool operator>(const Entry& other) const {
            if (f != other.f)
                return f > other.f;
            if (steps != other.steps)
                return steps > other.steps;
            return order > other.order;
        }
    };
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
    std::vector<int> g_lazy;  // best placeholder cost per node
    std::vector<int> h_cache;
    std::vector<bool> closed;

    int root = table.insert(task.initial, -1, -1);
    g_lazy.push_back(0);
    closed.push_back(false);
    h_cache.push_back(relaxed_plan_heuristic(index, task.initial));
    long long counter = 0;
    if (h_cache[root] < kInfinity)
        open.push({static_cast<double>(h_cache[root]), 0, counter++, root});

    while (!open.empty()) {
        if (options.deadline.expired()) {
            result.status = SearchStatus::aborted;
            return result;
        }
        Entry entry = open.top();
        open.pop();
        if (closed[entry.node])
            continue;
        closed[entry.node] = true;
        std::vector<int> state = table.nodes[entry.node].state;
        result.expanded += 1;
        if (task.goal_reached(state)) {
            result.status = SearchStatus::found;
            result.action_ids = table.reconstruct(entry.node);
            return result;
        }
        std::vector<bool> derived = index.axiom_closure(state);
        for (int action_id : index.applicable(state, derived)) {
            std::vector<int> next = successor(task, state, action_id);
            int lazy = g_lazy[entry.node] + task.actions[action_id].lazy_cost;
            int node = table.find(next);
            if (node >= 0) {
                // Reopen only on a strictly cheaper placeholder cost.
                if (lazy >= g_lazy[node])
                    continue;
                g_lazy[node] = lazy;
                table.nodes[node].parent = entry.node;
                table.nodes[node].action = action_id;
                closed[node] = false;
            } else {
                node = table.insert(std::move(next), entry.node, action_id);
                g_lazy.push_back(lazy);
                closed.push_back(false);
                h_cache.push_back(relaxed_plan_heuristic(index, table.nodes[node].state));
            }
            if (h_cache[node] == kInfinity)
                continue;  // unreachable even in the relaxation
            open.push({h_cache[node] + lazy_cost_weight * lazy, entry.steps + 1, counter++, node});
        }
    }
    result.status = SearchStatus::exhausted;
    return result;
}

}  // namespace fts
