#include "fts/sampling.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>

namespace fts {

std::string Element::str() const {
    std::string out = schema->name + "(";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out += ',';
        out += values[i].str();
    }
    out += ')';
    return out;
}

std::uint64_t Element::key_hash() const {
    std::uint64_t h = stable_hash_bytes(schema->name.data(), schema->name.size());
    return stable_hash_values(values, h);
}

bool Element::same_fact(const Element& other) const {
    if (schema->name != other.schema->name || values.size() != other.values.size())
        return false;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!(values[i] == other.values[i]))
            return false;
    return true;
}

Element make_element(SchemaPtr schema, std::vector<Value> values) {
    Element e;
    if (!schema)
        throw ModelError("element requires a schema");
    if (static_cast<int>(values.size()) != schema->arity())
        throw ModelError("element arity mismatch for " + schema->name);
    e.schema = std::move(schema);
    e.values = std::move(values);
    for (const Value& v : e.values)
        e.lazy |= v.is_lazy();
    return e;
}

int PoolColumn::find(const Value& v) const {
    auto it = index.find(v.hash());
    if (it == index.end())
        return -1;
    for (int pos : it->second)
        if (values[pos].value == v)
            return pos;
    return -1;
}

int SamplePool::insert(const std::string& tag, const Value& v, const std::vector<int>& producers,
                       bool* added) {
    PoolColumn& col = columns[tag];
    int pos = col.find(v);
    if (pos >= 0) {
        if (added)
            *added = false;
        return pos;
    }
    pos = static_cast<int>(col.values.size());
    col.values.push_back({v, producers});
    col.index[v.hash()].push_back(pos);
    if (added)
        *added = true;
    return pos;
}

const PoolColumn* SamplePool::column(const std::string& tag) const {
    auto it = columns.find(tag);
    return it == columns.end() ? nullptr : &it->second;
}

const std::vector<int>& SamplePool::producers_of(const std::string& tag, const Value& v) const {
    static const std::vector<int> empty;
    const PoolColumn* col = column(tag);
    if (!col)
        return empty;
    int pos = col->find(v);
    return pos < 0 ? empty : col->values[pos].producers;
}

std::vector<std::string> SamplePool::tags() const {
    std::vector<std::string> out;
    for (const auto& [tag, col] : columns)
        out.push_back(tag);
    return out;
}

ElementStore::ElementStore(std::vector<SchemaPtr> eager_schemas, bool optimistic)
    : eager(std::move(eager_schemas)), optimistic_lazy(optimistic) {}

bool ElementStore::contains(const Element& element) const { return find(element) != nullptr; }

const Element* ElementStore::find(const Element& element) const {
    auto it = index.find(element.key_hash());
    if (it == index.end())
        return nullptr;
    for (int pos : it->second)
        if (items[pos].same_fact(element))
            return &items[pos];
    return nullptr;
}

void ElementStore::seed(const std::string& tag, const Value& v) {
    bool added = false;
    values.insert(tag, v, {}, &added);
    if (added)
        run_eager_tests(tag, v, {});
}

const std::vector<int>& ElementStore::of_schema(const std::string& name) const {
    static const std::vector<int> empty;
    auto it = by_schema.find(name);
    return it == by_schema.end() ? empty : it->second;
}

bool ElementStore::add(Element element) {
    if (contains(element))
        return false;
    int pos = static_cast<int>(items.size());
    index[element.key_hash()].push_back(pos);
    by_schema[element.schema->name].push_back(pos);
    items.push_back(std::move(element));
    // Pooling may recursively add further eager-test elements and reallocate
    // `items`, so hand over a copy.
    Element copy = items[pos];
    pool_element_values(copy);
    return true;
}

void ElementStore::pool_element_values(const Element& element) {
    for (int slot = 0; slot < element.schema->arity(); ++slot) {
        const Value& v = element.values[slot];
        std::vector<int> value_producers;
        if (v.is_lazy())
            value_producers = element.producers;
        bool added = false;
        values.insert(element.schema->slot_tags[slot], v, value_producers, &added);
        if (added)
            run_eager_tests(element.schema->slot_tags[slot], v, value_producers);
    }
}

void ElementStore::run_eager_tests(const std::string& tag, const Value& v,
                                   const std::vector<int>& producers) {
    for (const SchemaPtr& schema : eager) {
        for (int slot = 0; slot < schema->arity(); ++slot) {
            if (schema->slot_tags[slot] != tag)
                continue;
            // Enumerate combinations with `v` fixed at `slot` and all pooled
            // values in the other positions. Deduplication at the element
            // level discards repeats when several slots share a tag.
            std::vector<const PoolColumn*> cols(schema->arity(), nullptr);
            bool feasible = true;
            for (int i = 0; i < schema->arity() && feasible; ++i) {
                if (i == slot)
                    continue;
                cols[i] = values.column(schema->slot_tags[i]);
                feasible = cols[i] && !cols[i]->values.empty();
            }
            if (!feasible)
                continue;
            std::vector<int> idx(schema->arity(), 0);
            while (true) {
                Element candidate;
                candidate.schema = schema;
                candidate.values.resize(schema->arity());
                candidate.producers.clear();
                bool any_lazy = false;
                for (int i = 0; i < schema->arity(); ++i) {
                    const PooledValue* pv = (i == slot) ? nullptr : &cols[i]->values[idx[i]];
                    const Value& val = pv ? pv->value : v;
                    candidate.values[i] = val;
                    if (val.is_lazy()) {
                        any_lazy = true;
                        const auto& prods = pv ? pv->producers : producers;
                        for (int p : prods)
                            if (std::find(candidate.producers.begin(), candidate.producers.end(), p) ==
                                candidate.producers.end())
                                candidate.producers.push_back(p);
                    }
                }
                candidate.lazy = any_lazy;
                if (any_lazy) {
                    if (optimistic_lazy)
                        add(std::move(candidate));
                } else if (!contains(candidate) && schema->test &&
                           schema->test(candidate.values)) {
                    candidate.producers.clear();
                    add(std::move(candidate));
                }
                // Advance the odometer over the non-fixed slots.
                int i = schema->arity() - 1;
                for (; i >= 0; --i) {
                    if (i == slot)
                        continue;
                    if (++idx[i] < static_cast<int>(cols[i]->values.size()))
                        break;
                    idx[i] = 0;
                }
                if (i < 0)
                    break;
            }
        }
    }
}

std::string instance_key(const ConditionalSampler& sampler, std::span<const Value> inputs) {
    std::string key = sampler.name + "(";
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (i)
            key += ',';
        key += inputs[i].str();
    }
    key += ')';
    return key;
}

SamplerInstance& InstanceRegistry::get_or_create(const SamplerPtr& sampler,
                                                 std::vector<Value> inputs) {
    std::string key = instance_key(*sampler, inputs);
    auto it = by_key.find(key);
    if (it != by_key.end())
        return *instances[it->second];
    for (const Value& v : inputs)
        if (v.is_lazy())
            throw ModelError("sampler instance with lazy inputs cannot be registered: " + key);
    auto inst = std::make_unique<SamplerInstance>();
    inst->id = static_cast<int>(instances.size());
    inst->sampler = sampler;
    inst->inputs = std::move(inputs);
    inst->key = key;
    std::uint64_t gen_seed = stable_hash_combine(
        stable_hash_bytes(sampler->name.data(), sampler->name.size(), seed),
        stable_hash_values(inst->inputs));
    inst->generator = sampler->make_generator ? sampler->make_generator(inst->inputs, gen_seed)
                                              : nullptr;
    by_key.emplace(inst->key, inst->id);
    instances.push_back(std::move(inst));
    return *instances.back();
}

SamplerInstance* InstanceRegistry::find(const std::string& key) {
    auto it = by_key.find(key);
    return it == by_key.end() ? nullptr : instances[it->second].get();
}

std::vector<Element> certified_elements(const ConditionalSampler& sampler,
                                        std::span<const Value> inputs,
                                        std::span<const Value> outputs) {
    std::vector<Element> out;
    out.reserve(sampler.certified.size());
    for (const CertifiedConstraint& cc : sampler.certified) {
        std::vector<Value> vals;
        vals.reserve(cc.slots.size());
        for (CertSlot slot : cc.slots)
            vals.push_back(slot.from_output ? outputs[slot.index] : inputs[slot.index]);
        out.push_back(make_element(cc.schema, std::move(vals)));
    }
    return out;
}

std::vector<Element> sample(SamplerInstance& instance, SamplerStats* stats) {
    if (instance.exhausted)
        return {};
    if (!instance.generator)
        throw ModelError("sampler " + instance.sampler->name + " has no generator");
    instance.attempts += 1;
    if (stats) {
        stats->calls_by_sampler[instance.sampler->name] += 1;
        stats->draw_log.push_back(instance.key);
    }
    Draw draw = instance.generator->next(instance.next_attempt_budget());
    switch (draw.status) {
    case DrawStatus::finished:
        instance.exhausted = true;
        return {};
    case DrawStatus::failed:
        return {};
    case DrawStatus::produced:
        break;
    }
    instance.cursor += 1;
    if (draw.last)
        instance.exhausted = true;
    if (static_cast<int>(draw.values.size()) != static_cast<int>(instance.sampler->output_tags.size()))
        throw ModelError("sampler " + instance.sampler->name + " produced a malformed output tuple");
    std::vector<Element> out = certified_elements(*instance.sampler, instance.inputs, draw.values);
#ifndef NDEBUG
    for (const Element& e : out)
        if (!e.lazy && e.schema->test)
            assert(e.schema->test(e.values) && "generator emitted an element failing its own test");
#endif
    return out;
}

std::vector<InstantiationTracker::NewInstance> InstantiationTracker::instantiate(
    const SamplePool& pool, const SamplerSet& samplers) {
    std::vector<NewInstance> out;
    for (const SamplerPtr& sampler : samplers) {
        const int arity = static_cast<int>(sampler->input_tags.size());
        std::vector<int>& old_sizes = seen[sampler->name];
        old_sizes.resize(arity, 0);
        std::vector<const PoolColumn*> cols(arity);
        std::vector<int> now(arity, 0);
        bool feasible = true;
        for (int i = 0; i < arity; ++i) {
            cols[i] = pool.column(sampler->input_tags[i]);
            now[i] = cols[i] ? static_cast<int>(cols[i]->values.size()) : 0;
            feasible = feasible && now[i] > 0;
        }
        // Nullary samplers instantiate exactly once.
        if (arity == 0) {
            std::vector<int>& flag = seen[sampler->name + "\x01nullary"];
            if (flag.empty()) {
                flag.push_back(1);
                out.push_back({sampler, {}});
            }
            continue;
        }
        if (!feasible) {
            for (int i = 0; i < arity; ++i)
                old_sizes[i] = std::max(old_sizes[i], now[i]);
            continue;
        }
        // Emit tuples containing at least one value unseen by this sampler:
        // for each slot j, tuples whose slots < j use only old values, slot j
        // uses new values, and slots > j range over everything.
        for (int j = 0; j < arity; ++j) {
            if (now[j] <= old_sizes[j])
                continue;
            std::vector<int> lo(arity, 0), hi(arity, 0);
            bool empty = false;
            for (int i = 0; i < arity; ++i) {
                if (i < j) {
                    lo[i] = 0;
                    hi[i] = old_sizes[i];
                } else if (i == j) {
                    lo[i] = old_sizes[i];
                    hi[i] = now[i];
                } else {
                    lo[i] = 0;
                    hi[i] = now[i];
                }
                empty = empty || lo[i] >= hi[i];
            }
            if (empty)
                continue;
            std::vector<int> idx = lo;
            while (true) {
                std::vector<Value> inputs;
                inputs.reserve(arity);
                for (int i = 0; i < arity; ++i)
                    inputs.push_back(cols[i]->values[idx[i]].value);
                if (!sampler->input_filter || sampler->input_filter(inputs))
                    out.push_back({sampler, std::move(inputs)});
                int i = arity - 1;
                for (; i >= 0; --i) {
                    if (++idx[i] < hi[i])
                        break;
                    idx[i] = lo[i];
                }
                if (i < 0)
                    break;
            }
        }
        for (int i = 0; i < arity; ++i)
            old_sizes[i] = now[i];
    }
    return out;
}

std::vector<InstantiationTracker::NewInstance> instantiate_samplers(const SamplePool& pool,
                                                                    const SamplerSet& samplers) {
    InstantiationTracker tracker;
    return tracker.instantiate(pool, samplers);
}

Deadline::Deadline(double seconds) : enabled(seconds > 0), limit(seconds) {
    start_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                   std::chrono::steady_clock::now().time_since_epoch())
                   .count();
}

double Deadline::elapsed() const {
    long long now = std::chrono::duration_cast<std::chrono::nanoseconds>(
                        std::chrono::steady_clock::now().time_since_epoch())
                        .count();
    return static_cast<double>(now - start_ns) * 1e-9;
}

bool Deadline::expired() const { return enabled && elapsed() >= limit; }

std::vector<int> process_samplers(std::deque<int>& queue, ElementStore& store,
                                  InstanceRegistry& registry, InstantiationTracker& tracker,
                                  const SamplerSet& samplers, int k, SamplerStats* stats,
                                  const Deadline& deadline) {
    std::vector<int> processed;
    while (!queue.empty() && (k < 0 || static_cast<int>(processed.size()) < k)) {
        if (deadline.expired())
            throw TimeoutError();
        int id = queue.front();
        queue.pop_front();
        SamplerInstance& inst = registry.at(id);
        inst.in_queue = false;
        processed.push_back(id);
        if (inst.exhausted)
            continue;
        for (Element& e : sample(inst, stats))
            store.add(std::move(e));
        for (auto& [sampler, inputs] : tracker.instantiate(store.pool(), samplers)) {
            bool has_lazy = std::any_of(inputs.begin(), inputs.end(),
                                        [](const Value& v) { return v.is_lazy(); });
            if (has_lazy)
                continue;
            SamplerInstance& created = registry.get_or_create(sampler, std::move(inputs));
            if (!created.in_queue && !created.exhausted) {
                created.in_queue = true;
                queue.push_back(created.id);
            }
        }
    }
    return processed;
}

}  // namespace fts
