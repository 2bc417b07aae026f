#pragma once

#include "fts/system.hpp"

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace fts {

// A constraint paired with values certified (or optimistically assumed) to
// satisfy it. Lazy elements carry the producing sampler instances so plans
// built on them can be traced back to the samplers that must run.
struct Element {
    SchemaPtr schema;
    std::vector<Value> values;
    bool lazy = false;
    std::vector<int> producers;  // lazy instance ids within the owning store

    std::string str() const;
    std::uint64_t key_hash() const;
    bool same_fact(const Element& other) const;
};

Element make_element(SchemaPtr schema, std::vector<Value> values);

struct PooledValue {
    Value value;
    std::vector<int> producers;  // lazy producers, empty for concrete values
};

// Insertion-ordered column of distinct values sharing one tag.
struct PoolColumn {
    std::vector<PooledValue> values;
    std::unordered_map<std::uint64_t, std::vector<int>> index;

    int find(const Value& v) const;
};

class SamplePool {
public:
    // Returns the value's column position; inserts it if new.
    int insert(const std::string& tag, const Value& v, const std::vector<int>& producers, bool* added);
    const PoolColumn* column(const std::string& tag) const;
    const std::vector<int>& producers_of(const std::string& tag, const Value& v) const;
    std::vector<std::string> tags() const;

private:
    std::map<std::string, PoolColumn> columns;
};

// The planner's accumulated knowledge: a deduplicated, insertion-ordered set
// of constraint elements plus the pool of values they mention. Adding an
// element pools its values; test-backed schemas flagged for eager evaluation
// are then run against every new combination of pooled values. In optimistic
// mode, combinations involving lazy placeholders are admitted untested.
class ElementStore {
public:
    ElementStore(std::vector<SchemaPtr> eager_schemas, bool optimistic);
    ElementStore(const ElementStore& other) = default;
    ElementStore& operator=(const ElementStore&) = default;

    bool add(Element element);
    bool contains(const Element& element) const;
    const Element* find(const Element& element) const;
    // Pools a bare tagged value (e.g. an initial constant) and runs eager
    // tests against it.
    void seed(const std::string& tag, const Value& v);
    const std::vector<Element>& elements() const { return items; }
    // Positions of all elements of one schema, in insertion order.
    const std::vector<int>& of_schema(const std::string& name) const;
    const SamplePool& pool() const { return values; }
    int size() const { return static_cast<int>(items.size()); }
    bool optimistic() const { return optimistic_lazy; }

private:
    void pool_element_values(const Element& element);
    void run_eager_tests(const std::string& tag, const Value& v, const std::vector<int>& producers);

    std::vector<SchemaPtr> eager;
    bool optimistic_lazy = false;
    std::vector<Element> items;
    std::unordered_map<std::uint64_t, std::vector<int>> index;
    std::map<std::string, std::vector<int>> by_schema;
    SamplePool values;
};

// Well-known tag-independent result of one generator step.
enum class DrawStatus { produced, failed, finished };

struct Draw {
    DrawStatus status = DrawStatus::finished;
    std::vector<Value> values;
    bool last = false;  // produced value is provably the final one

    static Draw make(std::vector<Value> values, bool last = false) {
        return {DrawStatus::produced, std::move(values), last};
    }
    static Draw fail() { return {DrawStatus::failed, {}, false}; }
    static Draw finish() { return {DrawStatus::finished, {}, false}; }
};

// A resumable output sequence bound to one input tuple. max_attempts grows
// across calls so randomized generators receive unbounded cumulative effort.
class Generator {
public:
    virtual ~Generator() = default;
    virtual Draw next(int max_attempts) = 0;
};

// Where a certified constraint's slot value comes from: an input or an
// output position of the sampler.
struct CertSlot {
    bool from_output = false;
    int index = 0;

    static CertSlot in(int i) { return {false, i}; }
    static CertSlot out(int i) { return {true, i}; }
};

struct CertifiedConstraint {
    SchemaPtr schema;
    std::vector<CertSlot> slots;
};

struct ConditionalSampler {
    std::string name;
    std::vector<std::string> input_tags;
    std::vector<std::string> output_tags;
    std::vector<CertifiedConstraint> certified;
    std::function<std::unique_ptr<Generator>(const std::vector<Value>&, std::uint64_t)> make_generator;
    std::function<bool(const std::vector<Value>&)> input_filter;  // optional gate on input tuples
};

using SamplerPtr = std::shared_ptr<const ConditionalSampler>;
using SamplerSet = std::vector<SamplerPtr>;

std::string instance_key(const ConditionalSampler& sampler, std::span<const Value> inputs);

// A conditional sampler bound to concrete input values, with its resumable
// generator state. Identity is (sampler name, input values).
struct SamplerInstance {
    int id = -1;
    SamplerPtr sampler;
    std::vector<Value> inputs;
    std::string key;
    std::unique_ptr<Generator> generator;
    int cursor = 0;       // successful draws
    int attempts = 0;     // draws attempted, including failures
    bool exhausted = false;
    bool in_queue = false;

    int next_attempt_budget() const { return 10 * (cursor + 1); }
};

class InstanceRegistry {
public:
    explicit InstanceRegistry(std::uint64_t global_seed) : seed(global_seed) {}

    SamplerInstance& get_or_create(const SamplerPtr& sampler, std::vector<Value> inputs);
    SamplerInstance* find(const std::string& key);
    SamplerInstance& at(int id) { return *instances.at(id); }
    const SamplerInstance& at(int id) const { return *instances.at(id); }
    int size() const { return static_cast<int>(instances.size()); }

private:
    std::uint64_t seed;
    std::vector<std::unique_ptr<SamplerInstance>> instances;
    std::unordered_map<std::string, int> by_key;
};

struct SamplerStats {
    std::map<std::string, int> calls_by_sampler;
    std::vector<std::string> draw_log;  // instance keys, in call order
};

// Builds the certified elements for one output tuple of `sampler`.
std::vector<Element> certified_elements(const ConditionalSampler& sampler,
                                        std::span<const Value> inputs,
                                        std::span<const Value> outputs);

// Draws the next output tuple from the instance and returns the certified
// elements, or an empty set on a failed draw or once the sequence has
// finished (which marks the instance exhausted).
std::vector<Element> sample(SamplerInstance& instance, SamplerStats* stats = nullptr);

// Incremental enumeration of input tuples: per sampler, remembers how much
// of each pool column has been seen and emits only tuples that involve at
// least one new value, in deterministic order.
class InstantiationTracker {
public:
    struct NewInstance {
        SamplerPtr sampler;
        std::vector<Value> inputs;
    };

    std::vector<NewInstance> instantiate(const SamplePool& pool, const SamplerSet& samplers);

private:
    std::map<std::string, std::vector<int>> seen;  // sampler name -> per-input column size
};

// All input tuples currently drawable from `pool` for the sampler set, in
// deterministic order.
std::vector<InstantiationTracker::NewInstance> instantiate_samplers(const SamplePool& pool,
                                                                    const SamplerSet& samplers);

class Deadline {
public:
    Deadline() = default;
    explicit Deadline(double seconds);
    bool expired() const;
    double elapsed() const;

private:
    bool enabled = false;
    double limit = 0;
    long long start_ns = 0;
};

struct TimeoutError : std::runtime_error {
    TimeoutError() : std::runtime_error("deadline exceeded") {}
};

// Pops up to `k` instances from the FIFO queue (unbounded when k < 0),
// draws from each, inserts the resulting elements, and enqueues any newly
// instantiable instances. Exhausted instances count as visits but are
// dropped. Returns the processed instance ids in order.
std::vector<int> process_samplers(std::deque<int>& queue, ElementStore& store,
                                  InstanceRegistry& registry, InstantiationTracker& tracker,
                                  const SamplerSet& samplers, int k, SamplerStats* stats,
                                  const Deadline& deadline);

}  // namespace fts
