#pragma once

#include "fts/analysis.hpp"
#include "fts/geometry2d.hpp"
#include "fts/sampling.hpp"
#include "fts/system.hpp"

#include <random>

namespace fts::domains {

// Deterministic RNG with a portable uniform mapping (no reliance on
// std::uniform_real_distribution, whose output is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine(seed) {}

    double canonical() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * canonical(); }
    std::uint64_t bits() { return engine(); }
    int below(int n) { return static_cast<int>(engine() % static_cast<std::uint64_t>(n)); }

private:
    std::mt19937_64 engine;
};

Value vec_value(geom::Vec2 v, int dimension);
geom::Vec2 value_vec(const Value& v);

// A problem together with its conditional samplers and the declared
// sampling-network roles used for advisory validity checks.
struct BuiltProblem {
    Problem problem;
    SamplerSet samplers;
    std::vector<SamplerIO> network;
    std::set<std::string> network_params;
};

// Generator adapters.
class SingleDraw : public Generator {
public:
    explicit SingleDraw(std::vector<Value> values) : values(std::move(values)) {}
    Draw next(int) override {
        if (done)
            return Draw::finish();
        done = true;
        return Draw::make(values, true);
    }

private:
    std::vector<Value> values;
    bool done = false;
};

class EmptyDraw : public Generator {
public:
    Draw next(int) override { return Draw::finish(); }
};

class EnumerationDraw : public Generator {
public:
    explicit EnumerationDraw(std::vector<std::vector<Value>> tuples) : tuples(std::move(tuples)) {}
    Draw next(int) override {
        if (pos >= tuples.size())
            return Draw::finish();
        std::vector<Value> values = tuples[pos];
        pos += 1;
        return Draw::make(std::move(values), pos == tuples.size());
    }

private:
    std::vector<std::vector<Value>> tuples;
    std::size_t pos = 0;
};

class FnDraw : public Generator {
public:
    explicit FnDraw(std::function<Draw(int)> fn) : fn(std::move(fn)) {}
    Draw next(int max_attempts) override { return fn(max_attempts); }

private:
    std::function<Draw(int)> fn;
};

}  // namespace fts::domains
