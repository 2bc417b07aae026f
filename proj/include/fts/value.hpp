#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fts {

// Identifies where a lazy placeholder came from: the sampler (and output
// slot) whose future output it stands for. instance_key is empty when
// placeholders are shared per sampler rather than per instance.
struct LazyOrigin {
    std::string sampler;
    int slot = 0;
    std::string instance_key;
};

// An immutable, hashable planning value. Equality is exact: bit equality on
// reals, string equality on symbols, and identity (token id) on lazy
// placeholders. Values are cheap to copy; the payload is shared.
class Value {
public:
    enum class Kind { real_vec, symbol, boolean, trajectory, lazy };

    Value();  // symbol "None"

    static Value reals(std::vector<double> coords);
    static Value real1(double x);
    static Value symbol(std::string name);
    static Value boolean(bool b);
    static Value trajectory(std::vector<std::vector<double>> waypoints);
    static Value lazy(std::uint64_t id, LazyOrigin origin);

    Kind kind() const { return data->kind; }
    bool is_lazy() const { return data->kind == Kind::lazy; }

    const std::vector<double>& as_reals() const;
    const std::string& as_symbol() const;
    bool as_bool() const;
    const std::vector<std::vector<double>>& as_trajectory() const;
    std::uint64_t lazy_id() const;
    const LazyOrigin& lazy_origin() const;

    std::uint64_t hash() const { return data->hash; }
    bool operator==(const Value& other) const;
    bool operator!=(const Value& other) const { return !(*this == other); }

    // Compact exact textual form, e.g. "[0.5,1]", "'None'", "?3". Real
    // coordinates print with shortest round-trip precision.
    std::string str() const;

private:
    struct Data {
        Kind kind = Kind::symbol;
        std::vector<double> reals;
        std::string sym;
        bool b = false;
        std::vector<std::vector<double>> traj;
        std::uint64_t lazy_token = 0;
        LazyOrigin origin;
        std::uint64_t hash = 0;
    };

    explicit Value(std::shared_ptr<const Data> d) : data(std::move(d)) {}

    std::shared_ptr<const Data> data;
};

// FNV-1a over raw bytes; stable across runs and platforms with the same
// endianness, which is all the determinism contract requires.
std::uint64_t stable_hash_bytes(const void* ptr, std::size_t len, std::uint64_t seed = 1469598103934665603ull);
std::uint64_t stable_hash_combine(std::uint64_t a, std::uint64_t b);
std::uint64_t stable_hash_values(std::span<const Value> values, std::uint64_t seed = 0);

// Shortest representation of x that parses back to the same bits.
std::string format_double(double x);

struct ValueHash {
    std::size_t operator()(const Value& v) const { return static_cast<std::size_t>(v.hash()); }
};

}  // namespace fts
