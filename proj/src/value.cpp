#include "fts/value.hpp"

#include <bit>
#include <cassert>
#include <charconv>
#include <cstring>
#include <stdexcept>

namespace fts {

std::uint64_t stable_hash_bytes(const void* ptr, std::size_t len, std::uint64_t seed) {
    const auto* bytes = static_cast<const unsigned char*>(ptr);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t stable_hash_combine(std::uint64_t a, std::uint64_t b) {
    std::uint64_t buf[2] = {a, b};
    return stable_hash_bytes(buf, sizeof(buf));
}

std::uint64_t stable_hash_values(std::span<const Value> values, std::uint64_t seed) {
    std::uint64_t h = stable_hash_combine(seed, values.size());
    for (const Value& v : values)
        h = stable_hash_combine(h, v.hash());
    return h;
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    assert(res.ec == std::errc());
    return std::string(buf, res.ptr);
}

namespace {

std::uint64_t hash_reals(const std::vector<double>& reals, std::uint64_t h) {
    for (double x : reals)
        h = stable_hash_combine(h, std::bit_cast<std::uint64_t>(x));
    return h;
}

bool reals_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i]))
            return false;
    return true;
}

void append_reals(std::string& out, const std::vector<double>& reals) {
    out += '[';
    for (std::size_t i = 0; i < reals.size(); ++i) {
        if (i)
            out += ',';
        out += format_double(reals[i]);
    }
    out += ']';
}

}  // namespace

Value::Value() { *this = symbol("None"); }

Value Value::reals(std::vector<double> coords) {
    auto d = std::make_shared<Data>();
    d->kind = Kind::real_vec;
    d->reals = std::move(coords);
    d->hash = hash_reals(d->reals, stable_hash_combine(1, d->reals.size()));
    return Value(std::move(d));
}

Value Value::real1(double x) { return reals({x}); }

Value Value::symbol(std::string name) {
    auto d = std::make_shared<Data>();
    d->kind = Kind::symbol;
    d->sym = std::move(name);
    d->hash = stable_hash_bytes(d->sym.data(), d->sym.size(), stable_hash_combine(2, d->sym.size()));
    return Value(std::move(d));
}

Value Value::boolean(bool b) {
    auto d = std::make_shared<Data>();
    d->kind = Kind::boolean;
    d->b = b;
    d->hash = stable_hash_combine(3, b ? 1 : 0);
    return Value(std::move(d));
}

Value Value::trajectory(std::vector<std::vector<double>> waypoints) {
    auto d = std::make_shared<Data>();
    d->kind = Kind::trajectory;
    d->traj = std::move(waypoints);
    std::uint64_t h = stable_hash_combine(4, d->traj.size());
    for (const auto& wp : d->traj)
        h = hash_reals(wp, stable_hash_combine(h, wp.size()));
    d->hash = h;
    return Value(std::move(d));
}

Value Value::lazy(std::uint64_t id, LazyOrigin origin) {
    auto d = std::make_shared<Data>();
    d->kind = Kind::lazy;
    d->lazy_token = id;
    d->origin = std::move(origin);
    d->hash = stable_hash_combine(5, id);
    return Value(std::move(d));
}

const std::vector<double>& Value::as_reals() const {
    if (data->kind != Kind::real_vec)
        throw std::logic_error("value is not a real vector: " + str());
    return data->reals;
}

const std::string& Value::as_symbol() const {
    if (data->kind != Kind::symbol)
        throw std::logic_error("value is not a symbol: " + str());
    return data->sym;
}

bool Value::as_bool() const {
    if (data->kind != Kind::boolean)
        throw std::logic_error("value is not a boolean: " + str());
    return data->b;
}

const std::vector<std::vector<double>>& Value::as_trajectory() const {
    if (data->kind != Kind::trajectory)
        throw std::logic_error("value is not a trajectory: " + str());
    return data->traj;
}

std::uint64_t Value::lazy_id() const {
    if (data->kind != Kind::lazy)
        throw std::logic_error("value is not a lazy placeholder: " + str());
    return data->lazy_token;
}

const LazyOrigin& Value::lazy_origin() const {
    if (data->kind != Kind::lazy)
        throw std::logic_error("value is not a lazy placeholder: " + str());
    return data->origin;
}

bool Value::operator==(const Value& other) const {
    if (data == other.data)
        return true;
    if (data->kind != other.data->kind || data->hash != other.data->hash)
        return false;
    switch (data->kind) {
    case Kind::real_vec:
        return reals_equal(data->reals, other.data->reals);
    case Kind::symbol:
        return data->sym == other.data->sym;
    case Kind::boolean:
        return data->b == other.data->b;
    case Kind::trajectory: {
        if (data->traj.size() != other.data->traj.size())
            return false;
        for (std::size_t i = 0; i < data->traj.size(); ++i)
            if (!reals_equal(data->traj[i], other.data->traj[i]))
                return false;
        return true;
    }
    case Kind::lazy:
        return data->lazy_token == other.data->lazy_token;
    }
    return false;
}

std::string Value::str() const {
    switch (data->kind) {
    case Kind::real_vec: {
        std::string out;
        append_reals(out, data->reals);
        return out;
    }
    case Kind::symbol:
        return "'" + data->sym + "'";
    case Kind::boolean:
        return data->b ? "true" : "false";
    case Kind::trajectory: {
        std::string out = "t[";
        for (std::size_t i = 0; i < data->traj.size(); ++i) {
            if (i)
                out += ';';
            append_reals(out, data->traj[i]);
        }
        out += ']';
        return out;
    }
    case Kind::lazy:
        return "?" + std::to_string(data->lazy_token);
    }
    return "?";
}

}  // namespace fts
