#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace vsrflow {

enum class ErrorCategory {
    shape,
    contract,
    config,
    io,
    numeric,
    usage,
};

inline const char* error_category_name(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::shape: return "shape";
        case ErrorCategory::contract: return "contract";
        case ErrorCategory::config: return "config";
        case ErrorCategory::io: return "io";
        case ErrorCategory::numeric: return "numeric";
        case ErrorCategory::usage: return "usage";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, const std::string& msg)
        : std::runtime_error(msg), cat_(cat) {}
    ErrorCategory category() const { return cat_; }

private:
    ErrorCategory cat_;
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& msg) : Error(ErrorCategory::shape, msg) {}
};
struct ContractError : Error {
    explicit ContractError(const std::string& msg) : Error(ErrorCategory::contract, msg) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(ErrorCategory::config, msg) {}
};
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(ErrorCategory::io, msg) {}
};
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(ErrorCategory::numeric, msg) {}
};

inline void check_shape(bool cond, const std::string& msg) {
    if (!cond) throw ShapeError(msg);
}
inline void check_contract(bool cond, const std::string& msg) {
    if (!cond) throw ContractError(msg);
}
inline void check_config(bool cond, const std::string& msg) {
    if (!cond) throw ConfigError(msg);
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_str(const std::string& s) {
    // FNV-1a, 64-bit
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Deterministic, trivially serializable generator (splitmix64 stream).
// std::normal_distribution is implementation-defined, so normals are
// produced by Box-Muller from fixed 53-bit uniforms instead.
class Rng {
public:
    Rng() : state_(0) {}
    explicit Rng(uint64_t seed) : state_(seed) {}

    static Rng derive(uint64_t seed, uint64_t stream) {
        return Rng(splitmix64(seed ^ splitmix64(stream + 0x51ed2701a9b3c21fULL)));
    }

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // [0, 1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive bounds
    int64_t uniform_int(int64_t lo, int64_t hi) {
        check_contract(lo <= hi, "uniform_int: lo > hi");
        uint64_t span = uint64_t(hi - lo) + 1;
        if (span == 0) return int64_t(next_u64());  // full range
        return lo + int64_t(next_u64() % span);
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    uint64_t state() const { return state_; }
    void set_state(uint64_t s) { state_ = s; }

private:
    uint64_t state_;
};

}  // namespace vsrflow
