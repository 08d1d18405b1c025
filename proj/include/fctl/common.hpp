#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fctl {

inline constexpr double kPi = std::numbers::pi;

/// Thrown by time steppers when the state norm exceeds the blow-up guard.
struct DivergedError : std::runtime_error {
    int step;
    explicit DivergedError(int at_step)
        : std::runtime_error("state diverged at step " + std::to_string(at_step)),
          step(at_step) {}
};

/// Thrown by the config layer; messages name the offending key. The `key`
/// field is filled when the two-argument form is used.
struct ConfigError : std::runtime_error {
    std::string key;
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
    ConfigError(std::string k, const std::string& what)
        : std::runtime_error("config key '" + k + "': " + what), key(std::move(k)) {}
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2_sq(std::span<const double> a) { return dot(a, a); }

inline double norm2(std::span<const double> a) { return std::sqrt(norm2_sq(a)); }

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// SplitMix64 step; also used as the seed-derivation mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-style seed derivation: one master seed plus integer coordinates
/// identify an independent stream. Used for (iteration, sample, purpose)
/// triples so batches are reproducible regardless of execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c = 0) {
    std::uint64_t s = master;
    (void)splitmix64(s);
    s ^= 0x632BE59BD9B4E019ULL + a;
    (void)splitmix64(s);
    s ^= 0x9E6C63D0876A9ED1ULL + b;
    (void)splitmix64(s);
    s ^= 0xE7037ED1A0B428DBULL + c;
    return splitmix64(s);
}

// Seed stream tags for derive_seed's third coordinate.
inline constexpr std::uint64_t kStreamTrain = 0;
inline constexpr std::uint64_t kStreamRetry = 1;
inline constexpr std::uint64_t kStreamEval = 2;

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Work is split in
/// contiguous chunks by index so any per-index output slot is written exactly
/// once; reductions over pre-indexed slots are bit-identical for any job count.
inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mutex;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline std::uint64_t fnv1a64(std::span<const unsigned char> bytes,
                             std::uint64_t h = 0xCBF29CE484222325ULL) {
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace fctl
