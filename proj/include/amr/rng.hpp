#pragma once

// Counter-based random streams.
//
// Every random number in the simulator is a pure function of a key tuple
// (seed, stream tag, agent, step, draw). Nothing carries hidden state between
// calls, so agent decisions can be evaluated in any order, on any number of
// threads, and still reproduce bit for bit.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace amr::rng {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Absorbs one more word into a running key.
constexpr std::uint64_t combine(std::uint64_t key, std::uint64_t word) noexcept {
    return mix64(key ^ mix64(word));
}

constexpr std::uint64_t hash(std::uint64_t a, std::uint64_t b) noexcept {
    return combine(mix64(a), b);
}
constexpr std::uint64_t hash(std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept {
    return combine(hash(a, b), c);
}
constexpr std::uint64_t hash(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                             std::uint64_t d) noexcept {
    return combine(hash(a, b, c), d);
}
constexpr std::uint64_t hash(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                             std::uint64_t d, std::uint64_t e) noexcept {
    return combine(hash(a, b, c, d), e);
}

/// Top 53 bits mapped to [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Domain separators so that different consumers of the same seed never
// share a stream.
enum class Tag : std::uint64_t {
    population = 0x706f70756c617469ULL,
    decision = 0x6465636973696f6eULL,
    replication = 0x7265706c69636174ULL,
    annealer = 0x616e6e65616c6572ULL,
};

constexpr std::uint64_t tag(Tag t) noexcept { return static_cast<std::uint64_t>(t); }

/// Sub-seed for the r-th independent replication of a run keyed by `master`.
constexpr std::uint64_t replication_seed(std::uint64_t master, std::uint64_t r) noexcept {
    return hash(master, tag(Tag::replication), r);
}

/// Sequential view over a counter-based stream: draw k is hash(key, k).
/// Used where consumption is inherently ordered (the annealing chain).
class CounterStream {
public:
    explicit CounterStream(std::uint64_t key) noexcept : key_(key) {}

    std::uint64_t next_u64() noexcept { return combine(key_, counter_++); }

    /// Uniform in [0, 1).
    double uniform() noexcept { return to_unit(next_u64()); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) noexcept {
        const auto k = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

    /// Standard normal via Box-Muller (one value per two draws, no caching,
    /// so the stream position is always 2 draws per call).
    double normal() noexcept {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t position() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace amr::rng
