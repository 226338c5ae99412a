#ifndef SOCIALSIM_RNG_HPP
#define SOCIALSIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace socialsim {

// SplitMix64 finalizer; bijective 64-bit mixing.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return mix64(h ^ mix64(v + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t hash_values(std::initializer_list<std::uint64_t> values) {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto v : values) h = hash_combine(h, v);
    return h;
}

// Counter-based stream: the n-th output is mix64(key + n * gamma). Streams are
// split by hashing the parent key with a label, so draws for one
// (timestep, agent) never depend on how many draws another consumer made.
//
// Output conversion is done by hand rather than with <random> distributions,
// whose algorithms are implementation-defined; runs must be byte-identical
// across standard libraries.
class CounterRng {
public:
    using result_type = std::uint64_t;

    constexpr CounterRng() = default;
    constexpr explicit CounterRng(std::uint64_t key) : key_(mix64(key)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() {
        return mix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
    }

    CounterRng split(std::initializer_list<std::uint64_t> labels) const {
        std::uint64_t h = key_;
        for (auto v : labels) h = hash_combine(h, v);
        return CounterRng(h);
    }

    // Uniform on [0, 1) with 53 bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, n) via Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        for (;;) {
            const unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
            const auto low = static_cast<std::uint64_t>(m);
            if (low >= n || low >= (-n) % n) return static_cast<std::uint64_t>(m >> 64);
        }
    }

    // Box-Muller, one normal per call.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    constexpr std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

// Stream labels used by the engine and policies.
enum class StreamLabel : std::uint64_t { Activation = 1, Decision = 2, Population = 3, Corpus = 4 };

}  // namespace socialsim

#endif  // SOCIALSIM_RNG_HPP
