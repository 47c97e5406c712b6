#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace splitperf {

// Deterministic random source. All draws go through explicit helpers instead
// of std distributions, whose output is implementation-defined; the sequences
// produced here are identical across platforms for a given seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

    // Independent substream for a named stage, stable under reordering of
    // other draws.
    static Rng substream(std::uint64_t seed, std::uint64_t stream_id) {
        return Rng(mix(seed) ^ mix(stream_id * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
    }

    std::uint64_t next_u64() { return engine_(); }

    double uniform01() {  // [0, 1), 53-bit resolution
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Inclusive bounds.
    long long uniform_int(long long lo, long long hi) {
        std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<long long>(next_u64() % span);
    }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        double u2 = uniform01();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * std::numbers::pi * u2;
        cached_ = radius * std::sin(angle);
        have_cached_ = true;
        return radius * std::cos(angle);
    }

    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (size_t i = values.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(0, static_cast<long long>(i) - 1));
            std::swap(values[i - 1], values[j]);
        }
    }

  private:
    static std::uint64_t mix(std::uint64_t x) {  // splitmix64 finalizer
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 engine_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace splitperf
