#pragma once

#include <cstdint>
#include <random>

namespace sparsedom {

/// Seeded generator whose output is identical on every platform: the engine
/// is fully specified by the standard and the conversions are done by hand.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    int below(int n) { return static_cast<int>(uniform() * n); }

private:
    std::mt19937_64 engine_;
};

}  // namespace sparsedom
