#pragma once

// Seeded generators shared by the property tests.

#include "sparsedom/grid.hpp"
#include "sparsedom/random.hpp"

#include <cmath>

namespace sparsedom::testing {

/// Values uniform in [lo, hi) at every cell.
inline GridFunction random_function(const Grid& g, Rng& rng, double lo = 0.0, double hi = 1.0) {
    GridFunction f(g);
    for (Index k = 0; k < f.size(); ++k) f[k] = rng.uniform(lo, hi);
    return f;
}

/// Piecewise-constant function: random levels on random dyadic-free blocks.
inline GridFunction random_steps(const Grid& g, Rng& rng, int pieces = 6) {
    const int n = g.cells_per_side();
    GridFunction f(g, 0.0);
    for (int k = 0; k < pieces; ++k) {
        const int a = rng.below(n), len = 1 + rng.below(std::max(1, n / 4));
        const int b = rng.below(n);
        const double level = rng.uniform(0.0, 4.0);
        for (int i = a; i < std::min(n, a + len); ++i) {
            if (g.dim() == 1) {
                f[i] += level;
            } else {
                for (int j = b; j < std::min(n, b + len); ++j) f[g.flat(i, j)] += level;
            }
        }
    }
    return f;
}

/// exp of a random smooth-ish profile: strictly positive with moderate contrast.
inline Weight random_weight(const Grid& g, Rng& rng, double contrast = 2.0) {
    const double a = rng.uniform(-contrast, contrast), b = rng.uniform(-contrast, contrast);
    const double c = rng.uniform(1.0, 6.0), d = rng.uniform(1.0, 6.0);
    return Weight(GridFunction::sample(g, [&](double x, double y) {
        return std::exp(a * std::sin(c * x + 0.3) + b * std::cos(d * y + 0.7 * x));
    }));
}

/// Smooth compactly supported bump centred at (cx, cy) with radius rad.
inline GridFunction bump(const Grid& g, double cx, double rad, double cy = 0.0) {
    return GridFunction::sample(g, [&](double x, double y) {
        const double r2 = ((x - cx) * (x - cx) + (g.dim() == 2 ? (y - cy) * (y - cy) : 0.0)) / (rad * rad);
        return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
    });
}

}  // namespace sparsedom::testing
