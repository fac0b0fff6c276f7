#pragma once

#include <atomic>
#include <cstdint>

namespace sparsedom {

/// Process-wide counters for conditions that are repaired rather than rejected.
struct Diagnostics {
    std::atomic<std::uint64_t> weight_clamps{0};        // weight samples raised to the 1e-300 floor
    std::atomic<std::uint64_t> support_warnings{0};     // T inputs leaking out of the central half
    std::atomic<std::uint64_t> omega_mean_corrections{0};
    std::atomic<std::uint64_t> fft_imaginary_warnings{0};
};

Diagnostics& diagnostics();

}  // namespace sparsedom
