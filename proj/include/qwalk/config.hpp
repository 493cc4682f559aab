#pragma once

#include <cstddef>
#include <numbers>

namespace qwalk {

// Numerical tolerances shared by constructors, checks and reports.
struct Tolerances {
    static constexpr double norm = 1e-12;            // state / distribution normalization
    static constexpr double eigen_degeneracy = 1e-12;
    static constexpr double envelope_cutoff = 1e-12; // |f| below this is truncated
    static constexpr double boundary_leak = 1e-8;    // max |F| allowed at grid edges
    static constexpr double parity_zero = 1e-14;
    static constexpr double continuum_norm = 1e-10;
};

struct Limits {
    // Largest window (sites) evolve() will allocate.
    static constexpr std::size_t max_window = std::size_t{1} << 27;
};

inline constexpr double pi = std::numbers::pi;

}  // namespace qwalk
