#pragma once

// Small deterministic helpers shared by the test suites.

#include <cstdint>

#include "ddc/grid.hpp"

namespace ddctest {

struct Rng {
    uint64_t s;
    explicit Rng(uint64_t seed) : s(seed) {}
    uint64_t next() {
        s += 0x9E3779B97F4A7C15ULL;
        uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
};

inline ddc::Field random_field(const ddc::Grid& g, uint64_t seed, double lo, double hi) {
    Rng rng(seed);
    ddc::Field f(g);
    for (double& x : f.data) x = rng.uniform(lo, hi);
    return f;
}

// mirror in x: (i,j) -> (nx-1-i, j)
inline ddc::Field mirror_x(const ddc::Field& f) {
    ddc::Field out(f.grid);
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) out.at(i, j) = f.at(f.grid.nx - 1 - i, j);
    return out;
}

inline double max_abs_diff(const ddc::Field& a, const ddc::Field& b) {
    double m = 0.0;
    for (int k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

} // namespace ddctest
