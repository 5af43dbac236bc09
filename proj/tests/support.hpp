#pragma once

#include <cstdint>
#include <random>

#include "cortex/grid.hpp"
#include "cortex/retina.hpp"

namespace testing {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline double uniform_real(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline cortex::Patch random_patch(Rng& rng, bool allow_blank = false) {
    cortex::Patch p{};
    do {
        for (auto& v : p) v = static_cast<std::uint8_t>(uniform_int(rng, 0, 4));
    } while (!allow_blank && p == cortex::Patch{});
    return p;
}

inline cortex::Retina retina_from(const cortex::Grid<double>& values) { return cortex::quantize(values); }

/// Black retina with a bright axis-aligned rectangle [r0, r1) x [c0, c1).
inline cortex::Retina rectangle(std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1,
                                std::size_t side = 100) {
    cortex::Grid<double> v(side, side, 0.0);
    for (std::size_t r = r0; r < r1; ++r)
        for (std::size_t c = c0; c < c1; ++c) v(r, c) = 1.0;
    return cortex::quantize(v);
}

}  // namespace testing
