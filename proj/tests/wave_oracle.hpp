#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cortex/grid.hpp"
#include "support.hpp"

namespace testing {

/// Random response map up to max_side x max_side with exact ones, zeros,
/// values sitting on band edges and generic values.
inline cortex::ResponseMap random_response_map(Rng& rng, std::size_t rows = 0, std::size_t cols = 0) {
    if (rows == 0) rows = static_cast<std::size_t>(uniform_int(rng, 1, 40));
    if (cols == 0) cols = static_cast<std::size_t>(uniform_int(rng, 1, 40));
    cortex::ResponseMap r(rows, cols, 0.0);
    for (auto& v : r.data()) {
        switch (uniform_int(rng, 0, 4)) {
            case 0: v = 0.0; break;
            case 1: v = 1.0; break;
            case 2: v = 1.0 - uniform_int(rng, 1, 9) * 0.1; break;
            case 3: v = std::nextafter(1.0, 0.0); break;
            default: v = uniform_real(rng, 0.0, 1.0); break;
        }
    }
    return r;
}

/// Sort all positive activations in descending order, then peel off bands:
/// band 1 takes the exact ones, band k the remaining values >= 1 - (k-1) eps.
inline std::vector<std::vector<cortex::TileCoord>> sort_and_bin(const cortex::ResponseMap& r, double eps) {
    struct Entry {
        double a;
        cortex::TileCoord t;
    };
    std::vector<Entry> entries;
    for (std::size_t row = 0; row < r.rows(); ++row)
        for (std::size_t col = 0; col < r.cols(); ++col)
            if (r(row, col) > 0.0) entries.push_back({r(row, col), {row, col}});
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) { return x.a > y.a; });

    const auto bands = static_cast<std::size_t>(std::ceil(1.0 / eps));
    std::vector<std::vector<cortex::TileCoord>> out(bands);
    std::size_t next = 0;
    for (std::size_t k = 1; k <= bands; ++k) {
        const double edge = 1.0 - static_cast<double>(k - 1) * eps;
        while (next < entries.size() && (k == 1 ? entries[next].a == 1.0 : entries[next].a >= edge)) {
            out[k - 1].push_back(entries[next].t);
            ++next;
        }
        std::sort(out[k - 1].begin(), out[k - 1].end());
    }
    return out;
}

}  // namespace testing
