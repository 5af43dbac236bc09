#pragma once

// Data-parallel inner loops of the pipeline. Each kernel exists twice: a
// serial reference under kernels::serial and an OpenMP version under
// kernels::omp. Both evaluate every output element with the same per-element
// routine, so their outputs are bit-identical regardless of thread count.

#include <cstddef>
#include <span>

#include "cortex/grid.hpp"

namespace cortex {

/// Execution policy for the kernels below.
enum class Exec { serial, parallel };

/// Distance used by the IT RBF units.
enum class ItMetric {
    euclidean,  // squared difference of numeric feature ids
    indicator,  // count of mismatching entries
};

namespace kernels {

/// Read-only view of a feature dictionary in structure-of-arrays form.
struct PrototypeView {
    std::span<const Patch> vectors;
    std::span<const double> betas;
};

/// Best-matching prototype for one tile: 1-based index into the view (0 for a
/// blank tile) and the RBF activation it produced.
struct Match {
    int id = 0;
    double activation = 0.0;
};

int squared_distance(const Patch& a, const Patch& b);

/// Raw (unrectified) response at output position (r, c) of a valid
/// correlation. Gabor kernels are point-symmetric, so correlation and
/// convolution coincide.
double correlate_at(const Grid<double>& image, const Grid<double>& kernel, std::size_t r,
                    std::size_t c);

/// argmax over prototypes of exp(-beta * |x - p|^2); ties go to the lowest id.
/// An all-zero tile is blank and matches nothing.
Match best_match_one(const Patch& tile, const PrototypeView& protos);

/// Squared distance between a stored object map and an input map read at
/// (i + dy, j + dx), with out-of-bounds input read as 0.
double it_distance_at(const Grid<int>& object, const Grid<int>& input, int dy, int dx,
                      ItMetric metric);

namespace serial {
Grid<double> correlate_valid(const Grid<double>& image, const Grid<double>& kernel);
void best_match(std::span<const Patch> tiles, const PrototypeView& protos, std::span<Match> out);
/// Rows index dy in [-radius, radius], columns dx in [-radius, radius].
Grid<double> it_response_grid(const Grid<int>& object, double beta, const Grid<int>& input,
                              int radius, ItMetric metric);
}  // namespace serial

namespace omp {
Grid<double> correlate_valid(const Grid<double>& image, const Grid<double>& kernel);
void best_match(std::span<const Patch> tiles, const PrototypeView& protos, std::span<Match> out);
Grid<double> it_response_grid(const Grid<int>& object, double beta, const Grid<int>& input,
                              int radius, ItMetric metric);
}  // namespace omp

/// Dispatch on the execution policy.
Grid<double> correlate_valid(const Grid<double>& image, const Grid<double>& kernel, Exec exec);
void best_match(std::span<const Patch> tiles, const PrototypeView& protos, std::span<Match> out,
                Exec exec);
Grid<double> it_response_grid(const Grid<int>& object, double beta, const Grid<int>& input,
                              int radius, ItMetric metric, Exec exec);

/// Number of threads the OpenMP kernels will use (1 without OpenMP).
int max_threads();

}  // namespace kernels
}  // namespace cortex
