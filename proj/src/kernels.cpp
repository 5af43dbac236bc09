#include "cortex/kernels.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cortex::kernels {

int squared_distance(const Patch& a, const Patch& b) {
    int sum = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const int d = int{a[k]} - int{b[k]};
        sum += d * d;
    }
    return sum;
}

double correlate_at(const Grid<double>& image, const Grid<double>& kernel, std::size_t r,
                    std::size_t c) {
    double acc = 0.0;
    for (std::size_t kr = 0; kr < kernel.rows(); ++kr) {
        for (std::size_t kc = 0; kc < kernel.cols(); ++kc) {
            acc += image(r + kr, c + kc) * kernel(kr, kc);
        }
    }
    return acc;
}

Match best_match_one(const Patch& tile, const PrototypeView& protos) {
    Match best;
    bool blank = true;
    for (auto v : tile) blank = blank && v == 0;
    if (blank) return best;
    for (std::size_t i = 0; i < protos.vectors.size(); ++i) {
        const double act = std::exp(-protos.betas[i] * squared_distance(tile, protos.vectors[i]));
        if (best.id == 0 || act > best.activation) {
            best.id = static_cast<int>(i + 1);
            best.activation = act;
        }
    }
    return best;
}

double it_distance_at(const Grid<int>& object, const Grid<int>& input, int dy, int dx,
                      ItMetric metric) {
    const auto rows = static_cast<long>(input.rows());
    const auto cols = static_cast<long>(input.cols());
    double sum = 0.0;
    for (std::size_t i = 0; i < object.rows(); ++i) {
        const long ir = static_cast<long>(i) + dy;
        const bool row_ok = ir >= 0 && ir < rows;
        for (std::size_t j = 0; j < object.cols(); ++j) {
            const long jc = static_cast<long>(j) + dx;
            const int x = (row_ok && jc >= 0 && jc < cols) ? input(static_cast<std::size_t>(ir),
                                                                   static_cast<std::size_t>(jc))
                                                           : 0;
            const int o = object(i, j);
            if (metric == ItMetric::euclidean) {
                const double d = static_cast<double>(x - o);
                sum += d * d;
            } else {
                sum += (x != o) ? 1.0 : 0.0;
            }
        }
    }
    return sum;
}

namespace {

void check_correlation_dims(const Grid<double>& image, const Grid<double>& kernel) {
    if (kernel.empty() || image.rows() < kernel.rows() || image.cols() < kernel.cols()) {
        throw std::invalid_argument("image smaller than kernel");
    }
}

void check_match_dims(std::span<const Patch> tiles, const PrototypeView& protos,
                      std::span<Match> out) {
    if (tiles.size() != out.size()) throw std::invalid_argument("best_match: output size mismatch");
    if (protos.vectors.size() != protos.betas.size()) {
        throw std::invalid_argument("best_match: prototype view is inconsistent");
    }
}

Grid<double> make_response_grid(int radius) {
    if (radius < 0) throw std::invalid_argument("negative response-grid radius");
    const auto side = static_cast<std::size_t>(2 * radius + 1);
    return Grid<double>(side, side);
}

}  // namespace

namespace serial {

Grid<double> correlate_valid(const Grid<double>& image, const Grid<double>& kernel) {
    check_correlation_dims(image, kernel);
    Grid<double> out(image.rows() - kernel.rows() + 1, image.cols() - kernel.cols() + 1);
    for (std::size_t r = 0; r < out.rows(); ++r) {
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = correlate_at(image, kernel, r, c);
    }
    return out;
}

void best_match(std::span<const Patch> tiles, const PrototypeView& protos, std::span<Match> out) {
    check_match_dims(tiles, protos, out);
    for (std::size_t t = 0; t < tiles.size(); ++t) out[t] = best_match_one(tiles[t], protos);
}

Grid<double> it_response_grid(const Grid<int>& object, double beta, const Grid<int>& input,
                              int radius, ItMetric metric) {
    auto grid = make_response_grid(radius);
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            grid(static_cast<std::size_t>(dy + radius), static_cast<std::size_t>(dx + radius)) =
                std::exp(-beta * it_distance_at(object, input, dy, dx, metric));
        }
    }
    return grid;
}

}  // namespace serial

namespace omp {

Grid<double> correlate_valid(const Grid<double>& image, const Grid<double>& kernel) {
    check_correlation_dims(image, kernel);
    Grid<double> out(image.rows() - kernel.rows() + 1, image.cols() - kernel.cols() + 1);
    const auto rows = static_cast<long>(out.rows());
    const std::size_t cols = out.cols();
#pragma omp parallel for schedule(static)
    for (long r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            out(static_cast<std::size_t>(r), c) =
                correlate_at(image, kernel, static_cast<std::size_t>(r), c);
        }
    }
    return out;
}

void best_match(std::span<const Patch> tiles, const PrototypeView& protos, std::span<Match> out) {
    check_match_dims(tiles, protos, out);
    const auto n = static_cast<long>(tiles.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long t = 0; t < n; ++t) {
        out[static_cast<std::size_t>(t)] = best_match_one(tiles[static_cast<std::size_t>(t)], protos);
    }
}

Grid<double> it_response_grid(const Grid<int>& object, double beta, const Grid<int>& input,
                              int radius, ItMetric metric) {
    auto grid = make_response_grid(radius);
    const int side = 2 * radius + 1;
    const long cells = static_cast<long>(side) * side;
#pragma omp parallel for schedule(static)
    for (long k = 0; k < cells; ++k) {
        const int dy = static_cast<int>(k / side) - radius;
        const int dx = static_cast<int>(k % side) - radius;
        grid.data()[static_cast<std::size_t>(k)] =
            std::exp(-beta * it_distance_at(object, input, dy, dx, metric));
    }
    return grid;
}

}  // namespace omp

Grid<double> correlate_valid(const Grid<double>& image, const Grid<double>& kernel, Exec exec) {
    return exec == Exec::parallel ? omp::correlate_valid(image, kernel)
                                  : serial::correlate_valid(image, kernel);
}

void best_match(std::span<const Patch> tiles, const PrototypeView& protos, std::span<Match> out,
                Exec exec) {
    if (exec == Exec::parallel) omp::best_match(tiles, protos, out);
    else serial::best_match(tiles, protos, out);
}

Grid<double> it_response_grid(const Grid<int>& object, double beta, const Grid<int>& input,
                              int radius, ItMetric metric, Exec exec) {
    return exec == Exec::parallel ? omp::it_response_grid(object, beta, input, radius, metric)
                                  : serial::it_response_grid(object, beta, input, radius, metric);
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace cortex::kernels
