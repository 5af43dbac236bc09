#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "cortex/grid.hpp"
#include "cortex/kernels.hpp"
#include "cortex/retina.hpp"

namespace cortex {

/// Orientation codes 1..4 stand for 0, 45, 90 and 135 degrees; 0 means blank.
inline constexpr std::array<double, 4> kOrientationDegrees{0.0, 45.0, 90.0, 135.0};
inline constexpr int kOrientationCount = 4;

struct GaborParams {
    double sigma = 2.8;
    double lambda = 3.5;
    double gamma = 0.3;
    std::size_t size = 7;
    /// Subtract the mean and scale to unit L2 norm after evaluation.
    bool zero_mean = false;
};

/// Square Gabor kernel. weights(r, c) is evaluated at x = r - half (rows,
/// downwards) and y = c - half (columns), so theta = 0 modulates along the
/// vertical axis and prefers horizontal structure.
struct GaborKernel {
    Grid<double> weights;
    double theta_deg = 0.0;
    double sigma = 0.0;
    double lambda = 0.0;
    double gamma = 0.0;
    int code = 0;

    std::size_t size() const { return weights.rows(); }
};

/// Throws std::invalid_argument for an even size or non-positive sigma/lambda.
GaborKernel gabor_kernel(double theta_deg, double sigma, double lambda, double gamma,
                         std::size_t size);

/// The four-orientation bank, ordered by code.
std::array<GaborKernel, 4> gabor_bank(const GaborParams& params);

struct OrientationMap {
    Grid<double> responses;  // rectified, >= 0
    int code = 0;
};

/// Valid correlation without rectification.
Grid<double> convolve_raw(const Grid<double>& image, const GaborKernel& kernel,
                          Exec exec = Exec::parallel);

/// Valid convolution of the retina with the kernel, rectified by |.|.
OrientationMap convolve(const Retina& retina, const GaborKernel& kernel,
                        Exec exec = Exec::parallel);

/// Winning orientation code per location, 0 where nothing was detected.
using IntegratedOrientationMap = Grid<std::uint8_t>;

/// `fraction` of the largest response over all maps.
double relative_blank_threshold(std::span<const OrientationMap> maps, double fraction);

/// Winner-take-all across the four maps. A location is blank when its best
/// response is zero or below `blank_threshold`; ties go to the lowest code.
IntegratedOrientationMap inhibit(std::span<const OrientationMap> maps, double blank_threshold);

struct V1Params {
    GaborParams gabor;
    /// Blank threshold as a fraction of the strongest response in the stimulus.
    double blank_fraction = 0.1;
};

/// Full V1 stage: filter bank, rectification, inhibition.
IntegratedOrientationMap integrate(const Retina& retina, const V1Params& params,
                                   Exec exec = Exec::parallel);

/// ASCII dump: one row per line, codes 0-4 with no separators.
std::string format_iom(const IntegratedOrientationMap& iom);
IntegratedOrientationMap parse_iom(std::string_view text);

}  // namespace cortex
