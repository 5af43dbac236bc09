#include "cortex/v1_filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace cortex {

GaborKernel gabor_kernel(double theta_deg, double sigma, double lambda, double gamma,
                         std::size_t size) {
    if (size % 2 == 0) throw std::invalid_argument(fmt::format("kernel size {} is even", size));
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");

    GaborKernel k;
    k.theta_deg = theta_deg;
    k.sigma = sigma;
    k.lambda = lambda;
    k.gamma = gamma;
    k.weights = Grid<double>(size, size);

    const double theta = theta_deg * std::numbers::pi / 180.0;
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    const auto half = static_cast<long>(size / 2);
    for (std::size_t r = 0; r < size; ++r) {
        for (std::size_t c = 0; c < size; ++c) {
            const double x = static_cast<double>(static_cast<long>(r) - half);
            const double y = static_cast<double>(static_cast<long>(c) - half);
            const double xo = x * ct + y * st;
            const double yo = -x * st + y * ct;
            k.weights(r, c) = std::exp(-(xo * xo + gamma * gamma * yo * yo) / (2.0 * sigma * sigma)) *
                              std::cos(2.0 * std::numbers::pi * xo / lambda);
        }
    }
    return k;
}

std::array<GaborKernel, 4> gabor_bank(const GaborParams& params) {
    std::array<GaborKernel, 4> bank;
    for (int i = 0; i < kOrientationCount; ++i) {
        auto k = gabor_kernel(kOrientationDegrees[static_cast<std::size_t>(i)], params.sigma,
                              params.lambda, params.gamma, params.size);
        k.code = i + 1;
        if (params.zero_mean) {
            auto& w = k.weights.data();
            double mean = 0.0;
            for (double v : w) mean += v;
            mean /= static_cast<double>(w.size());
            double norm = 0.0;
            for (double& v : w) {
                v -= mean;
                norm += v * v;
            }
            norm = std::sqrt(norm);
            if (norm > 0.0) {
                for (double& v : w) v /= norm;
            }
        }
        bank[static_cast<std::size_t>(i)] = std::move(k);
    }
    return bank;
}

Grid<double> convolve_raw(const Grid<double>& image, const GaborKernel& kernel, Exec exec) {
    if (image.rows() < kernel.size() || image.cols() < kernel.size()) {
        throw std::invalid_argument(fmt::format("retina {}x{} smaller than {}x{} kernel", image.rows(),
                                                image.cols(), kernel.size(), kernel.size()));
    }
    return kernels::correlate_valid(image, kernel.weights, exec);
}

OrientationMap convolve(const Retina& retina, const GaborKernel& kernel, Exec exec) {
    OrientationMap map{convolve_raw(retina.values(), kernel, exec), kernel.code};
    for (double& v : map.responses.data()) v = std::abs(v);
    return map;
}

double relative_blank_threshold(std::span<const OrientationMap> maps, double fraction) {
    double peak = 0.0;
    for (const auto& m : maps) {
        for (double v : m.responses.data()) peak = std::max(peak, v);
    }
    return fraction * peak;
}

IntegratedOrientationMap inhibit(std::span<const OrientationMap> maps, double blank_threshold) {
    if (maps.size() != kOrientationCount) {
        throw std::invalid_argument(fmt::format("inhibit needs 4 maps, got {}", maps.size()));
    }
    std::array<bool, kOrientationCount + 1> seen{};
    for (const auto& m : maps) {
        if (m.code < 1 || m.code > kOrientationCount) {
            throw std::invalid_argument(fmt::format("invalid orientation code {}", m.code));
        }
        if (seen[static_cast<std::size_t>(m.code)]) {
            throw std::invalid_argument(fmt::format("duplicate orientation code {}", m.code));
        }
        seen[static_cast<std::size_t>(m.code)] = true;
        if (!m.responses.same_shape(maps[0].responses)) {
            throw std::invalid_argument("orientation maps have mismatched dimensions");
        }
    }

    // Visit maps in code order so that strict '>' keeps the lowest code on ties.
    std::array<const OrientationMap*, kOrientationCount> by_code{};
    for (const auto& m : maps) by_code[static_cast<std::size_t>(m.code - 1)] = &m;

    const auto& shape = maps[0].responses;
    IntegratedOrientationMap iom(shape.rows(), shape.cols(), 0);
    for (std::size_t i = 0; i < shape.size(); ++i) {
        double best = -1.0;
        std::uint8_t code = 0;
        for (std::size_t k = 0; k < by_code.size(); ++k) {
            const double v = by_code[k]->responses.data()[i];
            if (v > best) {
                best = v;
                code = static_cast<std::uint8_t>(k + 1);
            }
        }
        iom.data()[i] = (best > 0.0 && best >= blank_threshold) ? code : 0;
    }
    return iom;
}

IntegratedOrientationMap integrate(const Retina& retina, const V1Params& params, Exec exec) {
    const auto bank = gabor_bank(params.gabor);
    std::array<OrientationMap, 4> maps;
    for (std::size_t i = 0; i < bank.size(); ++i) maps[i] = convolve(retina, bank[i], exec);
    return inhibit(maps, relative_blank_threshold(maps, params.blank_fraction));
}

std::string format_iom(const IntegratedOrientationMap& iom) {
    std::string out;
    out.reserve(iom.rows() * (iom.cols() + 1));
    for (std::size_t r = 0; r < iom.rows(); ++r) {
        for (std::size_t c = 0; c < iom.cols(); ++c) out += static_cast<char>('0' + iom(r, c));
        out += '\n';
    }
    return out;
}

IntegratedOrientationMap parse_iom(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.push_back(line);
        start = end + 1;
    }
    if (lines.empty()) throw std::runtime_error("iom: empty dump");
    IntegratedOrientationMap iom(lines.size(), lines[0].size());
    for (std::size_t r = 0; r < lines.size(); ++r) {
        if (lines[r].size() != iom.cols()) throw std::runtime_error("iom: ragged rows");
        for (std::size_t c = 0; c < iom.cols(); ++c) {
            const char ch = lines[r][c];
            if (ch < '0' || ch > '4') throw std::runtime_error(fmt::format("iom: bad code '{}'", ch));
            iom(r, c) = static_cast<std::uint8_t>(ch - '0');
        }
    }
    return iom;
}

}  // namespace cortex
