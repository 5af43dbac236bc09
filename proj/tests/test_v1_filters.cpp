#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cortex/v1_filters.hpp"
#include "support.hpp"

using namespace cortex;

namespace {

// Direct evaluation of the Gabor formula, independent of the library.
double gabor_at(double theta_deg, double x, double y, double sigma = 2.8, double lambda = 3.5,
                double gamma = 0.3) {
    const double t = theta_deg * std::numbers::pi / 180.0;
    const double xo = x * std::cos(t) + y * std::sin(t);
    const double yo = -x * std::sin(t) + y * std::cos(t);
    return std::exp(-(xo * xo + gamma * gamma * yo * yo) / (2 * sigma * sigma)) *
           std::cos(2 * std::numbers::pi * xo / lambda);
}

std::array<OrientationMap, 4> single_location(double a, double b, double c, double d) {
    std::array<OrientationMap, 4> maps;
    const double v[4] = {a, b, c, d};
    for (int i = 0; i < 4; ++i) maps[i] = {Grid<double>(1, 1, v[i]), i + 1};
    return maps;
}

Grid<double> random_image(testing::Rng& rng, std::size_t h, std::size_t w) {
    Grid<double> g(h, w);
    for (auto& v : g.data()) v = testing::uniform_real(rng, -1.0, 1.0);
    return g;
}

}  // namespace

TEST_SUITE("v1_filters") {

TEST_CASE("kernel center is one for every orientation") {
    for (double theta : kOrientationDegrees) {
        const auto k = gabor_kernel(theta, 2.8, 3.5, 0.3, 7);
        CHECK(k.size() == 7);
        CHECK(k.weights(3, 3) == 1.0);
    }
}

TEST_CASE("kernel matches direct evaluation") {
    for (double theta : kOrientationDegrees) {
        const auto k = gabor_kernel(theta, 2.8, 3.5, 0.3, 7);
        for (int r = 0; r < 7; ++r)
            for (int c = 0; c < 7; ++c)
                CHECK(k.weights(r, c) == doctest::Approx(gabor_at(theta, r - 3, c - 3)).epsilon(1e-14));
    }
}

TEST_CASE("the 90 degree kernel is the 0 degree kernel transposed") {
    const auto k0 = gabor_kernel(0, 2.8, 3.5, 0.3, 7);
    const auto k90 = gabor_kernel(90, 2.8, 3.5, 0.3, 7);
    for (std::size_t r = 0; r < 7; ++r)
        for (std::size_t c = 0; c < 7; ++c) CHECK(std::abs(k90.weights(r, c) - k0.weights(c, r)) <= 1e-12);
}

TEST_CASE("weights decay monotonically along the envelope's long axis") {
    // For theta = 0 the long axis is the center row, where the carrier is cos(0) = 1.
    const auto k = gabor_kernel(0, 2.8, 3.5, 0.3, 7);
    for (std::size_t c = 3; c + 1 < 7; ++c) {
        CHECK(k.weights(3, c + 1) < k.weights(3, c));
        CHECK(k.weights(3, 6 - c - 1) < k.weights(3, 6 - c));
    }
}

TEST_CASE("kernel argument errors") {
    CHECK_THROWS_AS(gabor_kernel(0, 2.8, 3.5, 0.3, 6), std::invalid_argument);
    CHECK_THROWS_AS(gabor_kernel(0, 0.0, 3.5, 0.3, 7), std::invalid_argument);
    CHECK_THROWS_AS(gabor_kernel(0, 2.8, -1.0, 0.3, 7), std::invalid_argument);
}

TEST_CASE("zero-mean bank has zero sum and unit norm") {
    GaborParams p;
    p.zero_mean = true;
    for (const auto& k : gabor_bank(p)) {
        double sum = 0, sq = 0;
        for (double w : k.weights.data()) {
            sum += w;
            sq += w * w;
        }
        CHECK(std::abs(sum) < 1e-12);
        CHECK(sq == doctest::Approx(1.0));
    }
}

TEST_CASE("valid convolution sizes and black input") {
    const auto black = Retina::from_levels(Grid<std::uint8_t>(100, 100, 0));
    for (const auto& k : gabor_bank({})) {
        const auto m = convolve(black, k);
        CHECK(m.responses.rows() == 94);
        CHECK(m.responses.cols() == 94);
        for (double v : m.responses.data()) REQUIRE(v == 0.0);
    }
    const auto iom = integrate(black, {});
    for (auto code : iom.data()) REQUIRE(code == 0);
}

TEST_CASE("convolution is linear before rectification") {
    testing::Rng rng(11);
    const auto a = random_image(rng, 30, 40);
    const auto b = random_image(rng, 30, 40);
    const double wa = 0.7, wb = -1.3;
    Grid<double> mix(30, 40);
    for (std::size_t i = 0; i < mix.size(); ++i) mix.data()[i] = wa * a.data()[i] + wb * b.data()[i];
    for (const auto& k : gabor_bank({})) {
        const auto ra = convolve_raw(a, k);
        const auto rb = convolve_raw(b, k);
        const auto rm = convolve_raw(mix, k);
        for (std::size_t i = 0; i < rm.size(); ++i)
            REQUIRE(std::abs(rm.data()[i] - (wa * ra.data()[i] + wb * rb.data()[i])) <= 1e-9);
    }
}

TEST_CASE("convolution agrees with a direct sum") {
    testing::Rng rng(5);
    const auto img = random_image(rng, 12, 15);
    const auto k = gabor_kernel(45, 2.8, 3.5, 0.3, 7);
    const auto out = convolve_raw(img, k);
    REQUIRE(out.rows() == 6);
    REQUIRE(out.cols() == 9);
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) {
            double s = 0;
            for (int i = 0; i < 7; ++i)
                for (int j = 0; j < 7; ++j) s += img(r + i, c + j) * gabor_at(45, i - 3, j - 3);
            CHECK(out(r, c) == doctest::Approx(s).epsilon(1e-12));
        }
}

TEST_CASE("inhibition examples") {
    auto m = single_location(0.9, 0.2, 0.1, 0.0);
    CHECK(inhibit(m, 0.05)(0, 0) == 1);
    m = single_location(0.01, 0.02, 0.03, 0.04);
    CHECK(inhibit(m, 0.05)(0, 0) == 0);
    m = single_location(0.5, 0.5, 0.1, 0.1);
    CHECK(inhibit(m, 0.05)(0, 0) == 1);
    m = single_location(0.1, 0.3, 0.3, 0.3);
    CHECK(inhibit(m, 0.05)(0, 0) == 2);
    m = single_location(0.0, 0.0, 0.0, 0.0);
    CHECK(inhibit(m, 0.0)(0, 0) == 0);
}

TEST_CASE("inhibition errors") {
    auto m = single_location(1, 2, 3, 4);
    m[3].code = 1;
    CHECK_THROWS_AS(inhibit(m, 0.1), std::invalid_argument);
    m = single_location(1, 2, 3, 4);
    m[2].responses = Grid<double>(2, 1, 0.0);
    CHECK_THROWS_AS(inhibit(m, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(inhibit(std::span<const OrientationMap>(m.data(), 3), 0.1), std::invalid_argument);
}

TEST_CASE("winner-take-all holds at every location") {
    const auto retina = generate_synthetic(synthetic_catalog()[0], 2);
    const auto bank = gabor_bank({});
    std::array<OrientationMap, 4> maps;
    for (int i = 0; i < 4; ++i) maps[i] = convolve(retina, bank[i]);
    const double thr = relative_blank_threshold(maps, 0.1);
    const auto iom = inhibit(maps, thr);
    CHECK(iom == integrate(retina, {}));
    for (std::size_t r = 0; r < iom.rows(); ++r)
        for (std::size_t c = 0; c < iom.cols(); ++c) {
            const int code = iom(r, c);
            double best = 0;
            for (const auto& m : maps) best = std::max(best, m.responses(r, c));
            if (code == 0) {
                REQUIRE((best < thr || best == 0.0));
            } else {
                REQUIRE(maps[code - 1].responses(r, c) == best);
                REQUIRE(best >= thr);
            }
        }
}

TEST_CASE("a thin horizontal bar is coded 0 degrees, its rotation 90 degrees") {
    const auto horizontal = testing::rectangle(49, 52, 20, 80);
    const auto vertical = testing::rectangle(20, 80, 49, 52);
    const auto ih = integrate(horizontal, {});
    const auto iv = integrate(vertical, {});
    // IOM (r, c) covers retina rows r..r+6; the bar's middle row 50 sits at the kernel center for r = 47.
    for (std::size_t c = 25; c < 50; ++c) CHECK(ih(47, c) == 1);
    for (std::size_t r = 25; r < 50; ++r) CHECK(iv(r, 47) == 3);
}

TEST_CASE("IOM text round trip") {
    const auto iom = integrate(generate_synthetic(synthetic_catalog()[3], 5), {});
    const auto text = format_iom(iom);
    CHECK(text.find('\n') == 94);
    CHECK(parse_iom(text) == iom);
    CHECK_THROWS(parse_iom("012\n01\n"));
    CHECK_THROWS(parse_iom("015\n"));
}

}  // TEST_SUITE
