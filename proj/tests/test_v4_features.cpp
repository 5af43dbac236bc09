#include <doctest.h>

#include <cmath>
#include <numeric>

#include "cortex/v4_features.hpp"
#include "support.hpp"

using namespace cortex;

namespace {

constexpr Patch kAllFour{4, 4, 4, 4, 4, 4, 4, 4, 4};

IntegratedOrientationMap random_iom(testing::Rng& rng, std::size_t side, double blank) {
    IntegratedOrientationMap iom(side, side, 0);
    for (auto& v : iom.data())
        if (testing::uniform_real(rng, 0, 1) >= blank) v = static_cast<std::uint8_t>(testing::uniform_int(rng, 1, 4));
    return iom;
}

// Nearest prototype by brute force: (1-based id, squared distance).
std::pair<int, int> nearest(const FeatureRepository& repo, const Patch& x) {
    int id = 0, best = 0;
    for (const auto& p : repo.prototypes()) {
        int d = 0;
        for (std::size_t k = 0; k < 9; ++k) d += (int{x[k]} - int{p.vector[k]}) * (int{x[k]} - int{p.vector[k]});
        if (id == 0 || d < best) {
            id = p.id;
            best = d;
        }
    }
    return {id, best};
}

}  // namespace

TEST_SUITE("v4_features") {

TEST_CASE("prototype parameters follow from the vector") {
    FeatureRepository repo{V4Params{}};
    repo.admit(kAllFour);
    const auto& p = repo.at(1);
    CHECK(p.dist_v4 == 144.0);
    CHECK(p.var2 == 144.0 / 10.0);
    CHECK(p.beta_v4 == 1.0 / (2.0 * (144.0 / 10.0)));
    CHECK(p.beta_v4 == 1.0 / 28.8);
}

TEST_CASE("variance is exactly a tenth of the distance for every patch norm") {
    FeatureRepository repo{V4Params{}};
    testing::Rng rng(2);
    for (int i = 0; i < 2000; ++i) repo.admit(testing::random_patch(rng));
    for (const auto& p : repo.prototypes()) {
        REQUIRE(p.var2 == p.dist_v4 / 10.0);
        REQUIRE(p.beta_v4 == 1.0 / (2.0 * p.var2));
    }
}

TEST_CASE("tiling") {
    const IntegratedOrientationMap iom(94, 94, 1);
    const auto t = tile(iom);
    CHECK(t.rows == 31);
    CHECK(t.cols == 31);
    CHECK(t.tiles.size() == 961);

    IntegratedOrientationMap small(3, 3);
    for (std::size_t i = 0; i < 9; ++i) small.data()[i] = static_cast<std::uint8_t>(i % 5);
    const auto one = tile(small);
    REQUIRE(one.tiles.size() == 1);
    for (std::size_t i = 0; i < 9; ++i) CHECK(one.tiles[0].vector[i] == small.data()[i]);

    CHECK(is_blank(tile(IntegratedOrientationMap(6, 6, 0)).tiles[3].vector));
    CHECK_THROWS_AS(tile(IntegratedOrientationMap(2, 5, 1)), std::invalid_argument);
    CHECK(tile(iom, 1).tiles.size() == 92 * 92);
}

TEST_CASE("admission examples") {
    FeatureRepository repo{V4Params{}};
    auto a = repo.admit(Patch{1, 2, 3});
    CHECK(a.admitted);
    CHECK(a.id == 1);
    a = repo.admit(Patch{1, 2, 3});
    CHECK_FALSE(a.admitted);
    CHECK(a.id == 1);

    FeatureRepository heavy{V4Params{}};
    heavy.admit(kAllFour);
    auto near = kAllFour;
    near[4] = 0;  // distance 4, threshold 14.4
    a = heavy.admit(near);
    CHECK_FALSE(a.admitted);
    CHECK(a.id == 1);
    CHECK(heavy.size() == 1);

    CHECK_THROWS_AS(repo.admit(Patch{}), std::invalid_argument);
}

TEST_CASE("admission uses the nearest prototype's threshold") {
    FeatureRepository repo{V4Params{}};
    repo.admit(Patch{1});        // dist 1, threshold 0.1
    repo.admit(kAllFour);        // threshold 14.4
    // Nearest is prototype 1 at distance 1 > 0.1, although prototype 2 is within 14.4.
    const auto a = repo.admit(Patch{2});
    CHECK(a.admitted);
    CHECK(a.id == 3);
}

TEST_CASE("the admission rule holds over random streams") {
    testing::Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        FeatureRepository repo{V4Params{}};
        for (int i = 0; i < 400; ++i) {
            const auto x = testing::random_patch(rng);
            const auto before = repo.size();
            const auto [nid, nd] = nearest(repo, x);
            const auto a = repo.admit(x);
            if (before == 0) {
                REQUIRE(a.admitted);
                continue;
            }
            const bool expect = std::sqrt(static_cast<double>(nd)) > 0.1 * repo.at(nid).dist_v4;
            REQUIRE(a.admitted == expect);
            REQUIRE(a.id == (expect ? static_cast<int>(before) + 1 : nid));
        }
        REQUIRE(repo.satisfies_admission_invariant());
    }
}

TEST_CASE("rbf response identity and monotonicity") {
    FeatureRepository repo{V4Params{}};
    repo.admit(kAllFour);
    const auto& p = repo.at(1);
    CHECK(rbf_response(kAllFour, p) == 1.0);
    auto x = kAllFour;
    x[0] = 0;
    CHECK(rbf_response(x, p) == doctest::Approx(std::exp(-16.0 / 28.8)).epsilon(1e-15));
    CHECK(rbf_response(x, p) == doctest::Approx(0.5738).epsilon(1e-4));
    x[1] = 0;
    CHECK(rbf_response(x, p) < std::exp(-16.0 / 28.8));
}

TEST_CASE("maps agree with a brute-force recomputation") {
    testing::Rng rng(31);
    const auto iom = random_iom(rng, 94, 0.6);
    FeatureRepository repo{V4Params{}};
    const auto maps = build_maps(iom, repo, true, 1, Exec::serial);
    const auto tiling = tile(iom);
    std::uint64_t tau = 0;
    for (const auto& p : repo.prototypes()) tau += p.counter;
    CHECK(tau == maps.nonblank);

    for (const auto& t : tiling.tiles) {
        const int id = maps.features(t.coord.row, t.coord.col);
        const double act = maps.responses(t.coord.row, t.coord.col);
        if (is_blank(t.vector)) {
            REQUIRE(id == 0);
            REQUIRE(act == 0.0);
            continue;
        }
        int best = 0;
        double best_act = -1;
        for (const auto& p : repo.prototypes()) {
            const double r = rbf_response(t.vector, p);
            if (r > best_act) {
                best = p.id;
                best_act = r;
            }
        }
        REQUIRE(id == best);
        REQUIRE(act == best_act);
        // With growth every tile was admitted or matched, so its own prototype
        // or an identical one answers with exactly 1 only for an exact match.
        REQUIRE((act == 1.0) == (repo.at(id).vector == t.vector));
    }
}

TEST_CASE("maps are deterministic and identical across execution policies") {
    testing::Rng rng(4);
    const auto iom = random_iom(rng, 94, 0.5);
    FeatureRepository a{V4Params{}}, b{V4Params{}};
    const auto ma = build_maps(iom, a, true, 1, Exec::serial);
    const auto mb = build_maps(iom, b, true, 1, Exec::parallel);
    CHECK(ma.features == mb.features);
    CHECK(ma.responses == mb.responses);
    CHECK(a == b);
}

TEST_CASE("without growth the repository keeps its size") {
    testing::Rng rng(8);
    FeatureRepository repo{V4Params{}};
    build_maps(random_iom(rng, 30, 0.3), repo, true, 1);
    const auto n = repo.size();
    const auto maps = build_maps(random_iom(rng, 30, 0.3), repo, false, 2);
    CHECK(repo.size() == n);
    CHECK(maps.admitted == 0);
    FeatureRepository empty{V4Params{}};
    CHECK_THROWS(build_maps(random_iom(rng, 30, 0.3), empty, false));
}

TEST_CASE("global beta shares the first prototype's tuning") {
    V4Params params;
    params.global_beta = true;
    FeatureRepository repo{params};
    repo.admit(Patch{1});
    repo.admit(kAllFour);
    CHECK(repo.at(2).beta_v4 == repo.at(1).beta_v4);
}

TEST_CASE("repository text round trip") {
    testing::Rng rng(12);
    FeatureRepository repo{V4Params{}};
    build_maps(random_iom(rng, 60, 0.4), repo, true, 3);
    const auto text = repo.serialize();
    CHECK(FeatureRepository::parse(text) == repo);
    CHECK(FeatureRepository::parse(text).serialize() == text);
    CHECK_THROWS(FeatureRepository::parse("novelty_fraction 0.1\n2 1 1 1 1 1 1 1 1 1 0 0 0\n"));
    CHECK_THROWS(FeatureRepository::parse("1 9 1 1 1 1 1 1 1 1 0 0 0\n"));
}

TEST_CASE("feature map CSV round trip") {
    FeatureMap m(2, 3, 0);
    m(0, 1) = 17;
    m(1, 2) = 4;
    const auto csv = format_feature_map(m);
    CHECK(csv == "0,17,0\n0,0,4\n");
    CHECK(parse_feature_map(csv) == m);
    CHECK_THROWS(parse_feature_map("1,2\n3\n"));
}

}  // TEST_SUITE
