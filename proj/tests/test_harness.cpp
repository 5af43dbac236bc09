#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cortex/harness.hpp"
#include "support.hpp"

using namespace cortex;

namespace {

ExperimentConfig small_config(bool feedback = true) {
    ExperimentConfig c;
    c.stimuli = {"synth:hand:scale=1.3:shade=0.8", "synth:cup:angle=10:scale=1.3:shade=0.8",
                 "synth:hand:scale=1.3:shade=0.8"};
    c.feedback = feedback;
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config text round trip and overrides") {
    ExperimentConfig c;
    c.epsilon = 0.25;
    c.feedback = false;
    c.stimuli = {"catalog", "synth:bar:angle=90"};
    c.seed = 42;
    const auto text = serialize_config(c);
    CHECK(parse_config(text) == c);
    CHECK(parse_config("# comment\n\nalpha = 0.5\n").alpha == 0.5);
    set_config_value(c, "grid_radius", "3");
    CHECK(c.grid_radius == 3);
    CHECK_THROWS_AS(set_config_value(c, "nope", "1"), std::invalid_argument);
    CHECK_THROWS_AS(set_config_value(c, "feedback", "maybe"), std::invalid_argument);
    CHECK_THROWS_AS(set_config_value(c, "epochs", "x"), std::invalid_argument);
    CHECK(config_keys().size() == 23);
    CHECK(config_keys().front() == "sigma");
}

TEST_CASE("validation rejects out-of-range fields") {
    auto bad = [](auto edit) {
        ExperimentConfig c;
        edit(c);
        return c;
    };
    CHECK_THROWS(bad([](auto& c) { c.epsilon = 1.0; }).validate());
    CHECK_THROWS(bad([](auto& c) { c.alpha = 0.0; }).validate());
    CHECK_THROWS(bad([](auto& c) { c.kernel_size = 6; }).validate());
    CHECK_THROWS(bad([](auto& c) { c.epochs = 0; }).validate());
    CHECK_THROWS(bad([](auto& c) { c.stimuli.clear(); }).validate());
    CHECK_NOTHROW(ExperimentConfig{}.validate());
    try {
        CortexModel model(bad([](auto& c) { c.epsilon = 2.0; }));
        FAIL("expected a config error");
    } catch (const PipelineError& e) {
        CHECK(e.stage() == Stage::config);
    }
}

TEST_CASE("stage exit codes are distinct and nonzero") {
    CHECK(stage_exit_code(Stage::config) == 2);
    CHECK(stage_exit_code(Stage::output) == 10);
    CHECK(stage_name(Stage::predictive) == "predictive");
}

TEST_CASE("stimulus resolution") {
    ExperimentConfig c;
    CHECK(resolve_stimuli(c).size() == 10);
    c.stimuli = {"synth:bar"};
    const auto a = resolve_stimuli(c);
    REQUIRE(a.size() == 1);
    CHECK(a[0].retina == generate_synthetic(parse_shape_spec("bar"), c.seed + 1));
    c.stimuli = {"definitely_missing.pgm"};
    CHECK_THROWS(resolve_stimuli(c));
}

TEST_CASE("missing stimulus is reported at the load stage") {
    ExperimentConfig c;
    c.stimuli = {"definitely_missing.pgm"};
    const auto r = run_experiment(c);
    REQUIRE(r.failure.has_value());
    CHECK(r.failure->stage == Stage::load);
    CHECK(render_report(r).count("failure.txt") == 1);
}

TEST_CASE("sha256 known answer") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("a run is deterministic and its export is complete") {
    const auto a = run_experiment(small_config());
    const auto b = run_experiment(small_config());
    REQUIRE_FALSE(a.failure.has_value());
    const auto files = render_report(a);
    CHECK(files == render_report(b));
    CHECK(a.outcomes.size() == 3);

    auto serial = small_config();
    serial.parallel = false;
    auto rs = render_report(run_experiment(serial));
    rs.erase("config.txt");
    auto fp = files;
    fp.erase("config.txt");
    CHECK(rs == fp);

    const auto dir = std::filesystem::temp_directory_path() / "cortex_harness_export";
    std::filesystem::remove_all(dir);
    const auto written = export_report(a, dir);
    CHECK(written.size() == files.size());
    std::string manifest;
    for (const auto& f : written) {
        REQUIRE(std::filesystem::exists(dir / f.path));
        CHECK(sha256_hex(slurp(dir / f.path)) == f.sha256);
        manifest += f.sha256 + "  " + f.path + "\n";
    }
    CHECK(slurp(dir / "manifest.txt") == manifest);
    std::filesystem::remove_all(dir);
}

TEST_CASE("trace rows are consistent") {
    const auto r = run_experiment(small_config());
    REQUIRE_FALSE(r.failure.has_value());
    CHECK(r.outcomes.front().kind == OutcomeKind::stored);
    CHECK(r.outcomes.front().object_id == 1);
    std::map<std::pair<int, std::size_t>, std::size_t> fired;
    for (const auto& w : r.waves) fired[{w.stimulus, w.step}] = w.cumulative_fired;
    for (const auto& x : r.refinement) {
        REQUIRE(fired.count({x.stimulus, x.step}) == 1);
        CHECK(fired[{x.stimulus, x.step}] == x.cumulative_fired);
    }
    for (const auto& o : r.outcomes) {
        std::size_t steps = 0, total = 0;
        for (const auto& w : r.waves)
            if (w.stimulus == o.stimulus) {
                ++steps;
                total += w.wave_size;
                CHECK(w.cumulative_fired == total);
            }
        CHECK(steps == o.steps);
        CHECK(o.features_after == o.features_before - o.disposed);
    }
    CHECK(r.survival.rows().size() == 3);
}

TEST_CASE("bootstrap stores the full feature map as object 1") {
    auto c = small_config();
    c.stimuli.resize(1);
    const auto r = run_experiment(c);
    REQUIRE_FALSE(r.failure.has_value());
    REQUIRE(r.details.size() == 1);
    const auto objects = ObjectRepository::parse(r.objects_snapshot);
    REQUIRE(objects.size() == 1);
    const auto& original = r.details[0].features;
    const auto& stored = objects.at(1).map;
    std::map<int, int> to;
    for (const auto& m : r.remaps) to[m.old_id] = m.new_id != 0 ? m.new_id : m.substitute_id;
    for (std::size_t i = 0; i < original.size(); ++i) {
        const int v = original.data()[i];
        REQUIRE(stored.data()[i] == (v == 0 ? 0 : to.at(v)));
    }
    CHECK(r.refinement.empty());
}

TEST_CASE("without feedback the waves follow the banding histogram") {
    const auto r = run_experiment(small_config(false));
    REQUIRE_FALSE(r.failure.has_value());
    for (const auto& d : r.details) {
        const auto bands = band(d.responses, 0.1).bands();
        std::vector<std::size_t> sizes;
        for (const auto& w : r.waves)
            if (w.stimulus == d.stimulus) sizes.push_back(w.wave_size);
        REQUIRE(sizes.size() <= bands.size());
        for (std::size_t k = 0; k < bands.size(); ++k) CHECK((k < sizes.size() ? sizes[k] : 0) == bands[k].size());
    }
    for (const auto& o : r.outcomes) CHECK_FALSE(o.terminated_early);
}

TEST_CASE("snapshots reload bit-identically") {
    CortexModel model(small_config());
    const auto stimuli = resolve_stimuli(small_config());
    int i = 0;
    for (const auto& s : stimuli) model.present(s.retina, ++i);
    const auto ftext = model.features().serialize();
    const auto otext = model.objects().serialize();
    CHECK(FeatureRepository::parse(ftext) == model.features());
    CHECK(ObjectRepository::parse(otext) == model.objects());
    CHECK(FeatureRepository::parse(ftext).serialize() == ftext);
    CHECK(ObjectRepository::parse(otext).serialize() == otext);
}

}  // TEST_SUITE
