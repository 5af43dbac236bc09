#include "cortex/harness.hpp"

#include <array>
#include <fstream>
#include <functional>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "text.hpp"

namespace cortex {

// --- config -----------------------------------------------------------------

namespace {

bool parse_bool(std::string_view v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw std::invalid_argument(fmt::format("invalid boolean '{}'", v));
}

template <typename T>
T parse_value(std::string_view v) {
    try {
        return text::parse_number<T>(v);
    } catch (const std::runtime_error& e) {
        throw std::invalid_argument(e.what());
    }
}

struct ConfigField {
    std::string_view key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, std::string_view)> set;
};

template <typename T>
ConfigField number_field(std::string_view key, T ExperimentConfig::*member) {
    return {key, [member](const ExperimentConfig& c) { return fmt::format("{}", c.*member); },
            [member](ExperimentConfig& c, std::string_view v) { c.*member = parse_value<T>(v); }};
}

ConfigField bool_field(std::string_view key, bool ExperimentConfig::*member) {
    return {key, [member](const ExperimentConfig& c) { return std::string(c.*member ? "true" : "false"); },
            [member](ExperimentConfig& c, std::string_view v) { c.*member = parse_bool(v); }};
}

const std::vector<ConfigField>& config_fields() {
    static const std::vector<ConfigField> fields{
        number_field("sigma", &ExperimentConfig::sigma),
        number_field("lambda", &ExperimentConfig::lambda),
        number_field("gamma", &ExperimentConfig::gamma),
        number_field("kernel_size", &ExperimentConfig::kernel_size),
        bool_field("zero_mean_kernels", &ExperimentConfig::zero_mean_kernels),
        number_field("blank_fraction", &ExperimentConfig::blank_fraction),
        number_field("novelty_fraction", &ExperimentConfig::novelty_fraction),
        number_field("var_fraction", &ExperimentConfig::var_fraction),
        bool_field("global_beta", &ExperimentConfig::global_beta),
        number_field("tile_stride", &ExperimentConfig::tile_stride),
        number_field("epsilon", &ExperimentConfig::epsilon),
        number_field("alpha", &ExperimentConfig::alpha),
        number_field("grid_radius", &ExperimentConfig::grid_radius),
        bool_field("indicator_metric", &ExperimentConfig::indicator_metric),
        number_field("coherence_threshold", &ExperimentConfig::coherence_threshold),
        bool_field("feedback", &ExperimentConfig::feedback),
        bool_field("reset_counters", &ExperimentConfig::reset_counters),
        number_field("seed", &ExperimentConfig::seed),
        number_field("epochs", &ExperimentConfig::epochs),
        bool_field("resize", &ExperimentConfig::resize),
        bool_field("parallel", &ExperimentConfig::parallel),
        bool_field("dump_detail", &ExperimentConfig::dump_detail),
        {"stimuli",
         [](const ExperimentConfig& c) { return fmt::format("{}", fmt::join(c.stimuli, ",")); },
         [](ExperimentConfig& c, std::string_view v) {
             c.stimuli.clear();
             for (auto token : text::split(v, ',')) {
                 if (!token.empty()) c.stimuli.emplace_back(token);
             }
         }},
    };
    return fields;
}

}  // namespace

void ExperimentConfig::validate() const {
    auto require = [](bool ok, std::string_view what) {
        if (!ok) throw std::invalid_argument(fmt::format("config: {}", what));
    };
    require(sigma > 0.0, "sigma must be positive");
    require(lambda > 0.0, "lambda must be positive");
    require(kernel_size % 2 == 1, "kernel_size must be odd");
    require(blank_fraction >= 0.0 && blank_fraction <= 1.0, "blank_fraction must lie in [0,1]");
    require(novelty_fraction >= 0.0, "novelty_fraction must be >= 0");
    require(var_fraction > 0.0, "var_fraction must be positive");
    require(tile_stride >= 1, "tile_stride must be >= 1");
    require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0,1)");
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    require(grid_radius >= 0, "grid_radius must be >= 0");
    require(coherence_threshold >= 0.0 && coherence_threshold <= 1.0, "coherence_threshold must lie in [0,1]");
    require(epochs >= 1, "epochs must be >= 1");
    require(!stimuli.empty(), "no stimuli");
}

V1Params ExperimentConfig::v1() const {
    return {GaborParams{sigma, lambda, gamma, kernel_size, zero_mean_kernels}, blank_fraction};
}

V4Params ExperimentConfig::v4() const { return {novelty_fraction, var_fraction, global_beta, tile_stride}; }

ItParams ExperimentConfig::it() const {
    return {alpha, grid_radius, indicator_metric ? ItMetric::indicator : ItMetric::euclidean};
}

PredictiveParams ExperimentConfig::predictive() const { return {coherence_threshold, feedback}; }

std::string serialize_config(const ExperimentConfig& config) {
    std::string out;
    for (const auto& f : config_fields()) out += fmt::format("{} = {}\n", f.key, f.get(config));
    return out;
}

void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
    for (const auto& f : config_fields()) {
        if (f.key == key) {
            f.set(config, text::trim(value));
            return;
        }
    }
    throw std::invalid_argument(fmt::format("unknown config key '{}'", key));
}

ExperimentConfig parse_config(std::string_view input) {
    ExperimentConfig config;
    for (auto line : text::content_lines(input)) {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw std::invalid_argument(fmt::format("config line '{}' lacks '='", line));
        set_config_value(config, text::trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    return config;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& f : config_fields()) keys.emplace_back(f.key);
    return keys;
}

std::vector<Stimulus> resolve_stimuli(const ExperimentConfig& config) {
    std::vector<Stimulus> out;
    auto add_synthetic = [&](const ShapeSpec& spec) {
        const auto seed = config.seed + out.size() + 1;
        out.push_back({format_shape_spec(spec), generate_synthetic(spec, seed)});
    };
    const LoadOptions load{Dimensions{}, config.resize, config.kernel_size};
    for (const auto& token : config.stimuli) {
        if (token == "catalog") {
            for (const auto& spec : synthetic_catalog()) add_synthetic(spec);
        } else if (token.starts_with("synth:")) {
            add_synthetic(parse_shape_spec(std::string_view(token).substr(6)));
        } else {
            out.push_back({token, load_stimulus(token, load)});
        }
    }
    return out;
}

// --- stages -----------------------------------------------------------------

std::string_view stage_name(Stage stage) {
    constexpr std::array<std::string_view, 9> names{"config", "load", "v1", "v4", "waves",
                                                     "it", "predictive", "development", "output"};
    return names[static_cast<std::size_t>(stage)];
}

int stage_exit_code(Stage stage) { return 2 + static_cast<int>(stage); }

std::string_view outcome_name(OutcomeKind kind) {
    switch (kind) {
        case OutcomeKind::stored: return "stored";
        case OutcomeKind::recognized: return "recognized";
        case OutcomeKind::novel: return "novel";
    }
    return "?";
}

namespace {

template <typename F>
auto at_stage(Stage stage, int stimulus, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(stage, stimulus, e.what());
    }
}

bool all_zero(const FeatureMap& map) {
    for (int v : map.data()) {
        if (v != 0) return false;
    }
    return true;
}

}  // namespace

// --- model ------------------------------------------------------------------

namespace {

const ExperimentConfig& validated(const ExperimentConfig& config) {
    at_stage(Stage::config, 0, [&] { config.validate(); });
    return config;
}

}  // namespace

CortexModel::CortexModel(const ExperimentConfig& config)
    : config_(validated(config)), features_(config.v4()), objects_(config.it()) {}

StimulusOutcome CortexModel::present(const Retina& retina, int stimulus, RunReport* trace) {
    const auto exec = config_.exec();
    StimulusOutcome out;
    out.stimulus = stimulus;

    const auto iom = at_stage(Stage::v1, stimulus, [&] { return integrate(retina, config_.v1(), exec); });
    const auto maps = at_stage(Stage::v4, stimulus, [&] { return build_maps(iom, features_, true, stimulus, exec); });
    out.nonblank = maps.nonblank;
    out.admitted = maps.admitted;
    auto schedule = at_stage(Stage::waves, stimulus, [&] { return band(maps.responses, config_.epsilon); });

    StimulusDetail detail;
    const bool keep_detail = trace && config_.dump_detail;
    auto add_wave = [&](std::size_t step, const std::vector<TileCoord>& wave, std::size_t fired) {
        if (trace) trace->waves.push_back({stimulus, step, wave.size(), fired});
        if (keep_detail) detail.waves.push_back(wave);
    };

    if (objects_.empty()) {
        // Bootstrap: nothing to predict from, so the stimulus becomes object 1.
        out.kind = OutcomeKind::stored;
        if (!all_zero(maps.features)) {
            out.object_id = at_stage(Stage::it, stimulus, [&] { return objects_.store(maps.features); });
        }
        // Replay the waves against the new object for the trace.
        at_stage(Stage::waves, stimulus, [&] {
            while (!schedule.exhausted()) {
                auto delivered = advance(schedule, maps.features);
                add_wave(schedule.current_step(), delivered.wave, schedule.fired_count());
                if (keep_detail && !objects_.empty()) {
                    detail.grids.push_back({response_grid(objects_.at(1), delivered.cumulative,
                                                          config_.grid_radius, objects_.params().metric, exec)});
                }
            }
        });
        out.steps = schedule.current_step();
        out.max = 1.0;
        out.hypothesis_id = out.object_id;
    } else {
        auto state = at_stage(Stage::predictive, stimulus,
                              [&] { return begin_predictive_coding(objects_, schedule, maps.features, exec); });
        const auto result = at_stage(Stage::predictive, stimulus, [&] {
            return refine(state, schedule, maps.features, objects_, config_.predictive(), exec);
        });
        for (const auto& s : state.history) {
            add_wave(s.step, s.wave, s.cumulative_fired);
            if (trace) {
                trace->refinement.push_back(
                    {stimulus, s.step, s.hypothesis_id, s.max, s.promoted, s.coherent, s.cumulative_fired});
            }
            if (keep_detail) detail.grids.push_back(s.hypothesis.grids);
        }
        out.hypothesis_id = result.object_id;
        out.max = result.max;
        out.steps = result.steps;
        out.coherent = state.coherent;
        out.terminated_early = state.terminated_early;
        if (result.decision == Decision::recognized) {
            out.kind = OutcomeKind::recognized;
            out.object_id = result.object_id;
        } else {
            out.kind = OutcomeKind::novel;
            if (!all_zero(maps.features)) {
                out.object_id = at_stage(Stage::it, stimulus, [&] { return objects_.store(maps.features); });
            }
        }
    }

    at_stage(Stage::development, stimulus, [&] {
        out.features_before = features_.size();
        const auto ledger = ledger_of(features_);
        if (features_.empty() || ledger.total() == 0) {
            survival_.record_idle(stimulus, features_);
            return;
        }
        const auto disposal = dispose(features_, ledger, config_.reset_counters);
        if (!objects_.empty()) substitute(objects_, disposal, features_);
        survival_.record(stimulus, disposal, features_);
        out.disposed = disposal.disposed.size();
        if (trace) {
            for (std::size_t old = 1; old < disposal.remap.size(); ++old) {
                RemapRow row{stimulus, static_cast<int>(old), disposal.remap[old], 0};
                if (row.new_id == 0) {
                    // Same nearest-vector rule substitute() applies.
                    int best_sq = -1;
                    for (const auto& p : features_.prototypes()) {
                        const int sq = kernels::squared_distance(disposal.previous[old - 1].vector, p.vector);
                        if (best_sq < 0 || sq < best_sq) {
                            best_sq = sq;
                            row.substitute_id = p.id;
                        }
                    }
                }
                trace->remaps.push_back(row);
            }
        }
    });
    out.features_after = features_.size();
    out.objects_after = objects_.size();

    if (keep_detail) {
        detail.stimulus = stimulus;
        detail.retina = retina;
        detail.iom = iom;
        detail.features = maps.features;
        detail.responses = maps.responses;
        trace->details.push_back(std::move(detail));
    }
    return out;
}

RunReport run_experiment(const ExperimentConfig& config) {
    RunReport report;
    report.config = config;
    try {
        CortexModel model(config);
        const auto stimuli = at_stage(Stage::load, 0, [&] { return resolve_stimuli(config); });
        int index = 0;
        for (int epoch = 1; epoch <= config.epochs; ++epoch) {
            for (const auto& s : stimuli) {
                ++index;
                auto outcome = model.present(s.retina, index, &report);
                outcome.epoch = epoch;
                outcome.name = s.name;
                report.outcomes.push_back(std::move(outcome));
            }
        }
        report.survival = model.survival();
        report.features_snapshot = model.features().serialize();
        report.objects_snapshot = model.objects().serialize();
    } catch (const PipelineError& e) {
        report.failure = RunFailure{e.stage(), e.stimulus(), e.what()};
    }
    return report;
}

// --- export -----------------------------------------------------------------

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::string hex;
    for (unsigned i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

namespace {

std::string outcomes_csv(const RunReport& r) {
    std::string out =
        "stimulus,epoch,name,outcome,object,hypothesis,max,steps,coherent,terminated_early,nonblank,admitted,"
        "features_before,disposed,features_after,objects_after\n";
    for (const auto& o : r.outcomes) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", o.stimulus, o.epoch, o.name,
                           outcome_name(o.kind), o.object_id, o.hypothesis_id, o.max, o.steps, int{o.coherent},
                           int{o.terminated_early}, o.nonblank, o.admitted, o.features_before, o.disposed,
                           o.features_after, o.objects_after);
    }
    return out;
}

std::string waves_csv(const RunReport& r) {
    std::string out = "stimulus,step,wave_size,cumulative_fired\n";
    for (const auto& w : r.waves) out += fmt::format("{},{},{},{}\n", w.stimulus, w.step, w.wave_size, w.cumulative_fired);
    return out;
}

std::string refinement_csv(const RunReport& r) {
    std::string out = "stimulus,step,hypothesis,max,promoted,coherent,cumulative_fired\n";
    for (const auto& x : r.refinement) {
        out += fmt::format("{},{},{},{},{},{},{}\n", x.stimulus, x.step, x.hypothesis_id, x.max, x.promoted,
                           int{x.coherent}, x.cumulative_fired);
    }
    return out;
}

std::string remap_csv(const RunReport& r) {
    std::string out = "stimulus,old_id,new_id,substitute_id\n";
    for (const auto& m : r.remaps) out += fmt::format("{},{},{},{}\n", m.stimulus, m.old_id, m.new_id, m.substitute_id);
    return out;
}

std::string tiles_grid(const std::vector<TileCoord>& tiles, std::size_t rows, std::size_t cols) {
    Grid<int> g(rows, cols, 0);
    for (const auto& t : tiles) g(t.row, t.col) = 1;
    return format_feature_map(g);
}

}  // namespace

std::map<std::string, std::string> render_report(const RunReport& report) {
    std::map<std::string, std::string> files;
    files["config.txt"] = serialize_config(report.config);
    files["outcomes.csv"] = outcomes_csv(report);
    files["waves.csv"] = waves_csv(report);
    files["refinement.csv"] = refinement_csv(report);
    files["survival.csv"] = report.survival.to_csv();
    files["remap.csv"] = remap_csv(report);
    files["features.txt"] = report.features_snapshot;
    files["objects.txt"] = report.objects_snapshot;
    if (report.failure) {
        files["failure.txt"] = fmt::format("stage {}\nstimulus {}\nmessage {}\n", stage_name(report.failure->stage),
                                           report.failure->stimulus, report.failure->message);
    }
    for (const auto& d : report.details) {
        const auto dir = fmt::format("stimuli/s{:03}/", d.stimulus);
        files[dir + "retina.pgm"] = encode_pgm(to_gray_image(d.retina), PgmEncoding::binary);
        files[dir + "iom.txt"] = format_iom(d.iom);
        files[dir + "features.csv"] = format_feature_map(d.features);
        files[dir + "responses.csv"] = format_response_map(d.responses);
        for (std::size_t k = 0; k < d.waves.size(); ++k) {
            files[dir + fmt::format("wave_{:02}.csv", k + 1)] =
                tiles_grid(d.waves[k], d.features.rows(), d.features.cols());
        }
        for (std::size_t k = 0; k < d.grids.size(); ++k) {
            for (std::size_t o = 0; o < d.grids[k].size(); ++o) {
                files[dir + fmt::format("grid_obj{:02}_step{:02}.csv", o + 1, k + 1)] =
                    format_response_grid(d.grids[k][o]);
            }
        }
    }
    return files;
}

std::vector<ExportedFile> export_report(const RunReport& report, const std::filesystem::path& out_dir) {
    return at_stage(Stage::output, 0, [&] {
        std::vector<ExportedFile> written;
        std::string manifest;
        for (const auto& [rel, content] : render_report(report)) {
            const auto path = out_dir / rel;
            std::filesystem::create_directories(path.parent_path());
            std::ofstream out(path, std::ios::binary);
            out << content;
            if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
            written.push_back({rel, sha256_hex(content)});
            manifest += fmt::format("{}  {}\n", written.back().sha256, rel);
        }
        std::ofstream out(out_dir / "manifest.txt", std::ios::binary);
        out << manifest;
        if (!out) throw std::runtime_error("cannot write manifest.txt");
        return written;
    });
}

}  // namespace cortex
