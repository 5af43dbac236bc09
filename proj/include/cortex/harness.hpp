#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cortex/development.hpp"
#include "cortex/it_objects.hpp"
#include "cortex/predictive_coding.hpp"
#include "cortex/retina.hpp"
#include "cortex/spike_waves.hpp"
#include "cortex/v1_filters.hpp"
#include "cortex/v4_features.hpp"

namespace cortex {

/// Every tunable of an experiment. Defaults are the model's reference
/// constants (sigma 2.8 with 7x7 kernels, epsilon 0.1, alpha 0.67, 0.1 fractions).
struct ExperimentConfig {
    double sigma = 2.8;
    double lambda = 3.5;
    double gamma = 0.3;
    std::size_t kernel_size = 7;
    bool zero_mean_kernels = false;
    double blank_fraction = 0.1;

    double novelty_fraction = 0.1;
    double var_fraction = 0.1;
    bool global_beta = false;
    std::size_t tile_stride = 3;

    double epsilon = 0.1;

    double alpha = 0.67;
    int grid_radius = 5;
    bool indicator_metric = false;

    double coherence_threshold = 0.5;
    bool feedback = true;

    bool reset_counters = false;

    std::uint64_t seed = 1;
    int epochs = 1;
    bool resize = false;
    bool parallel = true;
    /// Per-stimulus maps, wave grids and IT response grids in the export.
    bool dump_detail = true;
    /// "catalog", "synth:<shape spec>" or a graymap path.
    std::vector<std::string> stimuli{"catalog"};

    /// Throws std::invalid_argument naming the first out-of-range field.
    void validate() const;

    V1Params v1() const;
    V4Params v4() const;
    ItParams it() const;
    PredictiveParams predictive() const;
    Exec exec() const { return parallel ? Exec::parallel : Exec::serial; }

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Flat "key = value" text, one field per line.
std::string serialize_config(const ExperimentConfig& config);
/// Parses text produced by serialize_config (or a hand-written subset).
ExperimentConfig parse_config(std::string_view text);
/// Applies one key/value pair; throws std::invalid_argument for unknown keys.
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);
/// Keys accepted by set_config_value, in serialization order.
std::vector<std::string> config_keys();

struct Stimulus {
    std::string name;
    Retina retina;
};

/// Expands the stimulus tokens; synthetic stimulus i (1-based) uses seed + i.
std::vector<Stimulus> resolve_stimuli(const ExperimentConfig& config);

enum class Stage { config, load, v1, v4, waves, it, predictive, development, output };
std::string_view stage_name(Stage stage);
/// Process exit code for a failure in `stage` (always nonzero).
int stage_exit_code(Stage stage);

class PipelineError : public std::runtime_error {
public:
    PipelineError(Stage stage, int stimulus, const std::string& what)
        : std::runtime_error(what), stage_(stage), stimulus_(stimulus) {}
    Stage stage() const { return stage_; }
    int stimulus() const { return stimulus_; }

private:
    Stage stage_;
    int stimulus_;
};

enum class OutcomeKind { stored, recognized, novel };
std::string_view outcome_name(OutcomeKind kind);

struct StimulusOutcome {
    int stimulus = 0;  // 1-based over all epochs
    int epoch = 1;
    std::string name;
    OutcomeKind kind = OutcomeKind::stored;
    /// Recognized object, or the id the stimulus was stored under.
    int object_id = 0;
    int hypothesis_id = 0;
    double max = 0.0;
    std::size_t steps = 0;
    bool coherent = false;
    bool terminated_early = false;
    std::size_t nonblank = 0;
    std::size_t admitted = 0;
    std::size_t features_before = 0;
    std::size_t disposed = 0;
    std::size_t features_after = 0;
    std::size_t objects_after = 0;
};

struct WaveRow {
    int stimulus = 0;
    std::size_t step = 0;
    std::size_t wave_size = 0;
    std::size_t cumulative_fired = 0;
};

struct RefinementRow {
    int stimulus = 0;
    std::size_t step = 0;
    int hypothesis_id = 0;
    double max = 0.0;
    std::size_t promoted = 0;
    bool coherent = false;
    std::size_t cumulative_fired = 0;
};

struct RemapRow {
    int stimulus = 0;
    int old_id = 0;
    int new_id = 0;  // 0 if disposed
    int substitute_id = 0;
};

/// Maps and grids kept for export.
struct StimulusDetail {
    int stimulus = 0;
    Retina retina;
    IntegratedOrientationMap iom;
    FeatureMap features;
    ResponseMap responses;
    /// Tiles fired at each executed step.
    std::vector<std::vector<TileCoord>> waves;
    /// grids[step - 1][object - 1]
    std::vector<std::vector<ResponseGrid>> grids;
};

struct RunFailure {
    Stage stage = Stage::config;
    int stimulus = 0;
    std::string message;
};

struct RunReport {
    ExperimentConfig config;
    std::vector<StimulusOutcome> outcomes;
    std::vector<WaveRow> waves;
    std::vector<RefinementRow> refinement;
    SurvivalReport survival;
    std::vector<RemapRow> remaps;
    std::vector<StimulusDetail> details;
    std::string features_snapshot;
    std::string objects_snapshot;
    std::optional<RunFailure> failure;
};

/// The whole model: V1 -> IOM -> V4 maps -> waves -> IT (bootstrap store or
/// predictive coding, then store-if-novel) -> disposal and substitution.
class CortexModel {
public:
    explicit CortexModel(const ExperimentConfig& config);

    /// Processes one stimulus and updates both repositories. Throws PipelineError.
    StimulusOutcome present(const Retina& retina, int stimulus, RunReport* trace = nullptr);

    const FeatureRepository& features() const { return features_; }
    const ObjectRepository& objects() const { return objects_; }
    const SurvivalReport& survival() const { return survival_; }

private:
    ExperimentConfig config_;
    FeatureRepository features_;
    ObjectRepository objects_;
    SurvivalReport survival_;
};

/// Runs every stimulus for every epoch. Errors are captured in report.failure.
RunReport run_experiment(const ExperimentConfig& config);

struct ExportedFile {
    std::string path;  // relative to the output directory
    std::string sha256;
};

/// Rendered export: relative path -> file contents (without the manifest).
std::map<std::string, std::string> render_report(const RunReport& report);

/// Writes render_report() plus manifest.txt. Throws PipelineError(output).
std::vector<ExportedFile> export_report(const RunReport& report, const std::filesystem::path& out_dir);

std::string sha256_hex(std::string_view bytes);

}  // namespace cortex
