#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cortex/grid.hpp"
#include "cortex/it_objects.hpp"
#include "cortex/kernels.hpp"
#include "cortex/spike_waves.hpp"

namespace cortex {

struct PredictiveParams {
    /// Fraction of the still-unfired nonzero tiles a promotion set must cover
    /// for the hypothesis to count as coherent.
    double coherence_threshold = 0.5;
    /// Top-down amplification on/off.
    bool feedback = true;

    friend bool operator==(const PredictiveParams&, const PredictiveParams&) = default;
};

/// Max-pooled IT response of every stored object to one cumulative map.
struct Hypothesis {
    int object_id = 0;
    double max = 0.0;
    std::vector<ResponseGrid> grids;  // grids[i] belongs to object i + 1

    double max_of(int id) const { return grids[static_cast<std::size_t>(id - 1)].max; }
};

/// Response grids for every object; the hypothesis is the argmax of the
/// per-object maxima (lowest id on ties). Throws for an empty repository.
Hypothesis generate_hypothesis(const ObjectRepository& repo, const CumulativeFeatureMap& input,
                               Exec exec = Exec::parallel);

inline Hypothesis initial_hypothesis(const ObjectRepository& repo, const CumulativeFeatureMap& first_wave,
                                     Exec exec = Exec::parallel) {
    return generate_hypothesis(repo, first_wave, exec);
}

/// Tiles whose feature equals the hypothesis' feature (nonzero) and that have
/// not fired yet.
std::vector<TileCoord> match_identical(const FeatureMap& stimulus, const FeatureMap& hypothesis,
                                       const Grid<std::uint8_t>& fired);

/// min(AL + 1, 1).
inline double amplified_activation(double activation) {
    return activation + 1.0 > 1.0 ? 1.0 : activation + 1.0;
}

/// Raises the promoted tiles to activation 1 and moves them into the next wave.
void amplify(WaveSchedule& schedule, std::span<const TileCoord> promotion);

bool coherence(std::size_t promoted, std::size_t unfired_nonzero, double threshold);

/// Tiles with a nonzero feature that have not fired yet.
std::size_t unfired_nonzero(const FeatureMap& stimulus, const WaveSchedule& schedule);

/// One row of the refinement trace.
struct RefinementStep {
    std::size_t step = 0;
    /// Tiles delivered at this step.
    std::vector<TileCoord> wave;
    std::size_t wave_size = 0;
    std::size_t cumulative_fired = 0;
    int hypothesis_id = 0;
    double max = 0.0;
    /// Promotion computed against this step's hypothesis (0 on the last step).
    std::size_t promoted = 0;
    bool coherent = false;
    Hypothesis hypothesis;
};

struct HypothesisState {
    int hypothesis_id = 0;
    double max = 0.0;
    std::vector<RefinementStep> history;
    /// promoted[k] was computed after step k + 1.
    std::vector<std::vector<TileCoord>> promoted;
    bool coherent = false;
    bool terminated_early = false;
};

struct RefinementOutcome {
    Decision decision = Decision::novel;
    int object_id = 0;
    double max = 0.0;
    std::size_t steps = 0;
};

/// Delivers the first wave and forms the initial hypothesis.
HypothesisState begin_predictive_coding(const ObjectRepository& repo, WaveSchedule& schedule,
                                        const FeatureMap& stimulus, Exec exec = Exec::parallel);

/// Iterative refinement: match, amplify, deliver the next wave, regenerate the
/// hypothesis. Stops early once a coherent promotion is followed by
/// maX >= alpha; otherwise runs until every scheduled tile has fired.
RefinementOutcome refine(HypothesisState& state, WaveSchedule& schedule, const FeatureMap& stimulus,
                         const ObjectRepository& repo, const PredictiveParams& params,
                         Exec exec = Exec::parallel);

}  // namespace cortex
