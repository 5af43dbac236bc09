#include "cortex/predictive_coding.hpp"

#include <stdexcept>

namespace cortex {

Hypothesis generate_hypothesis(const ObjectRepository& repo, const CumulativeFeatureMap& input, Exec exec) {
    if (repo.empty()) throw std::invalid_argument("no stored objects to form a hypothesis from");
    const auto& params = repo.params();
    Hypothesis h;
    h.grids.reserve(repo.size());
    for (const auto& obj : repo.objects()) {
        h.grids.push_back(response_grid(obj, input, params.radius, params.metric, exec));
        const double m = h.grids.back().max;
        if (h.object_id == 0 || m > h.max) {
            h.object_id = obj.id;
            h.max = m;
        }
    }
    return h;
}

std::vector<TileCoord> match_identical(const FeatureMap& stimulus, const FeatureMap& hypothesis,
                                       const Grid<std::uint8_t>& fired) {
    if (!stimulus.same_shape(hypothesis) || !stimulus.same_shape(fired)) {
        throw std::invalid_argument("match_identical: maps are misaligned");
    }
    std::vector<TileCoord> out;
    for (std::size_t r = 0; r < stimulus.rows(); ++r) {
        for (std::size_t c = 0; c < stimulus.cols(); ++c) {
            const int f = stimulus(r, c);
            if (f != 0 && f == hypothesis(r, c) && !fired(r, c)) out.push_back({r, c});
        }
    }
    return out;
}

void amplify(WaveSchedule& schedule, std::span<const TileCoord> promotion) { schedule.promote(promotion); }

bool coherence(std::size_t promoted, std::size_t unfired, double threshold) {
    return unfired > 0 && static_cast<double>(promoted) / static_cast<double>(unfired) >= threshold;
}

std::size_t unfired_nonzero(const FeatureMap& stimulus, const WaveSchedule& schedule) {
    const auto& fired = schedule.fired_mask();
    std::size_t n = 0;
    for (std::size_t i = 0; i < stimulus.size(); ++i) {
        if (stimulus.data()[i] != 0 && !fired.data()[i]) ++n;
    }
    return n;
}

namespace {

RefinementStep make_step(const WaveSchedule& schedule, std::vector<TileCoord> wave, Hypothesis h) {
    RefinementStep s;
    s.step = schedule.current_step();
    s.wave_size = wave.size();
    s.wave = std::move(wave);
    s.cumulative_fired = schedule.fired_count();
    s.hypothesis_id = h.object_id;
    s.max = h.max;
    s.hypothesis = std::move(h);
    return s;
}

}  // namespace

HypothesisState begin_predictive_coding(const ObjectRepository& repo, WaveSchedule& schedule,
                                        const FeatureMap& stimulus, Exec exec) {
    if (repo.empty()) throw std::invalid_argument("predictive coding needs at least one stored object");
    if (schedule.current_step() != 0) throw std::logic_error("predictive coding must start from wave 1");
    HypothesisState state;
    std::vector<TileCoord> wave;
    if (!schedule.exhausted()) wave = schedule.step();
    auto h = generate_hypothesis(repo, cumulative_map(stimulus, schedule), exec);
    state.hypothesis_id = h.object_id;
    state.max = h.max;
    state.history.push_back(make_step(schedule, std::move(wave), std::move(h)));
    return state;
}

RefinementOutcome refine(HypothesisState& state, WaveSchedule& schedule, const FeatureMap& stimulus,
                         const ObjectRepository& repo, const PredictiveParams& params, Exec exec) {
    if (state.history.empty()) throw std::logic_error("refine called before the initial hypothesis");
    const double alpha = repo.params().alpha;

    while (!schedule.exhausted()) {
        auto& current = state.history.back();
        std::vector<TileCoord> promotion;
        if (params.feedback) {
            promotion = match_identical(stimulus, repo.at(current.hypothesis_id).map, schedule.fired_mask());
        }
        const bool coherent = coherence(promotion.size(), unfired_nonzero(stimulus, schedule),
                                        params.coherence_threshold);
        current.promoted = promotion.size();
        current.coherent = coherent;
        state.coherent = state.coherent || coherent;
        amplify(schedule, promotion);
        state.promoted.push_back(std::move(promotion));

        auto delivered = advance(schedule, stimulus);
        auto h = generate_hypothesis(repo, delivered.cumulative, exec);
        state.hypothesis_id = h.object_id;
        state.max = h.max;
        state.history.push_back(make_step(schedule, std::move(delivered.wave), std::move(h)));

        if (coherent && state.max >= alpha) {
            state.terminated_early = true;
            break;
        }
    }

    RefinementOutcome out;
    out.decision = recognize(state.max, alpha);
    out.object_id = state.hypothesis_id;
    out.max = state.max;
    out.steps = schedule.current_step();
    return out;
}

}  // namespace cortex
