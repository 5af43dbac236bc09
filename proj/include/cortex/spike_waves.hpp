#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cortex/grid.hpp"

namespace cortex {

/// Feature Map restricted to the tiles that have fired so far; 0 elsewhere.
using CumulativeFeatureMap = FeatureMap;

/// Time-unfolding of a Response Map into waves of spikes.
///
/// Wave 1 holds the tiles with activation exactly 1. Wave k >= 2 holds the
/// not-yet-assigned tiles with activation >= 1 - (k-1) * epsilon. There are
/// ceil(1/epsilon) waves; empty waves are kept so that step k always refers
/// to the same threshold. Tiles with activation 0, or below the last
/// threshold, never fire unless promoted by top-down amplification.
class WaveSchedule {
public:
    /// Throws std::invalid_argument unless 0 < epsilon < 1.
    static WaveSchedule band(const ResponseMap& responses, double epsilon);

    double epsilon() const { return epsilon_; }
    std::size_t band_count() const { return bands_.size(); }
    /// Lower activation edge of wave k (1-based).
    double threshold(std::size_t k) const { return 1.0 - static_cast<double>(k - 1) * epsilon_; }

    /// bands()[k-1] is wave k, in row-major tile order.
    const std::vector<std::vector<TileCoord>>& bands() const { return bands_; }
    /// Wave a tile belongs to, 0 if it is not scheduled.
    int wave_of(TileCoord t) const { return wave_(t.row, t.col); }

    std::size_t current_step() const { return step_; }
    bool fired(TileCoord t) const { return fired_(t.row, t.col) != 0; }
    const Grid<std::uint8_t>& fired_mask() const { return fired_; }
    std::size_t fired_count() const { return fired_count_; }
    /// Scheduled tiles that have not fired yet.
    std::size_t pending_count() const { return scheduled_count_ - fired_count_; }
    bool exhausted() const { return pending_count() == 0; }

    /// Current activations, including any amplification.
    const ResponseMap& activations() const { return activations_; }

    /// Fires the next wave and returns its tiles. Throws std::logic_error when
    /// the schedule is exhausted.
    std::vector<TileCoord> step();

    /// Top-down amplification: each tile's activation becomes min(a + 1, 1)
    /// and the tile joins the next wave to fire. Throws std::invalid_argument
    /// for a fired tile, a tile outside the map, or a tile with zero activation.
    void promote(std::span<const TileCoord> tiles);

private:
    double epsilon_ = 0.1;
    ResponseMap activations_;
    Grid<int> wave_;
    Grid<std::uint8_t> fired_;
    std::vector<std::vector<TileCoord>> bands_;
    std::size_t step_ = 0;
    std::size_t fired_count_ = 0;
    std::size_t scheduled_count_ = 0;
};

inline WaveSchedule band(const ResponseMap& responses, double epsilon) {
    return WaveSchedule::band(responses, epsilon);
}

struct FirstWaveMaps {
    CumulativeFeatureMap features;
    Grid<std::uint8_t> responses;  // 0/1 indicator of wave 1
};

/// Feature Map with every entry whose activation is below 1 removed.
FirstWaveMaps first_wave_maps(const FeatureMap& features, const ResponseMap& responses);

/// fmap entries at fired tiles, 0 elsewhere.
CumulativeFeatureMap cumulative_map(const FeatureMap& features, const WaveSchedule& schedule);

struct WaveAdvance {
    CumulativeFeatureMap cumulative;
    std::vector<TileCoord> wave;
    std::size_t wave_size = 0;
    bool done = false;
};

/// Delivers the next wave and rebuilds the cumulative map.
WaveAdvance advance(WaveSchedule& schedule, const FeatureMap& features);

/// 0/1 grid of the tiles in wave k.
std::string format_wave(const WaveSchedule& schedule, std::size_t k);

}  // namespace cortex
