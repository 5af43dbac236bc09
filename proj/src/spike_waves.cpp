#include "cortex/spike_waves.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace cortex {

WaveSchedule WaveSchedule::band(const ResponseMap& responses, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument(fmt::format("epsilon {} outside (0,1)", epsilon));
    }
    WaveSchedule s;
    s.epsilon_ = epsilon;
    s.activations_ = responses;
    s.wave_ = Grid<int>(responses.rows(), responses.cols(), 0);
    s.fired_ = Grid<std::uint8_t>(responses.rows(), responses.cols(), 0);
    s.bands_.resize(static_cast<std::size_t>(std::ceil(1.0 / epsilon)));

    for (std::size_t r = 0; r < responses.rows(); ++r) {
        for (std::size_t c = 0; c < responses.cols(); ++c) {
            const double a = responses(r, c);
            std::size_t k = 0;
            if (a == 1.0) {
                k = 1;
            } else if (a > 0.0) {
                for (std::size_t j = 2; j <= s.bands_.size(); ++j) {
                    if (a >= s.threshold(j)) {
                        k = j;
                        break;
                    }
                }
            }
            if (k == 0) continue;
            s.wave_(r, c) = static_cast<int>(k);
            s.bands_[k - 1].push_back({r, c});
            ++s.scheduled_count_;
        }
    }
    return s;
}

std::vector<TileCoord> WaveSchedule::step() {
    if (exhausted()) throw std::logic_error("advancing an exhausted wave schedule");
    ++step_;
    const auto& wave = bands_[step_ - 1];
    for (const auto& t : wave) {
        fired_(t.row, t.col) = 1;
        ++fired_count_;
    }
    return wave;
}

void WaveSchedule::promote(std::span<const TileCoord> tiles) {
    if (tiles.empty()) return;
    if (step_ >= bands_.size()) throw std::logic_error("no wave left to carry promoted tiles");
    for (const auto& t : tiles) {
        if (t.row >= activations_.rows() || t.col >= activations_.cols()) {
            throw std::invalid_argument("promoted tile outside the response map");
        }
        if (fired_(t.row, t.col)) {
            throw std::invalid_argument(fmt::format("tile ({},{}) has already fired", t.row, t.col));
        }
        if (!(activations_(t.row, t.col) > 0.0)) {
            throw std::invalid_argument("amplification cannot create activity at a blank tile");
        }
    }
    const auto next = static_cast<int>(step_ + 1);
    for (const auto& t : tiles) {
        auto& a = activations_(t.row, t.col);
        a = std::min(a + 1.0, 1.0);
        const int old = wave_(t.row, t.col);
        if (old == next) continue;
        if (old == 0) {
            ++scheduled_count_;
        } else {
            auto& from = bands_[static_cast<std::size_t>(old - 1)];
            from.erase(std::find(from.begin(), from.end(), t));
        }
        wave_(t.row, t.col) = next;
        auto& to = bands_[static_cast<std::size_t>(next - 1)];
        to.insert(std::lower_bound(to.begin(), to.end(), t), t);
    }
}

FirstWaveMaps first_wave_maps(const FeatureMap& features, const ResponseMap& responses) {
    if (!features.same_shape(responses)) throw std::invalid_argument("feature and response maps misaligned");
    FirstWaveMaps out{FeatureMap(features.rows(), features.cols(), 0),
                      Grid<std::uint8_t>(features.rows(), features.cols(), 0)};
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (responses.data()[i] == 1.0) {
            out.features.data()[i] = features.data()[i];
            out.responses.data()[i] = 1;
        }
    }
    return out;
}

CumulativeFeatureMap cumulative_map(const FeatureMap& features, const WaveSchedule& schedule) {
    const auto& fired = schedule.fired_mask();
    if (!features.same_shape(fired)) throw std::invalid_argument("feature map does not match the schedule");
    CumulativeFeatureMap out(features.rows(), features.cols(), 0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (fired.data()[i]) out.data()[i] = features.data()[i];
    }
    return out;
}

WaveAdvance advance(WaveSchedule& schedule, const FeatureMap& features) {
    WaveAdvance out;
    out.wave = schedule.step();
    out.wave_size = out.wave.size();
    out.cumulative = cumulative_map(features, schedule);
    out.done = schedule.exhausted();
    return out;
}

std::string format_wave(const WaveSchedule& schedule, std::size_t k) {
    if (k == 0 || k > schedule.band_count()) throw std::out_of_range("wave index out of range");
    const auto& fired = schedule.fired_mask();
    std::string out;
    for (std::size_t r = 0; r < fired.rows(); ++r) {
        for (std::size_t c = 0; c < fired.cols(); ++c) {
            if (c) out += ',';
            out += schedule.wave_of({r, c}) == static_cast<int>(k) ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

}  // namespace cortex
