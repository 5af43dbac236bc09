#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cortex/grid.hpp"
#include "cortex/kernels.hpp"
#include "cortex/spike_waves.hpp"

namespace cortex {

struct ItParams {
    /// Recognition / novelty threshold on maX.
    double alpha = 0.67;
    /// Offsets (dx, dy) in [-radius, radius]^2, in tile units.
    int radius = 5;
    ItMetric metric = ItMetric::euclidean;

    friend bool operator==(const ItParams&, const ItParams&) = default;
};

/// An IT RBF center: the full Feature Map of an object at storage time.
struct StoredObject {
    int id = 0;
    FeatureMap map;
    /// Sum of squared feature ids (count of nonzero entries under the indicator metric).
    double dist_it = 0.0;
    double beta_it = 0.0;

    friend bool operator==(const StoredObject&, const StoredObject&) = default;
};

/// Throws std::invalid_argument for an all-zero map.
StoredObject make_object(int id, FeatureMap map, ItMetric metric = ItMetric::euclidean);

class ObjectRepository {
public:
    ObjectRepository() = default;
    explicit ObjectRepository(const ItParams& params);

    /// Appends the map as a new object and returns its id.
    int store(const FeatureMap& map);
    /// Replaces an object's map (feature substitution) and recomputes its RBF parameters.
    void replace_map(int id, FeatureMap map);

    const ItParams& params() const { return params_; }
    const std::vector<StoredObject>& objects() const { return objects_; }
    std::size_t size() const { return objects_.size(); }
    bool empty() const { return objects_.empty(); }
    const StoredObject& at(int id) const;

    /// Text: header with alpha/radius/metric, then "object id rows cols" and rows of ids.
    std::string serialize() const;
    static ObjectRepository parse(std::string_view text);

    friend bool operator==(const ObjectRepository&, const ObjectRepository&) = default;

private:
    ItParams params_;
    std::vector<StoredObject> objects_;
};

inline int store_object(ObjectRepository& repo, const FeatureMap& map) { return repo.store(map); }

/// exp(-beta_it * D), D summed over every object coordinate (i, j) against
/// input(i + dy, j + dx), reading out-of-bounds input as 0.
double it_response(const StoredObject& object, const CumulativeFeatureMap& input, int dx, int dy,
                   ItMetric metric = ItMetric::euclidean);

struct ResponseGrid {
    int radius = 0;
    /// values(dy + radius, dx + radius)
    Grid<double> values;
    double max = 0.0;
    int argmax_dx = 0;
    int argmax_dy = 0;

    double at(int dx, int dy) const {
        return values(static_cast<std::size_t>(dy + radius), static_cast<std::size_t>(dx + radius));
    }
};

/// it_response at every offset; maX and its offset, ties to the smallest (dy, dx).
ResponseGrid response_grid(const StoredObject& object, const CumulativeFeatureMap& input, int radius,
                           ItMetric metric = ItMetric::euclidean, Exec exec = Exec::parallel);

enum class Decision { recognized, novel };

/// recognized iff max_response >= alpha. Throws unless 0 < alpha < 1.
Decision recognize(double max_response, double alpha);

std::string format_response_grid(const ResponseGrid& grid);

}  // namespace cortex
