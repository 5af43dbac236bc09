#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cortex/grid.hpp"
#include "cortex/kernels.hpp"
#include "cortex/v1_filters.hpp"

namespace cortex {

inline constexpr std::size_t kPatchSide = 3;

/// Squared norm of a patch: the sum of its squared orientation codes.
int patch_norm(const Patch& vector);
bool is_blank(const Patch& vector);

/// One dictionary entry (a V4 RBF center).
struct Prototype {
    int id = 0;
    Patch vector{};
    double dist_v4 = 0.0;
    double var2 = 0.0;
    double beta_v4 = 0.0;
    /// Best-match count (tau).
    std::uint64_t counter = 0;
    /// Stimulus index at which the prototype was admitted.
    int birth_stimulus = 0;
    /// Disposal rounds survived.
    int survivals = 0;

    friend bool operator==(const Prototype&, const Prototype&) = default;
};

struct V4Params {
    double novelty_fraction = 0.1;
    double var_fraction = 0.1;
    /// Use the first prototype's beta for every prototype.
    bool global_beta = false;
    std::size_t stride = kPatchSide;

    friend bool operator==(const V4Params&, const V4Params&) = default;
};

/// The growing V4 dictionary. Prototypes are only appended by admit(); the
/// development stage is the only place that removes and renumbers them.
class FeatureRepository {
public:
    struct Admission {
        int id = 0;
        bool admitted = false;
    };

    FeatureRepository() = default;
    explicit FeatureRepository(const V4Params& params);

    /// Rebuilds a repository from stored prototypes. Ids must be dense 1..F in
    /// order; dist/var/beta are recomputed from the vectors.
    static FeatureRepository from_prototypes(const V4Params& params, std::vector<Prototype> protos);

    /// Inserts `vector` when it lies farther than novelty_fraction * dist_v4
    /// from its nearest stored prototype (lowest id on ties), using that
    /// prototype's dist_v4. Otherwise returns the nearest prototype's id.
    /// Throws std::invalid_argument for a blank vector.
    Admission admit(const Patch& vector, int birth_stimulus = 0);

    const V4Params& params() const { return params_; }
    const std::vector<Prototype>& prototypes() const { return protos_; }
    std::size_t size() const { return protos_.size(); }
    bool empty() const { return protos_.empty(); }

    /// 1-based lookup; throws std::out_of_range.
    const Prototype& at(int id) const;

    void add_usage(int id, std::uint64_t count);
    void reset_counters();

    /// Structure-of-arrays view for the matching kernels. Valid until the
    /// repository is next modified.
    kernels::PrototypeView view() const { return {vectors_, betas_}; }

    /// Replays the admission rule: every prototype is distant enough from
    /// the nearest prototype stored before it.
    bool satisfies_admission_invariant() const;

    /// Flat text table: id, nine codes, tau, birth stimulus, survivals.
    std::string serialize() const;
    static FeatureRepository parse(std::string_view text);

    friend bool operator==(const FeatureRepository& a, const FeatureRepository& b) {
        return a.params_ == b.params_ && a.protos_ == b.protos_;
    }

private:
    Prototype make(int id, const Patch& vector) const;
    bool distant_from(const Patch& vector, const Prototype& p) const;
    void refresh();

    V4Params params_;
    std::vector<Prototype> protos_;
    std::vector<Patch> vectors_;
    std::vector<double> betas_;
};

/// exp(-beta_v4 * |x - p|^2).
double rbf_response(const Patch& x, const Prototype& p);

struct Tile {
    TileCoord coord;
    Patch vector{};
};

struct Tiling {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Tile> tiles;  // row-major
};

/// 3x3 receptive fields at the given stride; trailing rows/cols that do not
/// fill a whole patch are dropped. Throws if the IOM is smaller than 3x3.
Tiling tile(const IntegratedOrientationMap& iom, std::size_t stride = kPatchSide);

struct V4Maps {
    FeatureMap features;
    ResponseMap responses;
    std::size_t admitted = 0;
    std::size_t nonblank = 0;
};

/// Feature Map and Response Map of one stimulus. With `grow`, every nonblank
/// tile first goes through admit() in row-major order. Each best match
/// increments that prototype's counter.
V4Maps build_maps(const IntegratedOrientationMap& iom, FeatureRepository& repo, bool grow,
                  int stimulus_index = 0, Exec exec = Exec::parallel);

/// CSV grid, one row per line.
std::string format_feature_map(const FeatureMap& map);
std::string format_response_map(const ResponseMap& map);
FeatureMap parse_feature_map(std::string_view csv);

}  // namespace cortex
