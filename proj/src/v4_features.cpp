#include "cortex/v4_features.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "text.hpp"

namespace cortex {

int patch_norm(const Patch& vector) {
    int sum = 0;
    for (auto v : vector) sum += int{v} * int{v};
    return sum;
}

bool is_blank(const Patch& vector) {
    for (auto v : vector) {
        if (v != 0) return false;
    }
    return true;
}

double rbf_response(const Patch& x, const Prototype& p) {
    return std::exp(-p.beta_v4 * kernels::squared_distance(x, p.vector));
}

// --- FeatureRepository ------------------------------------------------------

FeatureRepository::FeatureRepository(const V4Params& params) : params_(params) {
    if (!(params.novelty_fraction >= 0.0)) throw std::invalid_argument("novelty_fraction < 0");
    if (!(params.var_fraction > 0.0)) throw std::invalid_argument("var_fraction must be positive");
    if (params.stride == 0) throw std::invalid_argument("tiling stride must be positive");
}

Prototype FeatureRepository::make(int id, const Patch& vector) const {
    Prototype p;
    p.id = id;
    p.vector = vector;
    p.dist_v4 = patch_norm(vector);
    // Divide by the reciprocal so the default 0.1 reproduces dist/10 exactly.
    p.var2 = p.dist_v4 / (1.0 / params_.var_fraction);
    p.beta_v4 = 1.0 / (2.0 * p.var2);
    return p;
}

void FeatureRepository::refresh() {
    if (params_.global_beta && !protos_.empty()) {
        const auto ref = make(protos_.front().id, protos_.front().vector);
        for (auto& p : protos_) {
            p.var2 = ref.var2;
            p.beta_v4 = ref.beta_v4;
        }
    }
    vectors_.clear();
    betas_.clear();
    for (const auto& p : protos_) {
        vectors_.push_back(p.vector);
        betas_.push_back(p.beta_v4);
    }
}

FeatureRepository FeatureRepository::from_prototypes(const V4Params& params,
                                                     std::vector<Prototype> protos) {
    FeatureRepository repo(params);
    repo.protos_.reserve(protos.size());
    for (std::size_t i = 0; i < protos.size(); ++i) {
        const auto& src = protos[i];
        if (src.id != static_cast<int>(i + 1)) {
            throw std::invalid_argument(fmt::format("prototype ids must be dense: got {} at {}", src.id, i + 1));
        }
        if (is_blank(src.vector)) throw std::invalid_argument("blank prototype");
        auto p = repo.make(src.id, src.vector);
        p.counter = src.counter;
        p.birth_stimulus = src.birth_stimulus;
        p.survivals = src.survivals;
        repo.protos_.push_back(p);
    }
    repo.refresh();
    return repo;
}

FeatureRepository::Admission FeatureRepository::admit(const Patch& vector, int birth_stimulus) {
    if (is_blank(vector)) throw std::invalid_argument("blank tiles cannot be admitted");
    int nearest = 0;
    int nearest_sq = 0;
    for (const auto& p : protos_) {
        const int sq = kernels::squared_distance(vector, p.vector);
        if (nearest == 0 || sq < nearest_sq) {
            nearest = p.id;
            nearest_sq = sq;
        }
    }
    if (nearest != 0 && !distant_from(vector, protos_[static_cast<std::size_t>(nearest - 1)])) return {nearest, false};

    auto p = make(static_cast<int>(protos_.size() + 1), vector);
    p.birth_stimulus = birth_stimulus;
    protos_.push_back(p);
    if (params_.global_beta && protos_.size() > 1) {
        protos_.back().var2 = protos_.front().var2;
        protos_.back().beta_v4 = protos_.front().beta_v4;
    }
    vectors_.push_back(protos_.back().vector);
    betas_.push_back(protos_.back().beta_v4);
    return {p.id, true};
}

const Prototype& FeatureRepository::at(int id) const {
    if (id < 1 || static_cast<std::size_t>(id) > protos_.size()) {
        throw std::out_of_range(fmt::format("no prototype with id {}", id));
    }
    return protos_[static_cast<std::size_t>(id - 1)];
}

void FeatureRepository::add_usage(int id, std::uint64_t count) {
    at(id);
    protos_[static_cast<std::size_t>(id - 1)].counter += count;
}

void FeatureRepository::reset_counters() {
    for (auto& p : protos_) p.counter = 0;
}

bool FeatureRepository::distant_from(const Patch& vector, const Prototype& p) const {
    const double d = std::sqrt(static_cast<double>(kernels::squared_distance(vector, p.vector)));
    return d > params_.novelty_fraction * p.dist_v4;
}

bool FeatureRepository::satisfies_admission_invariant() const {
    for (std::size_t j = 1; j < protos_.size(); ++j) {
        std::size_t nearest = 0;
        int nearest_sq = kernels::squared_distance(protos_[0].vector, protos_[j].vector);
        for (std::size_t i = 1; i < j; ++i) {
            const int sq = kernels::squared_distance(protos_[i].vector, protos_[j].vector);
            if (sq < nearest_sq) {
                nearest = i;
                nearest_sq = sq;
            }
        }
        if (!distant_from(protos_[j].vector, protos_[nearest])) return false;
    }
    return true;
}

std::string FeatureRepository::serialize() const {
    std::string out = "# feature repository\n";
    out += fmt::format("novelty_fraction {}\nvar_fraction {}\nglobal_beta {}\nstride {}\n",
                       params_.novelty_fraction, params_.var_fraction, params_.global_beta ? 1 : 0,
                       params_.stride);
    out += "# id c1 c2 c3 c4 c5 c6 c7 c8 c9 tau birth survivals\n";
    for (const auto& p : protos_) {
        out += fmt::format("{}", p.id);
        for (auto v : p.vector) out += fmt::format(" {}", v);
        out += fmt::format(" {} {} {}\n", p.counter, p.birth_stimulus, p.survivals);
    }
    return out;
}

FeatureRepository FeatureRepository::parse(std::string_view input) {
    V4Params params;
    std::vector<Prototype> protos;
    for (auto line : text::content_lines(input)) {
        const auto f = text::fields(line);
        if (f[0] == "novelty_fraction" && f.size() == 2) params.novelty_fraction = text::parse_number<double>(f[1]);
        else if (f[0] == "var_fraction" && f.size() == 2) params.var_fraction = text::parse_number<double>(f[1]);
        else if (f[0] == "global_beta" && f.size() == 2) params.global_beta = text::parse_number<int>(f[1]) != 0;
        else if (f[0] == "stride" && f.size() == 2) params.stride = text::parse_number<std::size_t>(f[1]);
        else if (f.size() == 13) {
            Prototype p;
            p.id = text::parse_number<int>(f[0]);
            for (std::size_t k = 0; k < 9; ++k) {
                const int code = text::parse_number<int>(f[k + 1]);
                if (code < 0 || code > kOrientationCount) throw std::runtime_error("repository: code out of range");
                p.vector[k] = static_cast<std::uint8_t>(code);
            }
            p.counter = text::parse_number<std::uint64_t>(f[10]);
            p.birth_stimulus = text::parse_number<int>(f[11]);
            p.survivals = text::parse_number<int>(f[12]);
            protos.push_back(p);
        } else {
            throw std::runtime_error(fmt::format("repository: cannot parse line '{}'", line));
        }
    }
    return from_prototypes(params, std::move(protos));
}

// --- maps -------------------------------------------------------------------

Tiling tile(const IntegratedOrientationMap& iom, std::size_t stride) {
    if (iom.rows() < kPatchSide || iom.cols() < kPatchSide) {
        throw std::invalid_argument(fmt::format("IOM {}x{} smaller than one 3x3 tile", iom.rows(), iom.cols()));
    }
    if (stride == 0) throw std::invalid_argument("tiling stride must be positive");
    Tiling t;
    t.rows = (iom.rows() - kPatchSide) / stride + 1;
    t.cols = (iom.cols() - kPatchSide) / stride + 1;
    t.tiles.reserve(t.rows * t.cols);
    for (std::size_t tr = 0; tr < t.rows; ++tr) {
        for (std::size_t tc = 0; tc < t.cols; ++tc) {
            Tile tl;
            tl.coord = {tr, tc};
            for (std::size_t r = 0; r < kPatchSide; ++r) {
                for (std::size_t c = 0; c < kPatchSide; ++c) {
                    tl.vector[r * kPatchSide + c] = iom(tr * stride + r, tc * stride + c);
                }
            }
            t.tiles.push_back(tl);
        }
    }
    return t;
}

V4Maps build_maps(const IntegratedOrientationMap& iom, FeatureRepository& repo, bool grow,
                  int stimulus_index, Exec exec) {
    if (repo.empty() && !grow) throw std::invalid_argument("empty feature repository without growth");
    const auto tiling = tile(iom, repo.params().stride);

    V4Maps maps;
    maps.features = FeatureMap(tiling.rows, tiling.cols, 0);
    maps.responses = ResponseMap(tiling.rows, tiling.cols, 0.0);

    std::vector<Patch> vectors;
    vectors.reserve(tiling.tiles.size());
    for (const auto& t : tiling.tiles) {
        vectors.push_back(t.vector);
        if (is_blank(t.vector)) continue;
        ++maps.nonblank;
        if (grow && repo.admit(t.vector, stimulus_index).admitted) ++maps.admitted;
    }

    std::vector<kernels::Match> matches(vectors.size());
    kernels::best_match(vectors, repo.view(), matches, exec);

    std::vector<std::uint64_t> usage(repo.size() + 1, 0);
    for (std::size_t i = 0; i < matches.size(); ++i) {
        maps.features.data()[i] = matches[i].id;
        maps.responses.data()[i] = matches[i].activation;
        if (matches[i].id > 0) ++usage[static_cast<std::size_t>(matches[i].id)];
    }
    for (std::size_t id = 1; id < usage.size(); ++id) {
        if (usage[id]) repo.add_usage(static_cast<int>(id), usage[id]);
    }
    return maps;
}

std::string format_feature_map(const FeatureMap& map) {
    std::string out;
    for (std::size_t r = 0; r < map.rows(); ++r) {
        for (std::size_t c = 0; c < map.cols(); ++c) {
            if (c) out += ',';
            out += fmt::format("{}", map(r, c));
        }
        out += '\n';
    }
    return out;
}

std::string format_response_map(const ResponseMap& map) {
    std::string out;
    for (std::size_t r = 0; r < map.rows(); ++r) {
        for (std::size_t c = 0; c < map.cols(); ++c) {
            if (c) out += ',';
            out += fmt::format("{}", map(r, c));
        }
        out += '\n';
    }
    return out;
}

FeatureMap parse_feature_map(std::string_view csv) {
    const auto lines = text::content_lines(csv);
    if (lines.empty()) throw std::runtime_error("feature map: empty");
    const auto first = text::split(lines[0], ',');
    FeatureMap map(lines.size(), first.size());
    for (std::size_t r = 0; r < lines.size(); ++r) {
        const auto cells = text::split(lines[r], ',');
        if (cells.size() != map.cols()) throw std::runtime_error("feature map: ragged rows");
        for (std::size_t c = 0; c < cells.size(); ++c) map(r, c) = text::parse_number<int>(cells[c]);
    }
    return map;
}

}  // namespace cortex
