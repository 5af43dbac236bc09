#include "cortex/it_objects.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "text.hpp"

namespace cortex {

StoredObject make_object(int id, FeatureMap map, ItMetric metric) {
    double dist = 0.0;
    for (int v : map.data()) {
        if (v < 0) throw std::invalid_argument("negative feature id in object map");
        if (metric == ItMetric::euclidean) dist += static_cast<double>(v) * v;
        else dist += v != 0 ? 1.0 : 0.0;
    }
    if (dist == 0.0) throw std::invalid_argument("cannot store an all-zero feature map");
    return StoredObject{id, std::move(map), dist, 1.0 / dist};
}

ObjectRepository::ObjectRepository(const ItParams& params) : params_(params) {
    if (params.radius < 0) throw std::invalid_argument("IT grid radius must be >= 0");
}

int ObjectRepository::store(const FeatureMap& map) {
    if (!objects_.empty() && !map.same_shape(objects_.front().map)) {
        throw std::invalid_argument("object map dimensions differ from stored objects");
    }
    const int id = static_cast<int>(objects_.size() + 1);
    objects_.push_back(make_object(id, map, params_.metric));
    return id;
}

void ObjectRepository::replace_map(int id, FeatureMap map) {
    at(id);
    objects_[static_cast<std::size_t>(id - 1)] = make_object(id, std::move(map), params_.metric);
}

const StoredObject& ObjectRepository::at(int id) const {
    if (id < 1 || static_cast<std::size_t>(id) > objects_.size()) {
        throw std::out_of_range(fmt::format("no object with id {}", id));
    }
    return objects_[static_cast<std::size_t>(id - 1)];
}

std::string ObjectRepository::serialize() const {
    std::string out = "# object repository\n";
    out += fmt::format("alpha {}\nradius {}\nmetric {}\n", params_.alpha, params_.radius,
                       params_.metric == ItMetric::euclidean ? "euclidean" : "indicator");
    for (const auto& o : objects_) {
        out += fmt::format("object {} {} {}\n", o.id, o.map.rows(), o.map.cols());
        for (std::size_t r = 0; r < o.map.rows(); ++r) {
            for (std::size_t c = 0; c < o.map.cols(); ++c) out += fmt::format("{}{}", c ? " " : "", o.map(r, c));
            out += '\n';
        }
    }
    return out;
}

ObjectRepository ObjectRepository::parse(std::string_view input) {
    ItParams params;
    std::vector<std::pair<int, FeatureMap>> maps;
    const auto lines = text::content_lines(input);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto f = text::fields(lines[i]);
        if (f.size() == 2 && f[0] == "alpha") {
            params.alpha = text::parse_number<double>(f[1]);
        } else if (f.size() == 2 && f[0] == "radius") {
            params.radius = text::parse_number<int>(f[1]);
        } else if (f.size() == 2 && f[0] == "metric") {
            if (f[1] == "euclidean") params.metric = ItMetric::euclidean;
            else if (f[1] == "indicator") params.metric = ItMetric::indicator;
            else throw std::runtime_error(fmt::format("objects: unknown metric '{}'", f[1]));
        } else if (f.size() == 4 && f[0] == "object") {
            const int id = text::parse_number<int>(f[1]);
            const auto rows = text::parse_number<std::size_t>(f[2]);
            const auto cols = text::parse_number<std::size_t>(f[3]);
            FeatureMap map(rows, cols);
            for (std::size_t r = 0; r < rows; ++r) {
                if (++i >= lines.size()) throw std::runtime_error("objects: truncated map");
                const auto cells = text::fields(lines[i]);
                if (cells.size() != cols) throw std::runtime_error("objects: ragged map row");
                for (std::size_t c = 0; c < cols; ++c) map(r, c) = text::parse_number<int>(cells[c]);
            }
            maps.emplace_back(id, std::move(map));
        } else {
            throw std::runtime_error(fmt::format("objects: cannot parse line '{}'", lines[i]));
        }
    }
    ObjectRepository repo(params);
    for (auto& [id, map] : maps) {
        if (repo.store(map) != id) throw std::runtime_error("objects: ids must be dense and ordered");
    }
    return repo;
}

double it_response(const StoredObject& object, const CumulativeFeatureMap& input, int dx, int dy,
                   ItMetric metric) {
    if (!object.map.same_shape(input)) throw std::invalid_argument("input and object maps differ in size");
    return std::exp(-object.beta_it * kernels::it_distance_at(object.map, input, dy, dx, metric));
}

ResponseGrid response_grid(const StoredObject& object, const CumulativeFeatureMap& input, int radius,
                           ItMetric metric, Exec exec) {
    if (!object.map.same_shape(input)) throw std::invalid_argument("input and object maps differ in size");
    ResponseGrid g;
    g.radius = radius;
    g.values = kernels::it_response_grid(object.map, object.beta_it, input, radius, metric, exec);
    bool first = true;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            const double v = g.at(dx, dy);
            if (first || v > g.max) {
                g.max = v;
                g.argmax_dx = dx;
                g.argmax_dy = dy;
                first = false;
            }
        }
    }
    return g;
}

Decision recognize(double max_response, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument(fmt::format("alpha {} outside (0,1)", alpha));
    return max_response >= alpha ? Decision::recognized : Decision::novel;
}

std::string format_response_grid(const ResponseGrid& grid) {
    std::string out;
    for (std::size_t r = 0; r < grid.values.rows(); ++r) {
        for (std::size_t c = 0; c < grid.values.cols(); ++c) out += fmt::format("{}{}", c ? "," : "", grid.values(r, c));
        out += '\n';
    }
    return out;
}

}  // namespace cortex
