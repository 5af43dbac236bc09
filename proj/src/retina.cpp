#include "cortex/retina.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace cortex {

Retina Retina::from_levels(Grid<std::uint8_t> levels) {
    for (auto v : levels.data()) {
        if (v > kMaxGrayLevel) throw std::invalid_argument("retina level above 10");
    }
    return Retina(std::move(levels));
}

Grid<double> Retina::values() const {
    Grid<double> out(height(), width());
    for (std::size_t i = 0; i < levels_.size(); ++i) out.data()[i] = levels_.data()[i] / 10.0;
    return out;
}

std::uint8_t quantize_level(double value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw std::domain_error(fmt::format("gray value {} outside [0,1]", value));
    }
    // The 1e-9 nudge keeps decimal midpoints such as 0.45 or 0.15 on the
    // round-up side despite their binary representation.
    return static_cast<std::uint8_t>(std::floor(value * 10.0 + 0.5 + 1e-9));
}

Retina quantize(const Grid<double>& values) {
    Grid<std::uint8_t> levels(values.rows(), values.cols());
    for (std::size_t i = 0; i < values.size(); ++i) levels.data()[i] = quantize_level(values.data()[i]);
    return Retina::from_levels(std::move(levels));
}

// --- portable graymap -------------------------------------------------------

namespace {

class PgmReader {
public:
    explicit PgmReader(std::string_view bytes) : bytes_(bytes) {}

    std::string_view magic() {
        if (bytes_.size() < 2) throw std::runtime_error("pgm: truncated header");
        pos_ = 2;
        return bytes_.substr(0, 2);
    }

    unsigned next_uint() {
        skip_space_and_comments();
        unsigned value = 0;
        auto [ptr, ec] = std::from_chars(bytes_.data() + pos_, bytes_.data() + bytes_.size(), value);
        if (ec != std::errc{}) throw std::runtime_error("pgm: expected unsigned integer");
        pos_ = static_cast<std::size_t>(ptr - bytes_.data());
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster in P5.
    void skip_single_space() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            throw std::runtime_error("pgm: missing raster separator");
        }
        ++pos_;
    }

    std::string_view remaining() const { return bytes_.substr(pos_); }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

GrayImage parse_pgm(std::string_view bytes) {
    PgmReader reader(bytes);
    const auto magic = reader.magic();
    if (magic != "P2" && magic != "P5") {
        throw std::runtime_error(fmt::format("pgm: unsupported format '{}'", magic));
    }
    GrayImage img;
    img.width = reader.next_uint();
    img.height = reader.next_uint();
    img.maxval = reader.next_uint();
    if (img.width == 0 || img.height == 0) throw std::runtime_error("pgm: zero dimension");
    if (img.maxval == 0 || img.maxval > 65535) throw std::runtime_error("pgm: maxval out of range");

    const std::size_t count = img.width * img.height;
    img.pixels.resize(count);
    if (magic == "P2") {
        for (auto& p : img.pixels) {
            const unsigned v = reader.next_uint();
            if (v > img.maxval) throw std::runtime_error("pgm: sample exceeds maxval");
            p = static_cast<std::uint16_t>(v);
        }
    } else {
        reader.skip_single_space();
        const auto raster = reader.remaining();
        const std::size_t bpp = img.maxval > 255 ? 2 : 1;
        if (raster.size() < count * bpp) throw std::runtime_error("pgm: truncated raster");
        for (std::size_t i = 0; i < count; ++i) {
            unsigned v = static_cast<unsigned char>(raster[i * bpp]);
            if (bpp == 2) v = (v << 8) | static_cast<unsigned char>(raster[i * bpp + 1]);
            if (v > img.maxval) throw std::runtime_error("pgm: sample exceeds maxval");
            img.pixels[i] = static_cast<std::uint16_t>(v);
        }
    }
    return img;
}

std::string encode_pgm(const GrayImage& image, PgmEncoding encoding) {
    if (image.pixels.size() != image.width * image.height) {
        throw std::invalid_argument("pgm: pixel count does not match dimensions");
    }
    std::string out = fmt::format("{}\n{} {}\n{}\n", encoding == PgmEncoding::ascii ? "P2" : "P5",
                                  image.width, image.height, image.maxval);
    if (encoding == PgmEncoding::ascii) {
        for (std::size_t r = 0; r < image.height; ++r) {
            for (std::size_t c = 0; c < image.width; ++c) {
                if (c) out += ' ';
                out += std::to_string(image.pixels[r * image.width + c]);
            }
            out += '\n';
        }
    } else {
        const bool wide = image.maxval > 255;
        for (auto p : image.pixels) {
            if (wide) out += static_cast<char>(p >> 8);
            out += static_cast<char>(p & 0xFF);
        }
    }
    return out;
}

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_pgm(ss.str());
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image, PgmEncoding encoding) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    out << encode_pgm(image, encoding);
    if (!out) throw std::runtime_error(fmt::format("write failed for '{}'", path.string()));
}

Retina to_retina(const GrayImage& image, const LoadOptions& options) {
    if (image.height < options.min_side || image.width < options.min_side) {
        throw std::invalid_argument(fmt::format("stimulus {}x{} is smaller than the {}x{} V1 kernel",
                                                image.height, image.width, options.min_side,
                                                options.min_side));
    }
    const auto [th, tw] = options.target;
    if ((image.height != th || image.width != tw) && !options.resize) {
        throw std::invalid_argument(fmt::format("stimulus is {}x{}, expected {}x{} (use resize)",
                                                image.height, image.width, th, tw));
    }
    Grid<double> values(th, tw);
    for (std::size_t r = 0; r < th; ++r) {
        const std::size_t sr = r * image.height / th;
        for (std::size_t c = 0; c < tw; ++c) {
            const std::size_t sc = c * image.width / tw;
            values(r, c) = static_cast<double>(image.pixels[sr * image.width + sc]) / image.maxval;
        }
    }
    return quantize(values);
}

Retina load_stimulus(const std::filesystem::path& path, const LoadOptions& options) {
    return to_retina(read_pgm(path), options);
}

GrayImage to_gray_image(const Retina& retina) {
    GrayImage img;
    img.height = retina.height();
    img.width = retina.width();
    img.maxval = 255;
    img.pixels.reserve(retina.levels().size());
    for (auto level : retina.levels().data()) {
        img.pixels.push_back(static_cast<std::uint16_t>(std::lround(level * 25.5)));
    }
    return img;
}

void save_stimulus(const Retina& retina, const std::filesystem::path& path, PgmEncoding encoding) {
    write_pgm(path, to_gray_image(retina), encoding);
}

// --- synthetic stimuli ------------------------------------------------------

namespace {

constexpr std::array<std::pair<ShapeKind, std::string_view>, 5> kShapeNames{{
    {ShapeKind::bar, "bar"},
    {ShapeKind::l_corner, "l-corner"},
    {ShapeKind::cup, "cup"},
    {ShapeKind::hand, "hand"},
    {ShapeKind::composite, "composite"},
}};

double parse_double(std::string_view text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::invalid_argument(fmt::format("invalid number '{}'", text));
    }
    return v;
}

// Shapes are described in a local frame: u to the right, v upwards, origin at
// the shape center, lengths in pixels at scale 1.

bool in_rect(double u, double v, double u0, double u1, double v0, double v1) {
    return u >= u0 && u <= u1 && v >= v0 && v <= v1;
}

bool in_disk(double u, double v, double cu, double cv, double radius) {
    return (u - cu) * (u - cu) + (v - cv) * (v - cv) <= radius * radius;
}

// Rectangle of the given half-width running `length` from (u0,v0) along angle.
bool in_segment(double u, double v, double u0, double v0, double angle_deg, double length,
                double half_width) {
    const double a = angle_deg * std::numbers::pi / 180.0;
    const double du = u - u0;
    const double dv = v - v0;
    const double along = du * std::cos(a) + dv * std::sin(a);
    const double across = -du * std::sin(a) + dv * std::cos(a);
    return along >= 0.0 && along <= length && std::abs(across) <= half_width;
}

bool in_bar(double u, double v) { return std::abs(u) <= 30.0 && std::abs(v) <= 4.0; }

bool in_l_corner(double u, double v) {
    return in_rect(u, v, -24, 24, -24, -16) || in_rect(u, v, -24, -16, -24, 24);
}

bool in_cup(double u, double v) {
    if (v >= -22.0 && v <= 20.0 && std::abs(u) <= 13.0 + 0.12 * (v + 22.0)) return true;
    if (in_rect(u, v, -24, 24, -27, -23)) return true;
    const double ring = std::hypot(u - 17.0, v - 1.0);
    return u >= 15.0 && ring >= 5.0 && ring <= 10.0;
}

bool in_hand(double u, double v) {
    if (in_rect(u, v, -15, 15, -18, 2) || in_disk(u, v, 0, -18, 15)) return true;
    constexpr std::array<double, 4> finger_u{-11.25, -3.75, 3.75, 11.25};
    constexpr std::array<double, 4> finger_len{22, 27, 25, 18};
    for (std::size_t i = 0; i < finger_u.size(); ++i) {
        if (in_rect(u, v, finger_u[i] - 2.8, finger_u[i] + 2.8, 0, finger_len[i])) return true;
        if (in_disk(u, v, finger_u[i], finger_len[i], 2.8)) return true;
    }
    return in_segment(u, v, -13, -10, 145.0, 20.0, 3.5);
}

bool in_composite(double u, double v) {
    constexpr double s = 0.62;
    return in_cup((u + 20.0) / s, v / s) || in_hand((u - 20.0) / s, (v - 2.0) / s);
}

bool inside(ShapeKind kind, double u, double v) {
    switch (kind) {
        case ShapeKind::bar: return in_bar(u, v);
        case ShapeKind::l_corner: return in_l_corner(u, v);
        case ShapeKind::cup: return in_cup(u, v);
        case ShapeKind::hand: return in_hand(u, v);
        case ShapeKind::composite: return in_composite(u, v);
    }
    return false;
}

}  // namespace

std::string_view shape_name(ShapeKind kind) {
    for (const auto& [k, name] : kShapeNames) {
        if (k == kind) return name;
    }
    return "?";
}

ShapeKind parse_shape_kind(std::string_view name) {
    for (const auto& [k, n] : kShapeNames) {
        if (n == name) return k;
    }
    throw std::invalid_argument(fmt::format("unknown shape '{}'", name));
}

ShapeSpec parse_shape_spec(std::string_view text) {
    ShapeSpec spec;
    std::size_t start = 0;
    bool first = true;
    while (start <= text.size()) {
        const auto end = std::min(text.find(':', start), text.size());
        const auto token = text.substr(start, end - start);
        if (first) {
            spec.kind = parse_shape_kind(token);
            first = false;
        } else {
            const auto eq = token.find('=');
            if (eq == std::string_view::npos) {
                throw std::invalid_argument(fmt::format("shape parameter '{}' lacks '='", token));
            }
            const auto key = token.substr(0, eq);
            const double value = parse_double(token.substr(eq + 1));
            if (key == "angle") spec.angle_deg = value;
            else if (key == "row") spec.center_row = value;
            else if (key == "col") spec.center_col = value;
            else if (key == "scale") spec.scale = value;
            else if (key == "shade") spec.shade = value;
            else if (key == "texture") spec.texture = value;
            else throw std::invalid_argument(fmt::format("unknown shape parameter '{}'", key));
        }
        start = end + 1;
    }
    if (!(spec.scale > 0.0)) throw std::invalid_argument("shape scale must be positive");
    if (!(spec.shade >= 0.0 && spec.shade <= 1.0)) throw std::invalid_argument("shade must lie in [0,1]");
    if (!(spec.texture >= 0.0 && spec.texture <= 1.0)) throw std::invalid_argument("texture must lie in [0,1]");
    return spec;
}

std::string format_shape_spec(const ShapeSpec& spec) {
    return fmt::format("{}:angle={}:row={}:col={}:scale={}:shade={}:texture={}", shape_name(spec.kind),
                       spec.angle_deg, spec.center_row, spec.center_col, spec.scale, spec.shade, spec.texture);
}

Retina generate_synthetic(const ShapeSpec& spec, std::uint64_t seed, Dimensions dims) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> level_dist(7, 10);
    const double foreground = level_dist(rng) / 10.0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    constexpr int kSub = 4;
    const double a = spec.angle_deg * std::numbers::pi / 180.0;
    const double ca = std::cos(a);
    const double sa = std::sin(a);

    Grid<double> values(dims.height, dims.width);
    for (std::size_t r = 0; r < dims.height; ++r) {
        for (std::size_t c = 0; c < dims.width; ++c) {
            double hits = 0.0;
            for (int sy = 0; sy < kSub; ++sy) {
                for (int sx = 0; sx < kSub; ++sx) {
                    const double y = r + (sy + 0.5) / kSub;
                    const double x = c + (sx + 0.5) / kSub;
                    const double dx = x - (spec.center_col + 0.5);
                    const double dy = (spec.center_row + 0.5) - y;
                    const double u = (dx * ca + dy * sa) / spec.scale;
                    const double v = (-dx * sa + dy * ca) / spec.scale;
                    if (inside(spec.kind, u, v)) {
                        hits += 1.0 - spec.shade * std::min(1.0, std::hypot(u, v) / kShadeRadius);
                    }
                }
            }
            const double noise = spec.texture * (2.0 * unit(rng) - 1.0);
            values(r, c) = std::clamp(foreground * hits / (kSub * kSub) * (1.0 + noise), 0.0, 1.0);
        }
    }
    return quantize(values);
}

std::vector<ShapeSpec> synthetic_catalog() {
    constexpr double kShade = 0.8;
    return {
        {ShapeKind::hand, 0.0, 50, 50, 1.3, kShade},       {ShapeKind::hand, 15.0, 50, 50, 1.35, kShade},
        {ShapeKind::hand, -20.0, 50, 50, 1.25, kShade},    {ShapeKind::cup, 0.0, 50, 50, 1.3, kShade},
        {ShapeKind::cup, 10.0, 50, 50, 1.4, kShade},       {ShapeKind::composite, 0.0, 50, 50, 1.4, kShade},
        {ShapeKind::hand, 90.0, 50, 50, 1.3, kShade},      {ShapeKind::cup, -15.0, 50, 50, 1.25, kShade},
        {ShapeKind::composite, 20.0, 50, 50, 1.5, kShade}, {ShapeKind::hand, 180.0, 50, 50, 1.35, kShade},
    };
}

}  // namespace cortex
