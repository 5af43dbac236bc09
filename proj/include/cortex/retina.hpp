#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cortex/grid.hpp"

namespace cortex {

inline constexpr std::size_t kDefaultRetinaSide = 100;
/// Gray levels 0.0, 0.1, ..., 1.0.
inline constexpr std::uint8_t kMaxGrayLevel = 10;

struct Dimensions {
    std::size_t height = kDefaultRetinaSide;
    std::size_t width = kDefaultRetinaSide;

    friend bool operator==(const Dimensions&, const Dimensions&) = default;
};

/// Quantized grayscale stimulus. Pixels are stored as integer levels 0..10 so
/// the 0.1-step invariant holds by construction.
class Retina {
public:
    Retina() = default;

    /// Throws std::invalid_argument if any level exceeds 10.
    static Retina from_levels(Grid<std::uint8_t> levels);

    std::size_t height() const { return levels_.rows(); }
    std::size_t width() const { return levels_.cols(); }
    Dimensions dims() const { return {height(), width()}; }

    std::uint8_t level(std::size_t r, std::size_t c) const { return levels_(r, c); }
    double value(std::size_t r, std::size_t c) const { return levels_(r, c) / 10.0; }

    const Grid<std::uint8_t>& levels() const { return levels_; }
    Grid<double> values() const;

    friend bool operator==(const Retina&, const Retina&) = default;

private:
    explicit Retina(Grid<std::uint8_t> levels) : levels_(std::move(levels)) {}
    Grid<std::uint8_t> levels_;
};

/// Nearest 0.1 step, halves rounded up. Throws std::domain_error outside [0,1].
std::uint8_t quantize_level(double value);
Retina quantize(const Grid<double>& values);

// --- portable graymap -------------------------------------------------------

struct GrayImage {
    std::size_t height = 0;
    std::size_t width = 0;
    unsigned maxval = 255;
    std::vector<std::uint16_t> pixels;  // row-major
};

enum class PgmEncoding { ascii, binary };

/// Parses P2 or P5 data. Throws std::runtime_error on malformed input.
GrayImage parse_pgm(std::string_view bytes);
std::string encode_pgm(const GrayImage& image, PgmEncoding encoding);
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image, PgmEncoding encoding);

struct LoadOptions {
    Dimensions target;
    /// Nearest-neighbor resampling to `target`; strict rejection otherwise.
    bool resize = false;
    /// Smallest accepted side length (the V1 kernel size).
    std::size_t min_side = 7;
};

Retina load_stimulus(const std::filesystem::path& path, const LoadOptions& options = {});
Retina to_retina(const GrayImage& image, const LoadOptions& options = {});

/// Graymap with maxval 255; reloading through load_stimulus is bit-exact.
GrayImage to_gray_image(const Retina& retina);
void save_stimulus(const Retina& retina, const std::filesystem::path& path,
                   PgmEncoding encoding = PgmEncoding::binary);

// --- synthetic stimuli ------------------------------------------------------

enum class ShapeKind { bar, l_corner, cup, hand, composite };

inline constexpr double kShadeRadius = 40.0;

struct ShapeSpec {
    ShapeKind kind = ShapeKind::bar;
    double angle_deg = 0.0;  // counter-clockwise, 0 = horizontal long axis
    double center_row = 50.0;
    double center_col = 50.0;
    double scale = 1.0;
    /// Fraction of the foreground lost at radius kShadeRadius from the center
    /// (linear falloff, clamped); 0 gives a flat silhouette.
    double shade = 0.0;
    /// Amplitude of seeded uniform surface noise inside the silhouette.
    double texture = 0.0;

    friend bool operator==(const ShapeSpec&, const ShapeSpec&) = default;
};

std::string_view shape_name(ShapeKind kind);
/// Throws std::invalid_argument for unknown names.
ShapeKind parse_shape_kind(std::string_view name);

/// "hand:angle=15:row=50:col=50:scale=0.9:shade=0.4:texture=0.1"; missing keys keep defaults.
ShapeSpec parse_shape_spec(std::string_view text);
std::string format_shape_spec(const ShapeSpec& spec);

/// Deterministic for a fixed (spec, seed). The seed picks the foreground gray
/// level and the surface texture; geometry depends on the spec only.
/// Background is black.
Retina generate_synthetic(const ShapeSpec& spec, std::uint64_t seed, Dimensions dims = {});

/// The ten built-in stimuli used by the default experiment.
std::vector<ShapeSpec> synthetic_catalog();

}  // namespace cortex
