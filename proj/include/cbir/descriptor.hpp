/**
 * @file descriptor.hpp
 * @brief The 190-dimensional composite colour/texture descriptor.
 *
 * Layout (fixed, part of the on-disk contract):
 *
 *   [  0,  32)  HSV histogram, 8x2x2 bins
 *   [ 32,  96)  RGB-64 auto-correlogram
 *   [ 96, 102)  colour moments  (muR, muG, muB, sdR, sdG, sdB)
 *   [102, 150)  Gabor magnitude mean/std, 4 scales x 6 orientations
 *   [150, 190)  3-level Haar subband statistics
 */
#pragma once

#include "cbir/image.hpp"

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cbir {

inline constexpr std::size_t kHistDim = 32;
inline constexpr std::size_t kCorrDim = 64;
inline constexpr std::size_t kMomentDim = 6;
inline constexpr std::size_t kGaborDim = 48;
inline constexpr std::size_t kWaveletDim = 40;
inline constexpr std::size_t kDescriptorDim = kHistDim + kCorrDim + kMomentDim + kGaborDim + kWaveletDim;

struct Block {
    std::size_t offset;
    std::size_t size;
};

namespace layout {
inline constexpr Block hist{0, kHistDim};
inline constexpr Block corr{hist.offset + hist.size, kCorrDim};
inline constexpr Block moments{corr.offset + corr.size, kMomentDim};
inline constexpr Block gabor{moments.offset + moments.size, kGaborDim};
inline constexpr Block wavelet{gabor.offset + gabor.size, kWaveletDim};
} // namespace layout

static_assert(layout::wavelet.offset + layout::wavelet.size == 190);

using Descriptor = std::array<double, kDescriptorDim>;

inline std::span<const double> block_of(const Descriptor& d, Block b) {
    return std::span<const double>(d).subspan(b.offset, b.size);
}

inline constexpr int kMaxSide = 256;
inline constexpr int kPadMultiple = 8;

/// Caps the longest side at 256 (bilinear), expands gray to RGB and pads
/// both sides to multiples of 8 by edge replication.
ImageRaster preprocess(const ImageRaster& raw);

// ---------------------------------------------------------------------------
// Colour
// ---------------------------------------------------------------------------

struct HsvRaster {
    int width = 0;
    int height = 0;
    std::vector<double> h; ///< degrees, [0, 360)
    std::vector<double> s; ///< [0, 1]
    std::vector<double> v; ///< [0, 1]
};

struct Hsv {
    double h, s, v;
};

/// Hexcone conversion of one pixel. Achromatic pixels get H = 0.
Hsv rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;
HsvRaster rgb_to_hsv(const ImageRaster& img);

/// Bin index h*4 + s*2 + v with 8 hue bins of 45 degrees and S, V split at 0.5.
int hsv_bin(const Hsv& px) noexcept;
std::array<double, kHistDim> hsv_histogram(const HsvRaster& hsv);

/// Colour-label grid, one label in [0, 63] per pixel.
struct LabelGrid {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> labels;

    std::uint8_t at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

int rgb64_label(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;
LabelGrid quantize_rgb64(const ImageRaster& img);

inline constexpr std::array<int, 4> kCorrelogramDistances{1, 3, 5, 7};

/// For each colour c, the probability that a pixel on the L-infinity ring of
/// radius d around a c-pixel is also c, averaged over `distances`. Only
/// in-bounds ring pixels are counted.
std::array<double, kCorrDim> auto_correlogram(const LabelGrid& labels,
                                              std::span<const int> distances = kCorrelogramDistances);

std::array<double, kMomentDim> color_moments(const ImageRaster& img);

// ---------------------------------------------------------------------------
// Texture
// ---------------------------------------------------------------------------

/// Luminance 0.299R + 0.587G + 0.114B scaled to [0, 1], row-major.
std::vector<double> luminance(const ImageRaster& img);

inline constexpr std::array<double, 4> kGaborFrequencies{0.05, 0.1, 0.2, 0.4};
inline constexpr int kGaborOrientations = 6;

/// One complex Gabor filter. The kernel is the product of an isotropic
/// Gaussian envelope (normalized to unit sum) and a complex carrier, with the
/// envelope-weighted DC removed from the real part:
///
///   k(x, y) = g(x) g(y) * (exp(i 2 pi f (x cos t + y sin t)) - dc)
///
/// Both factors are separable, which is how `GaborBank::features` filters.
struct GaborFilter {
    double frequency;   ///< cycles / pixel
    double theta;       ///< radians
    double sigma;       ///< envelope std, pixels
    int radius;         ///< ceil(3 sigma)
    std::vector<double> envelope;                ///< 1-D, length 2r+1, sums to 1
    std::vector<std::complex<double>> carrier_x; ///< exp(i 2 pi f cos(t) x)
    std::vector<std::complex<double>> carrier_y; ///< exp(i 2 pi f sin(t) y)
    double dc;

    /// Dense (2r+1)^2 kernel, row-major with y outer.
    std::vector<std::complex<double>> kernel() const;
};

/// Envelope sigma giving a one-octave half-amplitude bandwidth at `frequency`.
double gabor_sigma(double frequency) noexcept;

class GaborBank {
public:
    GaborBank();

    static const GaborBank& instance();

    std::span<const GaborFilter> filters() const noexcept { return filters_; }
    const GaborFilter& filter(std::size_t scale, std::size_t orientation) const {
        return filters_[scale * kGaborOrientations + orientation];
    }

    /// Filtered complex response magnitude of a luminance plane for one filter,
    /// same-size output with edge-replicated borders.
    std::vector<double> response_magnitude(std::span<const double> lum, int width, int height,
                                           std::size_t filter_index) const;

    /// Mean then std of each response magnitude, scale-major, orientation-minor.
    std::array<double, kGaborDim> features(std::span<const double> lum, int width, int height) const;

private:
    std::vector<GaborFilter> filters_;
};

std::array<double, kGaborDim> gabor_features(const ImageRaster& img);

/// One level of an orthonormal 2-D Haar decomposition.
struct HaarLevel {
    int width = 0; ///< subband width (half the input width)
    int height = 0;
    std::vector<double> ll, lh, hl, hh;
};

/// Single-level analysis; both sides must be even.
HaarLevel haar_analyze(std::span<const double> plane, int width, int height);
/// Exact inverse of haar_analyze.
std::vector<double> haar_synthesize(const HaarLevel& level);

struct HaarPyramid {
    std::vector<HaarLevel> levels; ///< levels[0] is the finest
};

HaarPyramid haar_decompose(std::span<const double> plane, int width, int height, int levels = 3);
std::vector<double> haar_reconstruct(const HaarPyramid& pyramid);

/// {mean, std, mean|c|, std|c|} of LH1, HL1, HH1, ..., HH3, LL3.
std::array<double, kWaveletDim> wavelet_statistics(const HaarPyramid& pyramid);
std::array<double, kWaveletDim> wavelet_features(const ImageRaster& img);

// ---------------------------------------------------------------------------

/// Preprocesses and concatenates all five blocks in the fixed layout.
Descriptor compose_descriptor(const ImageRaster& img);

/// Runs the five extractors on an already-preprocessed raster.
Descriptor extract_preprocessed(const ImageRaster& img);

} // namespace cbir
