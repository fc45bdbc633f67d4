#include "cbir/descriptor.hpp"
#include "cbir/error.hpp"

#include <algorithm>
#include <cmath>

namespace cbir {

ImageRaster preprocess(const ImageRaster& raw) {
    validate_raster(raw);
    ImageRaster img = fit_longest_side(raw, kMaxSide);
    img = to_rgb(img);
    return pad_to_multiple(img, kPadMultiple);
}

namespace {

void require_rgb(const ImageRaster& img) {
    validate_raster(img);
    if (img.channels != 3)
        throw Error(ErrorKind::InvalidImage, "expected an RGB raster");
}

} // namespace

Hsv rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) noexcept {
    const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double delta = mx - mn;

    Hsv out{0.0, 0.0, mx};
    if (mx > 0.0)
        out.s = delta / mx;
    if (delta <= 0.0)
        return out;

    double h;
    if (mx == r)
        h = 60.0 * std::fmod((g - b) / delta, 6.0);
    else if (mx == g)
        h = 60.0 * ((b - r) / delta + 2.0);
    else
        h = 60.0 * ((r - g) / delta + 4.0);
    if (h < 0.0)
        h += 360.0;
    if (h >= 360.0)
        h -= 360.0;
    out.h = h;
    return out;
}

HsvRaster rgb_to_hsv(const ImageRaster& img) {
    require_rgb(img);
    HsvRaster out;
    out.width = img.width;
    out.height = img.height;
    const std::size_t n = img.pixel_count();
    out.h.resize(n);
    out.s.resize(n);
    out.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Hsv px = rgb_to_hsv(img.data[3 * i], img.data[3 * i + 1], img.data[3 * i + 2]);
        out.h[i] = px.h;
        out.s[i] = px.s;
        out.v[i] = px.v;
    }
    return out;
}

int hsv_bin(const Hsv& px) noexcept {
    const int hb = std::clamp(static_cast<int>(px.h / 45.0), 0, 7);
    const int sb = px.s >= 0.5 ? 1 : 0;
    const int vb = px.v >= 0.5 ? 1 : 0;
    return hb * 4 + sb * 2 + vb;
}

std::array<double, kHistDim> hsv_histogram(const HsvRaster& hsv) {
    std::array<double, kHistDim> hist{};
    const std::size_t n = hsv.h.size();
    if (n == 0)
        throw Error(ErrorKind::InvalidImage, "empty HSV raster");
    std::array<std::size_t, kHistDim> counts{};
    for (std::size_t i = 0; i < n; ++i)
        ++counts[static_cast<std::size_t>(hsv_bin({hsv.h[i], hsv.s[i], hsv.v[i]}))];
    for (std::size_t b = 0; b < kHistDim; ++b)
        hist[b] = static_cast<double>(counts[b]) / static_cast<double>(n);
    return hist;
}

int rgb64_label(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    return 16 * (r >> 6) + 4 * (g >> 6) + (b >> 6);
}

LabelGrid quantize_rgb64(const ImageRaster& img) {
    require_rgb(img);
    LabelGrid grid;
    grid.width = img.width;
    grid.height = img.height;
    grid.labels.resize(img.pixel_count());
    for (std::size_t i = 0; i < grid.labels.size(); ++i)
        grid.labels[i] = static_cast<std::uint8_t>(
            rgb64_label(img.data[3 * i], img.data[3 * i + 1], img.data[3 * i + 2]));
    return grid;
}

std::array<double, kMomentDim> color_moments(const ImageRaster& img) {
    require_rgb(img);
    const std::size_t n = img.pixel_count();
    std::array<double, 3> sum{};
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c)
            sum[c] += img.data[3 * i + c] / 255.0;

    std::array<double, kMomentDim> out{};
    for (int c = 0; c < 3; ++c)
        out[c] = sum[c] / static_cast<double>(n);

    // Two-pass variance; population normalization.
    std::array<double, 3> sq{};
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) {
            const double d = img.data[3 * i + c] / 255.0 - out[c];
            sq[c] += d * d;
        }
    for (int c = 0; c < 3; ++c)
        out[3 + c] = std::sqrt(sq[c] / static_cast<double>(n));
    return out;
}

std::vector<double> luminance(const ImageRaster& img) {
    require_rgb(img);
    std::vector<double> lum(img.pixel_count());
    for (std::size_t i = 0; i < lum.size(); ++i)
        lum[i] = (0.299 * img.data[3 * i] + 0.587 * img.data[3 * i + 1] + 0.114 * img.data[3 * i + 2]) / 255.0;
    return lum;
}

} // namespace cbir
