#include "cbir/descriptor.hpp"
#include "cbir/error.hpp"

#include <cmath>

namespace cbir {

// 2x2 block [a b; c d]  ->  LL = (a+b+c+d)/2   LH = (a+b-c-d)/2
//                           HL = (a-b+c-d)/2   HH = (a-b-c+d)/2
// LH is low-pass along x and high-pass along y.

HaarLevel haar_analyze(std::span<const double> plane, int width, int height) {
    if (width < 2 || height < 2 || width % 2 != 0 || height % 2 != 0 ||
        plane.size() != static_cast<std::size_t>(width) * height)
        throw Error(ErrorKind::InvalidImage, "Haar analysis needs even dimensions");

    HaarLevel lvl;
    lvl.width = width / 2;
    lvl.height = height / 2;
    const std::size_t n = static_cast<std::size_t>(lvl.width) * lvl.height;
    lvl.ll.resize(n);
    lvl.lh.resize(n);
    lvl.hl.resize(n);
    lvl.hh.resize(n);

    for (int y = 0; y < lvl.height; ++y)
        for (int x = 0; x < lvl.width; ++x) {
            const std::size_t top = static_cast<std::size_t>(2 * y) * width + 2 * x;
            const double a = plane[top], b = plane[top + 1];
            const double c = plane[top + width], d = plane[top + width + 1];
            const std::size_t o = static_cast<std::size_t>(y) * lvl.width + x;
            lvl.ll[o] = 0.5 * (a + b + c + d);
            lvl.lh[o] = 0.5 * (a + b - c - d);
            lvl.hl[o] = 0.5 * (a - b + c - d);
            lvl.hh[o] = 0.5 * (a - b - c + d);
        }
    return lvl;
}

std::vector<double> haar_synthesize(const HaarLevel& lvl) {
    const int width = lvl.width * 2;
    std::vector<double> plane(static_cast<std::size_t>(width) * lvl.height * 2);
    for (int y = 0; y < lvl.height; ++y)
        for (int x = 0; x < lvl.width; ++x) {
            const std::size_t o = static_cast<std::size_t>(y) * lvl.width + x;
            const double ll = lvl.ll[o], lh = lvl.lh[o], hl = lvl.hl[o], hh = lvl.hh[o];
            const std::size_t top = static_cast<std::size_t>(2 * y) * width + 2 * x;
            plane[top] = 0.5 * (ll + lh + hl + hh);
            plane[top + 1] = 0.5 * (ll + lh - hl - hh);
            plane[top + width] = 0.5 * (ll - lh + hl - hh);
            plane[top + width + 1] = 0.5 * (ll - lh - hl + hh);
        }
    return plane;
}

HaarPyramid haar_decompose(std::span<const double> plane, int width, int height, int levels) {
    const int block = 1 << levels;
    if (levels < 1 || width % block != 0 || height % block != 0)
        throw Error(ErrorKind::InvalidImage, "dimensions must be multiples of " + std::to_string(block));

    HaarPyramid pyr;
    std::vector<double> current(plane.begin(), plane.end());
    int w = width, h = height;
    for (int l = 0; l < levels; ++l) {
        pyr.levels.push_back(haar_analyze(current, w, h));
        current = pyr.levels.back().ll;
        w /= 2;
        h /= 2;
    }
    return pyr;
}

std::vector<double> haar_reconstruct(const HaarPyramid& pyr) {
    if (pyr.levels.empty())
        return {};
    std::vector<double> ll = pyr.levels.back().ll;
    for (auto it = pyr.levels.rbegin(); it != pyr.levels.rend(); ++it) {
        HaarLevel lvl = *it;
        lvl.ll = ll;
        ll = haar_synthesize(lvl);
    }
    return ll;
}

namespace {

void append_stats(std::span<const double> c, double* out) {
    const double n = static_cast<double>(c.size());
    double s = 0.0, sa = 0.0;
    for (double v : c) {
        s += v;
        sa += std::abs(v);
    }
    const double mean = s / n, mean_abs = sa / n;
    double q = 0.0, qa = 0.0;
    for (double v : c) {
        q += (v - mean) * (v - mean);
        qa += (std::abs(v) - mean_abs) * (std::abs(v) - mean_abs);
    }
    out[0] = mean;
    out[1] = std::sqrt(q / n);
    out[2] = mean_abs;
    out[3] = std::sqrt(qa / n);
}

} // namespace

std::array<double, kWaveletDim> wavelet_statistics(const HaarPyramid& pyr) {
    if (pyr.levels.size() != 3)
        throw Error(ErrorKind::InvalidParameter, "wavelet statistics expect a 3-level pyramid");
    std::array<double, kWaveletDim> out{};
    double* p = out.data();
    for (const HaarLevel& lvl : pyr.levels) {
        append_stats(lvl.lh, p);
        append_stats(lvl.hl, p + 4);
        append_stats(lvl.hh, p + 8);
        p += 12;
    }
    append_stats(pyr.levels.back().ll, p);
    return out;
}

std::array<double, kWaveletDim> wavelet_features(const ImageRaster& img) {
    const std::vector<double> lum = luminance(img);
    return wavelet_statistics(haar_decompose(lum, img.width, img.height, 3));
}

} // namespace cbir
