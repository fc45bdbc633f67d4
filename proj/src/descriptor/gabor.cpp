#include "cbir/descriptor.hpp"
#include "cbir/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cbir {

double gabor_sigma(double frequency) noexcept {
    // Half-amplitude band [f - f/3, f + f/3] spans one octave.
    return 3.0 * std::sqrt(2.0 * std::numbers::ln2) / (2.0 * std::numbers::pi * frequency);
}

std::vector<std::complex<double>> GaborFilter::kernel() const {
    const int n = 2 * radius + 1;
    std::vector<std::complex<double>> k(static_cast<std::size_t>(n) * n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            k[static_cast<std::size_t>(y) * n + x] =
                envelope[x] * envelope[y] * (carrier_x[x] * carrier_y[y] - dc);
    return k;
}

namespace {

GaborFilter make_filter(double frequency, double theta) {
    GaborFilter f;
    f.frequency = frequency;
    f.theta = theta;
    f.sigma = gabor_sigma(frequency);
    f.radius = static_cast<int>(std::ceil(3.0 * f.sigma));
    const int n = 2 * f.radius + 1;

    f.envelope.resize(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = i - f.radius;
        f.envelope[i] = std::exp(-t * t / (2.0 * f.sigma * f.sigma));
        total += f.envelope[i];
    }
    for (double& e : f.envelope)
        e /= total;

    const double wx = 2.0 * std::numbers::pi * frequency * std::cos(theta);
    const double wy = 2.0 * std::numbers::pi * frequency * std::sin(theta);
    f.carrier_x.resize(n);
    f.carrier_y.resize(n);
    std::complex<double> sx{}, sy{};
    for (int i = 0; i < n; ++i) {
        const double t = i - f.radius;
        f.carrier_x[i] = std::polar(1.0, wx * t);
        f.carrier_y[i] = std::polar(1.0, wy * t);
        sx += f.envelope[i] * f.carrier_x[i];
        sy += f.envelope[i] * f.carrier_y[i];
    }
    f.dc = (sx * sy).real();
    return f;
}

// Separable correlation of a real plane with 1-D complex taps along x then y,
// clamping coordinates at the borders. `im_x`/`im_y` may be empty for real taps.
struct Plane {
    std::vector<double> re, im;
};

Plane filter_rows(std::span<const double> src, int w, int h, std::span<const double> re_taps,
                  std::span<const double> im_taps, int r) {
    Plane out{std::vector<double>(src.size(), 0.0), std::vector<double>(im_taps.empty() ? 0 : src.size(), 0.0)};
    std::vector<double> padded(static_cast<std::size_t>(w) + 2 * r);
    for (int y = 0; y < h; ++y) {
        const double* row = src.data() + static_cast<std::size_t>(y) * w;
        for (int i = 0; i < w + 2 * r; ++i)
            padded[i] = row[std::clamp(i - r, 0, w - 1)];
        double* ore = out.re.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int t = 0; t <= 2 * r; ++t)
                acc += padded[x + t] * re_taps[t];
            ore[x] = acc;
        }
        if (!im_taps.empty()) {
            double* oim = out.im.data() + static_cast<std::size_t>(y) * w;
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int t = 0; t <= 2 * r; ++t)
                    acc += padded[x + t] * im_taps[t];
                oim[x] = acc;
            }
        }
    }
    return out;
}

Plane filter_cols(const Plane& src, int w, int h, std::span<const double> re_taps,
                  std::span<const double> im_taps, int r) {
    const bool complex_src = !src.im.empty();
    const bool complex_taps = !im_taps.empty();
    const bool complex_out = complex_src || complex_taps;
    Plane out{std::vector<double>(src.re.size(), 0.0),
              std::vector<double>(complex_out ? src.re.size() : 0, 0.0)};
    for (int y = 0; y < h; ++y) {
        double* ore = out.re.data() + static_cast<std::size_t>(y) * w;
        double* oim = complex_out ? out.im.data() + static_cast<std::size_t>(y) * w : nullptr;
        for (int t = 0; t <= 2 * r; ++t) {
            const int sy = std::clamp(y + t - r, 0, h - 1);
            const double* are = src.re.data() + static_cast<std::size_t>(sy) * w;
            const double* aim = complex_src ? src.im.data() + static_cast<std::size_t>(sy) * w : nullptr;
            const double wr = re_taps[t];
            const double wi = complex_taps ? im_taps[t] : 0.0;
            for (int x = 0; x < w; ++x) {
                const double ar = are[x];
                const double ai = aim ? aim[x] : 0.0;
                ore[x] += wr * ar - wi * ai;
                if (oim)
                    oim[x] += wr * ai + wi * ar;
            }
        }
    }
    return out;
}

struct SplitTaps {
    std::vector<double> re, im;
};

SplitTaps modulated(const GaborFilter& f, const std::vector<std::complex<double>>& carrier) {
    SplitTaps t;
    t.re.resize(carrier.size());
    t.im.resize(carrier.size());
    for (std::size_t i = 0; i < carrier.size(); ++i) {
        t.re[i] = f.envelope[i] * carrier[i].real();
        t.im[i] = f.envelope[i] * carrier[i].imag();
    }
    return t;
}

Plane envelope_response(std::span<const double> lum, int w, int h, const GaborFilter& f) {
    const Plane rows = filter_rows(lum, w, h, f.envelope, {}, f.radius);
    return filter_cols(rows, w, h, f.envelope, {}, f.radius);
}

std::vector<double> magnitude(std::span<const double> lum, int w, int h, const GaborFilter& f,
                              const Plane& env) {
    const SplitTaps tx = modulated(f, f.carrier_x);
    const SplitTaps ty = modulated(f, f.carrier_y);
    const Plane rows = filter_rows(lum, w, h, tx.re, tx.im, f.radius);
    const Plane full = filter_cols(rows, w, h, ty.re, ty.im, f.radius);
    std::vector<double> mag(lum.size());
    for (std::size_t i = 0; i < mag.size(); ++i)
        mag[i] = std::hypot(full.re[i] - f.dc * env.re[i], full.im[i]);
    return mag;
}

void check_plane(std::span<const double> lum, int w, int h) {
    if (w <= 0 || h <= 0 || lum.size() != static_cast<std::size_t>(w) * h)
        throw Error(ErrorKind::InvalidImage, "luminance plane does not match its dimensions");
}

} // namespace

GaborBank::GaborBank() {
    filters_.reserve(kGaborFrequencies.size() * kGaborOrientations);
    for (double f : kGaborFrequencies)
        for (int n = 0; n < kGaborOrientations; ++n)
            filters_.push_back(make_filter(f, n * std::numbers::pi / kGaborOrientations));
}

const GaborBank& GaborBank::instance() {
    static const GaborBank bank;
    return bank;
}

std::vector<double> GaborBank::response_magnitude(std::span<const double> lum, int width, int height,
                                                  std::size_t filter_index) const {
    check_plane(lum, width, height);
    const GaborFilter& f = filters_.at(filter_index);
    return magnitude(lum, width, height, f, envelope_response(lum, width, height, f));
}

std::array<double, kGaborDim> GaborBank::features(std::span<const double> lum, int width, int height) const {
    check_plane(lum, width, height);
    std::array<double, kGaborDim> out{};
    const double n = static_cast<double>(lum.size());
    for (std::size_t s = 0; s < kGaborFrequencies.size(); ++s) {
        // The envelope term depends only on the scale.
        const Plane env = envelope_response(lum, width, height, filter(s, 0));
        for (int o = 0; o < kGaborOrientations; ++o) {
            const std::size_t idx = s * kGaborOrientations + o;
            const std::vector<double> mag = magnitude(lum, width, height, filters_[idx], env);
            double sum = 0.0;
            for (double m : mag)
                sum += m;
            const double mean = sum / n;
            double sq = 0.0;
            for (double m : mag)
                sq += (m - mean) * (m - mean);
            out[2 * idx] = mean;
            out[2 * idx + 1] = std::sqrt(sq / n);
        }
    }
    return out;
}

std::array<double, kGaborDim> gabor_features(const ImageRaster& img) {
    return GaborBank::instance().features(luminance(img), img.width, img.height);
}

} // namespace cbir
