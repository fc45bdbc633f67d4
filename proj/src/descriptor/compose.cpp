#include "cbir/descriptor.hpp"

#include <algorithm>

namespace cbir {

namespace {

template <std::size_t N>
void put(Descriptor& d, Block b, const std::array<double, N>& values) {
    static_assert(N > 0);
    std::copy(values.begin(), values.end(), d.begin() + static_cast<std::ptrdiff_t>(b.offset));
}

} // namespace

Descriptor extract_preprocessed(const ImageRaster& img) {
    Descriptor d{};
    put(d, layout::hist, hsv_histogram(rgb_to_hsv(img)));
    put(d, layout::corr, auto_correlogram(quantize_rgb64(img)));
    put(d, layout::moments, color_moments(img));

    const std::vector<double> lum = luminance(img);
    put(d, layout::gabor, GaborBank::instance().features(lum, img.width, img.height));
    put(d, layout::wavelet, wavelet_statistics(haar_decompose(lum, img.width, img.height, 3)));
    return d;
}

Descriptor compose_descriptor(const ImageRaster& img) {
    return extract_preprocessed(preprocess(img));
}

} // namespace cbir
