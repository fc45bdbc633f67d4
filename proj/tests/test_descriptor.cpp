#include "cbir/descriptor.hpp"
#include "cbir/error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace cbir;
using doctest::Approx;

namespace {

ImageRaster from_pixels(int w, int h, std::initializer_list<std::array<std::uint8_t, 3>> px) {
    ImageRaster img(w, h, 3);
    std::size_t i = 0;
    for (const auto& p : px)
        for (int c = 0; c < 3; ++c)
            img.data[i++] = p[c];
    return img;
}

// Fully saturated, full value colour of hue h degrees.
std::array<std::uint8_t, 3> pure_hue(double h) {
    const double x = 1.0 - std::abs(std::fmod(h / 60.0, 2.0) - 1.0);
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h / 60.0) % 6) {
    case 0: r = 1, g = x; break;
    case 1: r = x, g = 1; break;
    case 2: g = 1, b = x; break;
    case 3: g = x, b = 1; break;
    case 4: r = x, b = 1; break;
    default: r = 1, b = x; break;
    }
    auto q = [](double v) { return static_cast<std::uint8_t>(std::lround(v * 255.0)); };
    return {q(r), q(g), q(b)};
}

} // namespace

TEST_CASE("layout blocks are 32/64/6/48/40") {
    CHECK(layout::hist.size == 32);
    CHECK(layout::corr.size == 64);
    CHECK(layout::moments.size == 6);
    CHECK(layout::gabor.size == 48);
    CHECK(layout::wavelet.size == 40);
    CHECK(kDescriptorDim == 190);
    CHECK(layout::corr.offset == 32);
    CHECK(layout::moments.offset == 96);
    CHECK(layout::gabor.offset == 102);
    CHECK(layout::wavelet.offset == 150);
}

TEST_CASE("hexcone HSV conversion") {
    const Hsv red = rgb_to_hsv(255, 0, 0);
    CHECK(red.h == 0.0);
    CHECK(red.s == 1.0);
    CHECK(red.v == 1.0);
    const Hsv gray = rgb_to_hsv(128, 128, 128);
    CHECK(gray.h == 0.0);
    CHECK(gray.s == 0.0);
    CHECK(gray.v == Approx(128.0 / 255.0).epsilon(1e-15));
    const Hsv cyan = rgb_to_hsv(0, 255, 255);
    CHECK(cyan.h == Approx(180.0));
    CHECK(cyan.s == 1.0);
    CHECK(cyan.v == 1.0);
    CHECK(rgb_to_hsv(0, 0, 255).h == Approx(240.0));
    CHECK(rgb_to_hsv(255, 0, 128).h < 360.0);

    std::mt19937_64 rng(4);
    const HsvRaster hsv = rgb_to_hsv(oracle::random_image(20, 20, rng));
    for (std::size_t i = 0; i < hsv.h.size(); ++i) {
        CHECK(hsv.h[i] >= 0.0);
        CHECK(hsv.h[i] < 360.0);
        CHECK(hsv.s[i] >= 0.0);
        CHECK(hsv.s[i] <= 1.0);
        CHECK(hsv.v[i] >= 0.0);
        CHECK(hsv.v[i] <= 1.0);
    }
}

TEST_CASE("histogram concentrates a uniform red image in bin 3") {
    const auto h = hsv_histogram(rgb_to_hsv(ImageRaster::filled(16, 16, 255, 0, 0)));
    CHECK(h[3] == 1.0);
    CHECK(std::accumulate(h.begin(), h.end(), 0.0) == 1.0);
}

TEST_CASE("histogram of {red, gray 128} splits evenly") {
    const auto h = hsv_histogram(rgb_to_hsv(from_pixels(2, 1, {{255, 0, 0}, {128, 128, 128}})));
    CHECK(h[3] == 0.5);
    CHECK(h[1] == 0.5); // H=0, S=0, V=0.502
    CHECK(std::accumulate(h.begin(), h.end(), 0.0) == 1.0);
}

TEST_CASE("histogram is a probability vector on random images") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const auto h = hsv_histogram(rgb_to_hsv(oracle::random_image(9 + t, 7 + 2 * t, rng)));
        CHECK(std::accumulate(h.begin(), h.end(), 0.0) == Approx(1.0).epsilon(1e-9));
        CHECK(*std::min_element(h.begin(), h.end()) >= 0.0);
    }
}

TEST_CASE("a 90 degree hue rotation shifts histogram bins by two hue bins") {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> bin(0, 7);
    std::uniform_real_distribution<double> inside(8.0, 37.0);
    for (int t = 0; t < 20; ++t) {
        ImageRaster a(8, 8, 3), b(8, 8, 3);
        for (int p = 0; p < 64; ++p) {
            const double h = bin(rng) * 45.0 + inside(rng);
            const auto pa = pure_hue(h);
            const auto pb = pure_hue(std::fmod(h + 90.0, 360.0));
            for (int c = 0; c < 3; ++c) {
                a.data[p * 3 + c] = pa[c];
                b.data[p * 3 + c] = pb[c];
            }
        }
        const auto ha = hsv_histogram(rgb_to_hsv(a));
        const auto hb = hsv_histogram(rgb_to_hsv(b));
        for (int hbin = 0; hbin < 8; ++hbin)
            for (int sv = 0; sv < 4; ++sv)
                CHECK(hb[((hbin + 2) % 8) * 4 + sv] == ha[hbin * 4 + sv]);
    }
}

TEST_CASE("RGB-64 quantization") {
    CHECK(rgb64_label(0, 0, 0) == 0);
    CHECK(rgb64_label(255, 255, 255) == 63);
    CHECK(rgb64_label(70, 130, 200) == 27);
    CHECK(rgb64_label(63, 64, 191) == 0 * 16 + 1 * 4 + 2);
    const LabelGrid g = quantize_rgb64(from_pixels(2, 1, {{70, 130, 200}, {255, 255, 255}}));
    CHECK(g.at(0, 0) == 27);
    CHECK(g.at(1, 0) == 63);
}

TEST_CASE("correlogram of a uniform image is one-hot") {
    const auto c = auto_correlogram(quantize_rgb64(ImageRaster::filled(16, 16, 70, 130, 200)));
    for (std::size_t i = 0; i < kCorrDim; ++i)
        CHECK(c[i] == (i == 27 ? 1.0 : 0.0));
}

TEST_CASE("correlogram of a 4x4 checkerboard matches pair enumeration") {
    LabelGrid g{4, 4, {}};
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            g.labels.push_back((x + y) % 2 ? 27 : 0);
    const std::array<int, 1> d1{1};
    const auto c = auto_correlogram(g, d1);
    const auto o = oracle::correlogram_pairs(g, d1);
    CHECK(c[0] == o[0]);
    CHECK(c[27] == o[27]);
    // On a checkerboard only the diagonal ring neighbours share a colour.
    CHECK(c[0] == Approx(18.0 / 42.0));
}

TEST_CASE("correlogram equals pair enumeration on random grids") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> side(1, 12);
    for (int t = 0; t < 40; ++t) {
        const LabelGrid g = oracle::random_labels(side(rng), side(rng), 1 + t % 6, rng);
        const auto c = auto_correlogram(g);
        const auto o = oracle::correlogram_pairs(g, kCorrelogramDistances);
        for (std::size_t i = 0; i < kCorrDim; ++i) {
            CHECK(c[i] == Approx(o[i]).epsilon(1e-12));
            CHECK(c[i] >= 0.0);
            CHECK(c[i] <= 1.0);
        }
    }
}

TEST_CASE("correlogram rejects empty grids and bad distances") {
    CHECK_THROWS_AS(auto_correlogram(LabelGrid{}), Error);
    const std::array<int, 1> zero{0};
    CHECK_THROWS_AS(auto_correlogram(LabelGrid{1, 1, {0}}, zero), Error);
}

TEST_CASE("colour moments") {
    const auto m = color_moments(ImageRaster::filled(4, 4, 100, 150, 200));
    CHECK(m[0] == Approx(100.0 / 255.0));
    CHECK(m[1] == Approx(150.0 / 255.0));
    CHECK(m[2] == Approx(200.0 / 255.0));
    CHECK(m[3] <= 1e-12);
    CHECK(m[4] <= 1e-12);
    CHECK(m[5] <= 1e-12);
    const auto bw = color_moments(from_pixels(2, 1, {{0, 0, 0}, {255, 255, 255}}));
    for (int i = 0; i < 6; ++i)
        CHECK(bw[i] == Approx(0.5).epsilon(1e-15));
}

TEST_CASE("Gabor bank has 24 DC-free filters with one-octave envelopes") {
    const GaborBank& bank = GaborBank::instance();
    REQUIRE(bank.filters().size() == 24);
    for (std::size_t s = 0; s < 4; ++s)
        for (int o = 0; o < 6; ++o) {
            const GaborFilter& f = bank.filter(s, o);
            CHECK(f.frequency == kGaborFrequencies[s]);
            CHECK(f.theta == Approx(o * std::numbers::pi / 6.0).epsilon(1e-15));
            CHECK(f.sigma == Approx(oracle::gabor_sigma_from_bandwidth(f.frequency)).epsilon(1e-12));
            CHECK(f.radius == static_cast<int>(std::ceil(3.0 * f.sigma)));
            double re = 0.0;
            for (const auto& k : f.kernel())
                re += k.real();
            CHECK(std::abs(re) <= 1e-9);
        }
}

TEST_CASE("Gabor features of a constant image vanish") {
    const auto g = gabor_features(ImageRaster::filled(32, 32, 90, 120, 30));
    for (double v : g)
        CHECK(std::abs(v) <= 1e-9);
}

TEST_CASE("separable Gabor filtering equals dense 2-D correlation") {
    std::mt19937_64 rng(8);
    const ImageRaster img = oracle::random_image(24, 16, rng);
    const auto lum = luminance(img);
    const GaborBank& bank = GaborBank::instance();
    for (std::size_t idx : {0u, 5u, 8u, 15u, 19u, 23u}) {
        const GaborFilter& f = bank.filters()[idx];
        const auto sep = bank.response_magnitude(lum, 24, 16, idx);
        const auto dense = oracle::gabor_dense_magnitude(lum, 24, 16, f.frequency, f.theta);
        double worst = 0.0;
        for (std::size_t i = 0; i < sep.size(); ++i)
            worst = std::max(worst, std::abs(sep[i] - dense[i]));
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("a horizontal grating at 0.1 cycles/pixel peaks at the matching filter") {
    ImageRaster img(64, 64, 3);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            const auto v = static_cast<std::uint8_t>(std::lround(127.5 + 127.5 * std::sin(2 * std::numbers::pi * 0.1 * y)));
            for (int c = 0; c < 3; ++c)
                img.at(x, y, c) = v;
        }
    const auto g = gabor_features(img);
    std::size_t best = 0;
    for (std::size_t i = 1; i < 24; ++i)
        if (g[2 * i] > g[2 * best])
            best = i;
    CHECK(best == 1 * kGaborOrientations + 3); // f = 0.1, theta = pi/2
}

TEST_CASE("Haar statistics match the filter-and-downsample oracle") {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 5; ++t) {
        const ImageRaster img = oracle::random_image(16, 16 + 8 * t, rng);
        const auto lum = luminance(img);
        const auto w = wavelet_features(img);
        const auto o = oracle::wavelet_stats(lum, img.width, img.height);
        for (std::size_t i = 0; i < kWaveletDim; ++i)
            CHECK(std::abs(w[i] - o[i]) <= 1e-9);

        const auto pyr = haar_decompose(lum, img.width, img.height, 3);
        const auto bands = oracle::haar_filter_bank(lum, img.width, img.height, 3);
        for (int l = 0; l < 3; ++l)
            for (std::size_t i = 0; i < bands[l].ll.size(); ++i) {
                CHECK(std::abs(pyr.levels[l].lh[i] - bands[l].lh[i]) <= 1e-12);
                CHECK(std::abs(pyr.levels[l].hl[i] - bands[l].hl[i]) <= 1e-12);
                CHECK(std::abs(pyr.levels[l].hh[i] - bands[l].hh[i]) <= 1e-12);
            }
    }
}

TEST_CASE("Haar pyramid reconstructs its input") {
    std::mt19937_64 rng(10);
    const ImageRaster img = oracle::random_image(40, 24, rng);
    const auto lum = luminance(img);
    const auto back = haar_reconstruct(haar_decompose(lum, 40, 24, 3));
    REQUIRE(back.size() == lum.size());
    for (std::size_t i = 0; i < lum.size(); ++i)
        CHECK(std::abs(back[i] - lum[i]) <= 1e-9);
}

TEST_CASE("wavelet statistics of a constant image") {
    const auto w = wavelet_features(ImageRaster::filled(16, 16, 200, 200, 200));
    for (std::size_t i = 0; i < 36; ++i)
        CHECK(std::abs(w[i]) <= 1e-12);
    CHECK(w[36] == Approx(8.0 * 200.0 / 255.0)); // LL3 gain is 2 per level
    CHECK(std::abs(w[37]) <= 1e-12);
}

TEST_CASE("wavelet features reject sides that are not multiples of 8") {
    try {
        wavelet_features(ImageRaster::filled(12, 16, 1, 1, 1));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidImage);
    }
}

TEST_CASE("composite descriptor of a uniform red image") {
    const Descriptor d = compose_descriptor(ImageRaster::filled(50, 30, 255, 0, 0));
    CHECK(d.size() == 190);
    for (std::size_t i = 0; i < 32; ++i)
        CHECK(d[i] == (i == 3 ? 1.0 : 0.0));
    const int red = rgb64_label(255, 0, 0);
    for (std::size_t i = 0; i < 64; ++i)
        CHECK(d[32 + i] == (static_cast<int>(i) == red ? 1.0 : 0.0));
    CHECK(d[96] == 1.0);
    for (std::size_t i = 99; i < 102; ++i)
        CHECK(d[i] == 0.0);
    for (std::size_t i = 102; i < 150; ++i)
        CHECK(std::abs(d[i]) <= 1e-9);
}

TEST_CASE("descriptor extraction is deterministic and finite") {
    std::mt19937_64 rng(11);
    const ImageRaster img = oracle::random_image(70, 45, rng);
    const Descriptor a = compose_descriptor(img);
    const Descriptor b = compose_descriptor(img);
    CHECK(a == b);
    for (double v : a)
        CHECK(std::isfinite(v));
    CHECK(extract_preprocessed(preprocess(img)) == a);
}
