#include "cbir/synthetic.hpp"
#include "cbir/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace cbir {

namespace {

struct Rgb {
    double r, g, b;
};

struct Family {
    const char* name;
    Rgb a;
    Rgb b;
};

constexpr std::array<Family, kSyntheticFamilies> kFamilies{{
    {"red_stripes", {200, 30, 30}, {90, 10, 10}},
    {"green_checks", {40, 170, 60}, {220, 240, 220}},
    {"blue_noise", {30, 60, 190}, {10, 20, 80}},
    {"yellow_rings", {240, 210, 40}, {200, 110, 20}},
    {"purple_diagonals", {130, 40, 160}, {60, 10, 80}},
    {"cyan_gradient", {40, 200, 210}, {10, 90, 120}},
    {"orange_dots", {245, 140, 30}, {60, 30, 10}},
    {"gray_fine", {150, 150, 150}, {70, 70, 70}},
    {"brown_blobs", {120, 80, 40}, {190, 150, 100}},
    {"pink_bars", {240, 130, 180}, {250, 235, 240}},
}};

// Texture weight in [0, 1] toward colour b.
double texture(std::size_t cls, double x, double y, double period, double phase, double size) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    switch (cls) {
    case 0:
        return std::sin(two_pi * (y / period) + phase) > 0.0 ? 1.0 : 0.0;
    case 1: {
        const auto cx = static_cast<long>(std::floor((x + phase * period) / period));
        const auto cy = static_cast<long>(std::floor((y + phase * period) / period));
        return ((cx + cy) & 1) ? 1.0 : 0.0;
    }
    case 2:
        return 0.5;
    case 3: {
        const double r = std::hypot(x - size / 2, y - size / 2);
        return 0.5 + 0.5 * std::sin(two_pi * r / period + phase);
    }
    case 4:
        return std::sin(two_pi * ((x + y) / (period * std::numbers::sqrt2)) + phase) > 0.0 ? 1.0 : 0.0;
    case 5:
        return std::clamp((x * std::cos(phase) + y * std::sin(phase)) / (size * 1.5) + 0.3, 0.0, 1.0);
    case 6: {
        const double fx = std::fmod(x + phase * period, period) - period / 2;
        const double fy = std::fmod(y + phase * period, period) - period / 2;
        return std::hypot(fx, fy) < period * 0.25 ? 1.0 : 0.0;
    }
    case 7:
        return std::sin(two_pi * x / (period / 3.0) + phase) > 0.0 ? 1.0 : 0.0;
    case 8:
        return 0.5 + 0.25 * std::sin(two_pi * x / (period * 4) + phase) +
               0.25 * std::sin(two_pi * y / (period * 3) - phase);
    default:
        return std::sin(two_pi * x / (period * 2) + phase) > 0.0 ? 1.0 : 0.0;
    }
}

} // namespace

const std::vector<std::string>& synthetic_class_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& f : kFamilies)
            v.emplace_back(f.name);
        return v;
    }();
    return names;
}

ImageRaster synthetic_image(std::size_t cls, std::size_t item, int size, std::uint64_t seed) {
    if (cls >= kSyntheticFamilies)
        throw Error(ErrorKind::InvalidParameter, "synthetic class out of range");
    if (size < 8)
        throw Error(ErrorKind::InvalidParameter, "synthetic image size must be at least 8");
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(cls), static_cast<std::uint32_t>(item)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    const Family& fam = kFamilies[cls];
    auto jitter = [&](Rgb c) {
        return Rgb{c.r + (unit(rng) - 0.5) * 24, c.g + (unit(rng) - 0.5) * 24, c.b + (unit(rng) - 0.5) * 24};
    };
    const Rgb a = jitter(fam.a);
    const Rgb b = jitter(fam.b);
    const double period = 8.0 * (0.85 + 0.3 * unit(rng));
    const double phase = 2.0 * std::numbers::pi * unit(rng);
    const double sigma = cls == 2 ? 35.0 : 6.0;

    ImageRaster img = ImageRaster::filled(size, size, 0, 0, 0);
    auto to_u8 = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); };
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double t = cls == 2 ? std::clamp(0.3 + 0.25 * noise(rng), 0.0, 1.0)
                                      : texture(cls, x, y, period, phase, size);
            const double n = sigma * noise(rng);
            img.at(x, y, 0) = to_u8(a.r + (b.r - a.r) * t + n);
            img.at(x, y, 1) = to_u8(a.g + (b.g - a.g) * t + n);
            img.at(x, y, 2) = to_u8(a.b + (b.b - a.b) * t + n);
        }
    }
    return img;
}

std::size_t write_synthetic_corpus(const std::filesystem::path& root, const SyntheticOptions& options) {
    if (options.classes < 1 || options.classes > kSyntheticFamilies)
        throw Error(ErrorKind::InvalidParameter, "synthetic corpus supports 1 to 10 classes");
    std::size_t written = 0;
    for (std::size_t c = 0; c < options.classes; ++c) {
        const auto dir = root / synthetic_class_names()[c];
        std::filesystem::create_directories(dir);
        for (std::size_t i = 0; i < options.per_class; ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "img_%03zu.png", i);
            save_png(synthetic_image(c, i, options.size, options.seed), dir / name);
            ++written;
        }
    }
    return written;
}

} // namespace cbir
