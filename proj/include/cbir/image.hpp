/**
 * @file image.hpp
 * @brief Decoded 8-bit rasters and the image decoding layer (PNG, JPEG, BMP).
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace cbir {

/// Row-major interleaved 8-bit raster. Channels are 1 (gray) or 3 (RGB).
struct ImageRaster {
    int width = 0;
    int height = 0;
    int channels = 3;
    std::vector<std::uint8_t> data;

    ImageRaster() = default;
    ImageRaster(int w, int h, int c = 3);

    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    bool empty() const noexcept { return width <= 0 || height <= 0; }

    std::uint8_t& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    static ImageRaster filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);

    friend bool operator==(const ImageRaster&, const ImageRaster&) = default;
};

/// Throws InvalidImage unless the raster is non-empty, has 1 or 3 channels
/// and a matching payload size.
void validate_raster(const ImageRaster& img);

/// Bilinear resampling with pixel-centre alignment.
ImageRaster resize_bilinear(const ImageRaster& img, int new_width, int new_height);

/// Downscales so the longest side is at most `max_side`; smaller images are returned as is.
ImageRaster fit_longest_side(const ImageRaster& img, int max_side);

/// Pads right and bottom by edge replication until both sides are multiples of `multiple`.
ImageRaster pad_to_multiple(const ImageRaster& img, int multiple);

/// Replicates a gray raster into three identical channels; RGB passes through.
ImageRaster to_rgb(const ImageRaster& img);

// Decoding layer. Every decoder returns a 3-channel RGB raster.
ImageRaster decode_image(std::span<const std::uint8_t> bytes);
ImageRaster load_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_jpeg(const ImageRaster& img, int quality = 90);
std::vector<std::uint8_t> encode_png(const ImageRaster& img);
void save_png(const ImageRaster& img, const std::filesystem::path& path);

/// JPEG thumbnail whose longest side is at most `max_side`.
std::vector<std::uint8_t> make_thumbnail(const ImageRaster& img, int max_side = 128);

} // namespace cbir
