/**
 * @file synthetic.hpp
 * @brief Seeded generator for a labelled corpus of colour/texture families.
 *
 * Each class pairs a base palette with a texture (stripes, checks, rings,
 * dots, noise, gradients). Images within a class vary in phase, period,
 * palette and pixel noise.
 */
#pragma once

#include "cbir/image.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cbir {

inline constexpr std::size_t kSyntheticFamilies = 10;

struct SyntheticOptions {
    std::size_t classes = kSyntheticFamilies; ///< at most kSyntheticFamilies
    std::size_t per_class = 20;
    int size = 96;
    std::uint64_t seed = 0;
};

const std::vector<std::string>& synthetic_class_names();

/// Image `item` of class `cls`; a pure function of (cls, item, size, seed).
ImageRaster synthetic_image(std::size_t cls, std::size_t item, int size, std::uint64_t seed);

/// Writes root/<class>/img_NNN.png. Returns the number of files written.
std::size_t write_synthetic_corpus(const std::filesystem::path& root, const SyntheticOptions& options = {});

} // namespace cbir
