/**
 * @file store.hpp
 * @brief Dataset ingestion and the binary index / model file formats.
 *
 * Index file (all integers little-endian):
 *
 *   "CBIR"  u16 version  u64 count  u16 dim  u16 flags
 *   count x { u64 id, u16 label_id, dim x f32 }
 *   u16 label_count, label_count x { u32 byte_len, UTF-8 bytes }
 *   count x { u32 byte_len, UTF-8 path }
 *   if flags & 1:  dim x f64 mean, dim x f64 stddev
 *
 * Model file: "CBSV" u16 version, then the multiclass model (see store.cpp).
 */
#pragma once

#include "cbir/feature_index.hpp"
#include "cbir/svm.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace cbir {

inline constexpr std::uint16_t kIndexFormatVersion = 1;
inline constexpr std::uint16_t kModelFormatVersion = 1;
inline constexpr std::uint16_t kIndexFlagNormalized = 1;

struct IngestReport {
    FeatureIndex index;
    std::size_t skipped = 0;            ///< undecodable files
    std::vector<std::string> warnings;  ///< one line per skipped file
};

struct IngestOptions {
    unsigned threads = 0; ///< 0 = hardware concurrency
    /// Called after each file with (done, total); may be empty.
    std::function<void(std::size_t, std::size_t)> progress;
};

/// Every subdirectory of `root` is one class; its regular files are the
/// class's images. Files are visited in lexicographic path order, so ids are
/// stable across runs. Throws EmptyDataset when nothing decodable is found.
IngestReport ingest_dataset(const std::filesystem::path& root, const IngestOptions& options = {});

std::vector<std::uint8_t> serialize_index(const FeatureIndex& index);
FeatureIndex deserialize_index(std::span<const std::uint8_t> bytes);

/// Written through a temporary file and renamed into place.
void save_index(const FeatureIndex& index, const std::filesystem::path& path);
FeatureIndex load_index(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_model(const MulticlassModel& model);
MulticlassModel deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const MulticlassModel& model, const std::filesystem::path& path);
MulticlassModel load_model(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace cbir
