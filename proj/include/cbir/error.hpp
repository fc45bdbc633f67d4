/**
 * @file error.hpp
 * @brief Error type shared by every cbir module.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbir {

enum class ErrorKind {
    InvalidImage,
    DimensionError,
    InvalidParameter,
    ShapeError,
    DegenerateLabels,
    DegenerateModel,
    DegenerateHyperplane,
    EmptyDataset,
    BadMagic,
    UnsupportedVersion,
    TruncatedFile,
    CorruptFile,
    IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidImage: return "InvalidImage";
    case ErrorKind::DimensionError: return "DimensionError";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::DegenerateModel: return "DegenerateModel";
    case ErrorKind::DegenerateHyperplane: return "DegenerateHyperplane";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::CorruptFile: return "CorruptFile";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace cbir
