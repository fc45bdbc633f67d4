#include "cbir/image.hpp"
#include "cbir/error.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace cbir {

ImageRaster::ImageRaster(int w, int h, int c)
    : width(w), height(h), channels(c),
      data(static_cast<std::size_t>(std::max(w, 0)) * std::max(h, 0) * c, 0) {}

ImageRaster ImageRaster::filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    ImageRaster img(w, h, 3);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img.data[3 * i] = r;
        img.data[3 * i + 1] = g;
        img.data[3 * i + 2] = b;
    }
    return img;
}

void validate_raster(const ImageRaster& img) {
    if (img.empty())
        throw Error(ErrorKind::InvalidImage, "zero-area image");
    if (img.channels != 1 && img.channels != 3)
        throw Error(ErrorKind::InvalidImage, "unsupported channel count " + std::to_string(img.channels));
    if (img.data.size() != img.pixel_count() * static_cast<std::size_t>(img.channels))
        throw Error(ErrorKind::InvalidImage, "payload size does not match dimensions");
}

ImageRaster resize_bilinear(const ImageRaster& img, int new_width, int new_height) {
    validate_raster(img);
    if (new_width < 1 || new_height < 1)
        throw Error(ErrorKind::InvalidParameter, "target size must be positive");
    if (new_width == img.width && new_height == img.height)
        return img;

    ImageRaster out(new_width, new_height, img.channels);
    const double sx = static_cast<double>(img.width) / new_width;
    const double sy = static_cast<double>(img.height) / new_height;

    for (int y = 0; y < new_height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < new_width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < img.channels; ++c) {
                const double top = (1.0 - wx) * img.at(x0, y0, c) + wx * img.at(x1, y0, c);
                const double bottom = (1.0 - wx) * img.at(x0, y1, c) + wx * img.at(x1, y1, c);
                const double v = (1.0 - wy) * top + wy * bottom;
                out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
    }
    return out;
}

ImageRaster fit_longest_side(const ImageRaster& img, int max_side) {
    validate_raster(img);
    const int longest = std::max(img.width, img.height);
    if (longest <= max_side)
        return img;
    const double scale = static_cast<double>(max_side) / longest;
    const int w = std::max(1, static_cast<int>(std::lround(img.width * scale)));
    const int h = std::max(1, static_cast<int>(std::lround(img.height * scale)));
    return resize_bilinear(img, std::min(w, max_side), std::min(h, max_side));
}

ImageRaster pad_to_multiple(const ImageRaster& img, int multiple) {
    validate_raster(img);
    const int w = (img.width + multiple - 1) / multiple * multiple;
    const int h = (img.height + multiple - 1) / multiple * multiple;
    if (w == img.width && h == img.height)
        return img;
    ImageRaster out(w, h, img.channels);
    for (int y = 0; y < h; ++y) {
        const int sy = std::min(y, img.height - 1);
        for (int x = 0; x < w; ++x) {
            const int sx = std::min(x, img.width - 1);
            for (int c = 0; c < img.channels; ++c)
                out.at(x, y, c) = img.at(sx, sy, c);
        }
    }
    return out;
}

ImageRaster to_rgb(const ImageRaster& img) {
    validate_raster(img);
    if (img.channels == 3)
        return img;
    ImageRaster out(img.width, img.height, 3);
    for (std::size_t i = 0; i < img.pixel_count(); ++i)
        out.data[3 * i] = out.data[3 * i + 1] = out.data[3 * i + 2] = img.data[i];
    return out;
}

namespace {

ImageRaster from_bgr_mat(const cv::Mat& bgr) {
    ImageRaster out(bgr.cols, bgr.rows, 3);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            out.at(x, y, 0) = row[x][2];
            out.at(x, y, 1) = row[x][1];
            out.at(x, y, 2) = row[x][0];
        }
    }
    return out;
}

cv::Mat to_bgr_mat(const ImageRaster& img) {
    const ImageRaster rgb = to_rgb(img);
    cv::Mat bgr(rgb.height, rgb.width, CV_8UC3);
    for (int y = 0; y < rgb.height; ++y) {
        auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < rgb.width; ++x)
            row[x] = cv::Vec3b(rgb.at(x, y, 2), rgb.at(x, y, 1), rgb.at(x, y, 0));
    }
    return bgr;
}

std::vector<std::uint8_t> encode(const ImageRaster& img, const std::string& ext,
                                 const std::vector<int>& params) {
    std::vector<std::uint8_t> buf;
    if (!cv::imencode(ext, to_bgr_mat(img), buf, params))
        throw Error(ErrorKind::IoError, "failed to encode " + ext);
    return buf;
}

} // namespace

ImageRaster decode_image(std::span<const std::uint8_t> bytes) {
    if (bytes.empty())
        throw Error(ErrorKind::InvalidImage, "empty image buffer");
    cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
    cv::Mat decoded;
    try {
        decoded = cv::imdecode(buf, cv::IMREAD_COLOR);
    } catch (const cv::Exception& e) {
        throw Error(ErrorKind::InvalidImage, e.what());
    }
    if (decoded.empty() || decoded.type() != CV_8UC3)
        throw Error(ErrorKind::InvalidImage, "undecodable image data");
    return from_bgr_mat(decoded);
}

ImageRaster load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_image(bytes);
    } catch (const Error&) {
        throw Error(ErrorKind::InvalidImage, path.string() + ": undecodable");
    }
}

std::vector<std::uint8_t> encode_jpeg(const ImageRaster& img, int quality) {
    return encode(img, ".jpg", {cv::IMWRITE_JPEG_QUALITY, quality});
}

std::vector<std::uint8_t> encode_png(const ImageRaster& img) {
    return encode(img, ".png", {});
}

void save_png(const ImageRaster& img, const std::filesystem::path& path) {
    const auto bytes = encode_png(img);
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

std::vector<std::uint8_t> make_thumbnail(const ImageRaster& img, int max_side) {
    return encode_jpeg(fit_longest_side(img, max_side), 85);
}

} // namespace cbir
