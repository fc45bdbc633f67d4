#include "cbir/descriptor.hpp"
#include "cbir/error.hpp"

#include <algorithm>
#include <cstdint>

namespace cbir {

namespace {

struct RingCount {
    std::uint64_t same = 0;
    std::uint64_t total = 0;
};

// Same-colour and in-bounds counts on the L-infinity ring of radius d around (x, y).
RingCount count_ring(const LabelGrid& g, int x, int y, int d) {
    const std::uint8_t c = g.at(x, y);
    RingCount rc;

    const int x_lo = std::max(x - d, 0);
    const int x_hi = std::min(x + d, g.width - 1);
    for (int dy : {-d, d}) {
        const int yy = y + dy;
        if (yy < 0 || yy >= g.height)
            continue;
        for (int xx = x_lo; xx <= x_hi; ++xx) {
            ++rc.total;
            rc.same += g.at(xx, yy) == c;
        }
    }

    // Side columns exclude the corners already counted above.
    const int y_lo = std::max(y - d + 1, 0);
    const int y_hi = std::min(y + d - 1, g.height - 1);
    for (int dx : {-d, d}) {
        const int xx = x + dx;
        if (xx < 0 || xx >= g.width)
            continue;
        for (int yy = y_lo; yy <= y_hi; ++yy) {
            ++rc.total;
            rc.same += g.at(xx, yy) == c;
        }
    }
    return rc;
}

} // namespace

std::array<double, kCorrDim> auto_correlogram(const LabelGrid& labels, std::span<const int> distances) {
    if (labels.width <= 0 || labels.height <= 0 ||
        labels.labels.size() != static_cast<std::size_t>(labels.width) * labels.height)
        throw Error(ErrorKind::InvalidImage, "empty label grid");
    if (distances.empty())
        throw Error(ErrorKind::InvalidParameter, "correlogram needs at least one distance");
    for (int d : distances)
        if (d < 1)
            throw Error(ErrorKind::InvalidParameter, "correlogram distances must be >= 1");

    std::vector<RingCount> acc(kCorrDim * distances.size());
    for (int y = 0; y < labels.height; ++y)
        for (int x = 0; x < labels.width; ++x) {
            const std::uint8_t c = labels.at(x, y);
            if (c >= kCorrDim)
                throw Error(ErrorKind::InvalidParameter, "colour label out of range");
            for (std::size_t k = 0; k < distances.size(); ++k) {
                const RingCount rc = count_ring(labels, x, y, distances[k]);
                RingCount& slot = acc[c * distances.size() + k];
                slot.same += rc.same;
                slot.total += rc.total;
            }
        }

    std::array<double, kCorrDim> out{};
    for (std::size_t c = 0; c < kCorrDim; ++c) {
        double sum = 0.0;
        int used = 0;
        for (std::size_t k = 0; k < distances.size(); ++k) {
            const RingCount& slot = acc[c * distances.size() + k];
            if (slot.total == 0)
                continue; // colour absent, or ring entirely outside the image
            sum += static_cast<double>(slot.same) / static_cast<double>(slot.total);
            ++used;
        }
        out[c] = used > 0 ? sum / used : 0.0;
    }
    return out;
}

} // namespace cbir
