#include "cbir/error.hpp"
#include "cbir/svm.hpp"

#include <cmath>

namespace cbir {

namespace {

double affine(std::span<const double> w, double b, std::span<const double> x) {
    if (w.size() != x.size())
        throw Error(ErrorKind::DimensionError, "weight and input lengths differ");
    double s = b;
    for (std::size_t i = 0; i < w.size(); ++i)
        s += w[i] * x[i];
    return s;
}

} // namespace

double functional_margin(std::span<const double> w, double b, std::span<const double> x, int y) {
    return y * affine(w, b, x);
}

double geometric_margin(std::span<const double> w, double b, std::span<const double> x, int y) {
    double norm_sq = 0.0;
    for (double v : w)
        norm_sq += v * v;
    if (norm_sq == 0.0)
        throw Error(ErrorKind::DegenerateHyperplane, "zero weight vector");
    return functional_margin(w, b, x, y) / std::sqrt(norm_sq);
}

} // namespace cbir
