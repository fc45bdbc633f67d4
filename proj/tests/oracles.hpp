// Independent reference implementations used only by the tests.
#pragma once

#include "cbir/descriptor.hpp"
#include "cbir/svm.hpp"

#include <array>
#include <random>
#include <span>
#include <vector>

namespace oracle {

/// Exhaustive enumeration of every ordered pixel pair at each chessboard distance.
std::array<double, cbir::kCorrDim> correlogram_pairs(const cbir::LabelGrid& g, std::span<const int> distances);

struct Subbands {
    int width = 0, height = 0;
    std::vector<double> ll, lh, hl, hh;
};

/// Haar analysis as 1-D filter-and-downsample along rows, then along columns.
std::vector<Subbands> haar_filter_bank(std::vector<double> plane, int width, int height, int levels);

/// Two-pass statistics of the subbands in LH1, HL1, HH1, ..., HH3, LL3 order.
std::array<double, cbir::kWaveletDim> wavelet_stats(std::span<const double> plane, int width, int height);

/// Envelope sigma from the half-amplitude condition: response falls to 1/2 at f +- f/3.
double gabor_sigma_from_bandwidth(double frequency);

/// Dense 2-D correlation with a Gabor kernel built directly in two dimensions,
/// clamped borders; returns |response|.
std::vector<double> gabor_dense_magnitude(std::span<const double> lum, int width, int height, double frequency,
                                          double theta);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> jacobi_eigenvalues(const cbir::Matrix& a);

struct QpSolution {
    std::vector<double> alpha;
    double objective = 0.0; ///< sum a - 1/2 a'Qa
    double bias = 0.0;
};

/// Accelerated projected gradient on the box- and equality-constrained dual.
/// The projection onto {0 <= a <= C, y'a = 0} is found by bisection on the
/// multiplier of the equality constraint.
QpSolution solve_dual_qp(const cbir::Matrix& K, std::span<const int> y, double C, int iterations = 200000);

/// Winner by plain vote counting with the documented tie rules, counted
/// without sharing code with the library.
std::size_t vote_winner(std::size_t num_classes, std::span<const cbir::PairDecision> decisions);

// Data helpers ---------------------------------------------------------------

cbir::ImageRaster random_image(int width, int height, std::mt19937_64& rng);
cbir::LabelGrid random_labels(int width, int height, int colours, std::mt19937_64& rng);

struct Toy {
    cbir::Matrix X;
    std::vector<int> y;
};

/// `n` points in [-3, 3]^2 labelled by a random line, none closer than `gap` to it.
Toy separable_2d(std::size_t n, std::uint64_t seed, double gap = 0.3);

} // namespace oracle
