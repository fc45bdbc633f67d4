/**
 * @file svm.hpp
 * @brief Kernel SVM trained on the dual by two-multiplier sequential optimization,
 *        with one-vs-one voting for multiclass problems.
 *
 * The binary problem solved is the box-constrained dual
 *
 *     max_a  sum_i a_i - 1/2 sum_ij y_i y_j a_i a_j K(x_i, x_j)
 *     s.t.   0 <= a_i <= C,   sum_i a_i y_i = 0
 *
 * and the classifier is f(x) = sum_i a_i y_i K(x_i, x) + b over the support
 * vectors. Hard margin is the C -> infinity limit.
 */
#pragma once

#include "cbir/feature_index.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cbir {

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values);

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    std::span<const double> row(std::size_t i) const { return std::span<const double>(data).subspan(i * cols, cols); }
    std::span<double> row(std::size_t i) { return std::span<double>(data).subspan(i * cols, cols); }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

enum class KernelKind : std::uint8_t { linear = 0, polynomial = 1, gaussian = 2 };

struct KernelSpec {
    KernelKind kind = KernelKind::linear;
    double coef0 = 0.0; ///< polynomial offset c >= 0
    int degree = 2;     ///< polynomial degree d >= 1
    double sigma = 1.0; ///< gaussian width > 0; 0 asks the trainer for the median heuristic

    static KernelSpec linear() { return {}; }
    static KernelSpec polynomial(double c, int d) { return {KernelKind::polynomial, c, d, 1.0}; }
    static KernelSpec gaussian(double sigma) { return {KernelKind::gaussian, 0.0, 2, sigma}; }

    /// Throws InvalidParameter on out-of-range parameters. A zero sigma is
    /// accepted only when `allow_auto_sigma` is set.
    void validate(bool allow_auto_sigma = false) const;
    std::string name() const;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Parses "linear", "poly"/"polynomial", "gaussian"/"rbf".
KernelKind parse_kernel_kind(const std::string& name);

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> z);

/// Explicit feature map of (x.z)^2 for three inputs: x_i x_j in row-major (i, j) order.
std::array<double, 9> phi_poly2(std::span<const double> x);

using KernelMatrix = Matrix;

/// Gram matrix over the rows of X; upper triangle computed and mirrored.
KernelMatrix kernel_matrix(const KernelSpec& spec, const Matrix& X);

struct MercerReport {
    bool valid = false;
    std::string reason;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
};

/// Valid iff symmetric within `tol` and the smallest eigenvalue is at least
/// -tol * max(1, |largest eigenvalue|).
MercerReport mercer_check(const Matrix& K, double tol = 1e-8);

// ---------------------------------------------------------------------------
// Binary model
// ---------------------------------------------------------------------------

inline constexpr double kSupportThreshold = 1e-8;

struct BinarySvmModel {
    KernelSpec kernel;
    double C = 10.0;
    double bias = 0.0;
    Matrix support_vectors;           ///< rows in the model's (scaled) input space
    std::vector<int> sv_labels;       ///< +1 / -1
    std::vector<double> alphas;       ///< all > kSupportThreshold
    std::optional<NormStats> scaling; ///< training-set z-score statistics
    bool converged = true;
    std::uint64_t iterations = 0;

    std::size_t dim() const noexcept { return support_vectors.cols; }

    /// Applies `scaling` to a raw input.
    std::vector<double> to_model_space(std::span<const double> x) const;

    /// f(x) = sum_i a_i y_i K(sv_i, x) + b on a raw input.
    double decision(std::span<const double> x) const;
    /// +1 when f(x) >= 0, else -1.
    int predict(std::span<const double> x) const { return decision(x) >= 0.0 ? 1 : -1; }

    friend bool operator==(const BinarySvmModel&, const BinarySvmModel&) = default;
};

inline double decision_function(const BinarySvmModel& model, std::span<const double> x) {
    return model.decision(x);
}

struct SmoOptions {
    double kkt_tol = 1e-3;
    std::uint64_t seed = 0;
    std::uint64_t max_iterations = 1'000'000;
    bool standardize = true;
    bool record_trace = false;
};

struct SmoResult {
    BinarySvmModel model;
    std::vector<double> alpha;           ///< full dual vector, training order
    double objective = 0.0;              ///< W(alpha) at exit
    std::vector<double> objective_trace; ///< W after each accepted step (when recorded)
};

/// Trains on rows of X with labels in {-1, +1}. Throws DegenerateLabels when
/// only one class is present; hitting the iteration cap yields
/// `model.converged == false`.
SmoResult train_binary_smo(const Matrix& X, std::span<const int> y, const KernelSpec& spec, double C,
                           const SmoOptions& options = {});

/// W(alpha) for a precomputed Gram matrix.
double dual_objective(const KernelMatrix& K, std::span<const int> y, std::span<const double> alpha);

/// Median pairwise Euclidean distance between rows (1 if that is zero).
double median_pairwise_distance(const Matrix& X);

// Intercept and primal weights --------------------------------------------

/// w = sum_i a_i y_i x_i.
std::vector<double> primal_weights(const Matrix& X, std::span<const int> y, std::span<const double> alpha);

/// b = -(max_{y=-1} w.x + min_{y=+1} w.x) / 2.
double intercept_hard_margin(std::span<const double> w, const Matrix& X, std::span<const int> y);

/// Mean of y_i - sum_j a_j y_j K(x_j, x_i) over free support vectors
/// (0 < a_i < C); without free vectors, the midpoint of the interval allowed
/// by the bound ones. Throws DegenerateModel when no a_i is positive.
double intercept_free_sv(const KernelMatrix& K, std::span<const int> y, std::span<const double> alpha, double C);

struct LinearForm {
    std::vector<double> w;
    double b = 0.0;
};

/// Explicit (w, b) over raw inputs for a linear-kernel model, folding in the
/// model's scaling. Throws InvalidParameter for other kernels.
LinearForm effective_linear_form(const BinarySvmModel& model);

// Margins ------------------------------------------------------------------

double functional_margin(std::span<const double> w, double b, std::span<const double> x, int y);
/// Functional margin over ||w||. Throws DegenerateHyperplane for w = 0.
double geometric_margin(std::span<const double> w, double b, std::span<const double> x, int y);

// ---------------------------------------------------------------------------
// Multiclass
// ---------------------------------------------------------------------------

enum class MulticlassStrategy : std::uint8_t { one_vs_one = 0, one_vs_all = 1 };

inline constexpr std::uint16_t kRestClass = 0xFFFF;

struct PairModel {
    std::uint16_t positive; ///< class voted for when f >= 0
    std::uint16_t negative; ///< kRestClass for one-vs-all
    BinarySvmModel model;

    friend bool operator==(const PairModel&, const PairModel&) = default;
};

struct PairDecision {
    std::uint16_t positive;
    std::uint16_t negative;
    double value;
};

struct VoteOutcome {
    std::size_t winner = 0;
    std::vector<int> votes;
    std::vector<double> strength; ///< sum of |f| over the models each class won
};

/// One vote per pairwise decision for the side it falls on (f >= 0 votes
/// positive). Most votes wins; ties go to the larger strength, then to the
/// lower class index.
VoteOutcome tally_votes(std::size_t num_classes, std::span<const PairDecision> decisions);

struct ClassPrediction {
    std::size_t class_index = 0;
    std::string label;
    std::vector<int> votes;
    std::vector<double> strength;
    std::vector<PairDecision> decisions;

    /// Class indices from most to least preferred under the voting order.
    std::vector<std::size_t> ranking() const;
};

struct MulticlassModel {
    MulticlassStrategy strategy = MulticlassStrategy::one_vs_one;
    std::vector<std::string> classes;
    std::vector<PairModel> models;

    ClassPrediction predict(std::span<const double> x) const;

    friend bool operator==(const MulticlassModel&, const MulticlassModel&) = default;
};

inline ClassPrediction predict_class(const MulticlassModel& model, std::span<const double> x) {
    return model.predict(x);
}

/// Unordered class pairs (i, j), i < j, in lexicographic order.
std::vector<std::pair<std::uint16_t, std::uint16_t>> class_pairs(std::size_t num_classes);

struct MulticlassOptions {
    SmoOptions smo;
    MulticlassStrategy strategy = MulticlassStrategy::one_vs_one;
    unsigned threads = 0; ///< 0 = hardware concurrency
};

/// Trains one binary model per class pair on that pair's rows only; class i
/// maps to +1 and class j to -1. Requires at least two populated classes.
MulticlassModel train_multiclass(const Matrix& X, std::span<const std::uint16_t> labels,
                                 std::vector<std::string> classes, const KernelSpec& spec, double C,
                                 const MulticlassOptions& options = {});

MulticlassModel train_one_vs_one(const FeatureIndex& index, const KernelSpec& spec, double C,
                                 std::uint64_t seed = 0);

/// Raw (unnormalized) index rows as a double matrix.
Matrix raw_matrix(const FeatureIndex& index);

} // namespace cbir
