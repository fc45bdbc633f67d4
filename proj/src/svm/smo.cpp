#include "cbir/error.hpp"
#include "cbir/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace cbir {

std::vector<double> BinarySvmModel::to_model_space(std::span<const double> x) const {
    if (x.size() != dim())
        throw Error(ErrorKind::DimensionError, "input has " + std::to_string(x.size()) +
                                                   " dimensions, model expects " + std::to_string(dim()));
    std::vector<double> z(x.begin(), x.end());
    if (scaling)
        scaling->apply(z);
    return z;
}

double BinarySvmModel::decision(std::span<const double> x) const {
    const std::vector<double> z = to_model_space(x);
    double f = bias;
    for (std::size_t i = 0; i < alphas.size(); ++i)
        f += alphas[i] * sv_labels[i] * kernel_eval(kernel, support_vectors.row(i), z);
    return f;
}

double dual_objective(const KernelMatrix& K, std::span<const int> y, std::span<const double> alpha) {
    if (K.rows != K.cols || K.rows != y.size() || y.size() != alpha.size())
        throw Error(ErrorKind::DimensionError, "dual objective operands disagree in size");
    double linear = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        linear += alpha[i];
        if (alpha[i] == 0.0)
            continue;
        double row = 0.0;
        for (std::size_t j = 0; j < alpha.size(); ++j)
            row += y[j] * alpha[j] * K(i, j);
        quad += y[i] * alpha[i] * row;
    }
    return linear - 0.5 * quad;
}

double median_pairwise_distance(const Matrix& X) {
    std::vector<double> d;
    d.reserve(X.rows * (X.rows - (X.rows > 0)) / 2);
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t j = i + 1; j < X.rows; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < X.cols; ++k) {
                const double t = X(i, k) - X(j, k);
                s += t * t;
            }
            d.push_back(std::sqrt(s));
        }
    if (d.empty())
        return 1.0;
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    double median = *mid;
    if (d.size() % 2 == 0) {
        const double lower = *std::max_element(d.begin(), mid);
        median = 0.5 * (median + lower);
    }
    return median > 0.0 ? median : 1.0;
}

std::vector<double> primal_weights(const Matrix& X, std::span<const int> y, std::span<const double> alpha) {
    if (X.rows != y.size() || y.size() != alpha.size())
        throw Error(ErrorKind::DimensionError, "primal weight operands disagree in size");
    std::vector<double> w(X.cols, 0.0);
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t k = 0; k < X.cols; ++k)
            w[k] += alpha[i] * y[i] * X(i, k);
    return w;
}

double intercept_hard_margin(std::span<const double> w, const Matrix& X, std::span<const int> y) {
    if (X.rows != y.size() || w.size() != X.cols)
        throw Error(ErrorKind::DimensionError, "intercept operands disagree in size");
    double max_neg = -std::numeric_limits<double>::infinity();
    double min_pos = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < X.rows; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < X.cols; ++k)
            s += w[k] * X(i, k);
        if (y[i] < 0)
            max_neg = std::max(max_neg, s);
        else
            min_pos = std::min(min_pos, s);
    }
    if (!std::isfinite(max_neg) || !std::isfinite(min_pos))
        throw Error(ErrorKind::DegenerateLabels, "both classes are needed for the intercept");
    return -(max_neg + min_pos) / 2.0;
}

namespace {

bool is_free(double a, double C) { return a > kSupportThreshold && a < C * (1.0 - 1e-12); }
bool at_upper(double a, double C) { return a >= C * (1.0 - 1e-12); }

// r_t = y_t - sum_j a_j y_j K(x_j, x_t); every training point constrains b
// through y_t f(x_t) = y_t (b - r_t) + 1.
double intercept_from_residuals(std::span<const double> r, std::span<const int> y, std::span<const double> alpha,
                                double C) {
    if (std::none_of(alpha.begin(), alpha.end(), [](double a) { return a > kSupportThreshold; }))
        throw Error(ErrorKind::DegenerateModel, "no support vectors");

    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < r.size(); ++t) {
        if (is_free(alpha[t], C)) {
            free_sum += r[t];
            ++free_count;
            continue;
        }
        const bool upper_bound = at_upper(alpha[t], C);
        // a = 0, y = +1 or a = C, y = -1   ->  b >= r
        // a = 0, y = -1 or a = C, y = +1   ->  b <= r
        if ((y[t] > 0) != upper_bound)
            lower = std::max(lower, r[t]);
        else
            upper = std::min(upper, r[t]);
    }
    if (free_count > 0)
        return free_sum / static_cast<double>(free_count);
    if (std::isfinite(lower) && std::isfinite(upper))
        return 0.5 * (lower + upper);
    return std::isfinite(lower) ? lower : upper;
}

void check_training_set(const Matrix& X, std::span<const int> y, double C) {
    if (X.rows == 0 || X.cols == 0)
        throw Error(ErrorKind::DegenerateLabels, "empty training set");
    if (X.rows != y.size())
        throw Error(ErrorKind::DimensionError, "labels and rows differ in count");
    if (!(C > 0.0) || !std::isfinite(C))
        throw Error(ErrorKind::InvalidParameter, "C must be a positive finite number");
    bool pos = false, neg = false;
    for (int v : y) {
        if (v != 1 && v != -1)
            throw Error(ErrorKind::DegenerateLabels, "labels must be +1 or -1");
        pos |= v == 1;
        neg |= v == -1;
    }
    if (!pos || !neg)
        throw Error(ErrorKind::DegenerateLabels, "training set contains a single class");
}

std::vector<std::size_t> seeded_order(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i)
        std::swap(order[i - 1], order[rng() % i]);
    return order;
}

} // namespace

double intercept_free_sv(const KernelMatrix& K, std::span<const int> y, std::span<const double> alpha, double C) {
    if (K.rows != K.cols || K.rows != y.size() || y.size() != alpha.size())
        throw Error(ErrorKind::DimensionError, "intercept operands disagree in size");
    std::vector<double> r(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) {
        double s = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j)
            s += alpha[j] * y[j] * K(j, t);
        r[t] = y[t] - s;
    }
    return intercept_from_residuals(r, y, alpha, C);
}

SmoResult train_binary_smo(const Matrix& X, std::span<const int> y, const KernelSpec& spec_in, double C,
                           const SmoOptions& options) {
    check_training_set(X, y, C);
    spec_in.validate(/*allow_auto_sigma=*/true);
    if (!(options.kkt_tol > 0.0))
        throw Error(ErrorKind::InvalidParameter, "KKT tolerance must be positive");

    Matrix Z = X;
    std::optional<NormStats> scaling;
    if (options.standardize) {
        scaling = NormStats::compute(Z.data, Z.cols);
        for (std::size_t i = 0; i < Z.rows; ++i)
            scaling->apply(Z.row(i));
    }
    KernelSpec spec = spec_in;
    if (spec.kind == KernelKind::gaussian && spec.sigma == 0.0)
        spec.sigma = median_pairwise_distance(Z);

    const KernelMatrix K = kernel_matrix(spec, Z);
    const std::size_t n = Z.rows;
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0); // gradient of 1/2 a'Qa - e'a
    const std::vector<std::size_t> order = seeded_order(n, options.seed);

    auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < C : alpha[t] > 0.0; };
    auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < C; };
    auto objective = [&] {
        double s = 0.0;
        for (std::size_t t = 0; t < n; ++t)
            s += alpha[t] * (1.0 - grad[t]);
        return 0.5 * s;
    };

    SmoResult result;
    std::uint64_t iter = 0;
    bool converged = false;
    constexpr double tau = 1e-12;

    for (;;) {
        // Maximal violating pair; strict comparisons keep the first candidate
        // in the seeded scan order.
        std::size_t i = n, j = n;
        double g_max = -std::numeric_limits<double>::infinity();
        double g_min = std::numeric_limits<double>::infinity();
        for (std::size_t t : order) {
            const double r = -y[t] * grad[t];
            if (in_up(t) && r > g_max) {
                g_max = r;
                i = t;
            }
            if (in_low(t) && r < g_min) {
                g_min = r;
                j = t;
            }
        }
        if (i == n || j == n || g_max - g_min < options.kkt_tol) {
            converged = true;
            break;
        }
        if (iter >= options.max_iterations)
            break;

        const double old_ai = alpha[i], old_aj = alpha[j];
        double quad = K(i, i) + K(j, j) - 2.0 * K(i, j);
        if (quad <= 0.0)
            quad = tau;

        if (y[i] != y[j]) {
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += y[t] * (y[i] * K(t, i) * dai + y[j] * K(t, j) * daj);
        ++iter;
        if (options.record_trace)
            result.objective_trace.push_back(objective());
    }

    std::vector<double> residual(n);
    for (std::size_t t = 0; t < n; ++t)
        residual[t] = -y[t] * grad[t];

    BinarySvmModel& model = result.model;
    model.kernel = spec;
    model.C = C;
    model.bias = intercept_from_residuals(residual, y, alpha, C);
    model.scaling = std::move(scaling);
    model.converged = converged;
    model.iterations = iter;

    std::size_t sv_count = 0;
    for (double a : alpha)
        sv_count += a > kSupportThreshold;
    model.support_vectors = Matrix(sv_count, Z.cols);
    for (std::size_t t = 0, k = 0; t < n; ++t)
        if (alpha[t] > kSupportThreshold) {
            std::copy(Z.row(t).begin(), Z.row(t).end(), model.support_vectors.row(k).begin());
            model.sv_labels.push_back(y[t]);
            model.alphas.push_back(alpha[t]);
            ++k;
        }

    result.objective = objective();
    result.alpha = std::move(alpha);
    return result;
}

LinearForm effective_linear_form(const BinarySvmModel& model) {
    if (model.kernel.kind != KernelKind::linear)
        throw Error(ErrorKind::InvalidParameter, "explicit weights exist only for the linear kernel");
    LinearForm form;
    form.w.assign(model.dim(), 0.0);
    for (std::size_t i = 0; i < model.alphas.size(); ++i)
        for (std::size_t k = 0; k < model.dim(); ++k)
            form.w[k] += model.alphas[i] * model.sv_labels[i] * model.support_vectors(i, k);
    form.b = model.bias;
    if (model.scaling) {
        for (std::size_t k = 0; k < model.dim(); ++k) {
            const double s = model.scaling->stddev[k];
            if (s > 0.0) {
                form.w[k] /= s;
                form.b -= form.w[k] * model.scaling->mean[k];
            }
        }
    }
    return form;
}

} // namespace cbir
