#include "cbir/error.hpp"
#include "cbir/svm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cbir {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != r * c)
        throw Error(ErrorKind::ShapeError, "matrix payload does not match its shape");
}

void KernelSpec::validate(bool allow_auto_sigma) const {
    switch (kind) {
    case KernelKind::linear:
        return;
    case KernelKind::polynomial:
        if (!(coef0 >= 0.0) || !std::isfinite(coef0))
            throw Error(ErrorKind::InvalidParameter, "polynomial kernel needs c >= 0");
        if (degree < 1)
            throw Error(ErrorKind::InvalidParameter, "polynomial kernel needs d >= 1");
        return;
    case KernelKind::gaussian:
        if (allow_auto_sigma && sigma == 0.0)
            return;
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw Error(ErrorKind::InvalidParameter, "gaussian kernel needs sigma > 0");
        return;
    }
    throw Error(ErrorKind::InvalidParameter, "unknown kernel kind");
}

std::string KernelSpec::name() const {
    std::ostringstream os;
    switch (kind) {
    case KernelKind::linear: os << "linear"; break;
    case KernelKind::polynomial: os << "polynomial(c=" << coef0 << ", d=" << degree << ")"; break;
    case KernelKind::gaussian: os << "gaussian(sigma=" << sigma << ")"; break;
    }
    return os.str();
}

KernelKind parse_kernel_kind(const std::string& name) {
    if (name == "linear")
        return KernelKind::linear;
    if (name == "poly" || name == "polynomial")
        return KernelKind::polynomial;
    if (name == "gaussian" || name == "rbf")
        return KernelKind::gaussian;
    throw Error(ErrorKind::InvalidParameter, "unknown kernel '" + name + "'");
}

namespace {

double dot(std::span<const double> x, std::span<const double> z) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += x[i] * z[i];
    return s;
}

double squared_distance(std::span<const double> x, std::span<const double> z) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - z[i];
        s += d * d;
    }
    return s;
}

} // namespace

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> z) {
    if (x.size() != z.size())
        throw Error(ErrorKind::DimensionError, "kernel arguments differ in length");
    switch (spec.kind) {
    case KernelKind::linear:
        return dot(x, z);
    case KernelKind::polynomial: {
        const double base = dot(x, z) + spec.coef0;
        double v = 1.0;
        for (int i = 0; i < spec.degree; ++i)
            v *= base;
        return v;
    }
    case KernelKind::gaussian:
        return std::exp(-squared_distance(x, z) / (2.0 * spec.sigma * spec.sigma));
    }
    throw Error(ErrorKind::InvalidParameter, "unknown kernel kind");
}

std::array<double, 9> phi_poly2(std::span<const double> x) {
    if (x.size() != 3)
        throw Error(ErrorKind::DimensionError, "phi_poly2 expects a 3-vector");
    std::array<double, 9> out{};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            out[i * 3 + j] = x[i] * x[j];
    return out;
}

KernelMatrix kernel_matrix(const KernelSpec& spec, const Matrix& X) {
    if (X.rows == 0)
        throw Error(ErrorKind::ShapeError, "kernel matrix of an empty set");
    spec.validate();
    KernelMatrix K(X.rows, X.rows);
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t j = i; j < X.rows; ++j) {
            const double v = kernel_eval(spec, X.row(i), X.row(j));
            K(i, j) = v;
            K(j, i) = v;
        }
    return K;
}

MercerReport mercer_check(const Matrix& K, double tol) {
    if (K.rows != K.cols)
        throw Error(ErrorKind::ShapeError, "kernel matrix must be square");
    MercerReport report;
    if (K.rows == 0) {
        report.valid = true;
        return report;
    }
    for (double v : K.data)
        if (!std::isfinite(v)) {
            report.reason = "non-finite entry";
            return report;
        }

    double scale = 1.0;
    for (double v : K.data)
        scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < K.rows; ++i)
        for (std::size_t j = i + 1; j < K.cols; ++j)
            if (std::abs(K(i, j) - K(j, i)) > tol * scale) {
                report.reason = "matrix is not symmetric";
                return report;
            }

    Eigen::MatrixXd m(K.rows, K.cols);
    for (std::size_t i = 0; i < K.rows; ++i)
        for (std::size_t j = 0; j < K.cols; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = K(i, j);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        report.reason = "eigensolver did not converge";
        return report;
    }
    report.min_eigenvalue = solver.eigenvalues().minCoeff();
    report.max_eigenvalue = solver.eigenvalues().maxCoeff();
    const double floor = -tol * std::max(1.0, std::abs(report.max_eigenvalue));
    if (report.min_eigenvalue < floor) {
        std::ostringstream os;
        os << "negative eigenvalue " << report.min_eigenvalue;
        report.reason = os.str();
        return report;
    }
    report.valid = true;
    return report;
}

} // namespace cbir
