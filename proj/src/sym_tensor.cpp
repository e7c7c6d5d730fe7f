#include "polarize/sym_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace polarize {

namespace {

constexpr double kJacobiTol = 1e-14;
constexpr int kJacobiSweepCap = 100;
constexpr double kSingularRel = 1e-14;

}  // namespace

SymTensor::SymTensor(int dim) : dim_(dim) {
    if (dim < 1) throw ValidationError("SymTensor dimension must be >= 1");
    entries_.assign(static_cast<std::size_t>(dim) * (dim + 1) / 2, 0.0);
}

std::size_t SymTensor::index(int i, int j) const {
    if (i < 0 || j < 0 || i >= dim_ || j >= dim_)
        throw ValidationError("SymTensor index out of range");
    if (i < j) std::swap(i, j);
    return static_cast<std::size_t>(i) * (i + 1) / 2 + j;
}

SymTensor SymTensor::identity(int dim) {
    SymTensor t(dim);
    for (int i = 0; i < dim; ++i) t.set(i, i, 1.0);
    return t;
}

SymTensor SymTensor::diagonal(std::span<const double> d) {
    SymTensor t(static_cast<int>(d.size()));
    for (int i = 0; i < t.dim_; ++i) t.set(i, i, d[static_cast<std::size_t>(i)]);
    return t;
}

SymTensor SymTensor::from_dense(int dim, std::span<const double> row_major,
                                double asym_tol) {
    if (static_cast<int>(row_major.size()) != dim * dim)
        throw ValidationError("from_dense: size mismatch");
    double scale = 0.0;
    for (double v : row_major) scale = std::max(scale, std::abs(v));
    SymTensor t(dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double a = row_major[static_cast<std::size_t>(i) * dim + j];
            const double b = row_major[static_cast<std::size_t>(j) * dim + i];
            if (std::abs(a - b) > asym_tol * std::max(1.0, scale))
                throw ValidationError("from_dense: matrix is not symmetric");
            t.set(i, j, 0.5 * (a + b));
        }
    }
    return t;
}

double SymTensor::trace() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += (*this)(i, i);
    return s;
}

double SymTensor::frobenius_norm() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) s += (*this)(i, j) * (*this)(i, j);
    return std::sqrt(s);
}

double SymTensor::max_abs() const {
    double m = 0.0;
    for (double v : entries_) m = std::max(m, std::abs(v));
    return m;
}

SymTensor SymTensor::operator+(const SymTensor& o) const {
    if (o.dim_ != dim_) throw ValidationError("dimension mismatch");
    SymTensor t(dim_);
    for (std::size_t k = 0; k < entries_.size(); ++k)
        t.entries_[k] = entries_[k] + o.entries_[k];
    return t;
}

SymTensor SymTensor::operator-(const SymTensor& o) const {
    if (o.dim_ != dim_) throw ValidationError("dimension mismatch");
    SymTensor t(dim_);
    for (std::size_t k = 0; k < entries_.size(); ++k)
        t.entries_[k] = entries_[k] - o.entries_[k];
    return t;
}

SymTensor SymTensor::scaled(double s) const {
    SymTensor t(dim_);
    for (std::size_t k = 0; k < entries_.size(); ++k) t.entries_[k] = s * entries_[k];
    return t;
}

std::vector<double> SymTensor::apply(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) throw ValidationError("apply: size mismatch");
    std::vector<double> y(static_cast<std::size_t>(dim_), 0.0);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) y[static_cast<std::size_t>(i)] += (*this)(i, j) * x[static_cast<std::size_t>(j)];
    return y;
}

double SymTensor::quadratic_form(std::span<const double> x) const {
    const auto y = apply(x);
    return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

EigenDecomposition SymTensor::eigendecompose() const {
    const int n = dim_;
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = (*this)(i, j);
    std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;

    auto off_norm = [&] {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += 2.0 * a[static_cast<std::size_t>(i) * n + j] * a[static_cast<std::size_t>(i) * n + j];
        return std::sqrt(s);
    };
    const double scale = std::max(frobenius_norm(), 1e-300);

    int sweep = 0;
    while (off_norm() > kJacobiTol * scale) {
        if (++sweep > kJacobiSweepCap)
            throw InternalError("Jacobi eigensolver exceeded 100 sweeps");
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[static_cast<std::size_t>(p) * n + q];
                if (std::abs(apq) <= kJacobiTol * scale * 1e-2) continue;
                const double app = a[static_cast<std::size_t>(p) * n + p];
                const double aqq = a[static_cast<std::size_t>(q) * n + q];
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a[static_cast<std::size_t>(k) * n + p];
                    const double akq = a[static_cast<std::size_t>(k) * n + q];
                    a[static_cast<std::size_t>(k) * n + p] = c * akp - s * akq;
                    a[static_cast<std::size_t>(k) * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[static_cast<std::size_t>(p) * n + k];
                    const double aqk = a[static_cast<std::size_t>(q) * n + k];
                    a[static_cast<std::size_t>(p) * n + k] = c * apk - s * aqk;
                    a[static_cast<std::size_t>(q) * n + k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v[static_cast<std::size_t>(k) * n + p];
                    const double vkq = v[static_cast<std::size_t>(k) * n + q];
                    v[static_cast<std::size_t>(k) * n + p] = c * vkp - s * vkq;
                    v[static_cast<std::size_t>(k) * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return a[static_cast<std::size_t>(x) * n + x] < a[static_cast<std::size_t>(y) * n + y];
    });

    EigenDecomposition ed;
    ed.values.resize(static_cast<std::size_t>(n));
    ed.vectors.resize(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k) {
        const int src = order[static_cast<std::size_t>(k)];
        ed.values[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(src) * n + src];
        for (int i = 0; i < n; ++i)
            ed.vectors[static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * k] =
                v[static_cast<std::size_t>(i) * n + src];
    }
    return ed;
}

std::vector<double> SymTensor::eigenvalues() const { return eigendecompose().values; }

SymTensor SymTensor::from_eigen(const EigenDecomposition& ed) {
    const int n = static_cast<int>(ed.values.size());
    SymTensor t(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                s += ed.values[static_cast<std::size_t>(k)] *
                     ed.vectors[static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * k] *
                     ed.vectors[static_cast<std::size_t>(j) + static_cast<std::size_t>(n) * k];
            t.set(i, j, s);
        }
    }
    return t;
}

SymTensor SymTensor::inverse() const {
    EigenDecomposition ed = eigendecompose();
    double max_abs_eig = 0.0;
    for (double l : ed.values) max_abs_eig = std::max(max_abs_eig, std::abs(l));
    for (double l : ed.values) {
        if (std::abs(l) <= kSingularRel * max_abs_eig)
            throw SingularTensor("SymTensor::inverse: eigenvalue too close to zero");
    }
    for (double& l : ed.values) l = 1.0 / l;
    return from_eigen(ed);
}

bool SymTensor::is_positive_definite(double tol) const {
    const auto ev = eigenvalues();
    return ev.front() > tol;
}

SymTensor rank_one_sum(int dim, std::span<const std::vector<double>> directions,
                       std::span<const double> weights) {
    if (directions.size() != weights.size())
        throw ValidationError("rank_one_sum: directions/weights size mismatch");
    SymTensor t(dim);
    for (std::size_t k = 0; k < directions.size(); ++k) {
        const auto& e = directions[k];
        if (static_cast<int>(e.size()) != dim)
            throw ValidationError("rank_one_sum: direction dimension mismatch");
        double norm2 = 0.0;
        for (double c : e) norm2 += c * c;
        if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12)
            throw NonUnitDirection("rank_one_sum: direction is not unit length");
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j <= i; ++j)
                t.set(i, j, t(i, j) + weights[k] * e[static_cast<std::size_t>(i)] * e[static_cast<std::size_t>(j)]);
    }
    return t;
}

}  // namespace polarize
