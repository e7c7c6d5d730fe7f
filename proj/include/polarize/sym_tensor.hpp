#ifndef POLARIZE_SYM_TENSOR_HPP
#define POLARIZE_SYM_TENSOR_HPP

#include <span>
#include <vector>

#include "polarize/errors.hpp"

namespace polarize {

struct EigenDecomposition {
    std::vector<double> values;   // ascending, ties keep original order
    std::vector<double> vectors;  // column-major: vectors[i + dim*k] = i-th
                                  // component of the k-th eigenvector
};

/// Dense symmetric NxN tensor with packed lower-triangular storage.
/// Dimension is a runtime parameter; N = 1,2,3 are the intended sizes.
/// Values are immutable in spirit: all operations return new tensors.
class SymTensor {
public:
    explicit SymTensor(int dim);
    static SymTensor identity(int dim);
    static SymTensor diagonal(std::span<const double> d);
    /// Builds from a row-major dense matrix; off-diagonal pairs are averaged
    /// and the asymmetry must stay below `asym_tol` times the max entry.
    static SymTensor from_dense(int dim, std::span<const double> row_major,
                                double asym_tol = 1e-9);

    int dim() const { return dim_; }
    double operator()(int i, int j) const { return entries_[index(i, j)]; }
    void set(int i, int j, double v) { entries_[index(i, j)] = v; }
    std::span<const double> packed() const { return entries_; }

    double trace() const;
    double frobenius_norm() const;
    double max_abs() const;

    SymTensor operator+(const SymTensor& o) const;
    SymTensor operator-(const SymTensor& o) const;
    SymTensor scaled(double s) const;

    std::vector<double> apply(std::span<const double> x) const;
    double quadratic_form(std::span<const double> x) const;

    /// Cyclic Jacobi sweeps; off-diagonal tolerance 1e-14 relative, 100-sweep
    /// cap treated as an internal fault.
    EigenDecomposition eigendecompose() const;
    std::vector<double> eigenvalues() const;

    /// Spectral inverse. Throws SingularTensor when some |lambda| is below
    /// 1e-14 * max|lambda|.
    SymTensor inverse() const;

    bool is_positive_definite(double tol = 0.0) const;

    /// Rebuilds V diag(values) V^T from a decomposition.
    static SymTensor from_eigen(const EigenDecomposition& ed);

private:
    std::size_t index(int i, int j) const;
    int dim_;
    std::vector<double> entries_;  // packed lower triangle, row by row
};

/// Sum of weighted outer products c_i e_i (x) e_i. Directions must be unit
/// length within 1e-12 (NonUnitDirection otherwise).
SymTensor rank_one_sum(int dim, std::span<const std::vector<double>> directions,
                       std::span<const double> weights);

}  // namespace polarize

#endif
