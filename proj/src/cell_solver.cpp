#include "polarize/cell_solver.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>

#include "polarize/detail/fem_kernels.hpp"
#include "polarize/parallel.hpp"

namespace polarize {

namespace {

using detail::ElementKernels;

struct PeriodicGrid {
    int dim;
    int r;
    std::size_t nodes;
    std::vector<int> next;  // wrapped +1 neighbour per coordinate

    explicit PeriodicGrid(const Microstructure& micro)
        : dim(micro.dim), r(micro.resolution),
          nodes(micro.cell_count()), next(static_cast<std::size_t>(micro.resolution)) {
        for (int i = 0; i < r; ++i) next[static_cast<std::size_t>(i)] = (i + 1) % r;
    }

    // Global node ids of element (x,y[,z]) in kernel-local order.
    void element_nodes(int x, int y, int z, std::size_t* out) const {
        const std::size_t sr = static_cast<std::size_t>(r);
        const int xn = next[static_cast<std::size_t>(x)];
        const int yn = next[static_cast<std::size_t>(y)];
        if (dim == 2) {
            const std::size_t row0 = sr * static_cast<std::size_t>(y);
            const std::size_t row1 = sr * static_cast<std::size_t>(yn);
            out[0] = static_cast<std::size_t>(x) + row0;
            out[1] = static_cast<std::size_t>(xn) + row0;
            out[2] = static_cast<std::size_t>(x) + row1;
            out[3] = static_cast<std::size_t>(xn) + row1;
        } else {
            const int zn = next[static_cast<std::size_t>(z)];
            for (int a = 0; a < 8; ++a) {
                const int ax = (a & 1) ? xn : x;
                const int ay = (a & 2) ? yn : y;
                const int az = (a & 4) ? zn : z;
                out[static_cast<std::size_t>(a)] =
                    static_cast<std::size_t>(ax) +
                    sr * (static_cast<std::size_t>(ay) + sr * static_cast<std::size_t>(az));
            }
        }
    }
};

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void subtract_mean(std::vector<double>& v) {
    const double m = mean(v);
    for (double& x : v) x -= m;
}

// y = A x for the periodic operator with element coefficients coeff[e] and
// the isotropic unit-kernel scaled by h^(dim-2).
void apply_operator(const PeriodicGrid& grid, const ElementKernels& kern,
                    const std::vector<double>& coeff, double hpow,
                    const std::vector<double>& x, std::vector<double>& y) {
    std::fill(y.begin(), y.end(), 0.0);
    const int nn = kern.nodes;
    std::size_t ids[8];
    double xe[8];
    std::size_t e = 0;
    const int rz = (grid.dim == 3) ? grid.r : 1;
    for (int ez = 0; ez < rz; ++ez) {
        for (int ey = 0; ey < grid.r; ++ey) {
            for (int ex = 0; ex < grid.r; ++ex, ++e) {
                const double s = coeff[e] * hpow;
                grid.element_nodes(ex, ey, ez, ids);
                for (int a = 0; a < nn; ++a) xe[a] = x[ids[a]];
                for (int a = 0; a < nn; ++a) {
                    double acc = 0.0;
                    for (int b = 0; b < nn; ++b)
                        acc += kern.laplace[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] * xe[b];
                    y[ids[a]] += s * acc;
                }
            }
        }
    }
}

}  // namespace

CorrectorField solve_correctors(const Microstructure& micro, const PhasePair& phases,
                                double tol) {
    micro.validate();
    if (micro.resolution < 2)
        throw ValidationError("solve_correctors: resolution must be >= 2");
    if (!(tol > 0.0)) throw ValidationError("solve_correctors: tol must be positive");

    const PeriodicGrid grid(micro);
    const ElementKernels& kern = ElementKernels::get(micro.dim);
    const double h = 1.0 / micro.resolution;
    const double hpow = std::pow(h, micro.dim - 2);

    std::vector<double> coeff(micro.chi.size());
    for (std::size_t e = 0; e < coeff.size(); ++e)
        coeff[e] = micro.chi[e] ? phases.gamma1 : phases.gamma0;

    // Jacobi diagonal, shared by all directions.
    std::vector<double> diag(grid.nodes, 0.0);
    {
        std::size_t ids[8];
        std::size_t e = 0;
        const int rz = (grid.dim == 3) ? grid.r : 1;
        for (int ez = 0; ez < rz; ++ez)
            for (int ey = 0; ey < grid.r; ++ey)
                for (int ex = 0; ex < grid.r; ++ex, ++e) {
                    grid.element_nodes(ex, ey, ez, ids);
                    for (int a = 0; a < kern.nodes; ++a)
                        diag[ids[a]] += coeff[e] * hpow *
                                        kern.laplace[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)];
                }
    }

    const std::size_t cap =
        static_cast<std::size_t>(std::llround(50.0 * std::pow(micro.resolution, micro.dim / 2.0)));

    CorrectorField field;
    field.dim = micro.dim;
    field.resolution = micro.resolution;
    field.fluctuation.assign(static_cast<std::size_t>(micro.dim), {});
    field.residuals.assign(static_cast<std::size_t>(micro.dim), 0.0);
    field.iterations.assign(static_cast<std::size_t>(micro.dim), 0);

    const double hload = std::pow(h, micro.dim - 1);

    parallel_for_index(micro.dim, [&](int d) {
        // rhs: b[v] = -int gamma e_d . grad v
        std::vector<double> b(grid.nodes, 0.0);
        {
            std::size_t ids[8];
            std::size_t e = 0;
            const int rz = (grid.dim == 3) ? grid.r : 1;
            for (int ez = 0; ez < rz; ++ez)
                for (int ey = 0; ey < grid.r; ++ey)
                    for (int ex = 0; ex < grid.r; ++ex, ++e) {
                        grid.element_nodes(ex, ey, ez, ids);
                        const double s = coeff[e] * hload;
                        for (int a = 0; a < kern.nodes; ++a)
                            b[ids[a]] -= s * kern.grad_int[static_cast<std::size_t>(d)][static_cast<std::size_t>(a)];
                    }
        }
        subtract_mean(b);
        const double bnorm = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));

        std::vector<double> x(grid.nodes, 0.0);
        if (bnorm == 0.0) {
            field.fluctuation[static_cast<std::size_t>(d)] = std::move(x);
            return;
        }

        std::vector<double> rvec = b;
        std::vector<double> z(grid.nodes), p(grid.nodes), q(grid.nodes);
        for (std::size_t i = 0; i < grid.nodes; ++i) z[i] = rvec[i] / diag[i];
        subtract_mean(z);
        p = z;
        double rho = std::inner_product(rvec.begin(), rvec.end(), z.begin(), 0.0);
        double rnorm = bnorm;
        std::size_t it = 0;
        while (rnorm > tol * bnorm) {
            if (++it > cap)
                throw SolverDiverged("solve_correctors: CG exceeded iteration cap");
            apply_operator(grid, kern, coeff, hpow, p, q);
            const double alpha = rho / std::inner_product(p.begin(), p.end(), q.begin(), 0.0);
            for (std::size_t i = 0; i < grid.nodes; ++i) {
                x[i] += alpha * p[i];
                rvec[i] -= alpha * q[i];
            }
            for (std::size_t i = 0; i < grid.nodes; ++i) z[i] = rvec[i] / diag[i];
            subtract_mean(z);
            const double rho_next = std::inner_product(rvec.begin(), rvec.end(), z.begin(), 0.0);
            const double beta = rho_next / rho;
            rho = rho_next;
            for (std::size_t i = 0; i < grid.nodes; ++i) p[i] = z[i] + beta * p[i];
            rnorm = std::sqrt(std::inner_product(rvec.begin(), rvec.end(), rvec.begin(), 0.0));
        }
        subtract_mean(x);
        field.fluctuation[static_cast<std::size_t>(d)] = std::move(x);
        field.residuals[static_cast<std::size_t>(d)] = rnorm / bnorm;
        field.iterations[static_cast<std::size_t>(d)] = static_cast<int>(it);
    });
    return field;
}

namespace {

// Accumulates sum over selected elements of gamma-weighted corrector
// gradients: out[i][j] = sum_e w_e (delta_ij h^dim + h^(dim-1) sum_a
// grad_int[j][a] fluct^i[a]).
void gradient_moments(const CorrectorField& field, const Microstructure& micro,
                      const std::vector<double>& element_weight, double* out /* dim*dim */) {
    const PeriodicGrid grid(micro);
    const ElementKernels& kern = ElementKernels::get(micro.dim);
    const int n = micro.dim;
    const double h = 1.0 / micro.resolution;
    const double hvol = std::pow(h, n);
    const double hsurf = std::pow(h, n - 1);

    for (int i = 0; i < n * n; ++i) out[i] = 0.0;
    std::size_t ids[8];
    for (int i = 0; i < n; ++i) {
        const auto& fl = field.fluctuation[static_cast<std::size_t>(i)];
        std::size_t e = 0;
        const int rz = (n == 3) ? grid.r : 1;
        for (int ez = 0; ez < rz; ++ez)
            for (int ey = 0; ey < grid.r; ++ey)
                for (int ex = 0; ex < grid.r; ++ex, ++e) {
                    const double w = element_weight[e];
                    if (w == 0.0) continue;
                    grid.element_nodes(ex, ey, ez, ids);
                    for (int j = 0; j < n; ++j) {
                        double g = 0.0;
                        for (int a = 0; a < kern.nodes; ++a)
                            g += kern.grad_int[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)] * fl[ids[a]];
                        out[i * n + j] += w * ((i == j ? hvol : 0.0) + hsurf * g);
                    }
                }
    }
}

SymTensor symmetrized(const double* dense, int n, double* asymmetry) {
    double asym = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j)
            asym = std::max(asym, std::abs(dense[i * n + j] - dense[j * n + i]));
    if (asymmetry) *asymmetry = asym;
    SymTensor t(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) t.set(i, j, 0.5 * (dense[i * n + j] + dense[j * n + i]));
    return t;
}

}  // namespace

SymTensor effective_tensor(const CorrectorField& field, const Microstructure& micro,
                           const PhasePair& phases, double* asymmetry) {
    micro.validate();
    if (field.dim != micro.dim || field.resolution != micro.resolution)
        throw ValidationError("effective_tensor: corrector/microstructure mismatch");
    std::vector<double> weight(micro.chi.size());
    for (std::size_t e = 0; e < weight.size(); ++e)
        weight[e] = micro.chi[e] ? phases.gamma1 : phases.gamma0;
    double dense[9];
    gradient_moments(field, micro, weight, dense);
    return symmetrized(dense, micro.dim, asymmetry);
}

SymTensor polarization_direct(const CorrectorField& field, const Microstructure& micro,
                              double* asymmetry) {
    micro.validate();
    const double theta = micro.theta();
    if (theta == 0.0)
        throw EmptyInclusion("polarization_direct: theta = 0 has no inclusion average");
    std::vector<double> weight(micro.chi.size());
    for (std::size_t e = 0; e < weight.size(); ++e)
        weight[e] = micro.chi[e] ? 1.0 / theta : 0.0;
    double dense[9];
    gradient_moments(field, micro, weight, dense);
    return symmetrized(dense, micro.dim, asymmetry);
}

SymTensor polarization_from_effective(const SymTensor& gamma_star, double theta,
                                      const PhasePair& phases) {
    if (theta == 0.0)
        throw ZeroFraction("polarization_from_effective: relation degenerates at theta = 0");
    if (!(theta > 0.0) || theta > 1.0)
        throw ValidationError("polarization_from_effective: theta outside (0,1]");
    const SymTensor shifted =
        gamma_star - SymTensor::identity(gamma_star.dim()).scaled(phases.gamma0);
    return shifted.scaled(1.0 / (theta * (phases.gamma1 - phases.gamma0)));
}

HomogenizationResult homogenize(const Microstructure& micro, const PhasePair& phases,
                                double tol) {
    const CorrectorField field = solve_correctors(micro, phases, tol);
    HomogenizationResult result;
    result.theta = micro.theta();
    result.gamma_star =
        effective_tensor(field, micro, phases, &result.diagnostics.gamma_star_asymmetry);
    result.diagnostics.residuals = field.residuals;
    result.diagnostics.iterations = field.iterations;
    if (result.theta > 0.0) {
        result.m_theta_direct =
            polarization_direct(field, micro, &result.diagnostics.m_direct_asymmetry);
        result.m_theta_relation =
            polarization_from_effective(result.gamma_star, result.theta, phases);
        result.measure_density_note =
            "inclusion measure density theta/integral(theta): uniform over the cell";
    }
    return result;
}

}  // namespace polarize
