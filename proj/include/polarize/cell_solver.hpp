#ifndef POLARIZE_CELL_SOLVER_HPP
#define POLARIZE_CELL_SOLVER_HPP

#include <optional>
#include <string>
#include <vector>

#include "polarize/microstructure.hpp"
#include "polarize/phase_pair.hpp"
#include "polarize/sym_tensor.hpp"

namespace polarize {

/// Solutions of the periodic cell problems on the pixel grid. The stored
/// nodal field is the fluctuation part: corrector^i(y) = y_i + fluctuation[i](y),
/// with the fluctuation grid-periodic and mean zero.
struct CorrectorField {
    int dim = 0;
    int resolution = 0;
    std::vector<std::vector<double>> fluctuation;  // [direction][node], node x-fastest
    std::vector<double> residuals;                 // relative CG residual per direction
    std::vector<int> iterations;
};

struct SolverDiagnostics {
    std::vector<double> residuals;
    std::vector<int> iterations;
    double gamma_star_asymmetry = 0.0;
    double m_direct_asymmetry = 0.0;
};

struct HomogenizationResult {
    SymTensor gamma_star{2};
    double theta = 0.0;
    std::optional<SymTensor> m_theta_direct;
    std::optional<SymTensor> m_theta_relation;
    std::string measure_density_note;
    SolverDiagnostics diagnostics;
};

/// Conforming multilinear FEM with element-wise constant coefficients;
/// diagonally preconditioned conjugate gradients with a mean-zero projection
/// (the periodic system is singular along constants). Throws SolverDiverged
/// past 50 * R^(dim/2) iterations.
CorrectorField solve_correctors(const Microstructure& micro, const PhasePair& phases,
                                double tol);

/// gamma*_ij = int_Y gamma(y) grad(corrector^i) . e_j dy with exact
/// per-element quadrature. The result is symmetrized; the off-diagonal
/// asymmetry (pure solver error) is written to `asymmetry` when given.
SymTensor effective_tensor(const CorrectorField& field, const Microstructure& micro,
                           const PhasePair& phases, double* asymmetry = nullptr);

/// M_ij = (1/theta) int_Y chi grad(corrector^i) . e_j dy. Throws
/// EmptyInclusion when theta = 0.
SymTensor polarization_direct(const CorrectorField& field, const Microstructure& micro,
                              double* asymmetry = nullptr);

/// Algebraic route: M = (gamma* - gamma0 I) / (theta (gamma1 - gamma0)).
/// Throws ZeroFraction when theta = 0.
SymTensor polarization_from_effective(const SymTensor& gamma_star, double theta,
                                      const PhasePair& phases);

/// Full pipeline: correctors, effective tensor, both polarization routes.
HomogenizationResult homogenize(const Microstructure& micro, const PhasePair& phases,
                                double tol);

}  // namespace polarize

#endif
