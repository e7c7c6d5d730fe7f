#ifndef POLARIZE_LAMINATE_HPP
#define POLARIZE_LAMINATE_HPP

#include <optional>
#include <vector>

#include "polarize/phase_pair.hpp"
#include "polarize/sym_tensor.hpp"

namespace polarize {

enum class MatrixPhase { Gamma0, Gamma1 };

/// A rank-p sequential laminate. Exactly one of `weights` (convex m_i,
/// sum 1) and `stage_proportions` (per-stage proportions theta_i in (0,1))
/// is set. `theta` is always the overall volume fraction of the inclusion
/// phase gamma1, regardless of which phase plays the matrix role.
struct LaminateSpec {
    int dim = 2;
    std::vector<std::vector<double>> directions;
    std::optional<std::vector<double>> weights;
    std::optional<std::vector<double>> stage_proportions;
    double theta = 0.5;
    MatrixPhase matrix_phase = MatrixPhase::Gamma0;

    int rank() const { return static_cast<int>(directions.size()); }
    void validate() const;

    static LaminateSpec from_weights(int dim, std::vector<std::vector<double>> directions,
                                     std::vector<double> weights, double theta,
                                     MatrixPhase matrix_phase);
    static LaminateSpec from_stages(int dim, std::vector<std::vector<double>> directions,
                                    std::vector<double> stage_proportions,
                                    MatrixPhase matrix_phase);
};

/// Stagewise -> convex-weight parameterization. The rank-one coefficient of
/// direction i in the stagewise form is matched against the weight form:
///   matrix gamma0: (1-theta_i) prod_{j<i} theta_j     = (1-theta) m_i
///   matrix gamma1: theta_i     prod_{j<i} (1-theta_j) = theta m_i
LaminateSpec to_weights(const LaminateSpec& spec);

/// Convex-weight -> stagewise parameterization (requires theta in (0,1)).
LaminateSpec to_stages(const LaminateSpec& spec);

/// Closed-form effective tensor of the sequential laminate.
SymTensor laminate_effective_tensor(const LaminateSpec& spec, const PhasePair& phases);

/// Closed-form polarization tensor of the laminate. Requires the weights
/// parameterization.
SymTensor laminate_polarization(const LaminateSpec& spec, const PhasePair& phases);

/// Effective tensor of a simple laminate of two (possibly anisotropic)
/// composites A and B, layered with normal `direction` and proportions
/// t and 1-t.
SymTensor laminate_composites(const SymTensor& a, const SymTensor& b,
                              const std::vector<double>& direction, double t);

/// Rank-N laminate with matrix gamma1 whose polarization eigenvalues tend,
/// as theta -> 0, to the requested targets on the upper trace-equality curve
/// (sum lambda_i = (N-1) + gamma0/gamma1). Directions default to the
/// standard basis; an orthonormal frame may be supplied column-major.
LaminateSpec design_laminate_for_eigenvalues(const std::vector<double>& target,
                                             double theta, const PhasePair& phases,
                                             const std::vector<double>* frame = nullptr);

/// Eigenvalues of the matrix-gamma1 rank-N laminate polarization tensor at
/// fraction theta, one per weight m_i:
///   1/(1 - theta lambda_i) = 1/(1-theta) + theta/(1-theta) (gamma0-gamma1)/gamma1 m_i.
std::vector<double> dilution_eigenvalues(const std::vector<double>& weights, double theta,
                                         const PhasePair& phases);

struct DilutionTrace {
    std::vector<double> thetas;                    // strictly decreasing
    std::vector<std::vector<double>> eigenvalues;  // per step, aligned with target components
    std::vector<SymTensor> tensors;                // M^{theta_n}
    SymTensor limit_estimate{1};                   // Richardson extrapolation (first order)
    std::vector<double> limit_eigenvalues;         // aligned Richardson limits
    double rate_estimate = 0.0;  // fitted exponent of |lambda^theta - lambda| vs theta
};

/// Dilution study along a decreasing fraction sequence for a target on the
/// upper equality curve.
DilutionTrace run_dilution_study(const std::vector<double>& target,
                                 const std::vector<double>& theta_sequence,
                                 const PhasePair& phases);

/// Smallest-volume-fraction threshold below which the eigenvalue pair is
/// attainable: the unique t with sum_i m_i(t) = 1 where
/// m_i(t) = gamma1 (lambda_i - 1) / ((gamma0-gamma1)(1 - t lambda_i)).
/// Returns 0 for targets on the upper curve.
double zero_volume_threshold(const std::vector<double>& target, const PhasePair& phases);

/// Realization of an eigenvalue pair strictly inside the zero-volume region
/// at a fixed fraction theta (N = 2): a simple laminate of a matrix-gamma1
/// composite (upper curve) and a matrix-gamma0 composite (lower curve),
/// both at fraction theta.
struct InteriorDesign {
    double weight = 0.0;   // first-axis weight s shared by both constituents
    double mix = 0.0;      // proportion t of the matrix-gamma1 constituent
    int axis = 0;          // lamination normal
    double residual = 0.0; // max eigenvalue mismatch after the solve
    SymTensor effective{2};
    SymTensor polarization{2};
};

InteriorDesign design_interior_realization(const std::vector<double>& target, double theta,
                                           const PhasePair& phases);

}  // namespace polarize

#endif
