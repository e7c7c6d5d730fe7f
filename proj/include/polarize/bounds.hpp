#ifndef POLARIZE_BOUNDS_HPP
#define POLARIZE_BOUNDS_HPP

#include <iosfwd>
#include <vector>

#include "polarize/phase_pair.hpp"
#include "polarize/sym_tensor.hpp"

namespace polarize {

/// Certification report for one polarization tensor. Slacks are signed
/// distances to each bound (positive = satisfied); a flag is true iff its
/// slack >= -tolerance.
struct BoundsReport {
    double theta = 0.0;  // 0 means the zero-volume regime
    double tolerance = 1e-9;

    bool pointwise_lower_ok = true;
    bool pointwise_upper_ok = true;
    bool trace_lower_ok = true;
    bool trace_upper_ok = true;

    double slack_pointwise_lower = 0.0;
    double slack_pointwise_upper = 0.0;
    double slack_trace_lower = 0.0;
    double slack_trace_upper = 0.0;

    std::vector<double> worst_direction;  // eigenvector with the tightest pointwise slack

    // Zero-volume regime only: closed-region membership and strict interior.
    bool member = false;
    bool interior = false;
    double interior_margin = 0.0;

    bool all_ok() const {
        return pointwise_lower_ok && pointwise_upper_ok && trace_lower_ok && trace_upper_ok;
    }
};

/// Harmonic and arithmetic mean of the phases at fraction theta in [0,1]:
/// gamma_h <= gamma_a with equality iff theta is 0 or 1.
std::pair<double, double> mean_bounds(double theta, const PhasePair& phases);

/// Pointwise spectral bounds on the polarization tensor,
///   min{1, c} |xi|^2 <= M xi.xi <= max{1, c} |xi|^2,
/// with c = gamma0 / (theta gamma0 + (1-theta) gamma1). Reports, never throws.
BoundsReport check_pointwise(const SymTensor& m, double theta, const PhasePair& phases,
                             double tolerance = 1e-9);

/// Trace bounds at fraction theta in (0,1):
///   trace(I - theta M)^{-1} <= N/(1-theta) + theta/(1-theta) (gamma0/gamma1 - 1)
///   trace(theta M)^{-1}     <= N/theta - (1-theta)/theta (1 - gamma1/gamma0)
/// Also fills the pointwise slacks.
BoundsReport check_trace_theta(const SymTensor& m, double theta, const PhasePair& phases,
                               double tolerance = 1e-9);

/// Zero-volume trace bounds,
///   trace(M^0)^{-1} <= (N-1) + gamma1/gamma0,  trace(M^0) <= (N-1) + gamma0/gamma1,
/// plus closed-region membership (both bounds and 1 <= lambda_i <= gamma0/gamma1)
/// and a strict-interior flag with margin.
BoundsReport check_trace_zero(const SymTensor& m, const PhasePair& phases,
                              double tolerance = 1e-9);

struct RegionCurvePoint {
    int curve_id;  // 0 = trace-upper equality curve, 1 = trace-lower equality curve
    double lambda1;
    double lambda2;
};

/// Samples the equality loci of the two trace bounds in the (lambda1, lambda2)
/// plane (the zero-volume curves when theta = 0). Planar only: dim must be 2.
std::vector<RegionCurvePoint> sample_region_curves(int dim, double theta,
                                                   const PhasePair& phases, int n_points);

/// CSV emission, columns: curve_id,lambda1,lambda2.
void write_region_csv(std::ostream& os, const std::vector<RegionCurvePoint>& points);

/// True when the eigenvalue pair lies in the closed attainable region at
/// fraction theta (theta = 0 uses the zero-volume bounds).
bool region_contains(double lambda1, double lambda2, double theta, const PhasePair& phases,
                     double tolerance = 1e-9);

}  // namespace polarize

#endif
