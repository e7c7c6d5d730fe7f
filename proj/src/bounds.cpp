#include "polarize/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace polarize {

std::pair<double, double> mean_bounds(double theta, const PhasePair& phases) {
    if (theta < 0.0 || theta > 1.0)
        throw ValidationError("mean_bounds: theta must lie in [0,1]");
    return {phases.harmonic_mean(theta), phases.arithmetic_mean(theta)};
}

namespace {

double pointwise_factor(double theta, const PhasePair& phases) {
    return phases.gamma0 / (theta * phases.gamma0 + (1.0 - theta) * phases.gamma1);
}

void fill_pointwise(BoundsReport& report, const SymTensor& m, double theta,
                    const PhasePair& phases) {
    const double c = pointwise_factor(theta, phases);
    const double lower = std::min(1.0, c);
    const double upper = std::max(1.0, c);

    const EigenDecomposition ed = m.eigendecompose();
    const int n = m.dim();
    const double lmin = ed.values.front();
    const double lmax = ed.values.back();

    report.slack_pointwise_lower = lmin - lower;
    report.slack_pointwise_upper = upper - lmax;
    report.pointwise_lower_ok = report.slack_pointwise_lower >= -report.tolerance;
    report.pointwise_upper_ok = report.slack_pointwise_upper >= -report.tolerance;

    const int binding =
        (report.slack_pointwise_lower <= report.slack_pointwise_upper) ? 0 : n - 1;
    report.worst_direction.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        report.worst_direction[static_cast<std::size_t>(i)] =
            ed.vectors[static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * binding];
}

}  // namespace

BoundsReport check_pointwise(const SymTensor& m, double theta, const PhasePair& phases,
                             double tolerance) {
    if (theta < 0.0 || theta > 1.0)
        throw ValidationError("check_pointwise: theta must lie in [0,1]");
    BoundsReport report;
    report.theta = theta;
    report.tolerance = tolerance;
    fill_pointwise(report, m, theta, phases);
    return report;
}

BoundsReport check_trace_theta(const SymTensor& m, double theta, const PhasePair& phases,
                               double tolerance) {
    if (!(theta > 0.0) || !(theta < 1.0))
        throw ValidationError("check_trace_theta: theta must lie in (0,1)");
    BoundsReport report;
    report.theta = theta;
    report.tolerance = tolerance;
    fill_pointwise(report, m, theta, phases);

    const int n = m.dim();
    const SymTensor i_minus = SymTensor::identity(n) - m.scaled(theta);
    const double trace_ub = i_minus.inverse().trace();
    const double bound_ub = n / (1.0 - theta) +
                            theta / (1.0 - theta) * (phases.contrast() - 1.0);
    report.slack_trace_upper = bound_ub - trace_ub;
    report.trace_upper_ok = report.slack_trace_upper >= -tolerance;

    const double trace_lb = m.scaled(theta).inverse().trace();
    const double bound_lb = n / theta -
                            (1.0 - theta) / theta * (1.0 - phases.gamma1 / phases.gamma0);
    report.slack_trace_lower = bound_lb - trace_lb;
    report.trace_lower_ok = report.slack_trace_lower >= -tolerance;
    return report;
}

BoundsReport check_trace_zero(const SymTensor& m, const PhasePair& phases, double tolerance) {
    if (!m.is_positive_definite())
        throw NotPositiveDefinite("check_trace_zero: tensor is not positive definite");
    BoundsReport report;
    report.theta = 0.0;
    report.tolerance = tolerance;
    fill_pointwise(report, m, 0.0, phases);

    const int n = m.dim();
    const double bound_upper = (n - 1) + phases.contrast();
    const double bound_lower = (n - 1) + phases.gamma1 / phases.gamma0;
    report.slack_trace_upper = bound_upper - m.trace();
    report.slack_trace_lower = bound_lower - m.inverse().trace();
    report.trace_upper_ok = report.slack_trace_upper >= -tolerance;
    report.trace_lower_ok = report.slack_trace_lower >= -tolerance;

    report.member = report.all_ok();
    report.interior_margin = std::min({report.slack_pointwise_lower, report.slack_pointwise_upper,
                                       report.slack_trace_lower, report.slack_trace_upper});
    report.interior = report.interior_margin > 0.0;
    return report;
}

std::vector<RegionCurvePoint> sample_region_curves(int dim, double theta,
                                                   const PhasePair& phases, int n_points) {
    if (dim != 2)
        throw UnsupportedDimension("sample_region_curves: curves are planar, dim must be 2");
    if (n_points < 2) throw ValidationError("sample_region_curves: n_points must be >= 2");
    if (theta < 0.0 || theta > 1.0)
        throw ValidationError("sample_region_curves: theta must lie in [0,1]");

    const double g0 = phases.gamma0, g1 = phases.gamma1;
    const double lam_max = g0 / (g1 + theta * (g0 - g1));  // shared endpoint of both curves
    // Both equality loci run from (1, lam_max) to (lam_max, 1).
    const double beta = 2.0 - (1.0 - theta) * (1.0 - g1 / g0);  // trace-lower: 1/l1 + 1/l2 = beta
    const double bound_ub = (theta > 0.0)
                                ? 2.0 / (1.0 - theta) + theta / (1.0 - theta) * (g0 / g1 - 1.0)
                                : 0.0;

    std::vector<RegionCurvePoint> points;
    points.reserve(2 * static_cast<std::size_t>(n_points));
    for (int curve = 0; curve < 2; ++curve) {
        for (int k = 0; k < n_points; ++k) {
            const double l1 = 1.0 + (lam_max - 1.0) * k / (n_points - 1);
            double l2;
            if (curve == 0) {
                if (theta == 0.0) {
                    l2 = (1.0 + g0 / g1) - l1;
                } else if (theta == 1.0) {
                    l2 = 1.0;  // all-core composite: the locus is the point (1,1)
                } else {
                    const double s = bound_ub - 1.0 / (1.0 - theta * l1);
                    l2 = (s - 1.0) / (theta * s);
                }
            } else {
                l2 = 1.0 / (beta - 1.0 / l1);
            }
            points.push_back({curve, l1, l2});
        }
    }
    return points;
}

void write_region_csv(std::ostream& os, const std::vector<RegionCurvePoint>& points) {
    os << "curve_id,lambda1,lambda2\n";
    char buf[96];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", p.curve_id, p.lambda1, p.lambda2);
        os << buf;
    }
}

bool region_contains(double lambda1, double lambda2, double theta, const PhasePair& phases,
                     double tolerance) {
    const SymTensor m = SymTensor::diagonal(std::vector<double>{lambda1, lambda2});
    try {
        if (theta == 0.0) return check_trace_zero(m, phases, tolerance).member;
        return check_trace_theta(m, theta, phases, tolerance).all_ok();
    } catch (const SingularTensor&) {
        return false;
    } catch (const NotPositiveDefinite&) {
        return false;
    }
}

}  // namespace polarize
