#include "polarize/laminate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace polarize {

namespace {

std::vector<std::vector<double>> standard_basis(int dim) {
    std::vector<std::vector<double>> dirs(static_cast<std::size_t>(dim),
                                          std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    for (int i = 0; i < dim; ++i) dirs[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
    return dirs;
}

void check_unit(const std::vector<double>& e) {
    double n2 = 0.0;
    for (double c : e) n2 += c * c;
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-12)
        throw NonUnitDirection("laminate direction is not unit length");
}

}  // namespace

void LaminateSpec::validate() const {
    if (dim < 1) throw ValidationError("LaminateSpec: dim must be >= 1");
    if (directions.empty()) throw ValidationError("LaminateSpec: no lamination directions");
    for (const auto& e : directions) {
        if (static_cast<int>(e.size()) != dim)
            throw ValidationError("LaminateSpec: direction dimension mismatch");
        check_unit(e);
    }
    if (weights.has_value() == stage_proportions.has_value())
        throw ValidationError("LaminateSpec: exactly one of weights/stage_proportions must be set");
    if (weights) {
        if (weights->size() != directions.size())
            throw ValidationError("LaminateSpec: weights size mismatch");
        double sum = 0.0;
        for (double m : *weights) {
            if (m < -1e-14) throw ValidationError("LaminateSpec: negative weight");
            sum += m;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw ValidationError("LaminateSpec: weights must sum to 1");
        if (!(theta > 0.0) || theta > 1.0)
            throw ValidationError("LaminateSpec: theta must lie in (0,1]");
    } else {
        if (stage_proportions->size() != directions.size())
            throw ValidationError("LaminateSpec: stage_proportions size mismatch");
        for (double t : *stage_proportions)
            if (!(t > 0.0) || !(t < 1.0))
                throw ValidationError("LaminateSpec: stage proportions must lie in (0,1)");
    }
}

LaminateSpec LaminateSpec::from_weights(int dim, std::vector<std::vector<double>> directions,
                                        std::vector<double> weights, double theta,
                                        MatrixPhase matrix_phase) {
    LaminateSpec spec;
    spec.dim = dim;
    spec.directions = std::move(directions);
    spec.weights = std::move(weights);
    spec.theta = theta;
    spec.matrix_phase = matrix_phase;
    spec.validate();
    return spec;
}

LaminateSpec LaminateSpec::from_stages(int dim, std::vector<std::vector<double>> directions,
                                       std::vector<double> stage_proportions,
                                       MatrixPhase matrix_phase) {
    LaminateSpec spec;
    spec.dim = dim;
    spec.directions = std::move(directions);
    spec.stage_proportions = std::move(stage_proportions);
    spec.matrix_phase = matrix_phase;
    // Overall inclusion fraction: the core accumulates prod theta_j
    // (matrix gamma0) or prod (1-theta_j) (matrix gamma1).
    double core = 1.0;
    for (double t : *spec.stage_proportions)
        core *= (matrix_phase == MatrixPhase::Gamma0) ? t : (1.0 - t);
    spec.theta = (matrix_phase == MatrixPhase::Gamma0) ? core : 1.0 - core;
    spec.validate();
    return spec;
}

LaminateSpec to_weights(const LaminateSpec& spec) {
    spec.validate();
    if (spec.weights) return spec;
    const auto& stages = *spec.stage_proportions;
    const std::size_t p = stages.size();
    std::vector<double> coeff(p);
    double prefix = 1.0;
    for (std::size_t i = 0; i < p; ++i) {
        if (spec.matrix_phase == MatrixPhase::Gamma0) {
            coeff[i] = (1.0 - stages[i]) * prefix;
            prefix *= stages[i];
        } else {
            coeff[i] = stages[i] * prefix;
            prefix *= 1.0 - stages[i];
        }
    }
    const double total = std::accumulate(coeff.begin(), coeff.end(), 0.0);
    if (total <= 0.0) throw ValidationError("to_weights: degenerate stage proportions");
    for (double& c : coeff) c /= total;
    return LaminateSpec::from_weights(spec.dim, spec.directions, coeff, spec.theta,
                                      spec.matrix_phase);
}

LaminateSpec to_stages(const LaminateSpec& spec) {
    spec.validate();
    if (spec.stage_proportions) return spec;
    if (spec.theta >= 1.0)
        throw ValidationError("to_stages: theta = 1 has no stagewise representation");
    const auto& m = *spec.weights;
    std::vector<double> stages(m.size());
    double prefix = 1.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (spec.matrix_phase == MatrixPhase::Gamma0) {
            stages[i] = 1.0 - (1.0 - spec.theta) * m[i] / prefix;
            prefix *= stages[i];
        } else {
            stages[i] = spec.theta * m[i] / prefix;
            prefix *= 1.0 - stages[i];
        }
        if (!(stages[i] > 0.0) || !(stages[i] < 1.0))
            throw ValidationError("to_stages: weight has no stage proportion in (0,1)");
    }
    LaminateSpec out = spec;
    out.weights.reset();
    out.stage_proportions = std::move(stages);
    out.validate();
    return out;
}

SymTensor laminate_effective_tensor(const LaminateSpec& raw, const PhasePair& phases) {
    const LaminateSpec spec = to_weights(raw);
    const SymTensor a = rank_one_sum(spec.dim, spec.directions, *spec.weights);
    const double g0 = phases.gamma0;
    const double g1 = phases.gamma1;
    try {
        if (spec.matrix_phase == MatrixPhase::Gamma0) {
            // theta (gamma* - gamma0 I)^{-1} = (gamma1-gamma0)^{-1} I + (1-theta)/gamma0 sum m_i e_i e_i
            SymTensor b = SymTensor::identity(spec.dim).scaled(1.0 / (g1 - g0)) +
                          a.scaled((1.0 - spec.theta) / g0);
            return SymTensor::identity(spec.dim).scaled(g0) + b.inverse().scaled(spec.theta);
        }
        // (1-theta)(gamma* - gamma1 I)^{-1} = (gamma0-gamma1)^{-1} I + theta/gamma1 sum m_i e_i e_i
        if (spec.theta >= 1.0) return SymTensor::identity(spec.dim).scaled(g1);
        SymTensor b = SymTensor::identity(spec.dim).scaled(1.0 / (g0 - g1)) +
                      a.scaled(spec.theta / g1);
        return SymTensor::identity(spec.dim).scaled(g1) + b.inverse().scaled(1.0 - spec.theta);
    } catch (const SingularTensor&) {
        throw DegenerateFormula("laminate_effective_tensor: singular closed-form system");
    }
}

SymTensor laminate_polarization(const LaminateSpec& spec, const PhasePair& phases) {
    spec.validate();
    if (!spec.weights)
        throw ValidationError(
            "laminate_polarization requires the weights parameterization (see to_weights)");
    const int n = spec.dim;
    if (spec.theta >= 1.0) return SymTensor::identity(n);
    const SymTensor a = rank_one_sum(n, spec.directions, *spec.weights);
    const double g0 = phases.gamma0;
    const double g1 = phases.gamma1;
    try {
        if (spec.matrix_phase == MatrixPhase::Gamma0) {
            // M^{-1} = I + (1-theta)(gamma1-gamma0)/gamma0 sum m_i e_i e_i
            SymTensor minv = SymTensor::identity(n) +
                             a.scaled((1.0 - spec.theta) * (g1 - g0) / g0);
            return minv.inverse();
        }
        // (I - theta M)^{-1} = 1/(1-theta) I + theta/(1-theta) (gamma0-gamma1)/gamma1 sum m_i e_i e_i
        SymTensor q = SymTensor::identity(n).scaled(1.0 / (1.0 - spec.theta)) +
                      a.scaled(spec.theta / (1.0 - spec.theta) * (g0 - g1) / g1);
        SymTensor i_minus = q.inverse();
        return (SymTensor::identity(n) - i_minus).scaled(1.0 / spec.theta);
    } catch (const SingularTensor&) {
        throw DegenerateFormula("laminate_polarization: singular closed-form system");
    }
}

SymTensor laminate_composites(const SymTensor& a, const SymTensor& b,
                              const std::vector<double>& direction, double t) {
    if (a.dim() != b.dim() || static_cast<int>(direction.size()) != a.dim())
        throw ValidationError("laminate_composites: dimension mismatch");
    check_unit(direction);
    if (t < 0.0 || t > 1.0) throw ValidationError("laminate_composites: t outside [0,1]");
    const int n = a.dim();
    const SymTensor mean = a.scaled(t) + b.scaled(1.0 - t);
    const SymTensor diff = a - b;
    const std::vector<double> de = diff.apply(direction);
    const double denom = (1.0 - t) * a.quadratic_form(direction) + t * b.quadratic_form(direction);
    if (std::abs(denom) < 1e-300)
        throw DegenerateFormula("laminate_composites: vanishing normal stiffness");
    SymTensor out = mean;
    const double f = t * (1.0 - t) / denom;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j)
            out.set(i, j, out(i, j) - f * de[static_cast<std::size_t>(i)] * de[static_cast<std::size_t>(j)]);
    return out;
}

LaminateSpec design_laminate_for_eigenvalues(const std::vector<double>& target, double theta,
                                             const PhasePair& phases,
                                             const std::vector<double>* frame) {
    const int n = static_cast<int>(target.size());
    if (n < 1) throw ValidationError("design_laminate_for_eigenvalues: empty target");
    const double contrast = phases.contrast();
    for (double l : target) {
        if (l < 1.0 - 1e-12 || l > contrast + 1e-12)
            throw TargetOutOfRange("target eigenvalue outside [1, gamma0/gamma1]");
    }
    const double curve_sum = (n - 1) + contrast;
    const double sum = std::accumulate(target.begin(), target.end(), 0.0);
    if (std::abs(sum - curve_sum) > 1e-9)
        throw TargetOffCurve("target eigenvalues do not lie on the upper equality curve");

    std::vector<double> m(target.size());
    double msum = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        m[i] = (target[i] - 1.0) / (contrast - 1.0);
        msum += m[i];
    }
    for (double& mi : m) mi = std::max(0.0, mi / msum);  // exact convexity

    std::vector<std::vector<double>> dirs;
    if (frame) {
        if (static_cast<int>(frame->size()) != n * n)
            throw ValidationError("design_laminate_for_eigenvalues: frame size mismatch");
        for (int k = 0; k < n; ++k) {
            std::vector<double> e(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i)] = (*frame)[static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * k];
            dirs.push_back(std::move(e));
        }
    } else {
        dirs = standard_basis(n);
    }
    return LaminateSpec::from_weights(n, std::move(dirs), std::move(m), theta,
                                      MatrixPhase::Gamma1);
}

std::vector<double> dilution_eigenvalues(const std::vector<double>& weights, double theta,
                                         const PhasePair& phases) {
    if (!(theta > 0.0) || !(theta < 1.0))
        throw ValidationError("dilution_eigenvalues: theta must lie in (0,1)");
    double sum = 0.0;
    for (double m : weights) {
        if (m < -1e-14 || m > 1.0 + 1e-14)
            throw ValidationError("dilution_eigenvalues: weight outside [0,1]");
        sum += m;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("dilution_eigenvalues: weights must sum to 1");
    const double jump = phases.gamma0 - phases.gamma1;
    std::vector<double> out(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i)
        out[i] = (phases.gamma1 + jump * weights[i]) / (phases.gamma1 + theta * jump * weights[i]);
    return out;
}

DilutionTrace run_dilution_study(const std::vector<double>& target,
                                 const std::vector<double>& theta_sequence,
                                 const PhasePair& phases) {
    if (theta_sequence.empty())
        throw ValidationError("run_dilution_study: empty theta sequence");
    for (std::size_t i = 0; i < theta_sequence.size(); ++i) {
        if (!(theta_sequence[i] > 0.0) || !(theta_sequence[i] < 1.0))
            throw ValidationError("run_dilution_study: theta_n must lie in (0,1)");
        if (i > 0 && !(theta_sequence[i] < theta_sequence[i - 1]))
            throw ValidationError("run_dilution_study: theta sequence must strictly decrease");
    }
    const LaminateSpec design =
        design_laminate_for_eigenvalues(target, theta_sequence.front(), phases);
    const auto& m = *design.weights;
    const int n = design.dim;

    DilutionTrace trace;
    trace.thetas = theta_sequence;
    trace.tensors.reserve(theta_sequence.size());
    std::vector<double> devs;
    for (double th : theta_sequence) {
        const auto lam = dilution_eigenvalues(m, th, phases);
        EigenDecomposition ed;
        ed.values = lam;
        ed.vectors.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                ed.vectors[static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * k] =
                    design.directions[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
        trace.tensors.push_back(SymTensor::from_eigen(ed));
        trace.eigenvalues.push_back(lam);
        double dev = 0.0;
        for (std::size_t i = 0; i < lam.size(); ++i)
            dev = std::max(dev, std::abs(lam[i] - target[i]));
        devs.push_back(dev);
    }

    // First-order Richardson in theta from the last two fractions.
    const std::size_t k = trace.tensors.size() - 1;
    if (k == 0) {
        trace.limit_estimate = trace.tensors[0];
        trace.limit_eigenvalues = trace.eigenvalues[0];
    } else {
        const double th_k = theta_sequence[k], th_p = theta_sequence[k - 1];
        const double f = th_k / (th_p - th_k);
        trace.limit_estimate =
            trace.tensors[k] + (trace.tensors[k] - trace.tensors[k - 1]).scaled(f);
        trace.limit_eigenvalues.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            trace.limit_eigenvalues[static_cast<std::size_t>(i)] =
                trace.eigenvalues[k][static_cast<std::size_t>(i)] +
                f * (trace.eigenvalues[k][static_cast<std::size_t>(i)] -
                     trace.eigenvalues[k - 1][static_cast<std::size_t>(i)]);
    }

    // Least-squares slope of log(dev) vs log(theta).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t i = 0; i < devs.size(); ++i) {
        if (devs[i] < 1e-14) continue;
        const double x = std::log(theta_sequence[i]);
        const double y = std::log(devs[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++cnt;
    }
    trace.rate_estimate = (cnt >= 2)
                              ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx)
                              : std::numeric_limits<double>::quiet_NaN();
    return trace;
}

double zero_volume_threshold(const std::vector<double>& target, const PhasePair& phases) {
    const double contrast = phases.contrast();
    double lmax = 0.0;
    for (double l : target) {
        if (l < 1.0 - 1e-12 || l > contrast + 1e-12)
            throw TargetOutOfRange("zero_volume_threshold: eigenvalue outside [1, gamma0/gamma1]");
        lmax = std::max(lmax, l);
    }
    const double jump = phases.gamma0 - phases.gamma1;
    auto weight_sum = [&](double t) {
        double s = 0.0;
        for (double l : target) s += phases.gamma1 * (l - 1.0) / (jump * (1.0 - t * l));
        return s;
    };
    if (weight_sum(0.0) > 1.0 + 1e-12)
        throw TargetOutOfRange("zero_volume_threshold: target lies above the upper curve");
    if (weight_sum(0.0) >= 1.0 - 1e-12) return 0.0;  // on the curve
    if (lmax <= 1.0) throw TargetOutOfRange("zero_volume_threshold: target has no inclusion mass");

    double lo = 0.0, hi = std::min(1.0, 1.0 / lmax) - 1e-14;
    if (weight_sum(hi) < 1.0)
        throw TargetOutOfRange("zero_volume_threshold: no attainable fraction");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (weight_sum(mid) < 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

// Diagonal entries of the polarization tensor of the interpolated composite
// at fraction theta: a matrix-gamma1 laminate with weights (s, 1-s) layered
// against a matrix-gamma0 laminate with weights (s, 1-s), proportion t of
// the former, lamination normal = `axis`.
std::array<double, 2> interior_eigenvalues(double s, double t, int axis, double theta,
                                           const PhasePair& phases) {
    const auto dirs = standard_basis(2);
    const std::vector<double> w{s, 1.0 - s};
    const SymTensor upper = laminate_effective_tensor(
        LaminateSpec::from_weights(2, dirs, w, theta, MatrixPhase::Gamma1), phases);
    const SymTensor lower = laminate_effective_tensor(
        LaminateSpec::from_weights(2, dirs, w, theta, MatrixPhase::Gamma0), phases);
    std::vector<double> normal(2, 0.0);
    normal[static_cast<std::size_t>(axis)] = 1.0;
    const SymTensor mixed = laminate_composites(upper, lower, normal, t);
    const double c = theta * (phases.gamma0 - phases.gamma1);
    return {(phases.gamma0 - mixed(0, 0)) / c, (phases.gamma0 - mixed(1, 1)) / c};
}

}  // namespace

InteriorDesign design_interior_realization(const std::vector<double>& target, double theta,
                                           const PhasePair& phases) {
    if (target.size() != 2)
        throw UnsupportedDimension("design_interior_realization: only N = 2 is supported");
    if (!(theta > 0.0) || !(theta < 1.0))
        throw ValidationError("design_interior_realization: theta must lie in (0,1)");

    auto residual = [&](double s, double t, int axis) {
        const auto lam = interior_eigenvalues(s, t, axis, theta, phases);
        return std::max(std::abs(lam[0] - target[0]), std::abs(lam[1] - target[1]));
    };

    InteriorDesign best;
    best.residual = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < 2 && best.residual > 1e-12; ++axis) {
        // Coarse scan seeds a damped Newton iteration with finite-difference
        // Jacobian, clamped to the parameter box.
        double s = 0.5, t = 0.5, r = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 20; ++i) {
            for (int j = 0; j <= 20; ++j) {
                const double cs = i / 20.0, ct = j / 20.0;
                const double cr = residual(cs, ct, axis);
                if (cr < r) { r = cr; s = cs; t = ct; }
            }
        }
        const double h = 1e-7;
        for (int it = 0; it < 80 && r > 1e-13; ++it) {
            const auto f0 = interior_eigenvalues(s, t, axis, theta, phases);
            const auto fs = interior_eigenvalues(std::min(s + h, 1.0), t, axis, theta, phases);
            const auto ft = interior_eigenvalues(s, std::min(t + h, 1.0), axis, theta, phases);
            const double ds_used = std::min(s + h, 1.0) - s;
            const double dt_used = std::min(t + h, 1.0) - t;
            const double j00 = (fs[0] - f0[0]) / ds_used, j01 = (ft[0] - f0[0]) / dt_used;
            const double j10 = (fs[1] - f0[1]) / ds_used, j11 = (ft[1] - f0[1]) / dt_used;
            const double det = j00 * j11 - j01 * j10;
            if (std::abs(det) < 1e-300) break;
            const double r0 = f0[0] - target[0], r1 = f0[1] - target[1];
            double step_s = -(j11 * r0 - j01 * r1) / det;
            double step_t = -(-j10 * r0 + j00 * r1) / det;
            double damp = 1.0;
            for (int back = 0; back < 30; ++back) {
                const double ns = std::clamp(s + damp * step_s, 0.0, 1.0);
                const double nt = std::clamp(t + damp * step_t, 0.0, 1.0);
                const double nr = residual(ns, nt, axis);
                if (nr < r) { s = ns; t = nt; r = nr; break; }
                damp *= 0.5;
            }
            if (damp < 1e-9) break;
        }
        if (r < best.residual) {
            best.weight = s;
            best.mix = t;
            best.axis = axis;
            best.residual = r;
        }
    }

    if (best.residual > 1e-9)
        throw TargetOutOfRange(
            "design_interior_realization: target not attainable at this fraction");

    const auto dirs = standard_basis(2);
    const std::vector<double> w{best.weight, 1.0 - best.weight};
    const SymTensor upper = laminate_effective_tensor(
        LaminateSpec::from_weights(2, dirs, w, theta, MatrixPhase::Gamma1), phases);
    const SymTensor lower = laminate_effective_tensor(
        LaminateSpec::from_weights(2, dirs, w, theta, MatrixPhase::Gamma0), phases);
    std::vector<double> normal(2, 0.0);
    normal[static_cast<std::size_t>(best.axis)] = 1.0;
    best.effective = laminate_composites(upper, lower, normal, best.mix);
    const double c = theta * (phases.gamma1 - phases.gamma0);
    best.polarization = (best.effective - SymTensor::identity(2).scaled(phases.gamma0)).scaled(1.0 / c);
    return best;
}

}  // namespace polarize
