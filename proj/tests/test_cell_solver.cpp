#include <cmath>
#include <vector>

#include "doctest.h"
#include "polarize/bounds.hpp"
#include "polarize/cell_solver.hpp"
#include "polarize/laminate.hpp"
#include "polarize/rng.hpp"

using namespace polarize;

namespace {

double frob_diff(const SymTensor& a, const SymTensor& b) { return (a - b).frobenius_norm(); }

// Closed-form corrector fluctuation for an axis-aligned stripe of fraction
// theta: slopes gamma_h/gamma - 1 per material, sawtooth in the stripe
// normal, gauged to zero nodal mean.
std::vector<double> stripe_sawtooth(int resolution, double theta, const PhasePair& phases) {
    const double gh = phases.harmonic_mean(theta);
    const double s1 = gh / phases.gamma1 - 1.0;  // inclusion slope of the fluctuation
    const double s0 = gh / phases.gamma0 - 1.0;
    std::vector<double> nodal(static_cast<std::size_t>(resolution));
    double value = 0.0;
    const int width = static_cast<int>(std::lround(theta * resolution));
    const double h = 1.0 / resolution;
    for (int i = 0; i < resolution; ++i) {
        nodal[static_cast<std::size_t>(i)] = value;
        value += (i < width ? s1 : s0) * h;
    }
    double mean = 0.0;
    for (double v : nodal) mean += v;
    mean /= resolution;
    for (double& v : nodal) v -= mean;
    return nodal;
}

}  // namespace

TEST_CASE("constant cells: zero fluctuation and exact pure-phase tensors") {
    const PhasePair phases(1.0, 2.0);

    Microstructure empty;
    empty.dim = 2;
    empty.resolution = 8;
    empty.chi.assign(64, 0);
    const HomogenizationResult h0 = homogenize(empty, phases, 1e-12);
    CHECK(h0.theta == 0.0);
    CHECK(frob_diff(h0.gamma_star, SymTensor::identity(2).scaled(2.0)) <= 1e-13);
    CHECK_FALSE(h0.m_theta_direct.has_value());
    CHECK_FALSE(h0.m_theta_relation.has_value());

    Microstructure full = empty;
    full.chi.assign(64, 1);
    const HomogenizationResult h1 = homogenize(full, phases, 1e-12);
    CHECK(frob_diff(h1.gamma_star, SymTensor::identity(2)) <= 1e-13);
    CHECK(frob_diff(*h1.m_theta_direct, SymTensor::identity(2)) <= 1e-13);

    const CorrectorField field = solve_correctors(full, phases, 1e-12);
    for (const auto& fl : field.fluctuation)
        for (double v : fl) CHECK(std::abs(v) <= 1e-14);
}

TEST_CASE("stripe corrector matches the closed-form sawtooth at the nodes") {
    const PhasePair phases(1.0, 2.0);
    const int r = 16;
    const Microstructure stripe = Microstructure::stripe(2, r, 0.5, 0);
    const CorrectorField field = solve_correctors(stripe, phases, 1e-13);

    const std::vector<double> exact = stripe_sawtooth(r, 0.5, phases);
    for (int y = 0; y < r; ++y)
        for (int x = 0; x < r; ++x) {
            const double v = field.fluctuation[0][static_cast<std::size_t>(x) + static_cast<std::size_t>(r) * y];
            CHECK(v == doctest::Approx(exact[static_cast<std::size_t>(x)]).epsilon(1e-10).scale(1.0));
        }
    // transverse corrector has no fluctuation
    for (double v : field.fluctuation[1]) CHECK(std::abs(v) <= 1e-12);
    // gauge: mean zero
    for (const auto& fl : field.fluctuation) {
        double mean = 0.0;
        for (double v : fl) mean += v;
        CHECK(std::abs(mean / static_cast<double>(fl.size())) <= 1e-10);
    }
}

TEST_CASE("stripe effective and polarization tensors match the laminate closed forms") {
    const PhasePair phases(1.0, 2.0);
    for (const double theta : {0.25, 0.5, 0.75}) {
        for (const int axis : {0, 1}) {
            const Microstructure stripe = Microstructure::stripe(2, 32, theta, axis);
            const HomogenizationResult hom = homogenize(stripe, phases, 1e-12);

            std::vector<double> e(2, 0.0);
            e[static_cast<std::size_t>(axis)] = 1.0;
            const LaminateSpec oracle = LaminateSpec::from_weights(
                2, {e}, {1.0}, stripe.theta(), MatrixPhase::Gamma0);
            CHECK(frob_diff(hom.gamma_star, laminate_effective_tensor(oracle, phases)) <= 1e-8);
            CHECK(frob_diff(*hom.m_theta_direct, laminate_polarization(oracle, phases)) <= 1e-8);
        }
    }
}

TEST_CASE("3-D stripe matches the laminate closed form (FEM exact for layers)") {
    const PhasePair phases(1.0, 2.0);
    const Microstructure stripe = Microstructure::stripe(3, 16, 0.5, 2);
    const HomogenizationResult hom = homogenize(stripe, phases, 1e-12);
    const LaminateSpec oracle =
        LaminateSpec::from_weights(3, {{0.0, 0.0, 1.0}}, {1.0}, 0.5, MatrixPhase::Gamma0);
    CHECK(frob_diff(hom.gamma_star, laminate_effective_tensor(oracle, phases)) <= 1e-8);
    CHECK(frob_diff(*hom.m_theta_direct, laminate_polarization(oracle, phases)) <= 1e-8);
}

TEST_CASE("polarization routes agree and bounds hold for random microstructures") {
    const PhasePair phases(1.0, 2.0);
    const double tol = 1e-10;
    Xoshiro256 rng(1234u);
    for (int trial = 0; trial < 8; ++trial) {
        const double theta = rng.uniform(0.15, 0.6);
        const auto micro = Microstructure::random_cells(2, 48, theta, rng.next());
        const HomogenizationResult hom = homogenize(micro, phases, tol);

        // relation identity, discrete integration-by-parts
        CHECK(frob_diff(*hom.m_theta_direct, *hom.m_theta_relation) <= 10.0 * tol);
        CHECK(hom.diagnostics.gamma_star_asymmetry <= 10.0 * tol);

        // mean bounds on the effective tensor
        const auto [gh, ga] = mean_bounds(hom.theta, phases);
        const auto ev = hom.gamma_star.eigenvalues();
        CHECK(ev.front() >= gh - 10.0 * tol);
        CHECK(ev.back() <= ga + 10.0 * tol);
    }
}

TEST_CASE("trace bounds certify once the pixel geometry is resolved") {
    // One element per pixel systematically overestimates the effective
    // tensor past the optimal trace bound; a 2x refinement of the fixed
    // geometry already certifies with a comfortable margin.
    const PhasePair phases(1.0, 2.0);
    Xoshiro256 rng(4321u);
    for (int trial = 0; trial < 4; ++trial) {
        const double theta = rng.uniform(0.2, 0.5);
        const auto base = Microstructure::random_cells(2, 24, theta, rng.next());
        const HomogenizationResult hom = homogenize(base.refined(4), phases, 1e-10);
        const BoundsReport tr = check_trace_theta(*hom.m_theta_relation, hom.theta, phases, 1e-7);
        CHECK(tr.all_ok());
        const BoundsReport pw = check_pointwise(*hom.m_theta_relation, hom.theta, phases, 1e-7);
        CHECK(pw.all_ok());
    }
}

TEST_CASE("grid-shift invariance of the effective tensor") {
    const PhasePair phases(1.0, 2.0);
    const auto micro = Microstructure::random_cells(2, 32, 0.35, 77u);
    const auto shifted = micro.translated({7, 13});
    const HomogenizationResult a = homogenize(micro, phases, 1e-11);
    const HomogenizationResult b = homogenize(shifted, phases, 1e-11);
    CHECK(frob_diff(a.gamma_star, b.gamma_star) <= 1e-9);
}

TEST_CASE("pixel-exact stripes give resolution-independent results") {
    const PhasePair phases(1.0, 2.0);
    const HomogenizationResult r16 =
        homogenize(Microstructure::stripe(2, 16, 0.5, 0), phases, 1e-12);
    const HomogenizationResult r32 =
        homogenize(Microstructure::stripe(2, 32, 0.5, 0), phases, 1e-12);
    const HomogenizationResult r128 =
        homogenize(Microstructure::stripe(2, 128, 0.5, 0), phases, 1e-12);
    CHECK(frob_diff(r16.gamma_star, r32.gamma_star) <= 1e-8);
    CHECK(frob_diff(r32.gamma_star, r128.gamma_star) <= 1e-8);
}

TEST_CASE("checkerboard tends to the geometric mean of the phases") {
    const PhasePair phases(1.0, 2.0);
    const double exact = std::sqrt(phases.gamma0 * phases.gamma1);
    double prev = 1e300;
    for (const int r : {16, 32, 64}) {
        const HomogenizationResult hom =
            homogenize(Microstructure::checkerboard(2, r), phases, 1e-11);
        const double err =
            frob_diff(hom.gamma_star, SymTensor::identity(2).scaled(exact)) / exact;
        CHECK(err < prev);
        prev = err;

        // phase swap is a half-period translation here, so the duality
        // product approaches gamma0*gamma1 I only under refinement
        Microstructure swapped = Microstructure::checkerboard(2, r);
        for (auto& c : swapped.chi) c = c ? 0 : 1;
        const HomogenizationResult dual = homogenize(swapped, phases, 1e-11);
        const double g = hom.gamma_star(0, 0), gd = dual.gamma_star(0, 0);
        CHECK(std::abs(g * gd - phases.gamma0 * phases.gamma1) <= 4.0 * err * exact * exact);
    }
    CHECK(prev <= 2e-2);
}

TEST_CASE("polarization_from_effective: worked arithmetic") {
    const PhasePair phases(1.0, 2.0);
    const SymTensor pure = polarization_from_effective(SymTensor::identity(2), 1.0, phases);
    CHECK(frob_diff(pure, SymTensor::identity(2)) <= 1e-14);

    const SymTensor m = polarization_from_effective(
        SymTensor::diagonal(std::vector<double>{4.0 / 3.0, 1.5}), 0.5, phases);
    CHECK(m(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK(m(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("stripe homogenization attains the lower trace bound") {
    const PhasePair phases(1.0, 2.0);
    const HomogenizationResult hom =
        homogenize(Microstructure::stripe(2, 32, 0.5, 0), phases, 1e-12);
    const BoundsReport tr = check_trace_theta(*hom.m_theta_relation, hom.theta, phases, 1e-9);
    CHECK(std::abs(tr.slack_trace_lower) <= 1e-8);
    CHECK(tr.trace_upper_ok);
}

TEST_CASE("preconditions and error paths") {
    const PhasePair phases(1.0, 2.0);
    Microstructure tiny;
    tiny.dim = 2;
    tiny.resolution = 1;
    tiny.chi.assign(1, 0);
    CHECK_THROWS_AS(solve_correctors(tiny, phases, 1e-10), ValidationError);

    const auto micro = Microstructure::stripe(2, 8, 0.5, 0);
    CHECK_THROWS_AS(solve_correctors(micro, phases, 0.0), ValidationError);

    Microstructure empty;
    empty.dim = 2;
    empty.resolution = 8;
    empty.chi.assign(64, 0);
    const CorrectorField field = solve_correctors(empty, phases, 1e-10);
    CHECK_THROWS_AS(polarization_direct(field, empty), EmptyInclusion);
    CHECK_THROWS_AS(polarization_from_effective(SymTensor::identity(2), 0.0, phases),
                    ZeroFraction);
}
