// Acceptance suite: runs every gate criterion end to end and prints one
// PASS/FAIL line per criterion. Exit status = number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "polarize/bounds.hpp"
#include "polarize/cell_solver.hpp"
#include "polarize/laminate.hpp"
#include "polarize/microstructure.hpp"
#include "polarize/perturbation.hpp"
#include "polarize/rng.hpp"

namespace fs = std::filesystem;
using namespace polarize;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double frob_diff(const SymTensor& a, const SymTensor& b) { return (a - b).frobenius_norm(); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> random_unit(Xoshiro256& rng, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    double norm = 0.0;
    do {
        norm = 0.0;
        for (double& c : v) {
            c = rng.uniform(-1.0, 1.0);
            norm += c * c;
        }
    } while (norm < 1e-4);
    norm = std::sqrt(norm);
    for (double& c : v) c /= norm;
    return v;
}

// ---------------------------------------------------------------------------
// Criterion 1: closed-form laminate oracle vs the cell solver on the
// pixel-exact axis-aligned rank-1 subfamily; 100 random specs total.
Outcome criterion1(const PhasePair& phases) {
    const auto t0 = std::chrono::steady_clock::now();
    Xoshiro256 rng(118813u);
    double worst_consistency = 0.0;
    double worst_fem = 0.0;
    int fem_checked_2d = 0, fem_checked_3d = 0;

    for (int i = 0; i < 100; ++i) {
        LaminateSpec spec;
        const bool axis_rank1 = (i % 3 == 0);
        if (axis_rank1) {
            const bool three_d = (i % 15 == 0);
            const int n = three_d ? 3 : 2;
            const int res = three_d ? 32 : 128;
            const int axis = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
            const int width = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(res - 1)));
            const double theta = static_cast<double>(width) / res;  // pixel-exact
            std::vector<double> e(static_cast<std::size_t>(n), 0.0);
            e[static_cast<std::size_t>(axis)] = 1.0;
            spec = LaminateSpec::from_weights(n, {e}, {1.0}, theta,
                                              rng.uniform() < 0.5 ? MatrixPhase::Gamma0
                                                                  : MatrixPhase::Gamma1);
            const SymTensor oracle = laminate_effective_tensor(spec, phases);
            const Microstructure micro = Microstructure::stripe(n, res, theta, axis);
            const HomogenizationResult hom = homogenize(micro, phases, 1e-12);
            worst_fem = std::max(worst_fem, frob_diff(hom.gamma_star, oracle));
            (three_d ? fem_checked_3d : fem_checked_2d) += 1;
        } else {
            const int n = 2 + static_cast<int>(rng.uniform_int(2));
            const int p = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
            std::vector<std::vector<double>> dirs;
            std::vector<double> weights;
            double sum = 0.0;
            for (int k = 0; k < p; ++k) {
                dirs.push_back(random_unit(rng, n));
                weights.push_back(0.05 + rng.uniform());
                sum += weights.back();
            }
            for (double& w : weights) w /= sum;
            spec = LaminateSpec::from_weights(n, dirs, weights, rng.uniform(0.05, 0.95),
                                              rng.uniform() < 0.5 ? MatrixPhase::Gamma0
                                                                  : MatrixPhase::Gamma1);
        }
        // closed-form route consistency for every spec
        const SymTensor m_direct = laminate_polarization(spec, phases);
        const SymTensor m_via = polarization_from_effective(
            laminate_effective_tensor(spec, phases), spec.theta, phases);
        worst_consistency = std::max(worst_consistency, frob_diff(m_direct, m_via));
    }

    const double elapsed = seconds_since(t0);
    std::ostringstream detail;
    detail << "fem subfamily " << fem_checked_2d << "x2D(R=128) + " << fem_checked_3d
           << "x3D(R=32), worst |gamma*_fem - gamma*_laminate| = " << worst_fem
           << ", worst closed-form route gap = " << worst_consistency << ", " << elapsed
           << " s";
    return {worst_fem <= 1e-8 && worst_consistency <= 1e-10 && elapsed < 30.0, detail.str()};
}

// ---------------------------------------------------------------------------
// Criteria 2 and 3 share the 50 random-microstructure homogenizations.
struct RandomRuns {
    std::vector<SymTensor> tensors;
    std::vector<double> thetas;
    double worst_relation = 0.0;
    int failures = 0;
};

RandomRuns run_random_microstructures(const PhasePair& phases, double tol) {
    RandomRuns runs;
    Xoshiro256 rng(20260811u);
    std::vector<std::uint64_t> seeds;
    std::vector<double> thetas;
    for (int i = 0; i < 50; ++i) {
        seeds.push_back(rng.next());
        thetas.push_back(rng.uniform(0.1, 0.6));
    }
    runs.tensors.assign(50, SymTensor(2));
    runs.thetas.assign(50, 0.0);
    for (int i = 0; i < 50; ++i) {
        // The geometry is fixed at 64^2 pixels; the solve is supersampled so
        // the discrete tensor is close enough to the continuum one to
        // certify. Dilute geometries sit nearer the optimal bound and get a
        // finer grid when the first solve leaves a thin margin.
        const Microstructure base = Microstructure::random_cells(
            2, 64, thetas[static_cast<std::size_t>(i)], seeds[static_cast<std::size_t>(i)]);
        HomogenizationResult hom = homogenize(base.refined(2), phases, tol);
        const BoundsReport probe =
            check_trace_theta(*hom.m_theta_relation, hom.theta, phases, 1e-7);
        if (std::min(probe.slack_trace_lower, probe.slack_trace_upper) < 1e-3)
            hom = homogenize(base.refined(4), phases, tol);
        const double gap = frob_diff(*hom.m_theta_direct, *hom.m_theta_relation);
        runs.worst_relation = std::max(runs.worst_relation, gap);
        if (gap > 10.0 * tol) ++runs.failures;
        runs.tensors[static_cast<std::size_t>(i)] = *hom.m_theta_relation;
        runs.thetas[static_cast<std::size_t>(i)] = hom.theta;
    }
    return runs;
}

Outcome criterion2(const RandomRuns& runs, double tol) {
    std::ostringstream detail;
    detail << "50 microstructures, worst |m_direct - m_relation| = " << runs.worst_relation
           << " (cap " << 10.0 * tol << "), failures = " << runs.failures;
    return {runs.failures == 0, detail.str()};
}

Outcome criterion3(const RandomRuns& runs, const PhasePair& phases) {
    double worst_slack = 1e300;
    int violations = 0;
    for (std::size_t i = 0; i < runs.tensors.size(); ++i) {
        const BoundsReport tr =
            check_trace_theta(runs.tensors[i], runs.thetas[i], phases, 1e-7);
        worst_slack = std::min({worst_slack, tr.slack_trace_lower, tr.slack_trace_upper});
        if (!tr.trace_lower_ok || !tr.trace_upper_ok) ++violations;
    }
    // tightness: the rank-1 matrix-gamma0 laminate attains the lower bound
    const LaminateSpec rank1 =
        LaminateSpec::from_weights(2, {{1.0, 0.0}}, {1.0}, 0.5, MatrixPhase::Gamma0);
    const SymTensor m = laminate_polarization(rank1, phases);
    const BoundsReport tight = check_trace_theta(m, 0.5, phases, 1e-9);
    const double tight_gap = std::abs(tight.slack_trace_lower);

    std::ostringstream detail;
    detail << "worst trace slack = " << worst_slack << " (>= -1e-7), violations = "
           << violations << ", rank-1 lb tightness |slack| = " << tight_gap;
    return {violations == 0 && tight_gap <= 1e-9, detail.str()};
}

// ---------------------------------------------------------------------------
// Criterion 4: dilution studies for upper-curve targets, theta_n = 2^-n.
Outcome criterion4(const PhasePair& phases) {
    std::vector<double> thetas;
    for (int n = 1; n <= 12; ++n) thetas.push_back(std::pow(2.0, -n));
    const std::vector<std::vector<double>> targets{
        {2.0, 1.0}, {1.5, 1.5}, {1.75, 1.25}, {2.0, 1.0, 1.0}, {1.5, 1.5, 1.0}};
    double worst_trace_gap = 0.0;
    double worst_rate_dev = 0.0;
    for (const auto& target : targets) {
        const int n = static_cast<int>(target.size());
        const DilutionTrace trace = run_dilution_study(target, thetas, phases);
        const double bound = (n - 1) + phases.contrast();
        worst_trace_gap =
            std::max(worst_trace_gap, std::abs(trace.limit_estimate.trace() - bound));
        worst_rate_dev = std::max(worst_rate_dev, std::abs(trace.rate_estimate - 1.0));
    }
    std::ostringstream detail;
    detail << targets.size() << " upper-curve targets (N=2,3), worst |trace(limit) - bound| = "
           << worst_trace_gap << " (cap 1e-4), worst |rate - 1| = " << worst_rate_dev
           << " (cap 0.2)";
    return {worst_trace_gap <= 1e-4 && worst_rate_dev <= 0.2, detail.str()};
}

// ---------------------------------------------------------------------------
// Criterion 5: optimality sweep over a 20x20 eigenvalue grid.
Outcome criterion5(const PhasePair& phases) {
    int members = 0, outsiders = 0, realized = 0;
    double worst_gap = 0.0;
    bool classification_ok = true;

    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            const double l1 = 0.85 + 1.3 * i / 19.0;
            const double l2 = 0.85 + 1.3 * j / 19.0;
            const BoundsReport report =
                check_trace_zero(SymTensor::diagonal(std::vector<double>{l1, l2}), phases);
            // independent arithmetic for the classification
            const bool expected = l1 + l2 <= 3.0 + 1e-9 &&
                                  1.0 / l1 + 1.0 / l2 <= 1.5 + 1e-9 && l1 >= 1.0 - 1e-9 &&
                                  l2 >= 1.0 - 1e-9 && l1 <= 2.0 + 1e-9 && l2 <= 2.0 + 1e-9;
            if (report.member != expected) classification_ok = false;
            if (!report.member) {
                ++outsiders;
                continue;
            }
            ++members;

            const std::vector<double> target{l1, l2};
            std::vector<double> limit;
            if (std::abs(l1 + l2 - 3.0) <= 1e-9) {
                std::vector<double> thetas;
                for (int n = 1; n <= 10; ++n) thetas.push_back(std::pow(2.0, -n));
                limit = run_dilution_study(target, thetas, phases).limit_eigenvalues;
            } else {
                const double cap = zero_volume_threshold(target, phases);
                double theta = std::min(0.5 * cap, 0.125);
                for (int step = 0; step < 6; ++step, theta *= 0.5) {
                    const InteriorDesign design =
                        design_interior_realization(target, theta, phases);
                    limit = {design.polarization(0, 0), design.polarization(1, 1)};
                }
            }
            ++realized;
            worst_gap = std::max(
                worst_gap, std::max(std::abs(limit[0] - l1), std::abs(limit[1] - l2)));
        }
    }
    std::ostringstream detail;
    detail << members << " in-region points realized (" << realized << "), " << outsiders
           << " rejected, classification consistent = " << (classification_ok ? "yes" : "no")
           << ", worst |realized - target| = " << worst_gap << " (cap 1e-3)";
    return {classification_ok && members == realized && members > 0 && outsiders > 0 &&
                worst_gap <= 1e-3,
            detail.str()};
}

// ---------------------------------------------------------------------------
// Criterion 6: checkerboard self-convergence toward sqrt(gamma0 gamma1) I.
Outcome criterion6(const PhasePair& phases) {
    const auto t0 = std::chrono::steady_clock::now();
    const double exact = std::sqrt(phases.gamma0 * phases.gamma1);
    const SymTensor limit = SymTensor::identity(2).scaled(exact);
    std::vector<double> errors;
    bool monotone = true;
    for (const int r : {32, 64, 128, 256}) {
        const HomogenizationResult hom =
            homogenize(Microstructure::checkerboard(2, r), phases, 1e-10);
        const double err = frob_diff(hom.gamma_star, limit) / limit.frobenius_norm();
        if (!errors.empty() && err >= errors.back()) monotone = false;
        errors.push_back(err);
    }
    const double elapsed = seconds_since(t0);
    std::ostringstream detail;
    detail << "relative errors";
    for (double e : errors) detail << " " << e;
    detail << ", monotone = " << (monotone ? "yes" : "no") << ", " << elapsed << " s";
    return {monotone && errors.back() <= 1e-2 && elapsed < 120.0, detail.str()};
}

// ---------------------------------------------------------------------------
// Criterion 7: weak-form validation of the boundary-current asymptotics.
Outcome criterion7(const PhasePair& phases) {
    const double tol = 1e-12;
    const BoundaryFn phi = BoundaryFn::from_name("linear_x");
    std::ostringstream detail;

    // zero-volume disk polarization from a dilution run of the cell solver
    const auto cell_a = Microstructure::disk(2, 256, std::sqrt(0.10 / 3.14159265358979323846));
    const auto cell_b = Microstructure::disk(2, 256, std::sqrt(0.05 / 3.14159265358979323846));
    const HomogenizationResult ha = homogenize(cell_a, phases, 1e-11);
    const HomogenizationResult hb = homogenize(cell_b, phases, 1e-11);
    const SymTensor m_zero =
        *hb.m_theta_relation +
        (*hb.m_theta_relation - *ha.m_theta_relation).scaled(hb.theta / (ha.theta - hb.theta));

    // (a) shrinking disks at R = 256
    std::vector<DomainProblem> disks;
    for (int k = 0; k <= 3; ++k) {
        DomainProblem p;
        p.resolution = 256;
        p.phases = phases;
        p.dirichlet_data = BoundaryFn::from_name("linear_x");
        p.inclusions.push_back({InclusionShape::Disk, 0.5, 0.5, 0.2 / std::pow(2.0, k)});
        disks.push_back(p);
    }
    const StudyResult dilute = convergence_study(disks, m_zero, phi, tol);
    bool ratios_decreasing = true;
    double last_ratio = 0.0;
    detail << "disk |res|/|meas|:";
    for (std::size_t k = 0; k < dilute.rows.size(); ++k) {
        const double ratio = std::abs(dilute.rows[k].residual / dilute.rows[k].measured);
        if (k > 0 && ratio >= last_ratio) ratios_decreasing = false;
        last_ratio = ratio;
        char buf[32];
        std::snprintf(buf, sizeof(buf), " %.2e", ratio);
        detail << buf;
    }
    const bool part_a = ratios_decreasing && last_ratio < 0.1;

    // (b) periodic arrays with |omega| = delta: gamma*/M from the period cell
    Microstructure cell;
    cell.dim = 2;
    cell.resolution = 128;
    cell.chi.assign(128 * 128, 0);
    for (int y = 32; y < 96; ++y)
        for (int x = 32; x < 96; ++x) cell.chi[static_cast<std::size_t>(x) + 128 * static_cast<std::size_t>(y)] = 1;
    const HomogenizationResult hom_cell = homogenize(cell, phases, 1e-11);

    auto periodic_problem = [&](int periods, int resolution) {
        DomainProblem p;
        p.resolution = resolution;
        p.phases = phases;
        p.dirichlet_data = BoundaryFn::from_name("linear_x");
        p.composite = CompositeRegion{0.25, 0.25, 0.75, 0.75, periods, 0.25};
        return p;
    };
    const std::vector<DomainProblem> periodic{periodic_problem(4, 128), periodic_problem(4, 256),
                                              periodic_problem(8, 256),
                                              periodic_problem(16, 256)};
    const StudyResult arrays = convergence_study(periodic, *hom_cell.m_theta_relation, phi, tol,
                                                 &hom_cell.gamma_star);
    double worst_predicted = 0.0;
    for (const auto& row : arrays.rows)
        worst_predicted = std::max(worst_predicted, std::abs(row.predicted));
    const double measured_coarse = std::abs(arrays.rows[0].measured);  // 4x4 at R=128
    const double measured_fine = std::abs(arrays.rows[1].measured);    // 4x4 at R=256

    // literal no-inclusion control run: identical systems, identically zero
    DomainProblem ctrl;
    ctrl.resolution = 256;
    ctrl.phases = phases;
    ctrl.dirichlet_data = BoundaryFn::from_name("linear_x");
    const DirichletSolution c_eps = solve_dirichlet(ctrl, ConductivityChoice::Inhomogeneous, tol);
    const SymTensor bg = SymTensor::identity(2).scaled(phases.gamma0);
    const DirichletSolution c_hom =
        solve_dirichlet(ctrl, ConductivityChoice::Homogenized, tol, &bg);
    const DirichletSolution c_g =
        solve_dirichlet(ctrl, ConductivityChoice::Background, tol, nullptr, &phi);
    const double control = std::abs(
        boundary_functional(c_eps, c_hom, c_g, phi, phases).volume_form);

    // discretization noise floor: two-grid difference for the same layout
    const double floor_estimate = std::abs(measured_fine - measured_coarse);
    const bool part_b = worst_predicted <= 1e-10 && measured_fine < measured_coarse &&
                        measured_fine <= 10.0 * floor_estimate;

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "; periodic |measured| 4x4: %.2e (R=128) -> %.2e (R=256), floor %.2e, "
                  "literal control %.1e, worst |predicted| %.1e",
                  measured_coarse, measured_fine, floor_estimate, control, worst_predicted);
    detail << buf;
    return {part_a && part_b, detail.str()};
}

// ---------------------------------------------------------------------------
// Criterion 8: byte-identical artifacts across reruns of the CLI.
int run_cli(const std::string& cli, const std::string& workdir, const std::string& args) {
    const std::string cmd =
        "cd " + workdir + " && " + cli + " " + args + " > /dev/null 2> cli_err.txt";
    const int status = std::system(cmd.c_str());
    return (status >= 256) ? status >> 8 : status;
}

Outcome criterion8(const std::string& cli) {
    if (cli.empty()) return {false, "polarize CLI path not supplied"};
    const fs::path root = fs::temp_directory_path() / "polarize_acceptance";
    std::error_code ec;
    fs::remove_all(root, ec);
    fs::create_directories(root);

    // shared inputs
    const fs::path tensor_file = root / "tensor.json";
    {
        std::ofstream os(tensor_file);
        os << R"({"dim":2,"rows":[[1.3333333333333333,0.0],[0.0,1.0]]})";
    }
    const fs::path problem_file = root / "problem.json";
    {
        std::ofstream os(problem_file);
        os << R"({
          "resolution": 64,
          "gamma0": 2.0, "gamma1": 1.0,
          "f": {"name": "linear_x"},
          "phi": {"name": "linear_x"},
          "regime": "dilute",
          "layouts": [
            {"inclusions": [{"shape": "disk", "center": [0.5, 0.5], "size": 0.16}]},
            {"inclusions": [{"shape": "disk", "center": [0.5, 0.5], "size": 0.08}]}
          ]
        })";
    }

    const std::vector<std::pair<std::string, std::string>> commands{
        {"laminate", "--gamma0 2 --gamma1 1 laminate --theta 0.5 --rank 1 --dir 1,0"},
        {"region0", "--gamma0 2 --gamma1 1 region --theta 0 --points 100"},
        {"region_t", "--gamma0 2 --gamma1 1 region --theta 0.1 --points 50"},
        {"dilute_curve", "--gamma0 2 --gamma1 1 dilute --target 2,1 --steps 8"},
        {"dilute_interior", "--gamma0 2 --gamma1 1 dilute --target 1.4,1.4 --steps 5"},
        {"homog_random",
         "--gamma0 2 --gamma1 1 --seed 777 homogenize --micro 'random(0.3)' --res 64"},
        {"homog_stripe", "--gamma0 2 --gamma1 1 homogenize --micro 'stripe(0.5,0)' --res 64"},
        {"bounds", "--gamma0 2 --gamma1 1 bounds --tensor " + tensor_file.string() +
                       " --theta 0.5"},
        {"perturb", "--gamma0 2 --gamma1 1 perturb --problem " + problem_file.string() +
                        " --cell-res 64"},
    };

    for (const std::string run : {"a", "b"}) {
        for (const auto& [name, args] : commands) {
            const fs::path dir = root / (name + "_" + run);
            fs::create_directories(dir);
            const int code = run_cli(cli, dir.string(), "--out artifacts " + args);
            if (code != 0)
                return {false, "CLI run " + name + "_" + run + " exited with " +
                                   std::to_string(code)};
        }
    }

    // byte-compare the artifact trees
    int files_compared = 0;
    for (const auto& [name, args] : commands) {
        const fs::path da = root / (name + "_a") / "artifacts";
        const fs::path db = root / (name + "_b") / "artifacts";
        for (const auto& entry : fs::recursive_directory_iterator(da)) {
            if (!entry.is_regular_file()) continue;
            const fs::path rel = fs::relative(entry.path(), da);
            std::ifstream fa(entry.path(), std::ios::binary);
            std::ifstream fb(db / rel, std::ios::binary);
            if (!fb) return {false, "missing rerun artifact " + (db / rel).string()};
            std::stringstream sa, sb;
            sa << fa.rdbuf();
            sb << fb.rdbuf();
            if (sa.str() != sb.str())
                return {false, "artifact differs between reruns: " + name + "/" + rel.string()};
            ++files_compared;
        }
    }
    return {true, std::to_string(commands.size()) + " commands rerun, " +
                      std::to_string(files_compared) + " artifacts byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
    const PhasePair phases(1.0, 2.0);
    std::string cli;
    if (argc > 1) {
        cli = argv[1];
    } else if (const char* env = std::getenv("POLARIZE_CLI")) {
        cli = env;
    }
    if (!cli.empty()) cli = fs::absolute(cli).string();  // survives the cd in run_cli

    int failures = 0;
    auto report = [&failures](int id, const char* title, const Outcome& outcome) {
        std::printf("[%s] criterion %d (%s): %s\n", outcome.pass ? "PASS" : "FAIL", id, title,
                    outcome.detail.c_str());
        std::fflush(stdout);
        if (!outcome.pass) ++failures;
    };

    report(1, "laminate oracle equivalence", criterion1(phases));

    const double tol = 1e-10;
    const RandomRuns runs = run_random_microstructures(phases, tol);
    report(2, "polarization relation identity", criterion2(runs, tol));
    report(3, "trace-bound certification", criterion3(runs, phases));
    report(4, "zero-volume bounds via dilution", criterion4(phases));
    report(5, "optimality sweep", criterion5(phases));
    report(6, "checkerboard self-convergence", criterion6(phases));
    report(7, "boundary-current weak-form validation", criterion7(phases));
    report(8, "deterministic artifacts", criterion8(cli));

    std::printf("%d/8 criteria passed\n", 8 - failures);
    return failures;
}
