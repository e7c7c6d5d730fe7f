// polarize: homogenized conductivity and polarization tensors for two-phase
// composites, with bound certification, laminate design, dilution studies
// and boundary-current perturbation studies on the unit square.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "polarize/bounds.hpp"
#include "polarize/cell_solver.hpp"
#include "polarize/laminate.hpp"
#include "polarize/microstructure.hpp"
#include "polarize/perturbation.hpp"
#include "polarize/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polarize;

namespace {

json tensor_json(const SymTensor& t) {
    json rows = json::array();
    for (int i = 0; i < t.dim(); ++i) {
        json row = json::array();
        for (int j = 0; j < t.dim(); ++j) row.push_back(t(i, j));
        rows.push_back(std::move(row));
    }
    return json{{"dim", t.dim()}, {"rows", std::move(rows)}};
}

SymTensor tensor_from_json(const json& j) {
    const int dim = j.at("dim").get<int>();
    std::vector<double> dense;
    for (const auto& row : j.at("rows"))
        for (const auto& v : row) dense.push_back(v.get<double>());
    return SymTensor::from_dense(dim, dense, 1e-9);
}

json report_json(const BoundsReport& r) {
    return json{{"theta", r.theta},
                {"tolerance", r.tolerance},
                {"pointwise_lower_ok", r.pointwise_lower_ok},
                {"pointwise_upper_ok", r.pointwise_upper_ok},
                {"trace_lower_ok", r.trace_lower_ok},
                {"trace_upper_ok", r.trace_upper_ok},
                {"slack_pointwise_lower", r.slack_pointwise_lower},
                {"slack_pointwise_upper", r.slack_pointwise_upper},
                {"slack_trace_lower", r.slack_trace_lower},
                {"slack_trace_upper", r.slack_trace_upper},
                {"worst_direction", r.worst_direction},
                {"member", r.member},
                {"interior", r.interior},
                {"interior_margin", r.interior_margin}};
}

struct GlobalOptions {
    double gamma0 = 2.0;
    double gamma1 = 1.0;
    double tol = 1e-10;
    double cert_tol = 1e-9;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    bool strict = false;

    PhasePair phases() const { return PhasePair(gamma1, gamma0); }
};

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot write " + path.string());
    os << contents;
}

void write_manifest(const GlobalOptions& global, const std::string& subcommand, json config) {
    config["gamma0"] = global.gamma0;
    config["gamma1"] = global.gamma1;
    config["tol"] = global.tol;
    config["cert_tol"] = global.cert_tol;
    config["out"] = global.out;
    config["strict"] = global.strict;
    if (global.seed) config["seed"] = *global.seed;
    const json manifest{{"artifact_version", kArtifactVersion},
                        {"subcommand", subcommand},
                        {"config", std::move(config)}};
    write_file(fs::path(global.out) / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (...) {
            throw ValidationError(std::string("cannot parse ") + what + ": " + text);
        }
    }
    if (out.empty()) throw ValidationError(std::string("empty ") + what);
    return out;
}

// ---------------------------------------------------------------- laminate

int run_laminate(const GlobalOptions& global, int dim, double theta, int rank,
                 const std::vector<std::string>& dir_args, const std::string& weights_arg,
                 const std::string& stages_arg, const std::string& matrix_arg) {
    const PhasePair phases = global.phases();
    MatrixPhase role;
    if (matrix_arg == "gamma0") {
        role = MatrixPhase::Gamma0;
    } else if (matrix_arg == "gamma1") {
        role = MatrixPhase::Gamma1;
    } else {
        throw ValidationError("--matrix must be gamma0 or gamma1");
    }

    std::vector<std::vector<double>> directions;
    for (const auto& d : dir_args) directions.push_back(parse_number_list(d, "--dir"));
    if (directions.empty()) {
        // default: first `rank` axes
        if (rank < 1 || rank > dim) throw ValidationError("--rank must lie in [1, dim]");
        for (int i = 0; i < rank; ++i) {
            std::vector<double> e(static_cast<std::size_t>(dim), 0.0);
            e[static_cast<std::size_t>(i)] = 1.0;
            directions.push_back(std::move(e));
        }
    }

    LaminateSpec spec;
    if (!stages_arg.empty()) {
        spec = LaminateSpec::from_stages(dim, directions,
                                         parse_number_list(stages_arg, "--stages"), role);
        spec = to_weights(spec);
    } else {
        std::vector<double> weights;
        if (!weights_arg.empty()) {
            weights = parse_number_list(weights_arg, "--weights");
        } else {
            weights.assign(directions.size(), 1.0 / static_cast<double>(directions.size()));
        }
        spec = LaminateSpec::from_weights(dim, directions, weights, theta, role);
    }

    const SymTensor gamma_star = laminate_effective_tensor(spec, phases);
    const SymTensor m_theta = laminate_polarization(spec, phases);

    json out;
    out["spec"] = json{{"dim", spec.dim},
                       {"theta", spec.theta},
                       {"matrix", matrix_arg},
                       {"directions", spec.directions},
                       {"weights", *spec.weights}};
    out["gamma_star"] = tensor_json(gamma_star);
    out["m_theta"] = tensor_json(m_theta);
    const auto [gh, ga] = mean_bounds(spec.theta, phases);
    out["mean_bounds"] = json{{"harmonic", gh}, {"arithmetic", ga}};
    bool ok = true;
    const BoundsReport pw = check_pointwise(m_theta, spec.theta, phases, global.cert_tol);
    out["bounds"]["pointwise"] = report_json(pw);
    ok = ok && pw.all_ok();
    if (spec.theta < 1.0) {
        const BoundsReport tr = check_trace_theta(m_theta, spec.theta, phases, global.cert_tol);
        out["bounds"]["trace"] = report_json(tr);
        ok = ok && tr.all_ok();
    }
    write_file(fs::path(global.out) / "laminate.json", out.dump(2) + "\n");
    write_manifest(global, "laminate",
                   json{{"dim", dim},
                        {"theta", spec.theta},
                        {"matrix", matrix_arg},
                        {"directions", spec.directions},
                        {"weights", *spec.weights}});
    if (!ok && global.strict) return 3;
    return 0;
}

// -------------------------------------------------------------- homogenize

int run_homogenize(const GlobalOptions& global, const std::string& micro_arg, int res) {
    const PhasePair phases = global.phases();
    Microstructure micro;
    if (fs::exists(micro_arg)) {
        std::ifstream is(micro_arg);
        micro = Microstructure::from_json(is);
    } else {
        const std::uint64_t* seed = global.seed ? &*global.seed : nullptr;
        micro = Microstructure::from_name(micro_arg, res, seed);
    }

    const HomogenizationResult result = homogenize(micro, phases, global.tol);

    json out;
    out["theta"] = result.theta;
    out["gamma_star"] = tensor_json(result.gamma_star);
    const auto [gh, ga] = mean_bounds(result.theta, phases);
    out["mean_bounds"] = json{{"harmonic", gh}, {"arithmetic", ga}};
    out["diagnostics"] = json{{"residuals", result.diagnostics.residuals},
                              {"iterations", result.diagnostics.iterations},
                              {"gamma_star_asymmetry", result.diagnostics.gamma_star_asymmetry},
                              {"m_direct_asymmetry", result.diagnostics.m_direct_asymmetry}};
    bool ok = true;
    if (result.m_theta_direct) {
        out["m_theta_direct"] = tensor_json(*result.m_theta_direct);
        out["m_theta_relation"] = tensor_json(*result.m_theta_relation);
        out["measure_density_note"] = result.measure_density_note;
        const BoundsReport pw =
            check_pointwise(*result.m_theta_relation, result.theta, phases, global.cert_tol);
        out["bounds"]["pointwise"] = report_json(pw);
        ok = ok && pw.all_ok();
        if (result.theta < 1.0) {
            const BoundsReport tr = check_trace_theta(*result.m_theta_relation, result.theta,
                                                      phases, global.cert_tol);
            out["bounds"]["trace"] = report_json(tr);
            ok = ok && tr.all_ok();
        }
    }
    write_file(fs::path(global.out) / "homogenize.json", out.dump(2) + "\n");
    write_manifest(global, "homogenize",
                   json{{"micro", micro_arg}, {"res", res}, {"theta", result.theta}});
    if (!ok && global.strict) return 3;
    return 0;
}

// ------------------------------------------------------------------ bounds

int run_bounds(const GlobalOptions& global, const std::string& tensor_path, double theta) {
    const PhasePair phases = global.phases();
    std::ifstream is(tensor_path);
    if (!is) throw ValidationError("cannot read --tensor file: " + tensor_path);
    json jt;
    try {
        is >> jt;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("tensor JSON: ") + e.what());
    }
    const SymTensor m = tensor_from_json(jt);

    json out;
    bool ok = true;
    if (theta == 0.0) {
        const BoundsReport r = check_trace_zero(m, phases, global.cert_tol);
        out["zero_volume"] = report_json(r);
        ok = r.member;
    } else {
        const BoundsReport pw = check_pointwise(m, theta, phases, global.cert_tol);
        out["pointwise"] = report_json(pw);
        ok = pw.all_ok();
        if (theta < 1.0) {
            const BoundsReport tr = check_trace_theta(m, theta, phases, global.cert_tol);
            out["trace"] = report_json(tr);
            ok = ok && tr.all_ok();
        }
    }
    write_file(fs::path(global.out) / "bounds.json", out.dump(2) + "\n");
    write_manifest(global, "bounds", json{{"tensor", tensor_path}, {"theta", theta}});
    if (!ok && global.strict) return 3;
    return 0;
}

// ------------------------------------------------------------------ region

int run_region(const GlobalOptions& global, double theta, int points) {
    const auto curves = sample_region_curves(2, theta, global.phases(), points);
    std::ostringstream os;
    write_region_csv(os, curves);
    write_file(fs::path(global.out) / "region.csv", os.str());
    write_manifest(global, "region", json{{"theta", theta}, {"points", points}});
    return 0;
}

// ------------------------------------------------------------------ dilute

int run_dilute(const GlobalOptions& global, const std::string& target_arg, int steps) {
    const PhasePair phases = global.phases();
    const std::vector<double> target = parse_number_list(target_arg, "--target");
    if (steps < 1) throw ValidationError("--steps must be >= 1");

    const int n = static_cast<int>(target.size());
    const double curve_sum = (n - 1) + phases.contrast();
    double sum = 0.0;
    for (double l : target) sum += l;

    json out;
    std::ostringstream csv;
    csv << "theta";
    for (int i = 1; i <= n; ++i) csv << ",lambda" << i;
    csv << ",deviation\n";
    char buf[64];

    auto row = [&](double th, const std::vector<double>& lam) {
        std::snprintf(buf, sizeof(buf), "%.17g", th);
        csv << buf;
        double dev = 0.0;
        for (int i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof(buf), ",%.17g", lam[static_cast<std::size_t>(i)]);
            csv << buf;
            dev = std::max(dev, std::abs(lam[static_cast<std::size_t>(i)] - target[static_cast<std::size_t>(i)]));
        }
        std::snprintf(buf, sizeof(buf), ",%.17g\n", dev);
        csv << buf;
    };

    if (std::abs(sum - curve_sum) <= 1e-9) {
        // Upper-curve target: rank-N design and a genuine dilution sequence.
        std::vector<double> thetas;
        for (int k = 1; k <= steps; ++k) thetas.push_back(std::pow(2.0, -k));
        const DilutionTrace trace = run_dilution_study(target, thetas, phases);
        for (std::size_t i = 0; i < thetas.size(); ++i) row(thetas[i], trace.eigenvalues[i]);
        out["mode"] = "upper_curve";
        out["limit_eigenvalues"] = trace.limit_eigenvalues;
        out["rate_estimate"] = trace.rate_estimate;
    } else {
        if (n != 2)
            throw ValidationError("interior dilution targets are supported for dim 2 only");
        if (!region_contains(target[0], target[1], 0.0, phases))
            throw ValidationError("--target lies outside the zero-volume region");
        // Strict interior: realize the same tensor at every fraction of the
        // sequence (constant-tensor dilution).
        const double cap = zero_volume_threshold(target, phases);
        const double start = std::min(0.5 * cap, 0.25);
        std::vector<double> realized_last;
        for (int k = 0; k < steps; ++k) {
            const double th = start * std::pow(2.0, -k);
            const InteriorDesign design = design_interior_realization(target, th, phases);
            realized_last = {design.polarization(0, 0), design.polarization(1, 1)};
            row(th, realized_last);
        }
        out["mode"] = "interior";
        out["threshold"] = cap;
        out["limit_eigenvalues"] = realized_last;
    }

    write_file(fs::path(global.out) / "dilute.csv", csv.str());
    write_file(fs::path(global.out) / "dilute.json", out.dump(2) + "\n");
    write_manifest(global, "dilute", json{{"target", target}, {"steps", steps}});
    return 0;
}

// ----------------------------------------------------------------- perturb

int run_perturb(const GlobalOptions& global, const std::string& problem_path, int cell_res) {
    std::ifstream is(problem_path);
    if (!is) throw ValidationError("cannot read --problem file: " + problem_path);
    const PerturbationStudySpec spec = PerturbationStudySpec::from_json(is);
    if (spec.family.empty()) {
        write_file(fs::path(global.out) / "perturb.csv",
                   "epsilon,volume,measured,predicted,residual\n");
        write_manifest(global, "perturb", json{{"problem", problem_path}});
        return 0;
    }
    const PhasePair phases = spec.family.front().phases;

    SymTensor m_used(2);
    std::optional<SymTensor> gamma_star;
    json cell_info;
    if (spec.regime == "periodic") {
        // Effective tensor and polarization of one period cell (centered
        // square inclusion at the region fraction).
        const double side = std::sqrt(spec.region->theta);
        Microstructure cell;
        cell.dim = 2;
        cell.resolution = cell_res;
        cell.chi.assign(static_cast<std::size_t>(cell_res) * cell_res, 0);
        for (int y = 0; y < cell_res; ++y)
            for (int x = 0; x < cell_res; ++x) {
                const double cx = (x + 0.5) / cell_res - 0.5;
                const double cy = (y + 0.5) / cell_res - 0.5;
                if (std::abs(cx) < 0.5 * side && std::abs(cy) < 0.5 * side)
                    cell.chi[static_cast<std::size_t>(x) + static_cast<std::size_t>(cell_res) * y] = 1;
            }
        const HomogenizationResult hom = homogenize(cell, phases, global.tol);
        gamma_star = hom.gamma_star;
        m_used = *hom.m_theta_relation;
        cell_info = json{{"cell_res", cell_res},
                         {"cell_theta", hom.theta},
                         {"gamma_star", tensor_json(hom.gamma_star)},
                         {"m_theta", tensor_json(m_used)}};
    } else {
        // Dilute regime: zero-volume polarization tensor of the inclusion
        // shape from a dilution run of the cell solver (Richardson in theta).
        for (const auto& problem : spec.family) {
            if (problem.inclusions.empty())
                throw ValidationError("dilute layouts must each list at least one inclusion");
            for (const auto& inc : problem.inclusions)
                if (inc.shape != spec.family.front().inclusions.front().shape)
                    throw ValidationError(
                        "dilute layouts must share one inclusion shape (one M^0 per study)");
        }
        const bool disks = spec.family.front().inclusions.front().shape == InclusionShape::Disk;
        auto cell_for = [&](double frac) {
            if (disks)
                return Microstructure::disk(2, cell_res, std::sqrt(frac / 3.14159265358979323846));
            Microstructure cell;
            cell.dim = 2;
            cell.resolution = cell_res;
            cell.chi.assign(static_cast<std::size_t>(cell_res) * cell_res, 0);
            const double side = std::sqrt(frac);
            for (int y = 0; y < cell_res; ++y)
                for (int x = 0; x < cell_res; ++x) {
                    const double cx = (x + 0.5) / cell_res - 0.5;
                    const double cy = (y + 0.5) / cell_res - 0.5;
                    if (std::abs(cx) < 0.5 * side && std::abs(cy) < 0.5 * side)
                        cell.chi[static_cast<std::size_t>(x) + static_cast<std::size_t>(cell_res) * y] = 1;
                }
            return cell;
        };
        const Microstructure coarse = cell_for(0.10);
        const Microstructure fine = cell_for(0.05);
        const HomogenizationResult hc = homogenize(coarse, phases, global.tol);
        const HomogenizationResult hf = homogenize(fine, phases, global.tol);
        const double tc = hc.theta, tf = hf.theta;
        m_used = *hf.m_theta_relation +
                 (*hf.m_theta_relation - *hc.m_theta_relation).scaled(tf / (tc - tf));
        cell_info = json{{"cell_res", cell_res},
                         {"dilution_thetas", std::vector<double>{tc, tf}},
                         {"m_zero", tensor_json(m_used)}};
    }

    const StudyResult study = convergence_study(spec.family, m_used, spec.phi, global.tol,
                                                gamma_star ? &*gamma_star : nullptr);
    std::ostringstream os;
    write_study_csv(os, study);
    write_file(fs::path(global.out) / "perturb.csv", os.str());
    json out{{"regime", spec.regime},
             {"fitted_rate", study.fitted_rate},
             {"phi", spec.phi.name()},
             {"cell", cell_info}};
    write_file(fs::path(global.out) / "perturb.json", out.dump(2) + "\n");
    write_manifest(global, "perturb", json{{"problem", problem_path}, {"cell_res", cell_res}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"polarize: two-phase composite homogenization and polarization tensors"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOptions global;
    app.add_option("--gamma0", global.gamma0, "background conductivity");
    app.add_option("--gamma1", global.gamma1, "inclusion conductivity");
    app.add_option("--tol", global.tol, "iterative solver tolerance");
    app.add_option("--cert-tol", global.cert_tol, "bound certification tolerance");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "seed for randomized geometry");
    app.add_option("--out", global.out, "output directory");
    app.add_flag("--strict", global.strict, "exit 3 on bound violation");

    auto* laminate_cmd = app.add_subcommand("laminate", "closed-form sequential laminate");
    int dim = 2, rank = 1;
    double lam_theta = 0.5;
    std::vector<std::string> dirs;
    std::string weights_arg, stages_arg, matrix_arg = "gamma0";
    laminate_cmd->add_option("--dim", dim, "space dimension");
    laminate_cmd->add_option("--theta", lam_theta, "inclusion volume fraction");
    laminate_cmd->add_option("--rank", rank, "lamination rank (default directions = axes)");
    laminate_cmd->add_option("--dir", dirs, "lamination direction, e.g. 1,0 (repeatable)");
    laminate_cmd->add_option("--weights", weights_arg, "convex weights m_i, comma separated");
    laminate_cmd->add_option("--stages", stages_arg, "stage proportions theta_i, comma separated");
    laminate_cmd->add_option("--matrix", matrix_arg, "matrix phase: gamma0 | gamma1");

    auto* homog_cmd = app.add_subcommand("homogenize", "periodic cell homogenization");
    std::string micro_arg;
    int res = 64;
    homog_cmd->add_option("--micro", micro_arg, "microstructure file or generator name")
        ->required();
    homog_cmd->add_option("--res", res, "resolution for generated microstructures");

    auto* bounds_cmd = app.add_subcommand("bounds", "certify a polarization tensor");
    std::string tensor_path;
    double bounds_theta = 0.0;
    bounds_cmd->add_option("--tensor", tensor_path, "tensor JSON file")->required();
    bounds_cmd->add_option("--theta", bounds_theta, "volume fraction (0 = zero-volume)");

    auto* region_cmd = app.add_subcommand("region", "sample the attainable-region curves");
    double region_theta = 0.0;
    int region_points = 100;
    region_cmd->add_option("--theta", region_theta, "volume fraction");
    region_cmd->add_option("--points", region_points, "samples per curve");

    auto* dilute_cmd = app.add_subcommand("dilute", "dilution study toward theta = 0");
    std::string target_arg;
    int steps = 10;
    dilute_cmd->add_option("--target", target_arg, "target eigenvalues l1,l2,...")->required();
    dilute_cmd->add_option("--steps", steps, "number of fractions (theta_n halves each step)");

    auto* perturb_cmd = app.add_subcommand("perturb", "boundary-current perturbation study");
    std::string problem_path;
    int cell_res = 128;
    perturb_cmd->add_option("--problem", problem_path, "problem JSON file")->required();
    perturb_cmd->add_option("--cell-res", cell_res, "cell resolution for gamma*/M runs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*seed_opt) global.seed = seed_value;
        fs::create_directories(global.out);
        if (laminate_cmd->parsed())
            return run_laminate(global, dim, lam_theta, rank, dirs, weights_arg, stages_arg,
                                matrix_arg);
        if (homog_cmd->parsed()) return run_homogenize(global, micro_arg, res);
        if (bounds_cmd->parsed()) return run_bounds(global, tensor_path, bounds_theta);
        if (region_cmd->parsed()) return run_region(global, region_theta, region_points);
        if (dilute_cmd->parsed()) return run_dilute(global, target_arg, steps);
        if (perturb_cmd->parsed()) return run_perturb(global, problem_path, cell_res);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const SolverDiverged& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 1;
    } catch (const SingularTensor& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
