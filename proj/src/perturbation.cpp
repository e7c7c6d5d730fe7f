#include "polarize/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "polarize/detail/fem_kernels.hpp"
#include "polarize/parallel.hpp"

namespace polarize {

namespace {

using detail::ElementKernels;

constexpr int kIterationFloor = 2000;
constexpr int kIterationPerRes = 200;

}  // namespace

double BoundaryFn::operator()(double x, double y) const {
    switch (kind) {
        case Kind::LinearX: return x;
        case Kind::LinearY: return y;
        case Kind::Bilinear: return x * y;
        case Kind::Fourier: {
            const double kp = k * 3.14159265358979323846;
            return std::sin(kp * x) * std::sinh(kp * y) / std::sinh(kp);
        }
        case Kind::One: return 1.0;
    }
    throw InternalError("BoundaryFn: unreachable");
}

BoundaryFn BoundaryFn::from_name(const std::string& name, int k) {
    BoundaryFn fn;
    fn.k = k;
    if (name == "linear_x") {
        fn.kind = Kind::LinearX;
    } else if (name == "linear_y") {
        fn.kind = Kind::LinearY;
    } else if (name == "bilinear") {
        fn.kind = Kind::Bilinear;
    } else if (name == "fourier" || name == "fourier_k") {
        fn.kind = Kind::Fourier;
    } else if (name.rfind("fourier_", 0) == 0) {
        fn.kind = Kind::Fourier;
        fn.k = std::stoi(name.substr(8));
    } else if (name == "const") {
        fn.kind = Kind::One;
    } else {
        throw ValidationError("unknown boundary function: " + name);
    }
    if (fn.k < 1) throw ValidationError("boundary function frequency must be >= 1");
    return fn;
}

std::string BoundaryFn::name() const {
    switch (kind) {
        case Kind::LinearX: return "linear_x";
        case Kind::LinearY: return "linear_y";
        case Kind::Bilinear: return "bilinear";
        case Kind::Fourier: return "fourier_" + std::to_string(k);
        case Kind::One: return "const";
    }
    return "?";
}

void DomainProblem::validate() const {
    if (resolution < 4) throw ValidationError("DomainProblem: resolution must be >= 4");
    const double margin = 2.0 / resolution;
    for (const auto& inc : inclusions) {
        if (inc.size <= 0.0) throw ValidationError("DomainProblem: inclusion size must be positive");
        const double d = std::min({inc.cx - inc.size, inc.cy - inc.size,
                                   1.0 - inc.cx - inc.size, 1.0 - inc.cy - inc.size});
        if (d < margin)
            throw ValidationError("DomainProblem: inclusion closer than 2 cells to the boundary");
    }
    if (composite) {
        const auto& c = *composite;
        if (!(c.x0 < c.x1) || !(c.y0 < c.y1) || c.periods < 1 || c.theta <= 0.0 || c.theta >= 1.0)
            throw ValidationError("DomainProblem: malformed composite region");
        const double d = std::min({c.x0, c.y0, 1.0 - c.x1, 1.0 - c.y1});
        if (d < margin)
            throw ValidationError("DomainProblem: composite closer than 2 cells to the boundary");
    }
}

std::vector<std::uint8_t> DomainProblem::element_chi() const {
    validate();
    const int r = resolution;
    std::vector<std::uint8_t> chi(static_cast<std::size_t>(r) * r, 0);
    const double side_frac = composite ? std::sqrt(composite->theta) : 0.0;
    for (int ey = 0; ey < r; ++ey) {
        for (int ex = 0; ex < r; ++ex) {
            const double x = (ex + 0.5) / r;
            const double y = (ey + 0.5) / r;
            bool inside = false;
            for (const auto& inc : inclusions) {
                if (inc.shape == InclusionShape::Disk) {
                    const double dx = x - inc.cx, dy = y - inc.cy;
                    inside = dx * dx + dy * dy < inc.size * inc.size;
                } else {
                    inside = std::abs(x - inc.cx) < inc.size && std::abs(y - inc.cy) < inc.size;
                }
                if (inside) break;
            }
            if (!inside && composite) {
                const auto& c = *composite;
                if (x > c.x0 && x < c.x1 && y > c.y0 && y < c.y1) {
                    const double period = (c.x1 - c.x0) / c.periods;
                    // centered square of side sqrt(theta) * period in each cell
                    const double lx = std::fmod(x - c.x0, period) / period;
                    const double ly = std::fmod(y - c.y0, period) / period;
                    inside = std::abs(lx - 0.5) < 0.5 * side_frac &&
                             std::abs(ly - 0.5) < 0.5 * side_frac;
                }
            }
            if (inside) chi[static_cast<std::size_t>(ex) + static_cast<std::size_t>(r) * ey] = 1;
        }
    }
    return chi;
}

std::vector<std::uint8_t> DomainProblem::support_elements() const {
    const int r = resolution;
    std::vector<std::uint8_t> sup(static_cast<std::size_t>(r) * r, 0);
    if (!composite) return sup;
    for (int ey = 0; ey < r; ++ey)
        for (int ex = 0; ex < r; ++ex) {
            const double x = (ex + 0.5) / r;
            const double y = (ey + 0.5) / r;
            if (x > composite->x0 && x < composite->x1 && y > composite->y0 && y < composite->y1)
                sup[static_cast<std::size_t>(ex) + static_cast<std::size_t>(r) * ey] = 1;
        }
    return sup;
}

double DomainProblem::inclusion_volume() const {
    const auto chi = element_chi();
    const double h = 1.0 / resolution;
    std::size_t count = 0;
    for (auto c : chi) count += c;
    return static_cast<double>(count) * h * h;
}

namespace {

struct Grid {
    int r;
    int nper;  // nodes per side

    explicit Grid(int resolution) : r(resolution), nper(resolution + 1) {}
    std::size_t nodes() const { return static_cast<std::size_t>(nper) * nper; }
    std::size_t node(int i, int j) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(nper) * j; }
    bool on_boundary(int i, int j) const { return i == 0 || j == 0 || i == r || j == r; }

    void element_nodes(int ex, int ey, std::size_t* out) const {
        out[0] = node(ex, ey);
        out[1] = node(ex + 1, ey);
        out[2] = node(ex, ey + 1);
        out[3] = node(ex + 1, ey + 1);
    }
};

// y += per-element K(A_e) x restricted to `x` (full vectors).
void apply_full(const Grid& grid, const ElementKernels& kern, const std::vector<double>& a11,
                const std::vector<double>& a12, const std::vector<double>& a22,
                const std::vector<double>& x, std::vector<double>& y) {
    std::fill(y.begin(), y.end(), 0.0);
    std::size_t ids[4];
    double xe[4];
    const auto& g00 = kern.grad_grad[0][0];
    const auto& g01 = kern.grad_grad[0][1];
    const auto& g10 = kern.grad_grad[1][0];
    const auto& g11 = kern.grad_grad[1][1];
    std::size_t e = 0;
    for (int ey = 0; ey < grid.r; ++ey) {
        for (int ex = 0; ex < grid.r; ++ex, ++e) {
            grid.element_nodes(ex, ey, ids);
            for (int a = 0; a < 4; ++a) xe[a] = x[ids[a]];
            const double c11 = a11[e], c12 = a12[e], c22 = a22[e];
            for (int a = 0; a < 4; ++a) {
                double acc = 0.0;
                for (int b = 0; b < 4; ++b) {
                    acc += (c11 * g00[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +
                            c12 * (g01[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +
                                   g10[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) +
                            c22 * g11[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) *
                           xe[b];
                }
                y[ids[a]] += acc;
            }
        }
    }
}

// Energy a(u,v) = sum_e (A_e grad u, grad v) for full nodal vectors.
double energy_form(const Grid& grid, const ElementKernels& kern, const std::vector<double>& a11,
                   const std::vector<double>& a12, const std::vector<double>& a22,
                   const std::vector<double>& u, const std::vector<double>& v) {
    std::size_t ids[4];
    double total = 0.0;
    const auto& g00 = kern.grad_grad[0][0];
    const auto& g01 = kern.grad_grad[0][1];
    const auto& g10 = kern.grad_grad[1][0];
    const auto& g11 = kern.grad_grad[1][1];
    std::size_t e = 0;
    for (int ey = 0; ey < grid.r; ++ey) {
        for (int ex = 0; ex < grid.r; ++ex, ++e) {
            grid.element_nodes(ex, ey, ids);
            const double c11 = a11[e], c12 = a12[e], c22 = a22[e];
            double acc = 0.0;
            for (int a = 0; a < 4; ++a) {
                const double ua = u[ids[a]];
                if (ua == 0.0) continue;
                for (int b = 0; b < 4; ++b) {
                    acc += ua *
                           (c11 * g00[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +
                            c12 * (g01[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +
                                   g10[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) +
                            c22 * g11[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) *
                           v[ids[b]];
                }
            }
            total += acc;
        }
    }
    return total;
}

}  // namespace

DirichletSolution solve_dirichlet(const DomainProblem& problem, ConductivityChoice choice,
                                  double tol, const SymTensor* gamma_star,
                                  const BoundaryFn* data_override) {
    problem.validate();
    if (!(tol > 0.0)) throw ValidationError("solve_dirichlet: tol must be positive");
    const Grid grid(problem.resolution);
    const ElementKernels& kern = ElementKernels::get(2);
    const std::size_t n_elem = static_cast<std::size_t>(grid.r) * grid.r;

    DirichletSolution sol;
    sol.resolution = problem.resolution;
    sol.a11.assign(n_elem, problem.phases.gamma0);
    sol.a12.assign(n_elem, 0.0);
    sol.a22.assign(n_elem, problem.phases.gamma0);

    switch (choice) {
        case ConductivityChoice::Background:
            break;
        case ConductivityChoice::Inhomogeneous: {
            const auto chi = problem.element_chi();
            for (std::size_t e = 0; e < n_elem; ++e)
                if (chi[e]) sol.a11[e] = sol.a22[e] = problem.phases.gamma1;
            break;
        }
        case ConductivityChoice::Homogenized: {
            if (!gamma_star)
                throw ValidationError("solve_dirichlet: homogenized choice requires gamma_star");
            if (gamma_star->dim() != 2)
                throw ValidationError("solve_dirichlet: gamma_star must be 2x2");
            if (problem.composite) {
                const auto sup = problem.support_elements();
                for (std::size_t e = 0; e < n_elem; ++e) {
                    if (!sup[e]) continue;
                    sol.a11[e] = (*gamma_star)(0, 0);
                    sol.a12[e] = (*gamma_star)(0, 1);
                    sol.a22[e] = (*gamma_star)(1, 1);
                }
            } else {
                for (std::size_t e = 0; e < n_elem; ++e) {
                    sol.a11[e] = (*gamma_star)(0, 0);
                    sol.a12[e] = (*gamma_star)(0, 1);
                    sol.a22[e] = (*gamma_star)(1, 1);
                }
            }
            break;
        }
    }

    const BoundaryFn& data = data_override ? *data_override : problem.dirichlet_data;

    // Boundary extension g: data on boundary nodes, 0 inside.
    std::vector<double> g(grid.nodes(), 0.0);
    for (int j = 0; j <= grid.r; ++j)
        for (int i = 0; i <= grid.r; ++i)
            if (grid.on_boundary(i, j))
                g[grid.node(i, j)] = data(static_cast<double>(i) / grid.r,
                                          static_cast<double>(j) / grid.r);

    // rhs = -(A g) on interior nodes.
    std::vector<double> rhs(grid.nodes(), 0.0);
    apply_full(grid, kern, sol.a11, sol.a12, sol.a22, g, rhs);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -rhs[i];
    for (int j = 0; j <= grid.r; ++j)
        for (int i = 0; i <= grid.r; ++i)
            if (grid.on_boundary(i, j)) rhs[grid.node(i, j)] = 0.0;

    // Jacobi diagonal; boundary rows are identity after elimination.
    std::vector<double> diag(grid.nodes(), 0.0);
    {
        std::size_t ids[4];
        std::size_t e = 0;
        for (int ey = 0; ey < grid.r; ++ey)
            for (int ex = 0; ex < grid.r; ++ex, ++e) {
                grid.element_nodes(ex, ey, ids);
                for (int a = 0; a < 4; ++a)
                    diag[ids[a]] += sol.a11[e] * kern.grad_grad[0][0][static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] +
                                    2.0 * sol.a12[e] * kern.grad_grad[0][1][static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] +
                                    sol.a22[e] * kern.grad_grad[1][1][static_cast<std::size_t>(a)][static_cast<std::size_t>(a)];
            }
        for (int j = 0; j <= grid.r; ++j)
            for (int i = 0; i <= grid.r; ++i)
                if (grid.on_boundary(i, j) || diag[grid.node(i, j)] == 0.0)
                    diag[grid.node(i, j)] = 1.0;
    }

    auto zero_boundary = [&](std::vector<double>& v) {
        for (int i = 0; i <= grid.r; ++i) {
            v[grid.node(i, 0)] = 0.0;
            v[grid.node(i, grid.r)] = 0.0;
            v[grid.node(0, i)] = 0.0;
            v[grid.node(grid.r, i)] = 0.0;
        }
    };

    std::vector<double> x(grid.nodes(), 0.0), rvec = rhs;
    const double bnorm = std::sqrt(std::inner_product(rhs.begin(), rhs.end(), rhs.begin(), 0.0));
    const int cap = kIterationFloor + kIterationPerRes * grid.r;
    if (bnorm > 0.0) {
        std::vector<double> z(grid.nodes()), p(grid.nodes()), q(grid.nodes());
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = rvec[i] / diag[i];
        p = z;
        double rho = std::inner_product(rvec.begin(), rvec.end(), z.begin(), 0.0);
        double rnorm = bnorm;
        int it = 0;
        while (rnorm > tol * bnorm) {
            if (++it > cap) throw SolverDiverged("solve_dirichlet: CG exceeded iteration cap");
            apply_full(grid, kern, sol.a11, sol.a12, sol.a22, p, q);
            zero_boundary(q);
            const double alpha = rho / std::inner_product(p.begin(), p.end(), q.begin(), 0.0);
            for (std::size_t i = 0; i < x.size(); ++i) {
                x[i] += alpha * p[i];
                rvec[i] -= alpha * q[i];
            }
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = rvec[i] / diag[i];
            const double rho_next = std::inner_product(rvec.begin(), rvec.end(), z.begin(), 0.0);
            const double beta = rho_next / rho;
            rho = rho_next;
            for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
            rnorm = std::sqrt(std::inner_product(rvec.begin(), rvec.end(), rvec.begin(), 0.0));
        }
        sol.residual = rnorm / bnorm;
        sol.iterations = it;
    }

    sol.u = std::move(x);
    for (std::size_t i = 0; i < sol.u.size(); ++i) sol.u[i] += g[i];
    return sol;
}

namespace {

void check_same_grid(const DirichletSolution& a, const DirichletSolution& b) {
    if (a.resolution != b.resolution)
        throw ValidationError("boundary_functional: solutions on different grids");
}

}  // namespace

FunctionalValue boundary_functional(const DirichletSolution& u_eps,
                                    const DirichletSolution& u_hom,
                                    const DirichletSolution& g_phi, const BoundaryFn& phi,
                                    const PhasePair& phases) {
    check_same_grid(u_eps, u_hom);
    check_same_grid(u_eps, g_phi);
    const Grid grid(u_eps.resolution);
    const ElementKernels& kern = ElementKernels::get(2);
    const std::size_t n_elem = static_cast<std::size_t>(grid.r) * grid.r;
    const double g0 = phases.gamma0;

    FunctionalValue out;

    // Volume form: coefficients relative to the background gamma0 I.
    std::vector<double> d11(n_elem), d12(n_elem), d22(n_elem);
    for (std::size_t e = 0; e < n_elem; ++e) {
        d11[e] = u_eps.a11[e] - g0;
        d12[e] = u_eps.a12[e];
        d22[e] = u_eps.a22[e] - g0;
    }
    out.volume_form = energy_form(grid, kern, d11, d12, d22, u_eps.u, g_phi.u);
    for (std::size_t e = 0; e < n_elem; ++e) {
        d11[e] = g0 - u_hom.a11[e];
        d12[e] = -u_hom.a12[e];
        d22[e] = g0 - u_hom.a22[e];
    }
    out.volume_form += energy_form(grid, kern, d11, d12, d22, u_hom.u, g_phi.u);

    // Consistent-flux boundary form against the zero-interior extension.
    std::vector<double> phi_ext(grid.nodes(), 0.0);
    for (int j = 0; j <= grid.r; ++j)
        for (int i = 0; i <= grid.r; ++i)
            if (grid.on_boundary(i, j))
                phi_ext[grid.node(i, j)] = phi(static_cast<double>(i) / grid.r,
                                               static_cast<double>(j) / grid.r);
    out.boundary_form =
        energy_form(grid, kern, u_eps.a11, u_eps.a12, u_eps.a22, u_eps.u, phi_ext) -
        energy_form(grid, kern, u_hom.a11, u_hom.a12, u_hom.a22, u_hom.u, phi_ext);
    return out;
}

double asymptotic_prediction(const SymTensor& m_theta, const std::vector<std::uint8_t>& support,
                             const DirichletSolution& u_hom, const DirichletSolution& g_phi,
                             double inclusion_volume, const PhasePair& phases) {
    check_same_grid(u_hom, g_phi);
    const Grid grid(u_hom.resolution);
    const ElementKernels& kern = ElementKernels::get(2);
    const std::size_t n_elem = static_cast<std::size_t>(grid.r) * grid.r;
    if (support.size() != n_elem)
        throw ValidationError("asymptotic_prediction: support size mismatch");
    const double g0 = phases.gamma0;
    const double h2 = 1.0 / (static_cast<double>(grid.r) * grid.r);

    std::size_t support_count = 0;
    for (auto s : support) support_count += s;

    double inclusion_term = 0.0;
    if (support_count > 0 && inclusion_volume > 0.0) {
        std::vector<double> m11(n_elem, 0.0), m12(n_elem, 0.0), m22(n_elem, 0.0);
        for (std::size_t e = 0; e < n_elem; ++e) {
            if (!support[e]) continue;
            m11[e] = m_theta(0, 0);
            m12[e] = m_theta(0, 1);
            m22[e] = m_theta(1, 1);
        }
        const double support_measure = static_cast<double>(support_count) * h2;
        inclusion_term = inclusion_volume * (phases.gamma1 - g0) / support_measure *
                         energy_form(grid, kern, m11, m12, m22, u_hom.u, g_phi.u);
    }

    std::vector<double> d11(n_elem), d12(n_elem), d22(n_elem);
    for (std::size_t e = 0; e < n_elem; ++e) {
        d11[e] = g0 - u_hom.a11[e];
        d12[e] = -u_hom.a12[e];
        d22[e] = g0 - u_hom.a22[e];
    }
    const double background_term = energy_form(grid, kern, d11, d12, d22, u_hom.u, g_phi.u);
    return inclusion_term + background_term;
}

StudyResult convergence_study(const std::vector<DomainProblem>& family, const SymTensor& m_theta,
                              const BoundaryFn& phi, double tol, const SymTensor* gamma_star) {
    StudyResult study;
    if (family.empty()) return study;

    for (const auto& problem : family) {
        problem.validate();
        const double h = 1.0 / problem.resolution;
        for (const auto& inc : problem.inclusions)
            if (2.0 * inc.size < 4.0 * h)
                throw UnresolvedInclusion("convergence_study: inclusion below 4 elements across");
        if (problem.composite) {
            const double period =
                (problem.composite->x1 - problem.composite->x0) / problem.composite->periods;
            if (period * std::sqrt(problem.composite->theta) < 4.0 * h)
                throw UnresolvedInclusion("convergence_study: composite below 4 elements across");
        }
    }

    study.rows.resize(family.size());
    parallel_for_index(static_cast<int>(family.size()), [&](int idx) {
        const DomainProblem& problem = family[static_cast<std::size_t>(idx)];
        const DirichletSolution u_eps =
            solve_dirichlet(problem, ConductivityChoice::Inhomogeneous, tol);
        const SymTensor background = SymTensor::identity(2).scaled(problem.phases.gamma0);
        const SymTensor* gs = gamma_star ? gamma_star : &background;
        const DirichletSolution u_hom =
            solve_dirichlet(problem, ConductivityChoice::Homogenized, tol, gs);
        const DirichletSolution g_phi =
            solve_dirichlet(problem, ConductivityChoice::Background, tol, nullptr, &phi);

        const FunctionalValue fv = boundary_functional(u_eps, u_hom, g_phi, phi, problem.phases);
        const std::vector<std::uint8_t> support =
            problem.composite ? problem.support_elements() : problem.element_chi();
        const double volume = problem.inclusion_volume();
        const double predicted =
            asymptotic_prediction(m_theta, support, u_hom, g_phi, volume, problem.phases);

        StudyRow row;
        if (problem.composite) {
            row.epsilon = (problem.composite->x1 - problem.composite->x0) /
                          problem.composite->periods;
        } else {
            double eps = 0.0;
            for (const auto& inc : problem.inclusions) eps = std::max(eps, 2.0 * inc.size);
            row.epsilon = eps;
        }
        row.volume = volume;
        row.measured = fv.volume_form;
        row.predicted = predicted;
        row.residual = fv.volume_form - predicted;
        study.rows[static_cast<std::size_t>(idx)] = row;
    });

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (const auto& row : study.rows) {
        if (std::abs(row.residual) < 1e-15 || row.epsilon <= 0.0) continue;
        const double x = std::log(row.epsilon);
        const double y = std::log(std::abs(row.residual));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++cnt;
    }
    study.fitted_rate = (cnt >= 2) ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
    return study;
}

PerturbationStudySpec PerturbationStudySpec::from_json(std::istream& is) {
    nlohmann::json j;
    is >> j;
    PerturbationStudySpec spec;
    try {
        const int resolution = j.at("resolution").get<int>();
        const PhasePair phases(j.at("gamma1").get<double>(), j.at("gamma0").get<double>());
        auto parse_fn = [](const nlohmann::json& jf) {
            return BoundaryFn::from_name(jf.at("name").get<std::string>(),
                                         jf.value("k", 1));
        };
        const BoundaryFn f = parse_fn(j.at("f"));
        spec.phi = parse_fn(j.at("phi"));
        spec.regime = j.value("regime", "dilute");

        if (spec.regime == "periodic") {
            CompositeRegion region;
            const auto& jr = j.at("region");
            region.x0 = jr.at(0).get<double>();
            region.y0 = jr.at(1).get<double>();
            region.x1 = jr.at(2).get<double>();
            region.y1 = jr.at(3).get<double>();
            region.theta = j.at("theta").get<double>();
            spec.region = region;
            for (const auto& jl : j.at("layouts")) {
                DomainProblem problem;
                problem.resolution = resolution;
                problem.phases = phases;
                problem.dirichlet_data = f;
                CompositeRegion r = region;
                r.periods = jl.at("periods").get<int>();
                problem.composite = r;
                problem.validate();
                spec.family.push_back(std::move(problem));
            }
        } else if (spec.regime == "dilute") {
            for (const auto& jl : j.at("layouts")) {
                DomainProblem problem;
                problem.resolution = resolution;
                problem.phases = phases;
                problem.dirichlet_data = f;
                for (const auto& ji : jl.at("inclusions")) {
                    Inclusion inc;
                    const std::string shape = ji.at("shape").get<std::string>();
                    if (shape == "disk") {
                        inc.shape = InclusionShape::Disk;
                    } else if (shape == "square") {
                        inc.shape = InclusionShape::Square;
                    } else {
                        throw ValidationError("inclusion shape must be disk or square");
                    }
                    inc.cx = ji.at("center").at(0).get<double>();
                    inc.cy = ji.at("center").at(1).get<double>();
                    inc.size = ji.at("size").get<double>();
                    problem.inclusions.push_back(inc);
                }
                problem.validate();
                spec.family.push_back(std::move(problem));
            }
        } else {
            throw ValidationError("regime must be dilute or periodic");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("perturbation problem JSON: ") + e.what());
    }
    if (spec.family.empty() && spec.regime != "dilute")
        throw ValidationError("perturbation problem JSON: empty layout family");
    return spec;
}

void write_study_csv(std::ostream& os, const StudyResult& study) {
    os << "epsilon,volume,measured,predicted,residual\n";
    char buf[192];
    for (const auto& row : study.rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", row.epsilon,
                      row.volume, row.measured, row.predicted, row.residual);
        os << buf;
    }
}

}  // namespace polarize
