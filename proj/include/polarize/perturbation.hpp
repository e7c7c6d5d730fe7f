#ifndef POLARIZE_PERTURBATION_HPP
#define POLARIZE_PERTURBATION_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "polarize/phase_pair.hpp"
#include "polarize/sym_tensor.hpp"

namespace polarize {

/// Named catalog of boundary data / boundary test functions on the unit
/// square: linear_x, linear_y, bilinear, fourier_k (harmonic,
/// sin(k pi x) sinh(k pi y) / sinh(k pi)), and const (the constant 1,
/// useful as a total-flux test function).
struct BoundaryFn {
    enum class Kind { LinearX, LinearY, Bilinear, Fourier, One };
    Kind kind = Kind::LinearX;
    int k = 1;

    double operator()(double x, double y) const;
    static BoundaryFn from_name(const std::string& name, int k = 1);
    std::string name() const;
};

enum class InclusionShape { Disk, Square };

struct Inclusion {
    InclusionShape shape = InclusionShape::Disk;
    double cx = 0.5, cy = 0.5;
    double size = 0.1;  // radius (disk) or half side (square)
};

/// Periodic array of square inclusions filling the support box with
/// `periods` periods per side and per-period inclusion fraction theta.
struct CompositeRegion {
    double x0 = 0.25, y0 = 0.25, x1 = 0.75, y1 = 0.75;
    int periods = 4;
    double theta = 0.25;
};

/// Dirichlet problem on the unit square with inclusions away from the
/// boundary (margin of at least 2 grid cells).
struct DomainProblem {
    int resolution = 64;
    PhasePair phases{1.0, 2.0};
    std::vector<Inclusion> inclusions;
    std::optional<CompositeRegion> composite;
    BoundaryFn dirichlet_data;

    void validate() const;
    /// Per-element inclusion indicator of the inhomogeneous coefficient.
    std::vector<std::uint8_t> element_chi() const;
    /// Per-element indicator of the composite support box (empty optional -> all zero).
    std::vector<std::uint8_t> support_elements() const;
    double inclusion_volume() const;  // pixel measure of element_chi
};

enum class ConductivityChoice { Inhomogeneous, Homogenized, Background };

/// A converged FEM solution together with the element coefficients it was
/// solved with (a11, a12, a22 per element; scalar fields have a12 = 0).
struct DirichletSolution {
    int resolution = 0;
    std::vector<double> u;  // (R+1)^2 nodal values
    std::vector<double> a11, a12, a22;
    double residual = 0.0;
    int iterations = 0;
};

/// Bilinear FEM with eliminated Dirichlet rows, diagonally preconditioned CG.
/// `gamma_star` is required for the homogenized choice: it is used inside the
/// composite support when one is present, else as the global coefficient.
/// `data_override` substitutes the Dirichlet data (used for the background
/// Green-superposition solves G_phi).
DirichletSolution solve_dirichlet(const DomainProblem& problem, ConductivityChoice choice,
                                  double tol, const SymTensor* gamma_star = nullptr,
                                  const BoundaryFn* data_override = nullptr);

struct FunctionalValue {
    double volume_form = 0.0;    // robust evaluation, used as "measured"
    double boundary_form = 0.0;  // consistent-flux cross-check
};

/// Weak-form boundary current perturbation against the test function phi
/// whose background solve is `g_phi`:
///   volume form  = int (gamma_eps - gamma0) grad u_eps . grad G_phi
///                + int (gamma0 I - gamma_hom) grad u_hom . grad G_phi
///   boundary form = a_eps(u_eps, phi~) - a_hom(u_hom, phi~)
/// with phi~ the zero-interior nodal extension of phi.
FunctionalValue boundary_functional(const DirichletSolution& u_eps,
                                    const DirichletSolution& u_hom,
                                    const DirichletSolution& g_phi, const BoundaryFn& phi,
                                    const PhasePair& phases);

/// Leading-order prediction: the inclusion term is averaged with the uniform
/// measure over `support` (per-element indicator) and scaled by the inclusion
/// volume; the second term integrates (gamma0 I - gamma_hom) from the
/// homogenized solve coefficients.
double asymptotic_prediction(const SymTensor& m_theta, const std::vector<std::uint8_t>& support,
                             const DirichletSolution& u_hom, const DirichletSolution& g_phi,
                             double inclusion_volume, const PhasePair& phases);

struct StudyRow {
    double epsilon = 0.0;  // characteristic layout size
    double volume = 0.0;
    double measured = 0.0;
    double predicted = 0.0;
    double residual = 0.0;
};

struct StudyResult {
    std::vector<StudyRow> rows;
    double fitted_rate = 0.0;  // slope of log|residual| vs log(epsilon)
};

/// Runs the shrinking-layout family: per member solves u_eps, u_hom and the
/// shared G_phi, evaluates measured/predicted/residual. `m_theta` is the
/// polarization tensor used in the prediction; `gamma_star` feeds the
/// homogenized solves (nullptr = background gamma0 I).
StudyResult convergence_study(const std::vector<DomainProblem>& family,
                              const SymTensor& m_theta, const BoundaryFn& phi, double tol,
                              const SymTensor* gamma_star = nullptr);

/// JSON description of a study (see README for the schema).
struct PerturbationStudySpec {
    std::vector<DomainProblem> family;
    BoundaryFn phi;
    std::string regime;  // "dilute" or "periodic"
    std::optional<CompositeRegion> region;

    static PerturbationStudySpec from_json(std::istream& is);
};

/// CSV emission, columns: epsilon,volume,measured,predicted,residual.
void write_study_csv(std::ostream& os, const StudyResult& study);

}  // namespace polarize

#endif
