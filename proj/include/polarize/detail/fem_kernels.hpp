#ifndef POLARIZE_DETAIL_FEM_KERNELS_HPP
#define POLARIZE_DETAIL_FEM_KERNELS_HPP

#include <array>

#include "polarize/errors.hpp"

namespace polarize::detail {

/// Exact integrals of multilinear (Q1) shape-function gradients on the unit
/// reference cube, evaluated once with tensor-product 2-point Gauss rules
/// (exact for these integrands). Local node `a` has offset bit d of a in
/// dimension d, so node 0 is the element corner and node 1 its +x neighbour.
///
/// On a physical element with side h:
///   int_e dNa/dx_i dNb/dx_j = h^(dim-2) * grad_grad[i][j][a][b]
///   int_e dNa/dx_d          = h^(dim-1) * grad_int[d][a]
struct ElementKernels {
    int dim = 0;
    int nodes = 0;
    std::array<std::array<std::array<std::array<double, 8>, 8>, 3>, 3> grad_grad{};
    std::array<std::array<double, 8>, 3> grad_int{};
    std::array<std::array<double, 8>, 8> laplace{};  // sum_d grad_grad[d][d]

    static const ElementKernels& get(int dim);
};

inline const ElementKernels& ElementKernels::get(int dim) {
    static const auto make = [](int n) {
        if (n != 2 && n != 3) throw ValidationError("ElementKernels: dim must be 2 or 3");
        ElementKernels k;
        k.dim = n;
        k.nodes = 1 << n;
        const double gp[2] = {0.5 - 0.5 / 1.7320508075688772, 0.5 + 0.5 / 1.7320508075688772};
        const int qpts = (n == 2) ? 4 : 8;
        for (int q = 0; q < qpts; ++q) {
            double xi[3] = {gp[q & 1], gp[(q >> 1) & 1], (n == 3) ? gp[(q >> 2) & 1] : 0.0};
            const double w = 1.0 / qpts;
            double grad[8][3];
            for (int a = 0; a < k.nodes; ++a) {
                for (int d = 0; d < n; ++d) {
                    double g = 1.0;
                    for (int dd = 0; dd < n; ++dd) {
                        const bool hi = (a >> dd) & 1;
                        if (dd == d)
                            g *= hi ? 1.0 : -1.0;
                        else
                            g *= hi ? xi[dd] : 1.0 - xi[dd];
                    }
                    grad[a][d] = g;
                }
            }
            for (int a = 0; a < k.nodes; ++a) {
                for (int d = 0; d < n; ++d) k.grad_int[static_cast<std::size_t>(d)][static_cast<std::size_t>(a)] += w * grad[a][d];
                for (int b = 0; b < k.nodes; ++b)
                    for (int d1 = 0; d1 < n; ++d1)
                        for (int d2 = 0; d2 < n; ++d2)
                            k.grad_grad[static_cast<std::size_t>(d1)][static_cast<std::size_t>(d2)][static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +=
                                w * grad[a][d1] * grad[b][d2];
            }
        }
        for (int a = 0; a < k.nodes; ++a)
            for (int b = 0; b < k.nodes; ++b)
                for (int d = 0; d < n; ++d)
                    k.laplace[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +=
                        k.grad_grad[static_cast<std::size_t>(d)][static_cast<std::size_t>(d)][static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        return k;
    };
    static const ElementKernels k2 = make(2);
    static const ElementKernels k3 = make(3);
    return dim == 2 ? k2 : k3;
}

}  // namespace polarize::detail

#endif
