#ifndef POLARIZE_PHASE_PAIR_HPP
#define POLARIZE_PHASE_PAIR_HPP

#include <limits>

#include "polarize/errors.hpp"

namespace polarize {

/// The two isotropic conductivities of a composite. The inclusion phase
/// gamma1 is strictly weaker than the background gamma0.
struct PhasePair {
    double gamma1;  // inclusion phase
    double gamma0;  // background phase

    PhasePair(double gamma1_, double gamma0_) : gamma1(gamma1_), gamma0(gamma0_) {
        if (!(gamma1 > 0.0) || !(gamma1 < gamma0) ||
            !(gamma0 < std::numeric_limits<double>::infinity())) {
            throw ValidationError("PhasePair requires 0 < gamma1 < gamma0 < inf");
        }
    }

    /// gamma0/gamma1 > 1.
    double contrast() const { return gamma0 / gamma1; }

    /// Harmonic mean of the phases at inclusion fraction theta.
    double harmonic_mean(double theta) const {
        return 1.0 / (theta / gamma1 + (1.0 - theta) / gamma0);
    }

    /// Arithmetic mean of the phases at inclusion fraction theta.
    double arithmetic_mean(double theta) const {
        return theta * gamma1 + (1.0 - theta) * gamma0;
    }
};

}  // namespace polarize

#endif
