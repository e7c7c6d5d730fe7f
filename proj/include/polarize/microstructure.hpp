#ifndef POLARIZE_MICROSTRUCTURE_HPP
#define POLARIZE_MICROSTRUCTURE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "polarize/errors.hpp"

namespace polarize {

/// Pixelated characteristic function of the inclusion phase on the periodic
/// unit cell: `chi[i]` is true where the conductivity is gamma1. Cells are
/// indexed x-fastest: i = x + R*(y + R*z).
struct Microstructure {
    int dim = 2;
    int resolution = 0;
    std::vector<std::uint8_t> chi;

    std::size_t cell_count() const;
    double theta() const;  // derived: (count of inclusion cells) / R^dim

    /// Periodic translation by whole cells along each axis.
    Microstructure translated(const std::vector<int>& shift) const;

    /// Same geometry at factor-times the resolution (each cell becomes a
    /// factor^dim block); used to resolve pixel geometries on finer grids.
    Microstructure refined(int factor) const;

    void validate() const;

    // Named generators; fractions are snapped to the pixel grid, so theta()
    // reports the realized fraction.
    static Microstructure stripe(int dim, int resolution, double theta, int axis);
    static Microstructure checkerboard(int dim, int resolution, int tiles_per_side = 2);
    static Microstructure disk(int dim, int resolution, double radius_fraction);
    static Microstructure random_cells(int dim, int resolution, double theta,
                                       std::uint64_t seed);

    /// Builds from a generator name such as "stripe(0.5,0)", "checkerboard",
    /// "checkerboard(4)", "disk(0.3)" or "random(0.3)" / "random(0.3,42)".
    /// `seed` supplies the random seed when it is not inlined; randomized
    /// geometries without any seed are a validation error.
    static Microstructure from_name(const std::string& name, int resolution,
                                    const std::uint64_t* seed = nullptr);

    // JSON: {"dim":N,"resolution":R,"encoding":"dense"|"rle","data":...}
    // dense: string of '0'/'1', x-fastest; rle: array of [bit,count] pairs.
    static Microstructure from_json(std::istream& is);
    void to_json(std::ostream& os, const std::string& encoding = "rle") const;
};

}  // namespace polarize

#endif
