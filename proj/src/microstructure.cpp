#include "polarize/microstructure.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "polarize/rng.hpp"

namespace polarize {

std::size_t Microstructure::cell_count() const {
    std::size_t n = 1;
    for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(resolution);
    return n;
}

double Microstructure::theta() const {
    std::size_t count = 0;
    for (std::uint8_t c : chi) count += c;
    return static_cast<double>(count) / static_cast<double>(cell_count());
}

void Microstructure::validate() const {
    if (dim != 2 && dim != 3)
        throw ValidationError("Microstructure: dim must be 2 or 3");
    if (resolution < 1) throw ValidationError("Microstructure: resolution must be >= 1");
    if (chi.size() != cell_count())
        throw ValidationError("Microstructure: chi size does not match resolution");
}

Microstructure Microstructure::translated(const std::vector<int>& shift) const {
    validate();
    if (static_cast<int>(shift.size()) != dim)
        throw ValidationError("translated: shift dimension mismatch");
    const int r = resolution;
    auto wrap = [r](int v) { return ((v % r) + r) % r; };
    Microstructure out = *this;
    const int rz = (dim == 3) ? r : 1;
    for (int z = 0; z < rz; ++z)
        for (int y = 0; y < r; ++y)
            for (int x = 0; x < r; ++x) {
                const std::size_t dst = static_cast<std::size_t>(x) +
                                        static_cast<std::size_t>(r) * (static_cast<std::size_t>(y) + static_cast<std::size_t>(r) * z);
                const int sx = wrap(x - shift[0]);
                const int sy = wrap(y - shift[1]);
                const int sz = (dim == 3) ? wrap(z - shift[2]) : 0;
                const std::size_t src = static_cast<std::size_t>(sx) +
                                        static_cast<std::size_t>(r) * (static_cast<std::size_t>(sy) + static_cast<std::size_t>(r) * sz);
                out.chi[dst] = chi[src];
            }
    return out;
}

Microstructure Microstructure::refined(int factor) const {
    validate();
    if (factor < 1) throw ValidationError("refined: factor must be >= 1");
    Microstructure out;
    out.dim = dim;
    out.resolution = resolution * factor;
    const int rf = out.resolution;
    out.chi.assign((dim == 2) ? static_cast<std::size_t>(rf) * rf
                              : static_cast<std::size_t>(rf) * rf * rf,
                   0);
    const int rz = (dim == 3) ? rf : 1;
    for (int z = 0; z < rz; ++z)
        for (int y = 0; y < rf; ++y)
            for (int x = 0; x < rf; ++x) {
                const std::size_t src =
                    static_cast<std::size_t>(x / factor) +
                    static_cast<std::size_t>(resolution) *
                        (static_cast<std::size_t>(y / factor) +
                         static_cast<std::size_t>(resolution) * static_cast<std::size_t>(z / factor));
                out.chi[static_cast<std::size_t>(x) +
                        static_cast<std::size_t>(rf) * (static_cast<std::size_t>(y) + static_cast<std::size_t>(rf) * z)] = chi[src];
            }
    return out;
}

Microstructure Microstructure::stripe(int dim, int resolution, double theta, int axis) {
    if (axis < 0 || axis >= dim) throw ValidationError("stripe: axis out of range");
    if (theta < 0.0 || theta > 1.0) throw ValidationError("stripe: theta outside [0,1]");
    Microstructure m;
    m.dim = dim;
    m.resolution = resolution;
    m.chi.assign((dim == 2) ? static_cast<std::size_t>(resolution) * resolution
                            : static_cast<std::size_t>(resolution) * resolution * resolution,
                 0);
    m.validate();
    const int width = static_cast<int>(std::lround(theta * resolution));
    const int r = resolution;
    const int rz = (dim == 3) ? r : 1;
    for (int z = 0; z < rz; ++z)
        for (int y = 0; y < r; ++y)
            for (int x = 0; x < r; ++x) {
                const int coords[3] = {x, y, z};
                if (coords[axis] < width)
                    m.chi[static_cast<std::size_t>(x) + static_cast<std::size_t>(r) * (static_cast<std::size_t>(y) + static_cast<std::size_t>(r) * z)] = 1;
            }
    return m;
}

Microstructure Microstructure::checkerboard(int dim, int resolution, int tiles_per_side) {
    if (tiles_per_side < 2 || resolution % tiles_per_side != 0)
        throw ValidationError("checkerboard: tiles_per_side must divide resolution");
    Microstructure m;
    m.dim = dim;
    m.resolution = resolution;
    m.chi.assign((dim == 2) ? static_cast<std::size_t>(resolution) * resolution
                            : static_cast<std::size_t>(resolution) * resolution * resolution,
                 0);
    m.validate();
    const int r = resolution;
    const int tile = r / tiles_per_side;
    const int rz = (dim == 3) ? r : 1;
    for (int z = 0; z < rz; ++z)
        for (int y = 0; y < r; ++y)
            for (int x = 0; x < r; ++x) {
                const int parity = (x / tile + y / tile + z / tile) % 2;
                if (parity == 1)
                    m.chi[static_cast<std::size_t>(x) + static_cast<std::size_t>(r) * (static_cast<std::size_t>(y) + static_cast<std::size_t>(r) * z)] = 1;
            }
    return m;
}

Microstructure Microstructure::disk(int dim, int resolution, double radius_fraction) {
    if (!(radius_fraction > 0.0) || radius_fraction > 0.5)
        throw ValidationError("disk: radius_fraction must lie in (0, 0.5]");
    Microstructure m;
    m.dim = dim;
    m.resolution = resolution;
    m.chi.assign((dim == 2) ? static_cast<std::size_t>(resolution) * resolution
                            : static_cast<std::size_t>(resolution) * resolution * resolution,
                 0);
    m.validate();
    const int r = resolution;
    const double rad2 = radius_fraction * radius_fraction;
    const int rz = (dim == 3) ? r : 1;
    for (int z = 0; z < rz; ++z)
        for (int y = 0; y < r; ++y)
            for (int x = 0; x < r; ++x) {
                const double cx = (x + 0.5) / r - 0.5;
                const double cy = (y + 0.5) / r - 0.5;
                const double cz = (dim == 3) ? (z + 0.5) / r - 0.5 : 0.0;
                if (cx * cx + cy * cy + cz * cz < rad2)
                    m.chi[static_cast<std::size_t>(x) + static_cast<std::size_t>(r) * (static_cast<std::size_t>(y) + static_cast<std::size_t>(r) * z)] = 1;
            }
    return m;
}

Microstructure Microstructure::random_cells(int dim, int resolution, double theta,
                                            std::uint64_t seed) {
    if (theta < 0.0 || theta > 1.0) throw ValidationError("random: theta outside [0,1]");
    Microstructure m;
    m.dim = dim;
    m.resolution = resolution;
    m.chi.assign((dim == 2) ? static_cast<std::size_t>(resolution) * resolution
                            : static_cast<std::size_t>(resolution) * resolution * resolution,
                 0);
    m.validate();
    const std::size_t total = m.cell_count();
    const std::size_t want = static_cast<std::size_t>(std::lround(theta * static_cast<double>(total)));
    // Partial Fisher-Yates over cell indices: exactly `want` inclusion cells.
    std::vector<std::uint32_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0u);
    Xoshiro256 rng(seed);
    for (std::size_t k = 0; k < want; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng.uniform_int(total - k));
        std::swap(idx[k], idx[j]);
        m.chi[idx[k]] = 1;
    }
    return m;
}

namespace {

// Parses "name(arg1,arg2,...)" into name + numeric args.
bool parse_call(const std::string& s, std::string& name, std::vector<double>& args) {
    const auto open = s.find('(');
    if (open == std::string::npos) {
        name = s;
        return true;
    }
    if (s.back() != ')') return false;
    name = s.substr(0, open);
    std::string body = s.substr(open + 1, s.size() - open - 2);
    std::size_t pos = 0;
    while (pos < body.size()) {
        auto comma = body.find(',', pos);
        if (comma == std::string::npos) comma = body.size();
        try {
            args.push_back(std::stod(body.substr(pos, comma - pos)));
        } catch (...) {
            return false;
        }
        pos = comma + 1;
    }
    return true;
}

}  // namespace

Microstructure Microstructure::from_name(const std::string& generator, int resolution,
                                         const std::uint64_t* seed) {
    std::string name;
    std::vector<double> args;
    if (!parse_call(generator, name, args))
        throw ValidationError("unrecognized microstructure generator: " + generator);
    if (name == "stripe") {
        if (args.size() != 2) throw ValidationError("stripe expects (theta, axis)");
        return stripe(2, resolution, args[0], static_cast<int>(args[1]));
    }
    if (name == "stripe3d") {
        if (args.size() != 2) throw ValidationError("stripe3d expects (theta, axis)");
        return stripe(3, resolution, args[0], static_cast<int>(args[1]));
    }
    if (name == "checkerboard") {
        const int tiles = args.empty() ? 2 : static_cast<int>(args[0]);
        return checkerboard(2, resolution, tiles);
    }
    if (name == "disk") {
        if (args.size() != 1) throw ValidationError("disk expects (radius_fraction)");
        return disk(2, resolution, args[0]);
    }
    if (name == "random") {
        if (args.empty() || args.size() > 2)
            throw ValidationError("random expects (theta) or (theta, seed)");
        std::uint64_t s;
        if (args.size() == 2) {
            s = static_cast<std::uint64_t>(args[1]);
        } else if (seed) {
            s = *seed;
        } else {
            throw ValidationError("random microstructure requires a seed (--seed)");
        }
        return random_cells(2, resolution, args[0], s);
    }
    throw ValidationError("unknown microstructure generator: " + name);
}

Microstructure Microstructure::from_json(std::istream& is) {
    nlohmann::json j;
    is >> j;
    Microstructure m;
    try {
        m.dim = j.at("dim").get<int>();
        m.resolution = j.at("resolution").get<int>();
        const std::string encoding = j.at("encoding").get<std::string>();
        if (encoding == "dense") {
            const std::string data = j.at("data").get<std::string>();
            m.chi.reserve(data.size());
            for (char c : data) {
                if (c != '0' && c != '1')
                    throw ValidationError("microstructure dense data must be 0/1");
                m.chi.push_back(c == '1' ? 1 : 0);
            }
        } else if (encoding == "rle") {
            for (const auto& pair : j.at("data")) {
                const int bit = pair.at(0).get<int>();
                const std::int64_t count = pair.at(1).get<std::int64_t>();
                if ((bit != 0 && bit != 1) || count < 0)
                    throw ValidationError("microstructure rle data must be [bit,count] pairs");
                m.chi.insert(m.chi.end(), static_cast<std::size_t>(count),
                             static_cast<std::uint8_t>(bit));
            }
        } else {
            throw ValidationError("microstructure encoding must be dense or rle");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("microstructure JSON: ") + e.what());
    }
    m.validate();
    return m;
}

void Microstructure::to_json(std::ostream& os, const std::string& encoding) const {
    validate();
    nlohmann::json j;
    j["dim"] = dim;
    j["resolution"] = resolution;
    j["encoding"] = encoding;
    if (encoding == "dense") {
        std::string data(chi.size(), '0');
        for (std::size_t i = 0; i < chi.size(); ++i)
            if (chi[i]) data[i] = '1';
        j["data"] = data;
    } else if (encoding == "rle") {
        nlohmann::json runs = nlohmann::json::array();
        std::size_t i = 0;
        while (i < chi.size()) {
            std::size_t jend = i;
            while (jend < chi.size() && chi[jend] == chi[i]) ++jend;
            runs.push_back({static_cast<int>(chi[i]), jend - i});
            i = jend;
        }
        j["data"] = std::move(runs);
    } else {
        throw ValidationError("microstructure encoding must be dense or rle");
    }
    os << j.dump(2) << "\n";
}

}  // namespace polarize
