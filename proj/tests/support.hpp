#pragma once

#include "pneutop/config.hpp"
#include "pneutop/mesh_domain.hpp"
#include "pneutop/types.hpp"

#include <random>

namespace pneutop::testing {

// Square n x n half-domain: pressure enters through the lower part of the
// symmetry edge, drains to the left and top edges, bottom clamped, output at
// the top-left corner pulled towards -x.
inline DomainConfig square_domain(int n)
{
    DomainConfig c;
    c.nelx = n;
    c.nely = n;
    c.inlet = {{Side::right, 0, n / 2}};
    c.ambient = {{Side::left, 1, n}, {Side::top, 0, n - 1}};
    c.fixed = {{Side::bottom, 0, n}};
    c.symmetry = Side::right;
    c.output_ix = 0;
    c.output_iy = n;
    c.output_axis = Axis::x;
    c.output_sign = 1;
    return c;
}

// Two elements wide, n tall: inlet along the bottom edge, ambient along the
// top. Side walls carry no flux, so the pressure problem is one-dimensional.
inline DomainConfig column_domain(int n)
{
    DomainConfig c;
    c.nelx = 2;
    c.nely = n;
    c.inlet = {{Side::bottom, 0, 2}};
    c.ambient = {{Side::top, 0, 2}};
    c.fixed = {{Side::bottom, 0, 2}};
    c.symmetry = Side::right;
    c.output_ix = 0;
    c.output_iy = n;
    return c;
}

inline OptConfig square_config(int n, double r_min = 1.5)
{
    OptConfig c;
    c.domain = square_domain(n);
    c.optimization.r_min = r_min;
    return c;
}

// Uniform samples in [lo, hi], reproducible across platforms (the
// distribution classes are not).
inline Vector random_field(Eigen::Index size, std::uint64_t seed, double lo = 0.0, double hi = 1.0)
{
    std::mt19937_64 gen(seed);
    Vector v(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        v[i] = lo + (hi - lo) * u;
    }
    return v;
}

} // namespace pneutop::testing
