#pragma once

// Integer lattice Z^d, checkerboard D_d and the E8 lattice: covering radii,
// nearest-point decoding and enumeration of points in a spherical shell.

#include <vector>

namespace tailcert {

enum class LatticeKind { Integer, Checkerboard, E8 };

/// Lattice with the smallest covering density among the three for `dim`.
LatticeKind preferred_lattice(int dim);

/// Covering radius at the standard scale (Z^d unit spacing, D_d and E8 with
/// minimal vectors of norm sqrt(2)).
double covering_radius(LatticeKind kind, int dim);

/// Closest lattice point to x.
std::vector<double> nearest_lattice_point(LatticeKind kind, const std::vector<double>& x);

/// Row-major list of lattice points z with lo <= |z| <= hi.
std::vector<double> lattice_shell(LatticeKind kind, int dim, double lo, double hi);

}  // namespace tailcert
