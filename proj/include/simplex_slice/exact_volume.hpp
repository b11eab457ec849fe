#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simplex_slice/geometry.hpp"
#include "simplex_slice/rational.hpp"

namespace sslice {

/// vol(unit simplex ∩ H) / vol(unit simplex), in [0, 1].
struct CutFraction {
    double value = 0.0;
};

/// Fraction of a simplex on which a linear form is <= z, given the form's
/// values at the d+1 simplex vertices. O(d^2), a chain of convex
/// combinations, so it is numerically stable.
double varsi_fraction_from_vertex_values(std::span<const double> vertex_values, double z);

/// Cut of the unit simplex (vertices 0, e_1, ..., e_d) by `halfspace`.
CutFraction varsi_fraction(const Halfspace& halfspace, int d);

/// Fraction of the unit simplex with z_lo < normal . x <= z_hi.
double band_fraction(const Vector& normal, double z_lo, double z_hi);

struct LevelSearch {
    double level = 0.0;
    double achieved = 0.0;
    int iterations = 0;
    /// The fraction did not reach target +- tol before the bracket collapsed
    /// to adjacent doubles; `level` is the best point found.
    bool plateau = false;
};

/// Level z with varsi_fraction(normal . x <= z) = target +- tol, by bisection
/// between the smallest and largest vertex value of the form.
LevelSearch bisect_level_for_fraction(const Vector& normal, double target, double tol = 1e-12);

/// Same, for a form given by its values at the simplex vertices.
LevelSearch bisect_level_for_fraction(std::span<const double> vertex_values, double target, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Lawrence sign decomposition on unit simplex ∩ up to two parallel families.

/// lower <= normal . x <= upper; either bound may be absent.
template <class T>
struct BandFamilyT {
    std::vector<T> normal;
    std::optional<T> lower;
    std::optional<T> upper;
};

template <class T>
struct BandPolytopeT {
    int dimension = 0;
    std::vector<BandFamilyT<T>> families;
};

using BandFamily = BandFamilyT<double>;
using BandPolytope = BandPolytopeT<double>;
using ExactBandFamily = BandFamilyT<Rational>;
using ExactBandPolytope = BandPolytopeT<Rational>;

ExactBandPolytope to_exact(const BandPolytope& polytope);
BandPolytope to_float(const ExactBandPolytope& polytope);

struct ExactHalfspace {
    std::vector<Rational> normal;
    Rational offset;
};

/// Groups unit-frame halfspaces into parallel families, keeping the tightest
/// bound on each side. Throws UsageError when more than two directions occur.
BandPolytope group_into_families(int d, const std::vector<Halfspace>& halfspaces);
ExactBandPolytope group_into_families(int d, const std::vector<ExactHalfspace>& halfspaces);

enum class ConstraintKind {
    /// x_index >= 0 (index in 1..d)
    coordinate,
    /// sum x <= 1
    supporting,
    family_lower,
    family_upper,
};

struct ConstraintId {
    ConstraintKind kind;
    int index = 0;  // axis for coordinate planes, family otherwise

    friend bool operator==(const ConstraintId&, const ConstraintId&) = default;
};

std::string describe(const ConstraintId& id);

struct LawrenceVertex {
    Vector coords;
    std::vector<ConstraintId> active;
    /// A(v) gamma = c, one entry per active constraint (same order).
    Vector gamma;
    double det_abs = 0.0;
};

/// Vertices of unit simplex ∩ families: surviving simplex vertices, edge
/// crossings of a single hyperplane, and 2-face points on one hyperplane of
/// each family. Throws DegenerateInput when a hyperplane passes within
/// 1e-10 of a vertex of the arrangement.
std::vector<LawrenceVertex> enumerate_vertices(const BandPolytope& polytope);

/// As above with gamma filled for objective `c`.
std::vector<LawrenceVertex> enumerate_vertices(const BandPolytope& polytope, const Vector& c);

enum class Backend { floating, rational };

struct LawrenceOptions {
    Backend backend = Backend::floating;
    /// Objective direction; drawn at random (nonzero integers in
    /// [-2^16, 2^16]) when absent.
    std::optional<std::vector<long>> c;
    std::uint64_t seed = 1;
    int max_retries = 20;
};

struct ExactVolume {
    double value = 0.0;
    std::optional<Rational> exact;
    Backend backend = Backend::floating;
    std::size_t vertex_count = 0;
    /// Objective draws needed (1 when the first c worked).
    int attempts = 0;
    std::vector<long> c;
};

/// vol(P) = 1/d! sum_v (c.v)^d / (|det A(v)| prod gamma(v)_i). The float
/// backend refuses d > 40.
ExactVolume lawrence_volume(const BandPolytope& polytope, const LawrenceOptions& options = {});
ExactVolume lawrence_volume(const ExactBandPolytope& polytope, const LawrenceOptions& options = {});

/// 1/d! as a double.
double unit_simplex_volume(int d);

}  // namespace sslice
