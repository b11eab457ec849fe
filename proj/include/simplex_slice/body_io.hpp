#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "simplex_slice/exact_volume.hpp"
#include "simplex_slice/geometry.hpp"
#include "simplex_slice/rational.hpp"

namespace sslice {

/// A JSON number kept as written, so decimal inputs stay exact.
struct Number {
    std::string text;
    double value = 0.0;

    static Number from_double(double v);
    static Number from_text(std::string text);
    Rational exact() const { return rational_from_decimal(text); }

    friend bool operator==(const Number& a, const Number& b) { return a.text == b.text; }
};

struct HalfspaceSpec {
    std::vector<Number> normal;
    Number offset;

    friend bool operator==(const HalfspaceSpec&, const HalfspaceSpec&) = default;
};

enum class EllipsoidFrame {
    /// d x d matrix over the body's Cartesian coordinates.
    cartesian,
    /// (d+1) x (d+1) form lambda^T C lambda over barycentric weights.
    barycentric,
};

struct EllipsoidSpec {
    std::vector<std::vector<Number>> matrix;
    /// Empty means the origin.
    std::vector<Number> center;
    Number level;
    Side side = Side::inside;
    EllipsoidFrame frame = EllipsoidFrame::cartesian;

    friend bool operator==(const EllipsoidSpec&, const EllipsoidSpec&) = default;
};

/// Parsed body file:
///
///   {
///     "simplex": "unit:3"  or  [[v0...], [v1...], ..., [vd...]],
///     "halfspaces": [{"normal": [...], "offset": z}, ...],
///     "ellipsoids": [{"matrix": [[...]], "level": c, "side": "inside" | "outside",
///                     "center": [...], "frame": "cartesian" | "barycentric"}, ...]
///   }
///
/// `halfspaces` and `ellipsoids` may be omitted; `center` and `frame` are
/// optional (origin, cartesian). Halfspaces read normal . x <= offset.
struct BodySpec {
    int dimension = 0;
    bool unit = true;
    /// d+1 rows of d coordinates when not unit.
    std::vector<std::vector<Number>> vertices;
    std::vector<HalfspaceSpec> halfspaces;
    std::vector<EllipsoidSpec> ellipsoids;

    friend bool operator==(const BodySpec&, const BodySpec&) = default;
};

/// Throws DataError naming the offending field.
BodySpec parse_body_json(std::string_view text);
/// Throws DataError when the file cannot be read.
BodySpec read_body_json(const std::string& path);
/// Numbers are written back with their original text.
std::string write_body_json(const BodySpec& spec);

Simplex body_simplex(const BodySpec& spec);

/// The body in the unit-simplex frame.
StandardizedBody to_standardized(const BodySpec& spec);

struct ExactStandardized {
    ExactBandPolytope polytope;
    /// |det M| of the simplex frame.
    Rational scale;
};

/// Halfspaces carried exactly into the unit frame and grouped into families.
/// Throws UsageError when the body has ellipsoids or more than two families.
ExactStandardized to_exact_band_polytope(const BodySpec& spec);

}  // namespace sslice
